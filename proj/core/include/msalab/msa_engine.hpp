#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msalab/greens.hpp"
#include "msalab/monte_carlo.hpp"
#include "msalab/random_operator.hpp"
#include "msalab/weight_kernel.hpp"

namespace msalab {

/// The random operator eps Gamma_phi + V on Z^d.
struct ModelParams {
  int d = 1;
  HoppingKernel kernel = HoppingKernel::log_power(1.0, 2.0);
  DisorderSpec disorder = DisorderSpec::uniform(1.0);
  double epsilon = 0.01;

  void validate() const;
};

enum class KappaConstant {
  TwoPowRho,         // 30 + 2^rho
  AlphaPowRhoPrime,  // 30 + alpha^{rho'}
};

struct MSAParams {
  double alpha = 1.3;
  double p = 6.0;
  int d = 1;
  WeightParams weights;
  double kappa0 = 0.2;
  double kappa_inf = 0.1;
  KappaConstant constant = KappaConstant::TwoPowRho;

  /// p > 5d, 5/4 < alpha < 2p/(p+2d), 0 < kappa_inf < kappa0 <= gamma/5.
  void validate() const;
  double alpha_upper() const { return 2.0 * p / (p + 2.0 * d); }
  double loss_constant() const;
};

struct NextScale {
  std::optional<std::int64_t> value;  // floor(L^alpha), empty on overflow
  double real_value = 0.0;
  bool degenerate = false;            // floor(L^alpha) <= L
  bool overflow = false;              // beyond 2^63, use the log-domain ladder
};

NextScale next_scale(std::int64_t L, double alpha);

struct KappaLoss {
  double geometric = 0.0;  // 10 gamma / L^{4 alpha/5 - 1}
  double log_term = 0.0;   // 10 gamma / log^{rho-1} L
  double resonance = 0.0;  // K / log^{rho-rho'} L
  double total = 0.0;
};

KappaLoss kappa_loss(double logL, const MSAParams& params);
double kappa_step(double kappa, double logL, const MSAParams& params);

struct ScaleLadder {
  std::vector<double> logL;   // logL_0 .. logL_horizon
  std::vector<double> kappa;  // kappa_0 .. kappa_horizon
  std::vector<double> cumulative_loss;
  bool valid = false;         // min kappa_s > kappa_inf
  int horizon = 0;
  double series_bound = 0.0;  // closed-form bound on the total loss from logL_0
};

/// Iterates kappa_{s+1} = kappa_s - loss(logL_s) along logL_{s+1} = alpha logL_s.
ScaleLadder ladder(const MSAParams& params, double logL0, int horizon);

/// Upper bound on sum_{s>=0} loss(alpha^s logL0): the two power terms are
/// geometric series with ratios alpha^{-(rho-1)} and alpha^{-(rho-rho')}, the
/// first term is dominated via alpha^s >= 1 + s (alpha - 1).
double series_loss_bound(const MSAParams& params, double logL0);

struct MinimalScale {
  double logL0 = 0.0;
  double series_at = 0.0;  // series bound at logL0, < kappa0 - kappa_inf
  int iterations = 0;
};

/// Smallest logL0 (to 1e-12 relative) with series_loss_bound < kappa0 - kappa_inf.
MinimalScale minimal_admissible_logL0(const MSAParams& params);

struct InitialScaleConstants {
  double zeta = 0.0;
  double log_zeta = 0.0;
  double eta = 0.0;
  double epsilon0 = 0.0;
  std::int64_t L0 = 0;
  double gamma_norm = 0.0;
};

InitialScaleConstants initial_constants(double beta, double lambda, double p, int d, std::int64_t L0,
                                        double gamma_norm);

/// Trials [first_trial, first_trial + trials) keyed by seed. Tallies over
/// disjoint ranges merge into the pooled tally.
struct TrialPlan {
  std::uint64_t seed = 0;
  std::uint64_t first_trial = 0;
  std::uint64_t trials = 0;
  unsigned workers = 1;
};

/// beta^{-1} 2^lambda (2L+1)^{d(1+lambda)} w^lambda
double wegner_bound(const DisorderSpec& spec, int d, std::int64_t L, double window);

struct WegnerReport {
  std::int64_t L = 0;
  double E = 0.0;
  double window = 0.0;
  double bound = 0.0;
  Tally tally;
  bool below_bound = false;  // empirical frequency <= bound
  bool ci_within = false;    // 95% upper edge <= bound + 0.02
};

/// Frequency of dist(E, spectrum(H_{B_L})) <= window. Refuses (NumericalRefusal)
/// for non-Hoelder disorder or window (2L+1)^d > beta0.
WegnerReport wegner_check(std::int64_t L, double E, double window, const ModelParams& model, const TrialPlan& plan);

/// 2 beta^{-1} 4^lambda (2L+1)^{d(4+lambda)} e^{-lambda log^{rho'} l}
double pair_resonance_bound(const DisorderSpec& spec, int d, std::int64_t L, std::int64_t l, double rho_prime);

struct PairResonanceReport {
  std::int64_t L = 0;
  std::int64_t l = 0;
  double threshold = 0.0;  // 2 e^{-log^{rho'} L}
  double bound = 0.0;
  bool vacuous = false;    // bound >= 1
  bool geometry_consistent = false;  // 26 l <= L
  bool same_seed = false;
  Tally tally;
};

/// Frequency of dist(spectrum(H_1), spectrum(H_2)) <= threshold for two
/// disjoint boxes B_L(0) and B_L((2L+1) e_1). same_seed reuses the first box
/// for both operators.
PairResonanceReport pair_resonance_check(std::int64_t L, std::int64_t l, const ModelParams& model, double rho_prime,
                                         const TrialPlan& plan, bool same_seed = false);

std::vector<double> energy_grid(double lo, double hi, int points);

struct BadPairReport {
  std::int64_t L = 0;
  double kappa = 0.0;
  std::vector<double> grid;
  Tally pair;    // some grid energy makes both cubes bad
  Tally single;  // some grid energy makes the first cube bad
};

/// Two independent cubes B_L(0), B_L((2L+1) e_1) per trial; the event "exists
/// E in I" is approximated by the grid.
BadPairReport estimate_bad_pair_prob(std::int64_t L, double kappa, const std::vector<double>& grid,
                                     const ModelParams& model, const WeightParams& weights, const TrialPlan& plan);

enum class CouplingVerdict { Pass, Counterexample, NotApplicable };
std::string to_string(CouplingVerdict v);

struct CouplingReport {
  CouplingVerdict verdict = CouplingVerdict::NotApplicable;
  std::int64_t L = 0;
  std::int64_t l = 0;
  double E = 0.0;
  double kappa = 0.0;
  double kappa_prime = 0.0;
  bool kappa_prime_vacuous = false;  // kappa' <= 0
  bool hyp1 = false;                 // B_L(x) is E-NR
  bool hyp2 = false;                 // every B_{jl}(z) inside is E-NR, j in {2, 8, 26}
  bool hyp2_vacuous = false;         // no such cube fits
  bool hyp3 = false;                 // at most 3 disjoint bad l-cubes
  double hyp1_margin = 0.0;          // log(dist / threshold)
  double hyp2_margin = 0.0;          // min over checked cubes, +inf if none
  std::size_t hyp2_checked = 0;
  std::size_t bad_disjoint = 0;
  std::vector<Site> bad_centers;     // greedy family
  std::string tightest;              // hypothesis with the smallest margin
  std::optional<CubeReport> outer;   // classification at kappa', when applicable
  std::uint64_t trial = 0;
};

/// Checks the coupling implication on one sample of B_L(x), L = floor(l^alpha).
CouplingReport coupling_check(const OperatorSample& outer, double E, std::int64_t l, double kappa,
                              const MSAParams& params);

struct CouplingSuite {
  std::vector<CouplingReport> reports;  // by trial
  std::uint64_t pass = 0;
  std::uint64_t counterexample = 0;
  std::uint64_t not_applicable = 0;
};

CouplingSuite coupling_suite(std::int64_t l, double E, double kappa, const ModelParams& model,
                             const MSAParams& params, const TrialPlan& plan);

}  // namespace msalab
