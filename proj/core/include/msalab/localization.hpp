#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msalab/random_operator.hpp"

namespace msalab {

struct Eigenpairs {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // orthonormal columns
};

Eigenpairs eigenpairs(const OperatorSample& sample);

/// Which envelope family the decay fit regresses against.
enum class DecayFamily {
  LogPower,   // log(-log|psi|) against log(log(1 + r))
  Stretched,  // log(-log|psi|) against log(r)
};

std::string to_string(DecayFamily f);

struct DecayFitOptions {
  DecayFamily family = DecayFamily::LogPower;
  double floor = 1e-13;
  std::int64_t min_distance = 2;
  std::size_t min_points = 8;
  std::optional<double> rho_hint;
};

struct DecayPoint {
  std::int64_t r = 0;
  double x = 0.0;  // regressor
  double y = 0.0;  // log(-log|psi|)
};

struct DecayFit {
  Site center;
  double c = 0.0;
  double rho_fit = 0.0;
  double r2 = 0.0;       // clamped to [0, 1]
  double floor = 0.0;
  std::size_t n_points = 0;
  std::optional<double> rho_hint;
  double c_hint = 0.0;   // coefficient with the exponent fixed to the hint
  double r2_hint = 0.0;  // raw, may be negative
  bool envelope_mismatch = false;
};

/// Amplitudes are normalised to max 1 before fitting; the centre is the first
/// argmax in box order. Returns nullopt with fewer than min_points usable sites.
std::optional<DecayFit> decay_fit(const LatticeBox& box, std::span<const double> amplitude,
                                  const DecayFitOptions& options = {});

/// The (regressor, response) pairs the fit uses, for plotting.
std::vector<DecayPoint> decay_profile(const LatticeBox& box, std::span<const double> amplitude,
                                      const DecayFitOptions& options = {});

std::vector<double> amplitudes(const Eigen::VectorXcd& psi);

struct PoissonResidual {
  double residual = 0.0;   // max_{x in B} |psi(x) - RHS(x)|
  double tail_term = 0.0;  // eps * max row sum |G_B| * kernel tail beyond L - l * max |psi|
  double g_row_sum = 0.0;
  double max_psi = 0.0;
  double resonance_distance = 0.0;  // dist(E, spectrum(H_B))
};

/// psi(x) against -eps sum_{x' in B, x'' in outer \ B} G_B(x, x') phi(x' - x'') psi(x'').
PoissonResidual poisson_residual(const OperatorSample& outer, const Eigen::VectorXcd& psi, double E,
                                 const LatticeBox& inner);

/// (sum |psi|^2)^2 / sum |psi|^4.
double participation_ratio(const Eigen::VectorXcd& psi);

struct GeneralizedEigenCheck {
  Eigen::VectorXcd psi;
  double E = 0.0;
  bool normalized = false;        // psi(origin) = 1 enforced
  double polynomial_witness = 0.0;  // max |psi(x)| / (1 + |x|)^d
  Site witness_site;
  double equation_residual = 0.0;   // max_x |(H psi - E psi)(x)| on the box
};

GeneralizedEigenCheck generalized_eigen_check(const OperatorSample& sample, Eigen::VectorXcd psi, double E,
                                              bool normalize = true);

struct YeungOonoConfig {
  int d = 1;
  std::int64_t side = 1025;  // sites per axis, odd
  HoppingKernel kernel = HoppingKernel::log_power(1.0, 2.0);
  DisorderSpec disorder = DisorderSpec::uniform(1.0);
  double epsilon = 0.05;
  std::vector<std::uint64_t> seeds;
  double e_lo = -std::numeric_limits<double>::infinity();
  double e_hi = std::numeric_limits<double>::infinity();
  double edge_fraction = 0.25;
  DecayFitOptions fit;
  bool keep_profiles = false;
  // comparison targets
  double gamma = 1.0;
  double rho = 2.0;
  double kappa_inf = 0.1;
  double alpha = 1.3;
  unsigned workers = 1;

  void validate() const;
};

struct EnsembleRow {
  std::uint64_t seed = 0;
  double eigenvalue = 0.0;
  Site center;
  bool fitted = false;
  DecayFit fit;
  double pr = 0.0;
  std::vector<DecayPoint> profile;  // only with keep_profiles
};

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

/// Type-7 quantiles; nullopt on empty input.
std::optional<Quartiles> quartiles(std::vector<double> values);

struct EnsembleSummary {
  std::size_t selected = 0;
  std::size_t fitted = 0;
  std::size_t no_fit = 0;
  std::optional<Quartiles> c;
  std::optional<Quartiles> rho_fit;
  std::optional<Quartiles> r2;
  std::optional<Quartiles> pr;
  double gamma = 0.0;
  double rho = 0.0;
  double rate_coefficient = 0.0;  // kappa_inf / (2 alpha^rho)
};

struct EnsembleResult {
  std::vector<EnsembleRow> rows;  // seed order, then eigenvalue order
  EnsembleSummary summary;
};

EnsembleResult yeung_oono_experiment(const YeungOonoConfig& config);

EnsembleSummary summarize(const std::vector<EnsembleRow>& rows, const YeungOonoConfig& config);

}  // namespace msalab
