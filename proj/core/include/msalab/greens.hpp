#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "msalab/random_operator.hpp"
#include "msalab/weight_kernel.hpp"

namespace msalab {

/// Shifts closer than this to the spectrum are refused by every Green's
/// function routine.
inline constexpr double kRefusalDistance = 1e-12;

/// Ascending eigenvalues (real symmetric solver when the matrix is real).
std::vector<double> spectrum(const OperatorSample& sample);

/// min_k |lambda_k - E| over an ascending list.
double resonance_distance(std::span<const double> eigenvalues, double E);
double resonance_distance(const OperatorSample& sample, double E);

/// e^{-log^{rho'} L}.
double nr_threshold(std::int64_t L, double rho_prime);

struct NRStatus {
  double distance = 0.0;
  double threshold = 0.0;
  bool enr = false;
  bool degenerate = false;  // L = 1, threshold is 1
};

NRStatus nr_status(double distance, std::int64_t L, double rho_prime);
NRStatus is_E_NR(const OperatorSample& sample, double E, double rho_prime);

/// (H_B - E)^{-1} by LU of the shifted matrix. Throws NumericalRefusal when
/// dist(E, spectrum) < 1e-12.
Eigen::MatrixXcd greens(const OperatorSample& sample, double E);
Eigen::MatrixXcd greens(const OperatorSample& sample, double E, std::span<const double> eigenvalues);

/// Largest singular value.
double operator_norm(const Eigen::MatrixXcd& m);

struct Witness {
  Site source;
  Site site;
  double g_abs = 0.0;    // |G(source, site)|
  double allowed = 0.0;  // e^{-kappa log^rho(|site - source| + 1)}
  double log_ratio = 0.0;  // log(g_abs / allowed); positive means violation
};

struct CubeReport {
  LatticeBox box;
  double E = 0.0;
  double kappa = 0.0;
  double resonance_distance = 0.0;
  double threshold = 0.0;
  bool enr = false;
  bool degenerate = false;
  bool good = false;
  std::optional<Witness> worst_witness;  // largest ratio over the out-shell, present when enr
};

/// Spectrum of one cube computed once and reused across energies and kappas.
class CubeAnalyzer {
 public:
  explicit CubeAnalyzer(const OperatorSample& sample);

  const OperatorSample& sample() const { return *sample_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  NRStatus nr(double E, double rho_prime) const;

  /// (kappa, E)-goodness with the box centre as source; all_sources also
  /// checks every site of the box as a source against its own out-shell.
  CubeReport classify(double E, double kappa, const WeightParams& weights, bool all_sources = false) const;

 private:
  const OperatorSample* sample_;
  std::vector<double> eigenvalues_;
};

CubeReport classify_cube(const OperatorSample& sample, double E, double kappa, const WeightParams& weights,
                         bool all_sources = false);

struct ResolventResidual {
  double residual = 0.0;      // max_y |LHS - RHS|
  double scale = 0.0;         // ||G_l|| ||G_L|| eps rowsum
  double inner_norm = 0.0;
  double outer_norm = 0.0;
  double row_sum = 0.0;       // bound on sum_x |phi(x)|
  std::size_t checked = 0;    // number of y outside the inner box
};

/// Residual of G_L(x,y) = -eps sum_{m in B_l, n in B_L \ B_l} G_l(x,m) phi(m-n) G_L(n,y)
/// for x the inner centre and every y in B_L \ B_l.
ResolventResidual geometric_resolvent_residual(const OperatorSample& outer, const LatticeBox& inner, double E);

}  // namespace msalab
