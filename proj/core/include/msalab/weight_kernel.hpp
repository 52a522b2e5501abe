#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "msalab/lattice_geometry.hpp"

namespace msalab {

using Complex = std::complex<double>;

/// Decay parameters of the weight log^rho(||x|| + 1).
struct WeightParams {
  double gamma = 1.0;      // hopping decay rate
  double rho = 2.0;        // envelope exponent
  double rho_prime = 1.5;  // resonance exponent, 1 < rho' < rho

  /// Throws ValidationError naming the violated constraint.
  void validate() const;
};

/// log^rho(r + 1) for a sup-norm length r >= 0.
double log_weight(double r, double rho);

/// log^rho(||x||_inf + 1).
double log_weight(const Site& x, double rho);

/// Certified maximum of F(x_1..x_n) = log^rho(1 + sum x_i) - sum log^rho(1 + x_i).
struct QuasiMetricCertificate {
  double rho = 0.0;
  std::int64_t n = 0;
  double x0 = 0.0;    // common coordinate of the maximiser
  double sup_f = 0.0;
  double c_rho = 0.0; // sup_f / log^rho n (0 for n = 1)
};

/// F evaluated at an arbitrary tuple of non-negative reals.
double quasi_metric_excess(std::span<const double> xs, double rho);

/// F on the diagonal x_1 = ... = x_n = x.
double quasi_metric_diagonal(double x, std::int64_t n, double rho);

/// Solves h(1 + n x) = h(1 + x), h(s) = log^{rho-1}(s) / s, by bisection on
/// ((e^{rho-1} - 1)/n, e^{rho-1} - 1) to 1e-12. Throws NumericalRefusal if the
/// bracket does not straddle a sign change.
QuasiMetricCertificate quasi_metric_constant(double rho, std::int64_t n);

struct QuasiMetricViolation {
  std::size_t sample = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Checks log^rho(1 + sum x_i) <= sum log^rho(1 + x_i) + C log^rho n on each
/// sample, C taken from the certificate. A relative slack of 1e-12 absorbs
/// rounding in the sums.
std::vector<QuasiMetricViolation> verify_quasi_metric(const QuasiMetricCertificate& cert,
                                                      const std::vector<std::vector<double>>& samples);

std::vector<QuasiMetricViolation> verify_quasi_metric(double rho, std::int64_t n,
                                                      const std::vector<std::vector<double>>& samples);

/// sup over n of C(rho, n), evaluated on a geometric set of n up to n_max.
struct QuasiMetricEnvelope {
  double rho = 0.0;
  double c_sup = 0.0;
  std::int64_t n_at_sup = 0;
  double c_at_n_max = 0.0;  // large-n estimate of the limit
  std::int64_t n_max = 0;
};

QuasiMetricEnvelope quasi_metric_envelope(double rho, std::int64_t n_max = 1'000'000);

/// Translation-invariant hopping amplitude phi(x). Values of magnitude below
/// 1e-300 are flushed to zero.
class HoppingKernel {
 public:
  enum class Kind { LogPower, Stretched, Table };

  /// scale * exp(-gamma log^rho(||x|| + 1))
  static HoppingKernel log_power(double gamma, double rho, double scale = 1.0);
  /// scale * exp(-||x||^s), 0 < s < 1
  static HoppingKernel stretched(double s, double scale = 1.0);
  /// Explicit finite table. Missing mirror entries are filled with the
  /// conjugate; inconsistent mirrors or a non-zero value at 0 are rejected.
  static HoppingKernel table(int dim, const std::vector<std::pair<Site, Complex>>& entries);

  /// Multiplies every amplitude by exp(i theta . x).
  HoppingKernel with_phase(std::vector<double> wavevector) const;
  HoppingKernel scaled(double factor) const;

  Complex operator()(const Site& x) const;

  /// Upper bound on |phi(x)| for ||x|| = r (analytic kinds only).
  double envelope(double r) const;

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double rho() const { return rho_; }
  double s() const { return s_; }
  double scale() const { return scale_; }
  bool has_phase() const { return !phase_.empty(); }
  /// Largest ||x|| present in a table kernel.
  std::int64_t table_radius() const { return table_radius_; }
  const std::map<Site, Complex>& table_entries() const { return table_; }
  /// True when every amplitude is real.
  bool real_valued() const;

 private:
  HoppingKernel() = default;

  Kind kind_ = Kind::LogPower;
  double gamma_ = 1.0;
  double rho_ = 2.0;
  double s_ = 0.5;
  double scale_ = 1.0;
  std::vector<double> phase_;
  std::map<Site, Complex> table_;
  std::int64_t table_radius_ = 0;
};

inline Complex kernel_eval(const HoppingKernel& kernel, const Site& x) { return kernel(x); }

struct NormBound {
  double total = 0.0;          // truncated sum + tail bound
  double truncated_sum = 0.0;  // sum of |phi(x)| over ||x|| <= R
  double tail_bound = 0.0;     // analytic bound on sum over ||x|| > R
  bool exact = false;          // table kernels: finite exact sum
};

/// Upper bound on ||Gamma_phi||_2 via the row sum sum_x |phi(x)|. Non-increasing
/// in R.
NormBound gamma_norm_bound(const HoppingKernel& kernel, int d, std::int64_t R);

/// Upper bound on sum_{||x|| > R} |phi(x)| in dimension d.
double kernel_tail_bound(const HoppingKernel& kernel, int d, std::int64_t R);

}  // namespace msalab
