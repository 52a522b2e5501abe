#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msalab/counter_rng.hpp"
#include "msalab/lattice_geometry.hpp"
#include "msalab/weight_kernel.hpp"

namespace msalab {

inline constexpr std::size_t kMaxDenseSites = 20000;

/// Single-site law of the potential.
struct DisorderSpec {
  enum class Kind { Uniform, Power, Bernoulli, QuantileTable };

  Kind kind = Kind::Uniform;
  double M = 1.0;        // support bound, supp(mu) in [-M, M]
  double lambda = 1.0;   // Hoelder exponent
  double beta = 1.0;     // mu([a,b]) <= |b-a|^lambda / beta
  double beta0 = 1.0;    // ... for 0 <= b - a <= beta0
  double atom_lo = -1.0; // Bernoulli atoms and P(V = atom_hi)
  double atom_hi = 1.0;
  double prob = 0.5;
  std::vector<double> quantiles;  // values at u = k / (n - 1), piecewise linear

  static DisorderSpec uniform(double M);
  /// V = U^{1/lambda} on [0, 1].
  static DisorderSpec power(double lambda);
  static DisorderSpec bernoulli(double lo, double hi, double prob_hi);
  static DisorderSpec quantile_table(std::vector<double> q);

  /// Throws ValidationError naming the violated constraint.
  void validate() const;
  bool hoelder_kind() const { return kind != Kind::Bernoulli; }

  double quantile(double u) const;
  /// mu((-inf, v]).
  double cdf(double v) const;
  /// mu([a, b]), atoms included.
  double mass(double a, double b) const;
  /// sup over a of mu([a, a + width]).
  double max_interval_mass(double width) const;
  double support_lo() const;
  double support_hi() const;
  double mean() const;
};

std::string to_string(DisorderSpec::Kind kind);

struct HoelderEntry {
  double delta = 0.0;
  double mass = 0.0;   // max_interval_mass(delta)
  double bound = 0.0;  // delta^lambda / beta
  bool ok = true;
};

struct HoelderReport {
  bool pass = true;
  std::vector<HoelderEntry> entries;  // deltas above beta0 are skipped
};

HoelderReport holder_check(const DisorderSpec& spec, const std::vector<double>& deltas);

/// One draw per site of the box, in box index order, keyed by
/// (seed, trial, site, stream).
std::vector<double> sample_potential(const LatticeBox& box, const DisorderSpec& spec, std::uint64_t seed,
                                     std::uint64_t trial, std::uint64_t stream = 0);

/// H_B = eps Gamma_phi|_B + diag(V) over the sites of a box. Rows and columns
/// follow LatticeBox::index_of.
struct OperatorSample {
  LatticeBox box;
  std::vector<double> potential;
  double epsilon = 0.0;
  HoppingKernel kernel;
  Eigen::MatrixXcd matrix;
  bool real = true;  // every entry has zero imaginary part
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;

  std::size_t size() const { return potential.size(); }
  double potential_at(const Site& x) const { return potential[box.index_of(x)]; }
  Eigen::MatrixXd real_matrix() const { return matrix.real(); }
};

OperatorSample assemble(const LatticeBox& box, std::vector<double> potential, double epsilon,
                        const HoppingKernel& kernel, std::uint64_t seed = 0, std::uint64_t trial = 0);

OperatorSample draw_sample(const LatticeBox& box, const DisorderSpec& spec, double epsilon,
                           const HoppingKernel& kernel, std::uint64_t seed, std::uint64_t trial,
                           std::uint64_t stream = 0);

/// The operator of a sub-box seeing the same potential values.
OperatorSample restrict_to(const OperatorSample& sample, const LatticeBox& sub);

}  // namespace msalab
