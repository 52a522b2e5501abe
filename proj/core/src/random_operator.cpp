#include "msalab/random_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msalab/errors.hpp"

namespace msalab {

DisorderSpec DisorderSpec::uniform(double M) {
  DisorderSpec s;
  s.kind = Kind::Uniform;
  s.M = M;
  s.lambda = 1.0;
  s.beta = 2.0 * M;
  s.beta0 = 2.0 * M;
  s.validate();
  return s;
}

DisorderSpec DisorderSpec::power(double lambda) {
  DisorderSpec s;
  s.kind = Kind::Power;
  s.M = 1.0;
  s.lambda = lambda;
  s.beta = 1.0;
  s.beta0 = 1.0;
  s.validate();
  return s;
}

DisorderSpec DisorderSpec::bernoulli(double lo, double hi, double prob_hi) {
  DisorderSpec s;
  s.kind = Kind::Bernoulli;
  s.atom_lo = lo;
  s.atom_hi = hi;
  s.prob = prob_hi;
  s.M = std::max(std::abs(lo), std::abs(hi));
  s.validate();
  return s;
}

DisorderSpec DisorderSpec::quantile_table(std::vector<double> q) {
  DisorderSpec s;
  s.kind = Kind::QuantileTable;
  s.quantiles = std::move(q);
  for (double v : s.quantiles) s.M = std::max(s.M, std::abs(v));
  s.validate();
  return s;
}

std::string to_string(DisorderSpec::Kind kind) {
  switch (kind) {
    case DisorderSpec::Kind::Uniform: return "uniform";
    case DisorderSpec::Kind::Power: return "power";
    case DisorderSpec::Kind::Bernoulli: return "bernoulli";
    case DisorderSpec::Kind::QuantileTable: return "quantile_table";
  }
  return "unknown";
}

void DisorderSpec::validate() const {
  require(std::isfinite(M) && M > 0.0, "disorder support bound must satisfy M>0 (supp(mu) compact)");
  require(lambda > 0.0 && lambda <= 1.0, "disorder exponent must satisfy 0<lambda<=1");
  require(beta > 0.0, "disorder constant must satisfy beta>0");
  require(beta0 > 0.0, "disorder window must satisfy beta0>0");
  switch (kind) {
    case Kind::Uniform: break;
    case Kind::Power:
      require(M >= 1.0, "power disorder lives on [0,1], so M>=1 is required");
      break;
    case Kind::Bernoulli:
      require(atom_lo != atom_hi, "supp(mu) must contain at least two points");
      require(std::abs(atom_lo) <= M && std::abs(atom_hi) <= M, "Bernoulli atoms must lie in [-M,M]");
      require(prob >= 0.0 && prob <= 1.0, "Bernoulli probability must lie in [0,1]");
      break;
    case Kind::QuantileTable:
      require(quantiles.size() >= 2, "quantile table needs at least two entries");
      require(std::is_sorted(quantiles.begin(), quantiles.end()), "quantile table must be nondecreasing");
      require(quantiles.front() < quantiles.back(), "supp(mu) must contain at least two points");
      require(std::abs(quantiles.front()) <= M && std::abs(quantiles.back()) <= M,
              "quantile table must lie in [-M,M]");
      break;
  }
}

double DisorderSpec::quantile(double u) const {
  switch (kind) {
    case Kind::Uniform: return -M + 2.0 * M * u;
    case Kind::Power: return std::pow(u, 1.0 / lambda);
    case Kind::Bernoulli: return u < 1.0 - prob ? atom_lo : atom_hi;
    case Kind::QuantileTable: {
      const double pos = std::clamp(u, 0.0, 1.0) * static_cast<double>(quantiles.size() - 1);
      const auto k = std::min(static_cast<std::size_t>(pos), quantiles.size() - 2);
      const double t = pos - static_cast<double>(k);
      return quantiles[k] + t * (quantiles[k + 1] - quantiles[k]);
    }
  }
  return 0.0;
}

double DisorderSpec::cdf(double v) const {
  switch (kind) {
    case Kind::Uniform: return std::clamp((v + M) / (2.0 * M), 0.0, 1.0);
    case Kind::Power: return v <= 0.0 ? 0.0 : v >= 1.0 ? 1.0 : std::pow(v, lambda);
    case Kind::Bernoulli: {
      const double lo = std::min(atom_lo, atom_hi);
      const double hi = std::max(atom_lo, atom_hi);
      const double p_lo = atom_lo < atom_hi ? 1.0 - prob : prob;
      return v < lo ? 0.0 : v < hi ? p_lo : 1.0;
    }
    case Kind::QuantileTable: {
      if (v < quantiles.front()) return 0.0;
      if (v >= quantiles.back()) return 1.0;
      const double step = 1.0 / static_cast<double>(quantiles.size() - 1);
      // last segment whose left end is <= v; flat segments are atoms
      const auto it = std::upper_bound(quantiles.begin(), quantiles.end(), v);
      const auto k = static_cast<std::size_t>(it - quantiles.begin()) - 1;
      const double width = quantiles[k + 1] - quantiles[k];
      const double t = width > 0.0 ? (v - quantiles[k]) / width : 1.0;
      return (static_cast<double>(k) + t) * step;
    }
  }
  return 0.0;
}

double DisorderSpec::mass(double a, double b) const {
  if (b < a) return 0.0;
  const double left = std::nextafter(a, -std::numeric_limits<double>::infinity());
  return std::max(0.0, cdf(b) - cdf(left));
}

double DisorderSpec::max_interval_mass(double width) const {
  require(width >= 0.0, "interval width must be non-negative");
  switch (kind) {
    case Kind::Uniform: return std::min(1.0, width / (2.0 * M));
    case Kind::Power: return std::min(1.0, std::pow(width, lambda));  // density is decreasing
    case Kind::Bernoulli:
      if (width >= std::abs(atom_hi - atom_lo)) return 1.0;
      return std::max(prob, 1.0 - prob);
    case Kind::QuantileTable: {
      // the sup is attained with an endpoint at a breakpoint of the piecewise-linear CDF
      double best = 0.0;
      for (double q : quantiles) {
        best = std::max(best, mass(q, q + width));
        best = std::max(best, mass(q - width, q));
      }
      return best;
    }
  }
  return 1.0;
}

double DisorderSpec::support_lo() const {
  switch (kind) {
    case Kind::Uniform: return -M;
    case Kind::Power: return 0.0;
    case Kind::Bernoulli: return std::min(atom_lo, atom_hi);
    case Kind::QuantileTable: return quantiles.front();
  }
  return -M;
}

double DisorderSpec::support_hi() const {
  switch (kind) {
    case Kind::Uniform: return M;
    case Kind::Power: return 1.0;
    case Kind::Bernoulli: return std::max(atom_lo, atom_hi);
    case Kind::QuantileTable: return quantiles.back();
  }
  return M;
}

double DisorderSpec::mean() const {
  switch (kind) {
    case Kind::Uniform: return 0.0;
    case Kind::Power: return lambda / (lambda + 1.0);
    case Kind::Bernoulli: return (1.0 - prob) * atom_lo + prob * atom_hi;
    case Kind::QuantileTable: {
      double s = 0.0;
      for (std::size_t k = 0; k + 1 < quantiles.size(); ++k) s += 0.5 * (quantiles[k] + quantiles[k + 1]);
      return s / static_cast<double>(quantiles.size() - 1);
    }
  }
  return 0.0;
}

HoelderReport holder_check(const DisorderSpec& spec, const std::vector<double>& deltas) {
  HoelderReport report;
  for (double delta : deltas) {
    require(delta >= 0.0, "Hoelder grid entries must be non-negative");
    if (delta > spec.beta0) continue;
    HoelderEntry e;
    e.delta = delta;
    e.mass = spec.max_interval_mass(delta);
    e.bound = std::pow(delta, spec.lambda) / spec.beta;
    e.ok = e.mass <= e.bound * (1.0 + 1e-12);
    report.pass = report.pass && e.ok;
    report.entries.push_back(e);
  }
  return report;
}

std::vector<double> sample_potential(const LatticeBox& box, const DisorderSpec& spec, std::uint64_t seed,
                                     std::uint64_t trial, std::uint64_t stream) {
  const CounterKey key{seed, trial, stream};
  std::vector<double> v;
  v.reserve(box.size());
  for_each_site(box, [&](const Site& x) { v.push_back(spec.quantile(counter_uniform(key, x))); });
  return v;
}

OperatorSample assemble(const LatticeBox& box, std::vector<double> potential, double epsilon,
                        const HoppingKernel& kernel, std::uint64_t seed, std::uint64_t trial) {
  const std::size_t n = box.size();
  require(n <= kMaxDenseSites, "box has " + std::to_string(n) + " sites; dense storage is limited to 20000");
  require(potential.size() == n, "potential must be defined on every box site");
  require(std::isfinite(epsilon), "epsilon must be finite");

  // translation invariance: one kernel evaluation per displacement in B_{2L}(0)
  const LatticeBox disp(Site(box.dim()), 2 * box.radius());
  std::vector<Complex> phi(disp.size());
  for_each_site(disp, [&](const Site& x) { phi[disp.index_of(x)] = epsilon * kernel(x); });

  OperatorSample s{box, std::move(potential), epsilon, kernel, Eigen::MatrixXcd(n, n), kernel.real_valued(),
                   seed, trial};
  const auto sites = box.sites();
  for (std::size_t i = 0; i < n; ++i) {
    s.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = s.potential[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex h = phi[disp.index_of(sites[i] - sites[j])];
      s.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h;
      s.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(h);
    }
  }
  return s;
}

OperatorSample draw_sample(const LatticeBox& box, const DisorderSpec& spec, double epsilon,
                           const HoppingKernel& kernel, std::uint64_t seed, std::uint64_t trial,
                           std::uint64_t stream) {
  return assemble(box, sample_potential(box, spec, seed, trial, stream), epsilon, kernel, seed, trial);
}

OperatorSample restrict_to(const OperatorSample& sample, const LatticeBox& sub) {
  require(sample.box.contains(sub), "restriction box must lie inside the sample box");
  std::vector<double> v;
  v.reserve(sub.size());
  std::vector<Eigen::Index> idx;
  idx.reserve(sub.size());
  for_each_site(sub, [&](const Site& x) {
    idx.push_back(static_cast<Eigen::Index>(sample.box.index_of(x)));
    v.push_back(sample.potential[static_cast<std::size_t>(idx.back())]);
  });
  OperatorSample s{sub, std::move(v), sample.epsilon, sample.kernel, sample.matrix(idx, idx), sample.real,
                   sample.seed, sample.trial};
  return s;
}

}  // namespace msalab
