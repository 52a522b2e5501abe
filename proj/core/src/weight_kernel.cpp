#include "msalab/weight_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "msalab/errors.hpp"

namespace msalab {

namespace {

constexpr double kFlushBelow = 1e-300;

// h(s) = log^{rho-1}(s) / s
double h(double s, double rho) { return std::pow(std::log(s), rho - 1.0) / s; }

double shell_count(double r, int d) {
  if (r == 0.0) return 1.0;
  return std::pow(2.0 * r + 1.0, d) - std::pow(2.0 * r - 1.0, d);
}

}  // namespace

void WeightParams::validate() const {
  require(gamma > 0.0, "weight parameters violate gamma>0");
  require(rho > 1.0, "weight parameters violate rho>1 (ρ>1)");
  require(rho_prime > 1.0 && rho_prime < rho, "weight parameters violate 1<rho'<rho (ρ′∈(1,ρ))");
}

double log_weight(double r, double rho) { return std::pow(std::log1p(r), rho); }

double log_weight(const Site& x, double rho) {
  return log_weight(static_cast<double>(x.sup_norm()), rho);
}

double quasi_metric_excess(std::span<const double> xs, double rho) {
  double total = 0.0;
  double separate = 0.0;
  for (double x : xs) {
    total += x;
    separate += std::pow(std::log1p(x), rho);
  }
  return std::pow(std::log1p(total), rho) - separate;
}

double quasi_metric_diagonal(double x, std::int64_t n, double rho) {
  const auto nd = static_cast<double>(n);
  return std::pow(std::log1p(nd * x), rho) - nd * std::pow(std::log1p(x), rho);
}

QuasiMetricCertificate quasi_metric_constant(double rho, std::int64_t n) {
  require(rho > 1.0, "quasi-metric constant requires ρ>1");
  require(n >= 1, "quasi-metric constant requires n >= 1");
  QuasiMetricCertificate cert{rho, n, 0.0, 0.0, 0.0};
  if (n == 1) return cert;

  const auto nd = static_cast<double>(n);
  const double peak = std::expm1(rho - 1.0);  // e^{rho-1} - 1
  auto gap = [&](double x) { return h(1.0 + nd * x, rho) - h(1.0 + x, rho); };

  double lo = peak / nd;
  double hi = peak;
  if (!(gap(lo) > 0.0 && gap(hi) < 0.0)) {
    throw NumericalRefusal("quasi-metric bisection bracket does not straddle a sign change");
  }
  for (int it = 0; it < 400 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (gap(mid) > 0.0 ? lo : hi) = mid;
  }
  cert.x0 = 0.5 * (lo + hi);
  cert.sup_f = quasi_metric_diagonal(cert.x0, n, rho);
  cert.c_rho = cert.sup_f / std::pow(std::log(nd), rho);
  return cert;
}

std::vector<QuasiMetricViolation> verify_quasi_metric(const QuasiMetricCertificate& cert,
                                                      const std::vector<std::vector<double>>& samples) {
  std::vector<QuasiMetricViolation> violations;
  const double slack_term =
      cert.n > 1 ? cert.c_rho * std::pow(std::log(static_cast<double>(cert.n)), cert.rho) : 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& xs = samples[i];
    require(static_cast<std::int64_t>(xs.size()) == cert.n, "quasi-metric sample has the wrong arity");
    double sum = 0.0;
    double rhs = slack_term;
    for (double x : xs) {
      require(x > 0.0, "quasi-metric samples must be positive");
      sum += x;
      rhs += std::pow(std::log1p(x), cert.rho);
    }
    const double lhs = std::pow(std::log1p(sum), cert.rho);
    if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) violations.push_back({i, lhs, rhs});
  }
  return violations;
}

std::vector<QuasiMetricViolation> verify_quasi_metric(double rho, std::int64_t n,
                                                      const std::vector<std::vector<double>>& samples) {
  return verify_quasi_metric(quasi_metric_constant(rho, n), samples);
}

QuasiMetricEnvelope quasi_metric_envelope(double rho, std::int64_t n_max) {
  require(n_max >= 2, "envelope needs n_max >= 2");
  QuasiMetricEnvelope env{rho, 0.0, 0, 0.0, n_max};
  auto visit = [&](std::int64_t n) {
    const auto cert = quasi_metric_constant(rho, n);
    if (cert.c_rho > env.c_sup) {
      env.c_sup = cert.c_rho;
      env.n_at_sup = n;
    }
    if (n == n_max) env.c_at_n_max = cert.c_rho;
  };
  std::int64_t n = 2;
  for (; n <= std::min<std::int64_t>(n_max, 64); ++n) visit(n);
  double next = static_cast<double>(n);
  while (n < n_max) {
    next *= 1.1;
    n = std::min<std::int64_t>(n_max, std::max<std::int64_t>(n + 1, static_cast<std::int64_t>(next)));
    visit(n);
  }
  return env;
}

HoppingKernel HoppingKernel::log_power(double gamma, double rho, double scale) {
  require(gamma > 0.0, "log-power kernel requires gamma>0");
  require(rho > 1.0, "log-power kernel requires ρ>1");
  require(std::isfinite(scale), "kernel scale must be finite");
  HoppingKernel k;
  k.kind_ = Kind::LogPower;
  k.gamma_ = gamma;
  k.rho_ = rho;
  k.scale_ = scale;
  return k;
}

HoppingKernel HoppingKernel::stretched(double s, double scale) {
  require(s > 0.0 && s < 1.0, "stretched kernel requires 0<s<1");
  require(std::isfinite(scale), "kernel scale must be finite");
  HoppingKernel k;
  k.kind_ = Kind::Stretched;
  k.s_ = s;
  k.scale_ = scale;
  return k;
}

HoppingKernel HoppingKernel::table(int dim, const std::vector<std::pair<Site, Complex>>& entries) {
  HoppingKernel k;
  k.kind_ = Kind::Table;
  for (const auto& [x, v] : entries) {
    require(x.dim() == dim, "table kernel displacement has the wrong dimension");
    require(x.sup_norm() > 0 || v == Complex(0.0, 0.0), "table kernel must vanish at displacement 0");
    if (x.sup_norm() == 0) continue;
    auto [it, inserted] = k.table_.emplace(x, v);
    require(inserted || it->second == v, "table kernel lists displacement " + x.to_string() + " twice");
  }
  std::vector<std::pair<Site, Complex>> mirrors;
  for (const auto& [x, v] : k.table_) {
    const auto it = k.table_.find(-x);
    if (it == k.table_.end()) {
      mirrors.emplace_back(-x, std::conj(v));
    } else {
      require(it->second == std::conj(v),
              "table kernel is not Hermitian at displacement " + x.to_string());
    }
  }
  for (auto& m : mirrors) k.table_.insert(m);
  for (const auto& [x, v] : k.table_) k.table_radius_ = std::max(k.table_radius_, x.sup_norm());
  return k;
}

HoppingKernel HoppingKernel::with_phase(std::vector<double> wavevector) const {
  HoppingKernel k = *this;
  k.phase_ = std::move(wavevector);
  return k;
}

HoppingKernel HoppingKernel::scaled(double factor) const {
  require(std::isfinite(factor), "kernel scale must be finite");
  HoppingKernel k = *this;
  if (k.kind_ == Kind::Table) {
    for (auto& [x, v] : k.table_) v *= factor;
  } else {
    k.scale_ *= factor;
  }
  return k;
}

double HoppingKernel::envelope(double r) const {
  if (r <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::LogPower: return std::abs(scale_) * std::exp(-gamma_ * log_weight(r, rho_));
    case Kind::Stretched: return std::abs(scale_) * std::exp(-std::pow(r, s_));
    case Kind::Table: {
      double m = 0.0;
      for (const auto& [x, v] : table_)
        if (static_cast<double>(x.sup_norm()) == r) m = std::max(m, std::abs(v));
      return m;
    }
  }
  return 0.0;
}

Complex HoppingKernel::operator()(const Site& x) const {
  const std::int64_t r = x.sup_norm();
  if (r == 0) return {0.0, 0.0};
  Complex value;
  if (kind_ == Kind::Table) {
    const auto it = table_.find(x);
    if (it == table_.end()) return {0.0, 0.0};
    value = it->second;
  } else {
    value = envelope(static_cast<double>(r));
    if (scale_ < 0.0) value = -value;
  }
  if (!phase_.empty()) {
    double angle = 0.0;
    for (int k = 0; k < x.dim() && k < static_cast<int>(phase_.size()); ++k)
      angle += phase_[static_cast<std::size_t>(k)] * static_cast<double>(x[k]);
    value *= std::polar(1.0, angle);
  }
  if (std::abs(value) < kFlushBelow) return {0.0, 0.0};
  return value;
}

bool HoppingKernel::real_valued() const {
  if (!phase_.empty() && std::any_of(phase_.begin(), phase_.end(), [](double t) { return t != 0.0; }))
    return false;
  return std::all_of(table_.begin(), table_.end(), [](const auto& e) { return e.second.imag() == 0.0; });
}

double kernel_tail_bound(const HoppingKernel& kernel, int d, std::int64_t R) {
  require(R >= 1, "tail bound requires R >= 1");
  require(d >= 1 && d <= kMaxDim, "lattice dimension must lie in [1, 3]");
  const double amp = std::abs(kernel.scale());
  switch (kernel.kind()) {
    case HoppingKernel::Kind::Table: {
      double tail = 0.0;
      for (const auto& [x, v] : kernel.table_entries())
        if (x.sup_norm() > R) tail += std::abs(v);
      return tail;
    }
    case HoppingKernel::Kind::Stretched: {
      // shell(r') env(r') <= 2d (5r)^{d-1} e^{-r^s} for r' in [r, r+1], r >= 1;
      // its integral over (R, inf) is an upper incomplete gamma function.
      const double s = kernel.s();
      const double integral =
          boost::math::tgamma(static_cast<double>(d) / s, std::pow(static_cast<double>(R), s)) / s;
      return 2.0 * d * std::pow(5.0, d - 1) * amp * integral;
    }
    case HoppingKernel::Kind::LogPower: {
      // With u = log(1 + r) the dominating integrand is C e^{d u - gamma u^rho},
      // bounded past the point where its log-derivative turns negative by the
      // tangent line of the concave exponent.
      const double gamma = kernel.gamma();
      const double rho = kernel.rho();
      const double c = 2.0 * d * std::pow(3.0, d - 1) * amp;
      auto slope = [&](double u) { return gamma * rho * std::pow(u, rho - 1.0) - d; };
      auto tangent_tail = [&](double u) {
        return c * std::exp(d * u - gamma * std::pow(u, rho)) / slope(u);
      };
      const double u_star = std::pow(static_cast<double>(d) / (gamma * rho), 1.0 / (rho - 1.0));
      const double r_star_real = std::max(static_cast<double>(R), std::ceil(std::expm1(u_star)) + 1.0);
      if (r_star_real - static_cast<double>(R) > 1e8) return std::numeric_limits<double>::infinity();
      const auto r_star = static_cast<std::int64_t>(r_star_real);
      double partial = 0.0;
      for (std::int64_t r = R + 1; r <= r_star; ++r)
        partial += shell_count(static_cast<double>(r), d) * kernel.envelope(static_cast<double>(r));
      // every cut point past r_star gives a valid bound; keep the smallest
      double best = partial + tangent_tail(std::log1p(static_cast<double>(r_star)));
      for (std::int64_t r = r_star + 1; r <= r_star + 100000; ++r) {
        partial += shell_count(static_cast<double>(r), d) * kernel.envelope(static_cast<double>(r));
        const double t = tangent_tail(std::log1p(static_cast<double>(r)));
        best = std::min(best, partial + t);
        if (t <= 1e-15 * partial) break;
      }
      return best;
    }
  }
  return std::numeric_limits<double>::infinity();
}

NormBound gamma_norm_bound(const HoppingKernel& kernel, int d, std::int64_t R) {
  require(R >= 1, "norm bound requires truncation radius R >= 1");
  NormBound b;
  if (kernel.kind() == HoppingKernel::Kind::Table) {
    for (const auto& [x, v] : kernel.table_entries()) b.truncated_sum += std::abs(v);
    b.total = b.truncated_sum;
    b.exact = true;
    return b;
  }
  for (std::int64_t r = 1; r <= R; ++r)
    b.truncated_sum += shell_count(static_cast<double>(r), d) * kernel.envelope(static_cast<double>(r));
  b.tail_bound = kernel_tail_bound(kernel, d, R);
  b.total = b.truncated_sum + b.tail_bound;
  return b;
}

}  // namespace msalab
