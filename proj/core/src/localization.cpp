#include "msalab/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "msalab/errors.hpp"
#include "msalab/greens.hpp"
#include "msalab/monte_carlo.hpp"

namespace msalab {

Eigenpairs eigenpairs(const OperatorSample& sample) {
  Eigenpairs ep;
  if (sample.real) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sample.real_matrix());
    ep.values = solver.eigenvalues();
    ep.vectors = solver.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sample.matrix);
    ep.values = solver.eigenvalues();
    ep.vectors = solver.eigenvectors();
  }
  return ep;
}

std::string to_string(DecayFamily f) { return f == DecayFamily::LogPower ? "log_power" : "stretched"; }

std::vector<double> amplitudes(const Eigen::VectorXcd& psi) {
  std::vector<double> a(static_cast<std::size_t>(psi.size()));
  for (Eigen::Index i = 0; i < psi.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(psi(i));
  return a;
}

namespace {

struct Profile {
  Site center;
  std::vector<DecayPoint> points;
};

std::optional<Profile> build_profile(const LatticeBox& box, std::span<const double> amplitude,
                                     const DecayFitOptions& options) {
  require(amplitude.size() == box.size(), "amplitude vector does not match the box");
  if (amplitude.empty()) return std::nullopt;
  const auto peak = std::max_element(amplitude.begin(), amplitude.end());
  if (!(*peak > 0.0)) return std::nullopt;
  const double top = *peak;
  Profile p{box.site_at(static_cast<std::size_t>(peak - amplitude.begin())), {}};
  std::size_t i = 0;
  for_each_site(box, [&](const Site& x) {
    const double v = amplitude[i++] / top;
    const auto r = sup_distance(x, p.center);
    if (r < options.min_distance || !(v > options.floor) || v >= 1.0) return;
    const double rx = static_cast<double>(r);
    const double reg = options.family == DecayFamily::LogPower ? std::log(std::log1p(rx)) : std::log(rx);
    p.points.push_back({r, reg, std::log(-std::log(v))});
  });
  return p;
}

}  // namespace

std::vector<DecayPoint> decay_profile(const LatticeBox& box, std::span<const double> amplitude,
                                      const DecayFitOptions& options) {
  auto p = build_profile(box, amplitude, options);
  return p ? std::move(p->points) : std::vector<DecayPoint>{};
}

std::optional<DecayFit> decay_fit(const LatticeBox& box, std::span<const double> amplitude,
                                  const DecayFitOptions& options) {
  const auto profile = build_profile(box, amplitude, options);
  if (!profile || profile->points.size() < std::max<std::size_t>(options.min_points, 2)) return std::nullopt;
  const auto& pts = profile->points;
  const double n = static_cast<double>(pts.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;

  DecayFit fit;
  fit.center = profile->center;
  fit.floor = options.floor;
  fit.n_points = pts.size();
  fit.rho_fit = sxy / sxx;
  const double intercept = my - fit.rho_fit * mx;
  fit.c = std::exp(intercept);
  double ssr = 0.0;
  for (const auto& p : pts) {
    const double e = p.y - intercept - fit.rho_fit * p.x;
    ssr += e * e;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;

  if (options.rho_hint) {
    const double h = *options.rho_hint;
    fit.rho_hint = h;
    const double log_c = my - h * mx;
    fit.c_hint = std::exp(log_c);
    double ssr_h = 0.0;
    for (const auto& p : pts) {
      const double e = p.y - log_c - h * p.x;
      ssr_h += e * e;
    }
    fit.r2_hint = syy > 0.0 ? 1.0 - ssr_h / syy : (ssr_h == 0.0 ? 1.0 : 0.0);
    fit.envelope_mismatch = std::abs(fit.rho_fit - h) > 0.25 || fit.r2_hint < 0.9;
  }
  return fit;
}

PoissonResidual poisson_residual(const OperatorSample& outer, const Eigen::VectorXcd& psi, double E,
                                 const LatticeBox& inner) {
  require(outer.box.contains(inner), "inner box must lie inside the outer box");
  require(static_cast<std::size_t>(psi.size()) == outer.size(), "psi must be defined on the outer box");
  const std::int64_t margin = outer.box.radius() - sup_distance(inner.center(), outer.box.center()) - inner.radius();
  require(margin >= 1, "inner box must keep distance >= 1 from the outer boundary");

  const OperatorSample in = restrict_to(outer, inner);
  const auto ev = spectrum(in);
  PoissonResidual res;
  res.resonance_distance = resonance_distance(ev, E);
  const Eigen::MatrixXcd g = greens(in, E, ev);

  std::vector<Eigen::Index> in_idx;
  std::vector<Eigen::Index> out_idx;
  for_each_site(outer.box, [&](const Site& y) {
    (inner.contains(y) ? in_idx : out_idx).push_back(static_cast<Eigen::Index>(outer.box.index_of(y)));
  });
  const Eigen::VectorXcd boundary = outer.matrix(in_idx, out_idx) * psi(out_idx);
  const Eigen::VectorXcd rhs = -(g * boundary);
  const Eigen::VectorXcd psi_in = psi(in_idx);
  res.residual = (psi_in - rhs).cwiseAbs().maxCoeff();
  res.g_row_sum = g.cwiseAbs().rowwise().sum().maxCoeff();
  res.max_psi = psi.size() ? psi.cwiseAbs().maxCoeff() : 0.0;
  res.tail_term = std::abs(outer.epsilon) * res.g_row_sum * kernel_tail_bound(outer.kernel, outer.box.dim(), margin) *
                  res.max_psi;
  return res;
}

double participation_ratio(const Eigen::VectorXcd& psi) {
  const double s2 = psi.squaredNorm();
  const double s4 = psi.cwiseAbs2().cwiseAbs2().sum();
  if (!(s4 > 0.0)) throw ValidationError("participation ratio of the zero vector is undefined");
  return s2 * s2 / s4;
}

GeneralizedEigenCheck generalized_eigen_check(const OperatorSample& sample, Eigen::VectorXcd psi, double E,
                                              bool normalize) {
  require(static_cast<std::size_t>(psi.size()) == sample.size(), "psi must be defined on the sample box");
  const auto& box = sample.box;
  const Site zero(box.dim());
  const Site anchor = box.contains(zero) ? zero : box.center();
  GeneralizedEigenCheck chk;
  chk.E = E;
  if (normalize) {
    const Complex at = psi(static_cast<Eigen::Index>(box.index_of(anchor)));
    require(std::abs(at) > 0.0, "cannot normalise psi(0)=1: psi vanishes at the anchor site");
    psi /= at;
    chk.normalized = true;
  }
  std::size_t i = 0;
  chk.witness_site = anchor;
  for_each_site(box, [&](const Site& x) {
    const double bound = std::pow(1.0 + static_cast<double>(sup_distance(x, anchor)), box.dim());
    const double ratio = std::abs(psi(static_cast<Eigen::Index>(i++))) / bound;
    if (ratio > chk.polynomial_witness) {
      chk.polynomial_witness = ratio;
      chk.witness_site = x;
    }
  });
  chk.equation_residual = (sample.matrix * psi - E * psi).cwiseAbs().maxCoeff();
  chk.psi = std::move(psi);
  return chk;
}

void YeungOonoConfig::validate() const {
  require(d >= 1 && d <= kMaxDim, "lattice dimension must lie in [1, 3]");
  require(side >= 3 && side % 2 == 1, "ensemble side length must be odd and >= 3");
  const double n = std::pow(static_cast<double>(side), d);
  require(d == 1 ? n <= 5000.0 : n <= 2025.0, "ensemble box too large for desk scale (N<=5000 in d=1, N<=45^d otherwise)");
  require(std::isfinite(epsilon) && epsilon >= 0.0, "disorder coupling must satisfy eps>=0");
  require(!seeds.empty(), "ensemble needs at least one seed");
  require(edge_fraction >= 0.0 && edge_fraction < 0.5, "edge fraction must lie in [0, 1/2)");
  require(e_lo <= e_hi, "energy window must satisfy lo <= hi");
  disorder.validate();
}

std::optional<Quartiles> quartiles(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return Quartiles{q(0.25), q(0.5), q(0.75)};
}

EnsembleSummary summarize(const std::vector<EnsembleRow>& rows, const YeungOonoConfig& config) {
  EnsembleSummary s;
  std::vector<double> c;
  std::vector<double> rho;
  std::vector<double> r2;
  std::vector<double> pr;
  for (const auto& row : rows) {
    ++s.selected;
    pr.push_back(row.pr);
    if (!row.fitted) {
      ++s.no_fit;
      continue;
    }
    ++s.fitted;
    c.push_back(row.fit.c);
    rho.push_back(row.fit.rho_fit);
    r2.push_back(row.fit.r2);
  }
  s.c = quartiles(c);
  s.rho_fit = quartiles(rho);
  s.r2 = quartiles(r2);
  s.pr = quartiles(pr);
  s.gamma = config.gamma;
  s.rho = config.rho;
  s.rate_coefficient = config.kappa_inf / (2.0 * std::pow(config.alpha, config.rho));
  return s;
}

EnsembleResult yeung_oono_experiment(const YeungOonoConfig& config) {
  config.validate();
  const std::int64_t L = (config.side - 1) / 2;
  const LatticeBox box(Site(config.d), L);
  const auto margin = static_cast<std::int64_t>(std::floor(config.edge_fraction * static_cast<double>(config.side)));

  const auto per_seed = map_trials(0, config.seeds.size(), config.workers, [&](std::uint64_t k) {
    const std::uint64_t seed = config.seeds[static_cast<std::size_t>(k)];
    const auto sample = draw_sample(box, config.disorder, config.epsilon, config.kernel, seed, 0);
    const auto ep = eigenpairs(sample);
    std::vector<EnsembleRow> rows;
    for (Eigen::Index j = 0; j < ep.values.size(); ++j) {
      const double lam = ep.values(j);
      if (lam < config.e_lo || lam > config.e_hi) continue;
      const Eigen::VectorXcd psi = ep.vectors.col(j);
      const auto amp = amplitudes(psi);
      const auto peak = std::max_element(amp.begin(), amp.end()) - amp.begin();
      const Site center = box.site_at(static_cast<std::size_t>(peak));
      if (L - center.sup_norm() < margin) continue;
      EnsembleRow row;
      row.seed = seed;
      row.eigenvalue = lam;
      row.center = center;
      row.pr = participation_ratio(psi);
      if (auto fit = decay_fit(box, amp, config.fit)) {
        row.fitted = true;
        row.fit = *fit;
      }
      if (config.keep_profiles) row.profile = decay_profile(box, amp, config.fit);
      rows.push_back(std::move(row));
    }
    return rows;
  });

  EnsembleResult result;
  for (const auto& rows : per_seed) result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  result.summary = summarize(result.rows, config);
  return result;
}

}  // namespace msalab
