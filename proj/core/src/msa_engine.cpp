#include "msalab/msa_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "msalab/errors.hpp"

namespace msalab {

namespace {

Site origin(int d) { return Site(d); }

Site far_center(int d, std::int64_t L) { return Site::unit(d, 0, 2 * L + 1); }

double min_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    best = std::min(best, std::abs(a[i] - b[j]));
    (a[i] < b[j] ? i : j)++;
  }
  return best;
}

}  // namespace

void ModelParams::validate() const {
  require(d >= 1 && d <= kMaxDim, "lattice dimension must lie in [1, 3]");
  require(std::isfinite(epsilon) && epsilon >= 0.0, "disorder coupling must satisfy eps>=0");
  disorder.validate();
  for (const auto& [x, v] : kernel.table_entries())
    require(x.dim() == d, "table kernel dimension does not match d");
}

void MSAParams::validate() const {
  weights.validate();
  require(d >= 1 && d <= kMaxDim, "lattice dimension must lie in [1, 3]");
  require(p > 5.0 * d, "MSA parameters violate p>5d");
  require(alpha > 1.25 && alpha < alpha_upper(), "MSA parameters violate 5/4<alpha<2p/(p+2d)");
  require(kappa_inf > 0.0 && kappa_inf < kappa0, "MSA parameters violate 0<kappa_inf<kappa0");
  require(kappa0 <= weights.gamma / 5.0, "MSA parameters violate kappa0<=gamma/5 (κ₀∈(0,γ/5])");
}

double MSAParams::loss_constant() const {
  return constant == KappaConstant::TwoPowRho ? 30.0 + std::pow(2.0, weights.rho)
                                              : 30.0 + std::pow(alpha, weights.rho_prime);
}

NextScale next_scale(std::int64_t L, double alpha) {
  require(L >= 1, "next_scale needs L >= 1");
  require(alpha >= 1.0, "next_scale needs alpha >= 1");
  NextScale n;
  const double log_next = alpha * std::log(static_cast<double>(L));
  n.real_value = std::pow(static_cast<double>(L), alpha);
  if (log_next >= 63.0 * std::log(2.0)) {
    n.overflow = true;
    return n;
  }
  n.value = static_cast<std::int64_t>(std::floor(n.real_value));
  n.degenerate = *n.value <= L;
  return n;
}

KappaLoss kappa_loss(double logL, const MSAParams& params) {
  require(logL > 0.0, "kappa loss needs log L > 0");
  const double gamma = params.weights.gamma;
  const double rho = params.weights.rho;
  KappaLoss loss;
  loss.geometric = 10.0 * gamma * std::exp(-(0.8 * params.alpha - 1.0) * logL);
  loss.log_term = 10.0 * gamma / std::pow(logL, rho - 1.0);
  loss.resonance = params.loss_constant() / std::pow(logL, rho - params.weights.rho_prime);
  loss.total = loss.geometric + loss.log_term + loss.resonance;
  return loss;
}

double kappa_step(double kappa, double logL, const MSAParams& params) {
  return kappa - kappa_loss(logL, params).total;
}

double series_loss_bound(const MSAParams& params, double logL0) {
  require(logL0 > 0.0, "series bound needs log L0 > 0");
  const double a = params.alpha;
  const double c = 0.8 * a - 1.0;
  if (!(c > 0.0) || !(a > 1.0)) return std::numeric_limits<double>::infinity();
  const double gamma = params.weights.gamma;
  const double rho = params.weights.rho;
  const double rp = params.weights.rho_prime;
  const double geometric = 10.0 * gamma * std::exp(-c * logL0) / -std::expm1(-c * (a - 1.0) * logL0);
  const double log_term = 10.0 * gamma / std::pow(logL0, rho - 1.0) / (1.0 - std::pow(a, -(rho - 1.0)));
  const double resonance = params.loss_constant() / std::pow(logL0, rho - rp) / (1.0 - std::pow(a, -(rho - rp)));
  return geometric + log_term + resonance;
}

ScaleLadder ladder(const MSAParams& params, double logL0, int horizon) {
  require(horizon >= 1, "ladder horizon must be >= 1");
  require(logL0 > 0.0, "ladder needs log L0 > 0");
  require(params.alpha > 1.0, "ladder needs alpha > 1");
  ScaleLadder lad;
  lad.horizon = horizon;
  lad.logL.reserve(static_cast<std::size_t>(horizon) + 1);
  lad.kappa.reserve(static_cast<std::size_t>(horizon) + 1);
  lad.logL.push_back(logL0);
  lad.kappa.push_back(params.kappa0);
  lad.cumulative_loss.push_back(0.0);
  for (int s = 0; s < horizon; ++s) {
    const double loss = kappa_loss(lad.logL.back(), params).total;
    lad.kappa.push_back(lad.kappa.back() - loss);
    lad.cumulative_loss.push_back(lad.cumulative_loss.back() + loss);
    lad.logL.push_back(params.alpha * lad.logL.back());
  }
  lad.valid = std::all_of(lad.kappa.begin(), lad.kappa.end(), [&](double k) { return k > params.kappa_inf; });
  lad.series_bound = series_loss_bound(params, logL0);
  return lad;
}

MinimalScale minimal_admissible_logL0(const MSAParams& params) {
  params.validate();
  const double budget = params.kappa0 - params.kappa_inf;
  auto ok = [&](double x) { return series_loss_bound(params, x) < budget; };
  double hi = 1.0;
  int guard = 0;
  while (!ok(hi)) {
    hi *= 2.0;
    if (++guard > 2000) throw NumericalRefusal("no admissible log L0 found below 2^2000");
  }
  double lo = hi / 2.0;
  if (ok(lo)) lo = 0.0;
  MinimalScale m;
  while (hi - lo > 1e-12 * hi && m.iterations < 400) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
    ++m.iterations;
  }
  m.logL0 = hi;
  m.series_at = series_loss_bound(params, hi);
  return m;
}

InitialScaleConstants initial_constants(double beta, double lambda, double p, int d, std::int64_t L0,
                                        double gamma_norm) {
  require(beta > 0.0, "initial constants need beta>0");
  require(lambda > 0.0 && lambda <= 1.0, "initial constants need 0<lambda<=1");
  require(p > 0.0, "initial constants need p>0");
  require(d >= 1 && d <= kMaxDim, "lattice dimension must lie in [1, 3]");
  require(L0 >= 1, "initial constants need L0 >= 1");
  require(gamma_norm > 0.0, "initial constants need a positive norm bound");
  InitialScaleConstants c;
  c.L0 = L0;
  c.gamma_norm = gamma_norm;
  const double log_volume = d * std::log(2.0 * static_cast<double>(L0) + 1.0);
  c.log_zeta = std::log(0.5) - (-std::log(beta) + p * std::log(static_cast<double>(L0)) + log_volume) / lambda;
  c.zeta = std::exp(c.log_zeta);
  c.eta = c.zeta / 2.0;
  c.epsilon0 = std::min(c.zeta / (4.0 * gamma_norm), std::exp(2.0 * c.log_zeta - std::log(2.0) - log_volume));
  return c;
}

double wegner_bound(const DisorderSpec& spec, int d, std::int64_t L, double window) {
  require(window >= 0.0, "Wegner window must be non-negative");
  if (window == 0.0) return 0.0;
  const double lam = spec.lambda;
  return std::exp(-std::log(spec.beta) + lam * std::log(2.0) +
                  d * (1.0 + lam) * std::log(2.0 * static_cast<double>(L) + 1.0) + lam * std::log(window));
}

WegnerReport wegner_check(std::int64_t L, double E, double window, const ModelParams& model, const TrialPlan& plan) {
  model.validate();
  require(L >= 1, "Wegner check needs L >= 1");
  if (!model.disorder.hoelder_kind())
    throw NumericalRefusal("disorder '" + to_string(model.disorder.kind) +
                           "' is not Hoelder continuous; the Wegner bound does not apply");
  const double volume = std::pow(2.0 * static_cast<double>(L) + 1.0, model.d);
  if (window * volume > model.disorder.beta0) {
    std::ostringstream os;
    os << "Wegner hypothesis eps(2L+1)^d <= beta0 violated: " << window * volume << " > " << model.disorder.beta0;
    throw NumericalRefusal(os.str());
  }
  WegnerReport r;
  r.L = L;
  r.E = E;
  r.window = window;
  r.bound = wegner_bound(model.disorder, model.d, L, window);
  const LatticeBox box(origin(model.d), L);
  const auto hits = map_trials(plan.first_trial, plan.trials, plan.workers, [&](std::uint64_t t) {
    const auto sample = draw_sample(box, model.disorder, model.epsilon, model.kernel, plan.seed, t);
    return resonance_distance(spectrum(sample), E) <= window;
  });
  for (bool h : hits) r.tally.add(h);
  if (const auto f = r.tally.frequency()) {
    r.below_bound = *f <= r.bound;
    r.ci_within = r.tally.ci()->hi <= r.bound + 0.02;
  }
  return r;
}

double pair_resonance_bound(const DisorderSpec& spec, int d, std::int64_t L, std::int64_t l, double rho_prime) {
  const double lam = spec.lambda;
  return std::exp(std::log(2.0) - std::log(spec.beta) + lam * std::log(4.0) +
                  d * (4.0 + lam) * std::log(2.0 * static_cast<double>(L) + 1.0) -
                  lam * std::pow(std::log(static_cast<double>(l)), rho_prime));
}

PairResonanceReport pair_resonance_check(std::int64_t L, std::int64_t l, const ModelParams& model, double rho_prime,
                                         const TrialPlan& plan, bool same_seed) {
  model.validate();
  require(l >= 1 && l <= L, "pair resonance check needs 1 <= l <= L");
  require(rho_prime > 1.0, "pair resonance check needs rho'>1");
  PairResonanceReport r;
  r.L = L;
  r.l = l;
  r.threshold = 2.0 * nr_threshold(L, rho_prime);
  r.bound = pair_resonance_bound(model.disorder, model.d, L, l, rho_prime);
  r.vacuous = r.bound >= 1.0;
  r.geometry_consistent = 26 * l <= L;
  r.same_seed = same_seed;
  const LatticeBox first(origin(model.d), L);
  const LatticeBox second(far_center(model.d, L), L);
  const auto hits = map_trials(plan.first_trial, plan.trials, plan.workers, [&](std::uint64_t t) {
    const auto a = spectrum(draw_sample(first, model.disorder, model.epsilon, model.kernel, plan.seed, t));
    const auto b =
        same_seed ? a : spectrum(draw_sample(second, model.disorder, model.epsilon, model.kernel, plan.seed, t));
    return min_gap(a, b) <= r.threshold;
  });
  for (bool h : hits) r.tally.add(h);
  return r;
}

std::vector<double> energy_grid(double lo, double hi, int points) {
  require(points >= 1, "energy grid needs at least one point");
  require(lo <= hi, "energy interval must satisfy lo <= hi");
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(points));
  if (points == 1) return {0.5 * (lo + hi)};
  for (int k = 0; k < points; ++k) g.push_back(lo + (hi - lo) * k / (points - 1));
  return g;
}

BadPairReport estimate_bad_pair_prob(std::int64_t L, double kappa, const std::vector<double>& grid,
                                     const ModelParams& model, const WeightParams& weights, const TrialPlan& plan) {
  model.validate();
  weights.validate();
  require(L >= 1, "bad-pair estimate needs L >= 1");
  require(!grid.empty(), "bad-pair estimate needs a non-empty energy grid");
  BadPairReport r;
  r.L = L;
  r.kappa = kappa;
  r.grid = grid;
  const LatticeBox first(origin(model.d), L);
  const LatticeBox second(far_center(model.d, L), L);
  struct Outcome {
    bool single = false;
    bool pair = false;
  };
  const auto outcomes = map_trials(plan.first_trial, plan.trials, plan.workers, [&](std::uint64_t t) {
    const auto a = draw_sample(first, model.disorder, model.epsilon, model.kernel, plan.seed, t);
    const auto b = draw_sample(second, model.disorder, model.epsilon, model.kernel, plan.seed, t);
    const CubeAnalyzer ca(a);
    const CubeAnalyzer cb(b);
    Outcome o;
    for (double E : grid) {
      if (ca.classify(E, kappa, weights).good) continue;
      o.single = true;
      if (!cb.classify(E, kappa, weights).good) {
        o.pair = true;
        break;
      }
    }
    return o;
  });
  for (const auto& o : outcomes) {
    r.single.add(o.single);
    r.pair.add(o.pair);
  }
  return r;
}

std::string to_string(CouplingVerdict v) {
  switch (v) {
    case CouplingVerdict::Pass: return "PASS";
    case CouplingVerdict::Counterexample: return "COUNTEREXAMPLE";
    case CouplingVerdict::NotApplicable: return "NOT-APPLICABLE";
  }
  return "UNKNOWN";
}

CouplingReport coupling_check(const OperatorSample& outer, double E, std::int64_t l, double kappa,
                              const MSAParams& params) {
  params.validate();
  require(l >= 2, "coupling check needs l >= 2");
  const std::int64_t L = outer.box.radius();
  const auto next = next_scale(l, params.alpha);
  require(next.value && *next.value == L, "coupling check needs L = floor(l^alpha)");
  const Site& x = outer.box.center();
  const WeightParams& w = params.weights;

  CouplingReport r;
  r.L = L;
  r.l = l;
  r.E = E;
  r.kappa = kappa;
  r.kappa_prime = kappa_step(kappa, std::log(static_cast<double>(l)), params);
  r.kappa_prime_vacuous = r.kappa_prime <= 0.0;

  const CubeAnalyzer whole(outer);
  const NRStatus nr1 = whole.nr(E, w.rho_prime);
  r.hyp1 = nr1.enr;
  r.hyp1_margin = std::log(nr1.distance / nr1.threshold);

  r.hyp2 = true;
  r.hyp2_margin = std::numeric_limits<double>::infinity();
  for (std::int64_t j : {2, 8, 26}) {
    const std::int64_t radius = j * l;
    if (radius > L) continue;
    for_each_site(LatticeBox(x, L - radius), [&](const Site& z) {
      const auto sub = restrict_to(outer, LatticeBox(z, radius));
      const NRStatus s = nr_status(resonance_distance(spectrum(sub), E), radius, w.rho_prime);
      ++r.hyp2_checked;
      r.hyp2 = r.hyp2 && s.enr;
      r.hyp2_margin = std::min(r.hyp2_margin, std::log(s.distance / s.threshold));
    });
  }
  r.hyp2_vacuous = r.hyp2_checked == 0;

  for_each_site(LatticeBox(x, L - l), [&](const Site& z) {
    for (const auto& c : r.bad_centers)
      if (sup_distance(c, z) <= 2 * l) return;
    const auto sub = restrict_to(outer, LatticeBox(z, l));
    if (!classify_cube(sub, E, kappa, w).good) r.bad_centers.push_back(z);
  });
  r.bad_disjoint = r.bad_centers.size();
  r.hyp3 = r.bad_disjoint <= 3;

  const double hyp3_margin = 3.0 - static_cast<double>(r.bad_disjoint);
  r.tightest = "hyp1";
  double tight = r.hyp1_margin;
  if (!r.hyp2_vacuous && r.hyp2_margin < tight) {
    tight = r.hyp2_margin;
    r.tightest = "hyp2";
  }
  if (hyp3_margin < tight) r.tightest = "hyp3";

  if (!(r.hyp1 && r.hyp2 && r.hyp3)) {
    r.verdict = CouplingVerdict::NotApplicable;
    return r;
  }
  r.outer = whole.classify(E, r.kappa_prime, w);
  r.verdict = r.outer->good ? CouplingVerdict::Pass : CouplingVerdict::Counterexample;
  return r;
}

CouplingSuite coupling_suite(std::int64_t l, double E, double kappa, const ModelParams& model,
                             const MSAParams& params, const TrialPlan& plan) {
  model.validate();
  params.validate();
  const auto next = next_scale(l, params.alpha);
  require(next.value.has_value(), "coupling suite needs floor(l^alpha) below 2^63");
  const LatticeBox box(origin(model.d), *next.value);
  CouplingSuite suite;
  suite.reports = map_trials(plan.first_trial, plan.trials, plan.workers, [&](std::uint64_t t) {
    const auto sample = draw_sample(box, model.disorder, model.epsilon, model.kernel, plan.seed, t);
    auto rep = coupling_check(sample, E, l, kappa, params);
    rep.trial = t;
    return rep;
  });
  for (const auto& rep : suite.reports) {
    switch (rep.verdict) {
      case CouplingVerdict::Pass: ++suite.pass; break;
      case CouplingVerdict::Counterexample: ++suite.counterexample; break;
      case CouplingVerdict::NotApplicable: ++suite.not_applicable; break;
    }
  }
  return suite;
}

}  // namespace msalab
