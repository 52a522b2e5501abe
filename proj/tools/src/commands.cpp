#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>

#include "msalab/counter_rng.hpp"
#include "msalab/errors.hpp"
#include "msalab/lattice_geometry.hpp"
#include "msalab/monte_carlo.hpp"

namespace msalab::cli {

using nlohmann::json;

namespace {

json tally_json(const Tally& t) {
  json j = {{"hits", t.hits}, {"trials", t.trials}, {"frequency", to_json(t.frequency())}};
  if (auto ci = t.ci()) j["ci95"] = {ci->lo, ci->hi};
  else j["ci95"] = nullptr;
  return j;
}

std::string ci_lo(const Tally& t) { return t.ci() ? cell(t.ci()->lo) : std::string(); }
std::string ci_hi(const Tally& t) { return t.ci() ? cell(t.ci()->hi) : std::string(); }

json quartiles_json(const std::optional<Quartiles>& q) {
  if (!q) return nullptr;
  return {{"q1", q->q1}, {"median", q->median}, {"q3", q->q3}, {"iqr", q->iqr()}};
}

json cube_json(const LatticeBox& b) { return {{"center", to_json(b.center())}, {"radius", b.radius()}}; }

std::vector<std::int64_t> checked_scales(const RunConfig& cfg) {
  require(!cfg.scales.empty(), "geometry.scales must list at least one scale");
  for (auto L : cfg.scales) require(L >= 1, "geometry.scales entries must be >= 1");
  return cfg.scales;
}

}  // namespace

double wegner_window_for(const DisorderSpec& spec, int d, std::int64_t L, double target) {
  require(target > 0.0, "wegner.bound_target must be positive");
  // bound is proportional to w^lambda
  const double at_one = wegner_bound(spec, d, L, 1.0);
  return std::pow(target / at_one, 1.0 / spec.lambda);
}

std::vector<Site> random_bad_centers(int d, std::int64_t l, std::int64_t L, std::uint64_t seed, std::uint64_t trial) {
  const CounterKey key{seed, trial, 7};
  const std::int64_t R = L - l;
  const Site origin(d);
  auto uniform_int = [&](std::uint64_t draw, std::int64_t lo, std::int64_t hi) {
    const double u = counter_uniform(key, origin, draw);
    return lo + std::min<std::int64_t>(hi - lo, static_cast<std::int64_t>(u * static_cast<double>(hi - lo + 1)));
  };
  const auto count = static_cast<std::size_t>(uniform_int(0, 1, 3));
  std::vector<Site> z;
  std::uint64_t draw = 1;
  for (std::size_t i = 0; i < count; ++i) {
    Site c(d);
    const bool near = i > 0 && counter_uniform(key, origin, draw++) < 0.5;
    for (int k = 0; k < d; ++k) {
      if (near) {
        const std::int64_t lo = std::max(-R, z[0][k] - 8 * l);
        const std::int64_t hi = std::min(R, z[0][k] + 8 * l);
        c[k] = uniform_int(draw++, lo, hi);
      } else {
        c[k] = uniform_int(draw++, -R, R);
      }
    }
    z.push_back(c);
  }
  return z;
}

std::vector<std::uint64_t> cmd_quasi_metric(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
  require(cfg.qm_rho > 1.0, "quasi_metric.rho must satisfy rho>1 (ρ>1)");
  require(cfg.qm_n_max >= 1, "quasi_metric.n_max must be >= 1");
  const double rho = cfg.qm_rho;
  const auto n_max = cfg.qm_n_max;

  struct Row {
    QuasiMetricCertificate cert;
    std::size_t violations = 0;
    double max_excess = -std::numeric_limits<double>::infinity();
  };
  auto rows = map_trials(1, static_cast<std::uint64_t>(n_max), cfg.workers, [&](std::uint64_t n) {
    Row r;
    r.cert = quasi_metric_constant(rho, static_cast<std::int64_t>(n));
    std::vector<std::vector<double>> samples(cfg.qm_samples);
    const Site none(1);
    for (std::uint64_t s = 0; s < cfg.qm_samples; ++s) {
      const CounterKey key{cfg.seed, n, s};
      // log-uniform coordinates over [1e-3, 1e6]
      for (std::uint64_t k = 0; k < n; ++k)
        samples[s].push_back(std::exp(std::log(1e-3) + counter_uniform(key, none, k) * std::log(1e9)));
      const double lhs = log_weight(std::accumulate(samples[s].begin(), samples[s].end(), 0.0), rho);
      double rhs = r.cert.c_rho * std::pow(std::log(static_cast<double>(n)), rho);
      for (double x : samples[s]) rhs += log_weight(x, rho);
      r.max_excess = std::max(r.max_excess, lhs - rhs);
    }
    r.violations = verify_quasi_metric(r.cert, samples).size();
    return r;
  });

  out.table(out.primary_csv(), {"rho", "n", "x0", "sup_f", "c_rho", "samples", "violations", "max_excess"});
  std::size_t total_violations = 0;
  for (const auto& r : rows) {
    const auto& c = r.cert;
    out.record({{"type", "certificate"}, {"rho", rho}, {"n", c.n}, {"x0", c.x0}, {"sup_f", c.sup_f},
                {"c_rho", c.c_rho}, {"samples", cfg.qm_samples}, {"violations", r.violations},
                {"max_excess", cfg.qm_samples ? json(r.max_excess) : json()}});
    out.row(out.primary_csv(), {cell(rho), cell(c.n), cell(c.x0), cell(c.sup_f), cell(c.c_rho),
                                cell(cfg.qm_samples), cell(static_cast<std::uint64_t>(r.violations)),
                                cfg.qm_samples ? cell(r.max_excess) : std::string()});
    total_violations += r.violations;
    log << "n=" << c.n << "  x0=" << c.x0 << "  supF=" << c.sup_f << "  C=" << c.c_rho
        << "  violations=" << r.violations << '\n';
  }
  const auto env = quasi_metric_envelope(rho);
  out.record({{"type", "envelope"}, {"rho", rho}, {"c_sup", env.c_sup}, {"n_at_sup", env.n_at_sup},
              {"c_at_n_max", env.c_at_n_max}, {"n_max", env.n_max}});
  log << "sup_n C(rho, n) = " << env.c_sup << " at n=" << env.n_at_sup << "; C at n=" << env.n_max << " is "
      << env.c_at_n_max << '\n';
  log << "total violations: " << total_violations << '\n';
  return {cfg.seed};
}

std::vector<std::uint64_t> cmd_wegner(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
  const auto model = cfg.model();
  const auto scales = checked_scales(cfg);
  const auto plan = cfg.plan();
  out.table(out.primary_csv(), {"L", "E", "window", "bound", "hits", "trials", "frequency", "ci_lo", "ci_hi",
                                "below_bound", "ci_within"});
  for (auto L : scales) {
    std::vector<double> windows = cfg.windows;
    if (cfg.bound_target > 0.0) windows = {wegner_window_for(model.disorder, model.d, L, cfg.bound_target)};
    for (double w : windows) {
      const auto r = wegner_check(L, cfg.E, w, model, plan);
      out.record({{"type", "wegner"}, {"scale", r.L}, {"E", r.E}, {"window", r.window}, {"bound", r.bound},
                  {"epsilon", model.epsilon}, {"tally", tally_json(r.tally)}, {"below_bound", r.below_bound},
                  {"ci_within", r.ci_within}});
      out.row(out.primary_csv(), {cell(r.L), cell(r.E), cell(r.window), cell(r.bound), cell(r.tally.hits),
                                  cell(r.tally.trials), cell(r.tally.frequency()), ci_lo(r.tally), ci_hi(r.tally),
                                  cell(r.below_bound), cell(r.ci_within)});
      log << "L=" << L << "  w=" << w << "  bound=" << r.bound << "  freq=" << cell(r.tally.frequency())
          << (r.below_bound ? "  below bound" : "  ABOVE bound") << '\n';
    }
  }
  return {cfg.seed};
}

std::vector<std::uint64_t> cmd_pair_resonance(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
  const auto model = cfg.model();
  const auto weights = cfg.weights();
  const auto r = pair_resonance_check(cfg.L, cfg.l, model, weights.rho_prime, cfg.plan(), cfg.same_seed);
  out.record({{"type", "pair_resonance"}, {"scale", r.L}, {"l", r.l}, {"threshold", r.threshold},
              {"bound", r.bound}, {"vacuous", r.vacuous}, {"geometry_consistent", r.geometry_consistent},
              {"same_seed", r.same_seed}, {"tally", tally_json(r.tally)}});
  out.table(out.primary_csv(), {"L", "l", "threshold", "bound", "vacuous", "geometry_consistent", "same_seed",
                                "hits", "trials", "frequency", "ci_lo", "ci_hi"});
  out.row(out.primary_csv(), {cell(r.L), cell(r.l), cell(r.threshold), cell(r.bound), cell(r.vacuous),
                              cell(r.geometry_consistent), cell(r.same_seed), cell(r.tally.hits),
                              cell(r.tally.trials), cell(r.tally.frequency()), ci_lo(r.tally), ci_hi(r.tally)});
  log << "L=" << r.L << "  threshold=" << r.threshold << "  frequency=" << cell(r.tally.frequency())
      << "  bound=" << r.bound << (r.vacuous ? " (vacuous)" : "") << '\n';
  return {cfg.seed};
}

std::vector<std::uint64_t> cmd_bad_pair(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
  const auto model = cfg.model();
  const auto weights = cfg.weights();
  const auto scales = checked_scales(cfg);
  const auto grid = energy_grid(cfg.e_lo, cfg.e_hi, cfg.grid_points);
  out.table(out.primary_csv(), {"L", "kappa", "grid_points", "pair_hits", "single_hits", "trials",
                                "pair_frequency", "pair_ci_lo", "pair_ci_hi", "single_frequency", "no_data"});
  std::vector<std::optional<double>> freqs;
  for (auto L : scales) {
    const auto r = estimate_bad_pair_prob(L, cfg.kappa, grid, model, weights, cfg.plan());
    const bool no_data = r.pair.trials == 0;
    out.record({{"type", "bad_pair"}, {"scale", r.L}, {"kappa", r.kappa}, {"E", {cfg.e_lo, cfg.e_hi}},
                {"grid_points", grid.size()}, {"pair", tally_json(r.pair)}, {"single", tally_json(r.single)},
                {"no_data", no_data}});
    out.row(out.primary_csv(), {cell(r.L), cell(r.kappa), cell(static_cast<std::uint64_t>(grid.size())),
                                cell(r.pair.hits), cell(r.single.hits), cell(r.pair.trials),
                                cell(r.pair.frequency()), ci_lo(r.pair), ci_hi(r.pair), cell(r.single.frequency()),
                                cell(no_data)});
    freqs.push_back(r.pair.frequency());
    log << "L=" << L << "  P(pair bad)=" << (no_data ? "no data" : cell(r.pair.frequency()))
        << "  P(single bad)=" << cell(r.single.frequency()) << '\n';
  }
  json decreasing = nullptr;
  if (std::all_of(freqs.begin(), freqs.end(), [](auto f) { return f.has_value(); }) && freqs.size() > 1) {
    bool dec = true;
    for (std::size_t k = 1; k < freqs.size(); ++k) dec = dec && *freqs[k] <= *freqs[k - 1];
    decreasing = dec;
  }
  out.record({{"type", "summary"}, {"scales", scales}, {"decreasing", decreasing}});
  return {cfg.seed};
}

std::vector<std::uint64_t> cmd_coupling(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
  const auto model = cfg.model();
  const auto params = cfg.msa();
  const auto suite = coupling_suite(cfg.l, cfg.E, cfg.kappa, model, params, cfg.plan());
  out.table(out.primary_csv(), {"trial", "verdict", "L", "l", "E", "kappa", "kappa_prime", "hyp1", "hyp2", "hyp3",
                                "hyp1_margin", "hyp2_margin", "bad_disjoint", "tightest"});
  for (const auto& r : suite.reports) {
    json bad = json::array();
    for (const auto& z : r.bad_centers) bad.push_back(to_json(z));
    json rec = {{"type", "trial"},
                {"trial", r.trial},
                {"verdict", to_string(r.verdict)},
                {"scale", r.L},
                {"l", r.l},
                {"E", r.E},
                {"kappa", r.kappa},
                {"kappa_prime", r.kappa_prime},
                {"kappa_prime_vacuous", r.kappa_prime_vacuous},
                {"hyp1", r.hyp1},
                {"hyp2", r.hyp2},
                {"hyp2_vacuous", r.hyp2_vacuous},
                {"hyp3", r.hyp3},
                {"hyp1_margin", r.hyp1_margin},
                {"hyp2_margin", std::isfinite(r.hyp2_margin) ? json(r.hyp2_margin) : json()},
                {"hyp2_checked", r.hyp2_checked},
                {"bad_disjoint", r.bad_disjoint},
                {"bad_centers", bad},
                {"tightest", r.tightest}};
    if (r.outer) {
      rec["outer_good"] = r.outer->good;
      rec["outer_enr"] = r.outer->enr;
      if (r.outer->worst_witness) rec["outer_worst_log_ratio"] = r.outer->worst_witness->log_ratio;
    }
    out.record(std::move(rec));
    out.row(out.primary_csv(), {cell(r.trial), to_string(r.verdict), cell(r.L), cell(r.l), cell(r.E), cell(r.kappa),
                                cell(r.kappa_prime), cell(r.hyp1), cell(r.hyp2), cell(r.hyp3), cell(r.hyp1_margin),
                                std::isfinite(r.hyp2_margin) ? cell(r.hyp2_margin) : std::string(),
                                cell(static_cast<std::uint64_t>(r.bad_disjoint)), r.tightest});
  }
  out.record({{"type", "summary"},
              {"scale", suite.reports.empty() ? 0 : suite.reports.front().L},
              {"l", cfg.l},
              {"E", cfg.E},
              {"kappa", cfg.kappa},
              {"pass", suite.pass},
              {"counterexample", suite.counterexample},
              {"not_applicable", suite.not_applicable}});
  log << "PASS " << suite.pass << "  COUNTEREXAMPLE " << suite.counterexample << "  NOT-APPLICABLE "
      << suite.not_applicable << '\n';
  return {cfg.seed};
}

std::vector<std::uint64_t> cmd_ladder(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
  const auto params = cfg.msa();
  require(cfg.horizon >= 1, "msa.horizon must be >= 1");
  const auto minimal = minimal_admissible_logL0(params);
  const double logL0 = cfg.logL0.value_or(minimal.logL0);
  const auto lad = ladder(params, logL0, cfg.horizon);

  out.record({{"type", "minimal"}, {"logL0", minimal.logL0}, {"series_at", minimal.series_at},
              {"budget", params.kappa0 - params.kappa_inf}, {"iterations", minimal.iterations},
              {"loss_constant", params.loss_constant()}});
  out.record({{"type", "ladder"},
              {"logL0", logL0},
              {"horizon", lad.horizon},
              {"valid", lad.valid},
              {"series_bound", lad.series_bound},
              {"total_loss", lad.cumulative_loss.back()},
              {"kappa_final", lad.kappa.back()}});
  out.table(out.primary_csv(), {"s", "logL", "kappa", "cumulative_loss"});
  for (std::size_t s = 0; s < lad.kappa.size(); ++s) {
    out.record({{"type", "step"}, {"s", s}, {"logL", lad.logL[s]}, {"kappa", lad.kappa[s]},
                {"cumulative_loss", lad.cumulative_loss[s]}});
    out.row(out.primary_csv(), {cell(static_cast<std::uint64_t>(s)), cell(lad.logL[s]), cell(lad.kappa[s]),
                                cell(lad.cumulative_loss[s])});
  }

  log << std::setprecision(10) << "minimal admissible logL0 = " << minimal.logL0 << "  (series bound "
      << minimal.series_at << " < kappa0 - kappa_inf = " << params.kappa0 - params.kappa_inf << ")\n";
  log << "ladder from logL0 = " << logL0 << (lad.valid ? ": valid" : ": INVALID") << ", kappa_s > " << params.kappa_inf
      << (lad.valid ? " for all " : " fails within ") << lad.horizon << " steps\n";
  for (std::size_t s = 0; s < lad.kappa.size(); ++s) {
    if (s < 10 || s + 1 == lad.kappa.size())
      log << "  s=" << s << "  logL=" << lad.logL[s] << "  kappa=" << lad.kappa[s] << '\n';
    else if (s == 10)
      log << "  ...\n";
  }
  return {};
}

std::vector<std::uint64_t> cmd_eigen_decay(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
  const auto ycfg = cfg.ensemble();
  const auto result = yeung_oono_experiment(ycfg);
  const std::string profiles = "eigen-decay-profiles.csv";
  out.table(out.primary_csv(), {"seed", "eigenvalue", "center", "c", "rho_fit", "r2", "PR"});
  if (ycfg.keep_profiles) out.table(profiles, {"seed", "eigenvalue", "r", "loglog_1pr", "log_neglog_psi"});
  for (const auto& row : result.rows) {
    json rec = {{"type", "state"},        {"seed", row.seed}, {"eigenvalue", row.eigenvalue},
                {"center", to_json(row.center)}, {"fitted", row.fitted}, {"pr", row.pr}};
    if (row.fitted) {
      rec["c"] = row.fit.c;
      rec["rho_fit"] = row.fit.rho_fit;
      rec["r2"] = row.fit.r2;
      rec["n_points"] = row.fit.n_points;
      rec["floor"] = row.fit.floor;
      if (row.fit.rho_hint) {
        rec["rho_hint"] = *row.fit.rho_hint;
        rec["c_hint"] = row.fit.c_hint;
        rec["r2_hint"] = row.fit.r2_hint;
        rec["envelope_mismatch"] = row.fit.envelope_mismatch;
      }
    }
    out.record(std::move(rec));
    out.row(out.primary_csv(), {cell(row.seed), cell(row.eigenvalue), cell(row.center),
                                row.fitted ? cell(row.fit.c) : "no_fit", row.fitted ? cell(row.fit.rho_fit) : "no_fit",
                                row.fitted ? cell(row.fit.r2) : "no_fit", cell(row.pr)});
    if (ycfg.keep_profiles)
      for (const auto& p : row.profile)
        out.row(profiles, {cell(row.seed), cell(row.eigenvalue), cell(p.r), cell(p.x), cell(p.y)});
  }
  const auto& s = result.summary;
  json summary = {{"type", "summary"},
                  {"family", to_string(ycfg.fit.family)},
                  {"side", ycfg.side},
                  {"d", ycfg.d},
                  {"epsilon", ycfg.epsilon},
                  {"seeds", ycfg.seeds.size()},
                  {"selected", s.selected},
                  {"fitted", s.fitted},
                  {"no_fit", s.no_fit},
                  {"c", quartiles_json(s.c)},
                  {"rho_fit", quartiles_json(s.rho_fit)},
                  {"r2", quartiles_json(s.r2)},
                  {"pr", quartiles_json(s.pr)},
                  {"hopping_gamma", s.gamma},
                  {"hopping_rho", s.rho},
                  {"rate_coefficient", s.rate_coefficient}};
  if (s.c) {
    summary["c_minus_gamma"] = s.c->median - s.gamma;
    summary["c_over_rate_coefficient"] = s.c->median / s.rate_coefficient;
  }
  if (s.rho_fit) summary["rho_fit_minus_rho"] = s.rho_fit->median - s.rho;
  out.record(summary);

  log << "selected " << s.selected << " states, fitted " << s.fitted << ", no fit " << s.no_fit << '\n';
  if (s.c && s.rho_fit && s.r2) {
    log << "median c = " << s.c->median << " (IQR " << s.c->iqr() << ") vs gamma = " << s.gamma
        << " and kappa_inf/(2 alpha^rho) = " << s.rate_coefficient << '\n';
    log << "median rho_fit = " << s.rho_fit->median << " (IQR " << s.rho_fit->iqr() << ") vs rho = " << s.rho << '\n';
    log << "median r2 = " << s.r2->median << '\n';
  }
  return ycfg.seeds;
}

std::vector<std::uint64_t> cmd_cover_check(const RunConfig& cfg, RunWriter& out, std::ostream& log) {
  require(cfg.cover_d >= 1 && cfg.cover_d <= kMaxDim, "cover.d must lie in [1, 3]");
  require(cfg.cover_l >= 1, "cover.l must be >= 1");
  require(cfg.cover_L >= 26 * cfg.cover_l, "cover.L must satisfy L>=26l");
  const int d = cfg.cover_d;
  const auto l = cfg.cover_l;
  const auto L = cfg.cover_L;
  const LatticeBox parent(Site(d), L);

  struct Row {
    std::vector<Site> centers;
    DangerousCover cover;
    CoverInvariantReport inv;
    DisjointnessCheck disjoint;
  };
  auto rows = map_trials(cfg.first_trial, cfg.trials, cfg.workers, [&](std::uint64_t trial) {
    auto z = random_bad_centers(d, l, L, cfg.seed, trial);
    auto cover = dangerous_cover(z, parent, l);
    auto inv = check_cover_invariants(cover);
    auto dis = cover_disjointness_check(cover, z, l);
    return Row{std::move(z), std::move(cover), inv, dis};
  });

  out.table(out.primary_csv(), {"trial", "n_centers", "construction", "n_cubes", "total_diameter", "separated",
                                "covers_anchors", "diameter_ok", "inside_parent", "disjoint"});
  std::uint64_t failures = 0;
  std::map<std::string, std::uint64_t> cases;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    const std::uint64_t trial = cfg.first_trial + k;
    json centers = json::array(), cubes = json::array();
    for (const auto& z : r.centers) centers.push_back(to_json(z));
    for (const auto& b : r.cover.cubes) cubes.push_back(cube_json(b));
    const bool ok = r.inv.ok() && r.disjoint.pass;
    failures += ok ? 0 : 1;
    ++cases[to_string(r.cover.construction)];
    json rec = {{"type", "trial"},
                {"trial", trial},
                {"d", d},
                {"l", l},
                {"scale", L},
                {"centers", centers},
                {"construction", to_string(r.cover.construction)},
                {"cubes", cubes},
                {"total_diameter", r.cover.total_diameter()},
                {"separated", r.inv.separated},
                {"covers_anchors", r.inv.covers_anchors},
                {"diameter_ok", r.inv.diameter_ok},
                {"inside_parent", r.inv.inside_parent},
                {"disjoint", r.disjoint.pass}};
    if (r.disjoint.witness) rec["witness"] = to_json(*r.disjoint.witness);
    out.record(std::move(rec));
    out.row(out.primary_csv(), {cell(trial), cell(static_cast<std::uint64_t>(r.centers.size())),
                                to_string(r.cover.construction), cell(static_cast<std::uint64_t>(r.cover.cubes.size())),
                                cell(r.cover.total_diameter()), cell(r.inv.separated), cell(r.inv.covers_anchors),
                                cell(r.inv.diameter_ok), cell(r.inv.inside_parent), cell(r.disjoint.pass)});
  }
  out.record({{"type", "summary"}, {"d", d}, {"l", l}, {"scale", L}, {"trials", rows.size()},
              {"failures", failures}, {"cases", cases}});
  log << rows.size() << " triples, " << failures << " failures;";
  for (const auto& [name, n] : cases) log << ' ' << name << '=' << n;
  log << '\n';
  return {cfg.seed};
}

const std::vector<CommandEntry>& command_table() {
  static const std::vector<CommandEntry> table = {
      {"quasi-metric", "certify C(rho, n) for n = 1..n_max and test random tuples", cmd_quasi_metric},
      {"wegner", "empirical P(dist(E, spec H_L) <= w) against the Wegner bound", cmd_wegner},
      {"pair-resonance", "empirical probability that two disjoint boxes resonate", cmd_pair_resonance},
      {"bad-pair", "probability that two separated cubes are both bad for some grid energy", cmd_bad_pair},
      {"coupling", "check the coupling implication on sampled configurations", cmd_coupling},
      {"ladder", "minimal admissible logL0 and the kappa_s trajectory", cmd_ladder},
      {"eigen-decay", "ensemble fit of eigenvector decay against the hopping envelope", cmd_eigen_decay},
      {"cover-check", "dangerous-cube cover invariants on random bad-centre triples", cmd_cover_check},
  };
  return table;
}

}  // namespace msalab::cli
