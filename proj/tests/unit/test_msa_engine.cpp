#include <cmath>

#include <gtest/gtest.h>

#include "msalab/errors.hpp"
#include "msalab/msa_engine.hpp"
#include "support/gen.hpp"

using namespace msalab;
using msalab::testing::for_cases;
using msalab::testing::Gen;

namespace {

MSAParams desk_params() {
  MSAParams p;
  p.alpha = 1.3;
  p.p = 6.0;
  p.d = 1;
  p.weights = WeightParams{1.0, 2.0, 1.5};
  p.kappa0 = 0.2;
  p.kappa_inf = 0.1;
  return p;
}

// Three-term loss written out from its definition.
double loss_oracle(double logL, double gamma, double rho, double rho_prime, double alpha, double K) {
  return 10.0 * gamma * std::exp(-(0.8 * alpha - 1.0) * logL) + 10.0 * gamma / std::pow(logL, rho - 1.0) +
         K / std::pow(logL, rho - rho_prime);
}

DisorderSpec uniform_beta_one() {
  auto s = DisorderSpec::uniform(1.0);
  s.beta = 1.0;
  return s;
}

ModelParams model_with(double eps, DisorderSpec spec = uniform_beta_one()) {
  ModelParams m;
  m.d = 1;
  m.kernel = HoppingKernel::log_power(1.0, 2.0);
  m.disorder = spec;
  m.epsilon = eps;
  return m;
}

}  // namespace

TEST(MSAParams, ValidationQuotesConstraints) {
  auto expect_msg = [](MSAParams p, const std::string& needle) {
    try {
      p.validate();
      ADD_FAILURE() << "accepted";
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  auto p = desk_params();
  EXPECT_NO_THROW(p.validate());
  p.p = 5.0;
  expect_msg(p, "p>5d");
  p = desk_params();
  p.alpha = 1.2;
  expect_msg(p, "5/4<alpha");
  p = desk_params();
  p.alpha = 1.6;  // 2p/(p+2d) = 1.5
  expect_msg(p, "2p/(p+2d)");
  p = desk_params();
  p.kappa_inf = 0.3;
  expect_msg(p, "kappa_inf<kappa0");
  p = desk_params();
  p.kappa0 = 0.25;
  p.kappa_inf = 0.1;
  expect_msg(p, "γ/5");
}

TEST(NextScale, Examples) {
  const auto a = next_scale(10, 1.3);
  EXPECT_EQ(a.value, 19);
  EXPECT_FALSE(a.degenerate);
  const auto b = next_scale(2, 1.25);
  EXPECT_EQ(b.value, 2);
  EXPECT_TRUE(b.degenerate);
  for (std::int64_t L : {2, 7, 1000}) EXPECT_EQ(next_scale(L, 1.0).value, L);
  const auto c = next_scale(1000000000, 2.5);
  EXPECT_TRUE(c.overflow);
  EXPECT_FALSE(c.value.has_value());
}

TEST(KappaLoss, TermByTerm) {
  const auto p = desk_params();
  const auto a = kappa_loss(1e4, p);
  EXPECT_NEAR(a.log_term, 1e-3, 1e-15);
  EXPECT_NEAR(a.resonance, 0.34, 1e-12);
  EXPECT_LT(a.geometric, 1e-100);
  EXPECT_NEAR(a.total, 0.341, 1e-9);
  const auto b = kappa_loss(1e8, p);
  EXPECT_NEAR(b.total, 1e-7 + 34e-4, 1e-12);
}

TEST(KappaLoss, MatchesOracleAndDecreasesKappa) {
  for_cases(200, 51, [](Gen& g, int) {
    auto p = desk_params();
    p.weights.rho = g.uniform(1.2, 4.0);
    p.weights.rho_prime = g.uniform(1.01, p.weights.rho - 0.01);
    p.alpha = g.uniform(1.26, 1.49);
    p.constant = g.coin() ? KappaConstant::TwoPowRho : KappaConstant::AlphaPowRhoPrime;
    const double K = 30.0 + (p.constant == KappaConstant::TwoPowRho ? std::pow(2.0, p.weights.rho)
                                                                    : std::pow(p.alpha, p.weights.rho_prime));
    const double logL = g.log_uniform(0.5, 1e12);
    const double expect = loss_oracle(logL, 1.0, p.weights.rho, p.weights.rho_prime, p.alpha, K);
    EXPECT_NEAR(kappa_loss(logL, p).total, expect, 1e-12 * expect);
    const double kappa = g.uniform(-1, 1);
    EXPECT_EQ(kappa_step(kappa, logL, p), kappa - kappa_loss(logL, p).total);
    if (expect > 1e-15 * std::abs(kappa)) { EXPECT_LT(kappa_step(kappa, logL, p), kappa); }
  });
}

TEST(Ladder, EqualKappasAreNeverValid) {
  auto p = desk_params();
  p.kappa_inf = p.kappa0;
  EXPECT_FALSE(ladder(p, 1e9, 50).valid);
}

TEST(Ladder, MinimalScaleIsTightAndValid) {
  const auto p = desk_params();
  const auto m = minimal_admissible_logL0(p);
  const double budget = p.kappa0 - p.kappa_inf;
  EXPECT_TRUE(std::isfinite(m.logL0));
  EXPECT_LT(series_loss_bound(p, m.logL0), budget);
  EXPECT_GT(series_loss_bound(p, m.logL0 * (1 - 1e-9)), budget);
  const auto lad = ladder(p, m.logL0, 1000);
  EXPECT_TRUE(lad.valid);
  for (std::size_t s = 1; s < lad.kappa.size(); ++s) {
    // the budget is used up to rounding, so late steps may tie at kappa_inf
    EXPECT_LE(lad.kappa[s], lad.kappa[s - 1]);
    EXPECT_GE(lad.kappa[s], p.kappa_inf - 1e-15);
    EXPECT_NEAR(lad.logL[s], p.alpha * lad.logL[s - 1], 1e-12 * lad.logL[s]);
  }
  EXPECT_LE(lad.cumulative_loss.back(), lad.series_bound * (1 + 1e-12));
}

TEST(Ladder, SeriesBoundDominatesBruteForceSum) {
  for_cases(100, 52, [](Gen& g, int) {
    auto p = desk_params();
    p.weights.rho = g.uniform(1.5, 3.0);
    p.weights.rho_prime = g.uniform(1.1, p.weights.rho - 0.05);
    p.alpha = g.uniform(1.26, 1.49);
    const double logL0 = g.log_uniform(1.0, 1e9);
    const double K = 30.0 + std::pow(2.0, p.weights.rho);
    double sum = 0.0, logL = logL0;
    for (int s = 0; s < 4000 && logL < 1e300; ++s, logL *= p.alpha)
      sum += loss_oracle(logL, 1.0, p.weights.rho, p.weights.rho_prime, p.alpha, K);
    EXPECT_GE(series_loss_bound(p, logL0) * (1 + 1e-12), sum);
  });
}

TEST(InitialConstants, Examples) {
  const auto c = initial_constants(1.0, 1.0, 6.0, 1, 20, 2.0);
  EXPECT_NEAR(c.zeta, 0.5 / (std::pow(20.0, 6) * 41.0), 1e-22);
  EXPECT_NEAR(c.zeta, 1.905e-10, 0.001e-10);
  EXPECT_NEAR(c.eta, c.zeta / 2, 1e-24);
  EXPECT_NEAR(c.epsilon0, std::min(c.zeta / 8.0, c.zeta * c.zeta / 82.0), 1e-12 * c.epsilon0);
  const auto half = initial_constants(0.5, 1.0, 6.0, 1, 20, 2.0);
  EXPECT_NEAR(half.zeta, c.zeta / 2, 1e-22);
  const auto huge = initial_constants(1.0, 1.0, 6.0, 1, 20, 1e300);
  EXPECT_LT(huge.epsilon0, 1e-300);
}

TEST(Wegner, BoundFormula) {
  EXPECT_NEAR(wegner_bound(uniform_beta_one(), 1, 5, 1e-3), 0.242, 1e-12);
  const auto s = DisorderSpec::power(0.5);
  EXPECT_NEAR(wegner_bound(s, 2, 3, 0.01), std::sqrt(2.0) * std::pow(7.0, 3.0) * 0.1 / s.beta, 1e-9);
}

TEST(Wegner, EmpiricalBelowBound) {
  const TrialPlan plan{5, 0, 2000, 1};
  const auto r = wegner_check(5, 0.0, 1e-3, model_with(0.01), plan);
  EXPECT_NEAR(r.bound, 0.242, 1e-12);
  EXPECT_EQ(r.tally.trials, 2000u);
  EXPECT_TRUE(r.below_bound);
  EXPECT_TRUE(r.ci_within);
  const auto z = wegner_check(5, 0.0, 0.0, model_with(0.01), TrialPlan{5, 0, 200, 1});
  EXPECT_EQ(z.tally.hits, 0u);
}

TEST(Wegner, RefusesOutsideHypotheses) {
  EXPECT_THROW(wegner_check(5, 0.0, 1e-3, model_with(0.01, DisorderSpec::bernoulli(-1, 1, 0.5)), TrialPlan{1, 0, 10, 1}),
               NumericalRefusal);
  EXPECT_THROW(wegner_check(5, 0.0, 0.5, model_with(0.01), TrialPlan{1, 0, 10, 1}), NumericalRefusal);
}

TEST(PairResonance, SameSeedAlwaysResonates) {
  const auto r = pair_resonance_check(6, 2, model_with(0.01), 1.5, TrialPlan{3, 0, 50, 1}, true);
  EXPECT_EQ(r.tally.hits, 50u);
}

TEST(PairResonance, TinyThresholdNeverResonates) {
  const auto r = pair_resonance_check(20, 3, model_with(0.01), 6.0, TrialPlan{3, 0, 100, 1});
  EXPECT_LT(r.threshold, 1e-300);
  EXPECT_EQ(r.tally.hits, 0u);
  EXPECT_FALSE(r.geometry_consistent);
}

TEST(PairResonance, VacuousBoundIsReported) {
  const auto r = pair_resonance_check(20, 3, model_with(0.01), 1.5, TrialPlan{3, 0, 100, 1});
  EXPECT_TRUE(r.vacuous);
  EXPECT_GE(r.bound, 1.0);
  EXPECT_LE(r.tally.frequency().value(), r.bound);
}

TEST(BadPair, FarPotentialNeverBad) {
  auto spec = DisorderSpec::bernoulli(2.0, 3.0, 0.5);
  spec.M = 3.0;
  const auto r = estimate_bad_pair_prob(8, 0.2, energy_grid(-0.1, 0.1, 21), model_with(0.0, spec), WeightParams{},
                                        TrialPlan{1, 0, 50, 1});
  EXPECT_EQ(r.pair.hits, 0u);
  EXPECT_EQ(r.single.hits, 0u);
}

TEST(BadPair, NoTrialsMeansNoData) {
  const auto r = estimate_bad_pair_prob(8, 0.2, energy_grid(-0.1, 0.1, 21), model_with(1e-3), WeightParams{},
                                        TrialPlan{1, 0, 0, 1});
  EXPECT_EQ(r.pair.trials, 0u);
  EXPECT_FALSE(r.pair.frequency().has_value());
  EXPECT_FALSE(r.pair.ci().has_value());
}

TEST(BadPair, DeterministicAndMergeable) {
  const auto grid = energy_grid(-0.1, 0.1, 21);
  const auto m = model_with(1e-3);
  const auto all = estimate_bad_pair_prob(6, 0.2, grid, m, WeightParams{}, TrialPlan{9, 0, 80, 1});
  const auto par = estimate_bad_pair_prob(6, 0.2, grid, m, WeightParams{}, TrialPlan{9, 0, 80, 4});
  const auto a = estimate_bad_pair_prob(6, 0.2, grid, m, WeightParams{}, TrialPlan{9, 0, 30, 1});
  const auto b = estimate_bad_pair_prob(6, 0.2, grid, m, WeightParams{}, TrialPlan{9, 30, 50, 2});
  EXPECT_EQ(all.pair, par.pair);
  EXPECT_EQ(all.single, par.single);
  Tally merged = a.pair;
  merged.merge(b.pair);
  EXPECT_EQ(merged, all.pair);
  EXPECT_LE(all.pair.hits, all.single.hits);
}

TEST(EnergyGrid, EndpointsAndSpacing) {
  const auto g = energy_grid(-0.1, 0.1, 41);
  ASSERT_EQ(g.size(), 41u);
  EXPECT_DOUBLE_EQ(g.front(), -0.1);
  EXPECT_DOUBLE_EQ(g.back(), 0.1);
  EXPECT_EQ(energy_grid(0.3, 0.3, 1), std::vector<double>{0.3});
}

TEST(Wilson, KnownValues) {
  const auto ci = wilson_interval(5, 10).value();
  EXPECT_NEAR(ci.lo, 0.2365930, 1e-6);
  EXPECT_NEAR(ci.hi, 0.7634070, 1e-6);
  EXPECT_EQ(wilson_interval(0, 100)->lo, 0.0);
  EXPECT_FALSE(wilson_interval(0, 0).has_value());
}

TEST(Coupling, DecoupledFarEnergyPasses) {
  auto spec = DisorderSpec::bernoulli(2.0, 3.0, 0.5);
  spec.M = 3.0;
  const auto p = desk_params();
  const auto box = LatticeBox(Site{0}, 14);
  const auto s = draw_sample(box, spec, 0.0, HoppingKernel::log_power(1.0, 2.0), 1, 0);
  const auto r = coupling_check(s, 0.0, 8, 0.15, p);
  EXPECT_TRUE(r.hyp1 && r.hyp2 && r.hyp3);
  EXPECT_EQ(r.verdict, CouplingVerdict::Pass);
  EXPECT_EQ(r.bad_disjoint, 0u);
  EXPECT_TRUE(r.kappa_prime_vacuous);
}

TEST(Coupling, ResonantOuterBoxIsNotApplicable) {
  const auto p = desk_params();
  const auto s = draw_sample(LatticeBox(Site{0}, 14), DisorderSpec::uniform(1.0), 0.01,
                             HoppingKernel::log_power(1.0, 2.0), 4, 0);
  const double E = spectrum(s)[14];
  const auto r = coupling_check(s, E, 8, 0.15, p);
  EXPECT_FALSE(r.hyp1);
  EXPECT_EQ(r.verdict, CouplingVerdict::NotApplicable);
  EXPECT_EQ(r.tightest, "hyp1");
}

TEST(Coupling, RejectsInconsistentScales) {
  const auto s = draw_sample(LatticeBox(Site{0}, 13), DisorderSpec::uniform(1.0), 0.01,
                             HoppingKernel::log_power(1.0, 2.0), 4, 0);
  EXPECT_THROW(coupling_check(s, 0.0, 8, 0.15, desk_params()), ValidationError);
}

TEST(Coupling, SuiteHasNoCounterexamplesAndIsWorkerIndependent) {
  const auto m = model_with(1e-2);
  const auto a = coupling_suite(8, 0.0, 0.15, m, desk_params(), TrialPlan{11, 0, 60, 1});
  const auto b = coupling_suite(8, 0.0, 0.15, m, desk_params(), TrialPlan{11, 0, 60, 8});
  EXPECT_EQ(a.counterexample, 0u);
  EXPECT_EQ(a.pass + a.counterexample + a.not_applicable, 60u);
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    EXPECT_EQ(a.reports[i].verdict, b.reports[i].verdict);
    EXPECT_EQ(a.reports[i].hyp1_margin, b.reports[i].hyp1_margin);
    EXPECT_EQ(a.reports[i].bad_centers, b.reports[i].bad_centers);
  }
}

TEST(MapTrials, RethrowsLowestFailingTrial) {
  try {
    map_trials(0, 20, 4, [](std::uint64_t t) -> int {
      if (t == 7 || t == 13) throw std::runtime_error("trial " + std::to_string(t));
      return 0;
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "trial 7");
  }
}
