#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "msalab/errors.hpp"
#include "msalab/weight_kernel.hpp"
#include "support/gen.hpp"

using namespace msalab;
using msalab::testing::for_cases;
using msalab::testing::Gen;

namespace {

double lw(double r, double rho) { return std::pow(std::log1p(r), rho); }

// F on the diagonal, written out independently of the library.
double diag_F(double x, std::int64_t n, double rho) {
  return std::pow(std::log1p(static_cast<double>(n) * x), rho) - static_cast<double>(n) * std::pow(std::log1p(x), rho);
}

double grid_max(std::int64_t n, double rho, int points, double lo, double hi) {
  double best = -1e300;
  for (int k = 0; k < points; ++k) best = std::max(best, diag_F(lo + (hi - lo) * k / (points - 1), n, rho));
  return best;
}

double h(double s, double rho) { return std::pow(std::log(s), rho - 1.0) / s; }

}  // namespace

TEST(LogWeight, Examples) {
  EXPECT_EQ(log_weight(Site{0, 0}, 2.0), 0.0);
  EXPECT_NEAR(log_weight(Site{1, 0}, 2.0), 0.480453013918201, 1e-12);
  EXPECT_NEAR(log_weight(Site{3, -4, 0}, 1.5), std::pow(std::log(5.0), 1.5), 1e-12);
  EXPECT_NEAR(log_weight(Site{3, -4, 0}, 1.5), 2.041791, 1e-6);
}

TEST(LogWeight, ZeroOnlyAtOriginAndMonotone) {
  for_cases(200, 11, [](Gen& g, int) {
    const double rho = g.uniform(1.01, 4.0);
    const Site x = g.site(3, 50);
    EXPECT_EQ(log_weight(x, rho) == 0.0, x.sup_norm() == 0);
    const double r1 = g.uniform(0, 100), r2 = r1 + g.uniform(0, 100);
    EXPECT_LE(log_weight(r1, rho), log_weight(r2, rho));
  });
}

TEST(QuasiMetric, SingleSummandHasNoExcess) {
  const auto c = quasi_metric_constant(2.0, 1);
  EXPECT_EQ(c.sup_f, 0.0);
  EXPECT_EQ(c.c_rho, 0.0);
}

TEST(QuasiMetric, RhoTwoPairMatchesDenseGrid) {
  const auto c = quasi_metric_constant(2.0, 2);
  EXPECT_GT(c.x0, (std::exp(1.0) - 1.0) / 2.0);
  EXPECT_LT(c.x0, std::exp(1.0) - 1.0);
  EXPECT_NEAR(c.sup_f, diag_F(c.x0, 2, 2.0), 1e-14);
  EXPECT_NEAR(c.c_rho, c.sup_f / std::pow(std::log(2.0), 2.0), 1e-14);
  // 2-d grid over [0, e]^2, not restricted to the diagonal
  const double top = std::exp(1.0);
  double best = -1e300;
  const int m = 2000;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double a = top * i / (m - 1), b = top * j / (m - 1);
      best = std::max(best, lw(a + b, 2.0) - lw(a, 2.0) - lw(b, 2.0));
    }
  EXPECT_LE(best, c.sup_f + 1e-12);
  EXPECT_NEAR(best, c.sup_f, 1e-6);
}

TEST(QuasiMetric, RhoThreeFiveAgreesWithFineDiagonalGrid) {
  const auto c = quasi_metric_constant(3.0, 5);
  const double fine = grid_max(5, 3.0, 400001, 0.0, std::exp(2.0));
  EXPECT_LE(fine, c.sup_f + 1e-12);
  EXPECT_NEAR(fine, c.sup_f, 1e-8);
  // the literal 2000-point grid undershoots by at most the discretisation error
  const double coarse = grid_max(5, 3.0, 2000, 0.0, std::exp(2.0));
  const double spacing = std::exp(2.0) / 1999.0;
  EXPECT_LE(coarse, c.sup_f + 1e-12);
  EXPECT_LT(c.sup_f - coarse, 5.0 * spacing * spacing);
}

TEST(QuasiMetric, BisectionSolvesFixedPointEquation) {
  for_cases(300, 12, [](Gen& g, int) {
    const double rho = g.uniform(1.05, 4.0);
    const auto n = g.integer(2, 60);
    const auto c = quasi_metric_constant(rho, n);
    const double lo = std::expm1(rho - 1.0) / static_cast<double>(n), hi = std::expm1(rho - 1.0);
    EXPECT_GT(c.x0, lo);
    EXPECT_LT(c.x0, hi);
    EXPECT_LE(std::abs(h(1.0 + n * c.x0, rho) - h(1.0 + c.x0, rho)), 1e-10);
    EXPECT_GE(c.sup_f, 0.0);
  });
}

TEST(QuasiMetric, RandomTuplesNeverExceedSupF) {
  for_cases(200, 13, [](Gen& g, int) {
    const double rho = g.uniform(1.1, 3.5);
    const auto n = g.integer(2, 8);
    const auto c = quasi_metric_constant(rho, n);
    for (int s = 0; s < 200; ++s) {
      std::vector<double> xs(static_cast<std::size_t>(n));
      for (auto& x : xs) x = g.uniform(0.0, std::expm1(rho - 1.0));
      double f = lw(std::accumulate(xs.begin(), xs.end(), 0.0), rho);
      for (double x : xs) f -= lw(x, rho);
      EXPECT_LE(f, c.sup_f + 1e-10);
      EXPECT_NEAR(quasi_metric_excess(xs, rho), f, 1e-10);
    }
  });
}

TEST(QuasiMetric, VerifyExamples) {
  EXPECT_TRUE(verify_quasi_metric(2.0, 2, {{1.0, 1.0}}).empty());
  const auto c2 = quasi_metric_constant(2.0, 2);
  EXPECT_NEAR(lw(2.0, 2.0), 1.2069489608, 1e-9);
  EXPECT_LE(lw(2.0, 2.0), 2 * lw(1.0, 2.0) + c2.c_rho * lw(1.0, 2.0));
  EXPECT_TRUE(verify_quasi_metric(2.0, 3, {{1e-9, 1e-9, 1e-9}}).empty());
  EXPECT_TRUE(verify_quasi_metric(1.5, 4, {{100.0, 1.0, 1.0, 1.0}}).empty());
}

TEST(QuasiMetric, VerifyFlagsAConstantThatIsTooSmall) {
  auto c = quasi_metric_constant(2.0, 2);
  c.c_rho *= 0.5;
  const auto v = verify_quasi_metric(c, {{c.x0, c.x0}, {5.0, 1e-3}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].sample, 0u);
  EXPECT_GT(v[0].lhs, v[0].rhs);
}

TEST(QuasiMetric, VerifyRejectsBadSamples) {
  EXPECT_THROW(verify_quasi_metric(2.0, 2, {{1.0}}), ValidationError);
  EXPECT_THROW(verify_quasi_metric(2.0, 2, {{1.0, 0.0}}), ValidationError);
  EXPECT_THROW(quasi_metric_constant(1.0, 2), ValidationError);
}

TEST(QuasiMetric, SubadditivityWithSlack) {
  for_cases(100, 14, [](Gen& g, int) {
    const double rho = g.uniform(1.1, 3.0);
    const auto c = quasi_metric_constant(rho, 2);
    const double slack = c.c_rho * std::pow(std::log(2.0), rho);
    for (int s = 0; s < 100; ++s) {
      const Site x = g.site(2, 1000), y = g.site(2, 1000);
      EXPECT_LE(log_weight(x + y, rho), log_weight(x, rho) + log_weight(y, rho) + slack + 1e-10);
    }
  });
}

TEST(QuasiMetric, EnvelopeForRhoTwo) {
  const auto e = quasi_metric_envelope(2.0, 100000);
  EXPECT_EQ(e.n_at_sup, 2);
  EXPECT_NEAR(e.c_sup, quasi_metric_constant(2.0, 2).c_rho, 1e-12);
  EXPECT_LT(e.c_at_n_max, e.c_sup);
}

TEST(WeightParams, ValidationMessagesQuoteConstraint) {
  try {
    WeightParams{1.0, 1.0, 1.5}.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("ρ>1"), std::string::npos);
  }
  try {
    WeightParams{1.0, 2.0, 2.5}.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("ρ′∈(1,ρ)"), std::string::npos);
  }
  EXPECT_NO_THROW((WeightParams{1.0, 1.0001, 1.00005}.validate()));
}

TEST(Kernel, Examples) {
  const auto lp = HoppingKernel::log_power(1.0, 2.0);
  EXPECT_EQ(kernel_eval(lp, Site{0}), Complex(0.0, 0.0));
  EXPECT_NEAR(kernel_eval(lp, Site{1}).real(), std::exp(-std::pow(std::log(2.0), 2)), 1e-15);
  EXPECT_NEAR(kernel_eval(lp, Site{1}).real(), 0.6185, 1e-4);
  EXPECT_NEAR(kernel_eval(HoppingKernel::stretched(0.5), Site{4}).real(), std::exp(-2.0), 1e-15);
}

TEST(Kernel, HermitianSymmetryIsExact) {
  for_cases(50, 15, [](Gen& g, int) {
    const int d = static_cast<int>(g.integer(1, 3));
    std::vector<double> phase;
    for (int k = 0; k < d; ++k) phase.push_back(g.uniform(-3.0, 3.0));
    const auto kernels = {HoppingKernel::log_power(g.uniform(0.2, 3), g.uniform(1.1, 3)).with_phase(phase),
                          HoppingKernel::stretched(g.uniform(0.1, 0.9)).with_phase(phase),
                          HoppingKernel::table(d, {{Site::unit(d, 0), Complex(0.3, 0.7)}})};
    for (const auto& k : kernels)
      for (int s = 0; s < 50; ++s) {
        const Site x = g.site(d, 20);
        EXPECT_EQ(k(-x), std::conj(k(x)));
      }
  });
}

TEST(Kernel, LogPowerObeysEnvelope) {
  for_cases(50, 16, [](Gen& g, int) {
    const double gamma = g.uniform(0.1, 3.0), rho = g.uniform(1.1, 3.0);
    const auto k = HoppingKernel::log_power(gamma, rho).with_phase({g.uniform(-1, 1), g.uniform(-1, 1)});
    for (int s = 0; s < 50; ++s) {
      const Site x = g.site(2, 500);
      EXPECT_LE(std::abs(k(x)), std::exp(-gamma * lw(static_cast<double>(x.sup_norm()), rho)) * (1 + 1e-15));
    }
  });
}

TEST(Kernel, TableOutsideSupportIsZeroAndMirrorsAreFilled) {
  const auto k = HoppingKernel::table(1, {{Site{1}, Complex(2.0, 1.0)}});
  EXPECT_EQ(k(Site{-1}), Complex(2.0, -1.0));
  EXPECT_EQ(k(Site{5}), Complex(0.0, 0.0));
  EXPECT_THROW(HoppingKernel::table(1, {{Site{0}, Complex(1.0, 0.0)}}), ValidationError);
  EXPECT_THROW(HoppingKernel::table(1, {{Site{1}, Complex(1.0, 0.0)}, {Site{-1}, Complex(2.0, 0.0)}}),
               ValidationError);
}

TEST(NormBound, NearestNeighbourTableIsTwo) {
  const auto k = HoppingKernel::table(1, {{Site{1}, 1.0}, {Site{-1}, 1.0}});
  const auto b = gamma_norm_bound(k, 1, 1);
  EXPECT_TRUE(b.exact);
  EXPECT_EQ(b.total, 2.0);
}

TEST(NormBound, LogPowerTwoRadiiAgreeWithinTail) {
  const auto k = HoppingKernel::log_power(1.0, 2.0);
  const auto a = gamma_norm_bound(k, 1, 10000), b = gamma_norm_bound(k, 1, 100000);
  EXPECT_TRUE(std::isfinite(a.total));
  EXPECT_LE(std::abs(a.total - b.total), a.tail_bound + 1e-12);
  // direct sum to 10^6; the remainder beyond is below e^{-log^2 10^6} * 10^6 * 2
  double direct = 0.0;
  for (int r = 1; r <= 1000000; ++r) direct += 2.0 * std::exp(-lw(r, 2.0));
  EXPECT_GE(a.total, direct - 1e-12);
  EXPECT_NEAR(a.total, direct, 1e-9);
}

TEST(NormBound, NonIncreasingInRadius) {
  for (const auto& k : {HoppingKernel::log_power(1.0, 2.0), HoppingKernel::log_power(0.5, 1.5),
                        HoppingKernel::stretched(0.5)})
    for (int d = 1; d <= 3; ++d) {
      double prev = std::numeric_limits<double>::infinity();
      for (std::int64_t R : {1, 2, 5, 10, 40, 100}) {
        const double t = gamma_norm_bound(k, d, R).total;
        EXPECT_LE(t, prev * (1 + 1e-12)) << "d=" << d << " R=" << R;
        prev = t;
      }
    }
}

TEST(NormBound, StretchedTailDominatesDirectSum) {
  const auto k = HoppingKernel::stretched(0.5);
  for (std::int64_t R : {1, 10, 100}) {
    double direct = 0.0;
    for (std::int64_t r = R + 1; r <= 200000; ++r) direct += 2.0 * std::exp(-std::sqrt(static_cast<double>(r)));
    EXPECT_GE(kernel_tail_bound(k, 1, R), direct);
  }
}

TEST(NormBound, ZeroKernel) {
  EXPECT_EQ(gamma_norm_bound(HoppingKernel::log_power(1.0, 2.0).scaled(0.0), 2, 10).total, 0.0);
  EXPECT_EQ(gamma_norm_bound(HoppingKernel::stretched(0.5, 0.0), 1, 10).total, 0.0);
}
