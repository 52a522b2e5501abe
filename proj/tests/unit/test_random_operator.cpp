#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "msalab/errors.hpp"
#include "msalab/random_operator.hpp"
#include "support/gen.hpp"

using namespace msalab;
using msalab::testing::for_cases;
using msalab::testing::Gen;

namespace {

const HoppingKernel kNearest = HoppingKernel::table(1, {{Site{1}, 1.0}});

}  // namespace

TEST(Disorder, DegenerateBernoulliGivesTheLowAtom) {
  const auto spec = DisorderSpec::bernoulli(-1.0, 1.0, 0.0);
  for (double v : sample_potential(LatticeBox(Site{0}, 200), spec, 3, 0)) EXPECT_EQ(v, -1.0);
}

TEST(Disorder, UniformMeanWithinCltBound) {
  const auto v = sample_potential(LatticeBox(Site{0}, 500000), DisorderSpec::uniform(1.0), 42, 0);
  ASSERT_EQ(v.size(), 1000001u);
  double sum = 0.0;
  for (double x : v) {
    ASSERT_GE(x, -1.0);
    ASSERT_LE(x, 1.0);
    sum += x;
  }
  EXPECT_NEAR(sum / static_cast<double>(v.size()), 0.0, 3e-3);
}

TEST(Disorder, PowerPushforwardCdf) {
  const auto spec = DisorderSpec::power(0.5);
  const auto v = sample_potential(LatticeBox(Site{0}, 50000), spec, 7, 0);
  double hits = 0;
  for (double x : v) hits += x <= 0.01 ? 1 : 0;
  const double n = static_cast<double>(v.size());
  EXPECT_NEAR(hits / n, 0.1, 4.0 * std::sqrt(0.09 / n));
  EXPECT_NEAR(spec.cdf(0.01), 0.1, 1e-12);
}

TEST(Disorder, ValidationRejectsSinglePointSupport) {
  EXPECT_THROW(DisorderSpec::bernoulli(0.5, 0.5, 0.3).validate(), ValidationError);
  EXPECT_THROW(DisorderSpec::quantile_table({0.2, 0.2}).validate(), ValidationError);
  EXPECT_THROW(DisorderSpec::uniform(0.0).validate(), ValidationError);
  auto s = DisorderSpec::uniform(1.0);
  s.lambda = 1.5;
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Disorder, QuantileAndCdfAreInverse) {
  for_cases(30, 31, [](Gen& g, int) {
    std::vector<double> q{-1.0};
    for (int k = 0; k < 5; ++k) q.push_back(q.back() + g.uniform(0.01, 0.4));
    const std::vector<DisorderSpec> specs{DisorderSpec::uniform(g.uniform(0.1, 3)), DisorderSpec::power(g.uniform(0.1, 1)),
                                          DisorderSpec::quantile_table(q)};
    for (const auto& s : specs)
      for (int k = 0; k < 50; ++k) {
        const double u = g.uniform(0.001, 0.999);
        EXPECT_NEAR(s.cdf(s.quantile(u)), u, 1e-9);
      }
  });
}

TEST(Holder, Examples) {
  auto uni = DisorderSpec::uniform(1.0);
  uni.beta = 1.0;
  uni.beta0 = 1.0;
  const auto r = holder_check(uni, {0.2});
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_NEAR(r.entries[0].mass, 0.1, 1e-12);
  EXPECT_NEAR(r.entries[0].bound, 0.2, 1e-12);
  EXPECT_TRUE(r.pass);

  EXPECT_FALSE(holder_check(DisorderSpec::bernoulli(-1, 1, 0.5), {0.0, 0.1}).pass);

  auto pw = DisorderSpec::power(0.5);
  pw.beta = 1.0;
  const auto p = holder_check(pw, {1e-4, 1e-2, 0.25});
  EXPECT_TRUE(p.pass);
  for (const auto& e : p.entries) EXPECT_NEAR(e.mass, std::sqrt(e.delta), 1e-12);
}

TEST(Holder, UniformCertifiesBetaBelowTwoM) {
  for_cases(50, 32, [](Gen& g, int) {
    auto s = DisorderSpec::uniform(g.uniform(0.1, 5));
    s.beta = g.uniform(0.01, 1.99) * s.M;
    s.beta0 = 2 * s.M;
    std::vector<double> deltas;
    for (int k = 0; k < 20; ++k) deltas.push_back(g.uniform(0, 2 * s.M));
    EXPECT_TRUE(holder_check(s, deltas).pass);
    s.beta = 2.5 * s.M;
    EXPECT_FALSE(holder_check(s, {s.M}).pass);
  });
}

TEST(Sampling, ReproducibleAndKeyedBySite) {
  const auto spec = DisorderSpec::uniform(1.0);
  const LatticeBox big(Site{0, 0}, 6), small(Site{2, -1}, 2);
  const auto a = sample_potential(big, spec, 9, 4), b = sample_potential(big, spec, 9, 4);
  EXPECT_EQ(a, b);
  const auto s = sample_potential(small, spec, 9, 4);
  for_each_site(small, [&](const Site& y) { EXPECT_EQ(s[small.index_of(y)], a[big.index_of(y)]); });
  EXPECT_NE(sample_potential(big, spec, 9, 5), a);
  EXPECT_NE(sample_potential(big, spec, 10, 4), a);
  EXPECT_NE(sample_potential(big, spec, 9, 4, 1), a);
}

TEST(Sampling, TwoSitesAreUncorrelated) {
  const auto spec = DisorderSpec::uniform(1.0);
  const LatticeBox box(Site{0}, 1);
  const int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int t = 0; t < n; ++t) {
    const auto v = sample_potential(box, spec, 5, static_cast<std::uint64_t>(t));
    sx += v[0], sy += v[2], sxx += v[0] * v[0], syy += v[2] * v[2], sxy += v[0] * v[2];
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 0.02);
}

TEST(Assemble, DecoupledSites) {
  const LatticeBox box(Site{0}, 3);
  const std::vector<double> v{0.3, -0.1, 0.9, 0.0, -0.7, 0.2, 0.5};
  const auto s = assemble(box, v, 0.0, HoppingKernel::log_power(1.0, 2.0));
  EXPECT_TRUE(s.matrix.isApprox(Eigen::VectorXd::Map(v.data(), 7).cast<Complex>().asDiagonal().toDenseMatrix()));
}

TEST(Assemble, PathGraphSpectrum) {
  const auto s = assemble(LatticeBox(Site{0}, 1), {0.0, 0.0, 0.0}, 1.0, kNearest);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.real_matrix());
  EXPECT_NEAR(es.eigenvalues()(0), -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(es.eigenvalues()(1), 0.0, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(2), std::sqrt(2.0), 1e-12);
}

TEST(Assemble, EntriesAndExactHermiticity) {
  for_cases(30, 33, [](Gen& g, int) {
    const int d = static_cast<int>(g.integer(1, 2));
    std::vector<double> phase;
    for (int k = 0; k < d; ++k) phase.push_back(g.uniform(-2, 2));
    const auto kernel = HoppingKernel::log_power(g.uniform(0.3, 2), g.uniform(1.2, 3)).with_phase(phase);
    const LatticeBox box(g.site(d, 3), g.integer(1, d == 1 ? 20 : 5));
    const double eps = g.uniform(-1, 1);
    const auto s = draw_sample(box, DisorderSpec::uniform(1.0), eps, kernel, g.bits(), 0);
    EXPECT_EQ((s.matrix - s.matrix.adjoint()).cwiseAbs().maxCoeff(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Site x = box.site_at(i);
      EXPECT_EQ(s.matrix(i, i), Complex(s.potential[i], 0.0));
      const std::size_t j = static_cast<std::size_t>(g.integer(0, static_cast<std::int64_t>(s.size()) - 1));
      if (j != i) { EXPECT_EQ(s.matrix(i, j), eps * kernel(x - box.site_at(j))); }
    }
  });
}

TEST(Assemble, LinearInEpsilon) {
  for_cases(20, 34, [](Gen& g, int) {
    const LatticeBox box(Site{0}, g.integer(1, 30));
    const auto v = sample_potential(box, DisorderSpec::uniform(1.0), g.bits(), 0);
    const auto k = HoppingKernel::stretched(0.5);
    const double a = g.uniform(-1, 1), b = g.uniform(-1, 1);
    const auto sab = assemble(box, v, a + b, k), sa = assemble(box, v, a, k), sb = assemble(box, v, b, k);
    const Eigen::MatrixXcd diag = Eigen::VectorXd::Map(v.data(), static_cast<Eigen::Index>(v.size()))
                                      .cast<Complex>()
                                      .asDiagonal()
                                      .toDenseMatrix();
    EXPECT_LE((sab.matrix - (sa.matrix + sb.matrix - diag)).cwiseAbs().maxCoeff(), 1e-15);
  });
}

TEST(Assemble, RefusesBeyondDenseLimit) {
  const LatticeBox box(Site{0, 0}, 71);
  EXPECT_GT(box.size(), kMaxDenseSites);
  EXPECT_THROW(assemble(box, std::vector<double>(box.size(), 0.0), 0.1, kNearest), ValidationError);
}

TEST(Assemble, RestrictionMatchesDirectDraw) {
  const auto k = HoppingKernel::log_power(1.0, 2.0);
  const auto outer = draw_sample(LatticeBox(Site{0}, 20), DisorderSpec::uniform(1.0), 0.1, k, 3, 2);
  const LatticeBox inner(Site{5}, 4);
  const auto r = restrict_to(outer, inner);
  const auto direct = draw_sample(inner, DisorderSpec::uniform(1.0), 0.1, k, 3, 2);
  EXPECT_EQ(r.potential, direct.potential);
  EXPECT_EQ(r.matrix, direct.matrix);
}
