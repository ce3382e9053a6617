#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "coprotector/error.h"
#include "coprotector/rng.h"
#include "coprotector/stats.h"

namespace coprotector {
namespace {

struct Reference {
  double t, df, p;
};

// Independent Welch statistics; the p-value comes from Boost's t distribution.
Reference ReferenceWelch(const std::vector<int>& g, const std::vector<int>& gp) {
  auto moments = [](const std::vector<int>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (int x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / (n - 1.0)};
  };
  const auto [m1, v1] = moments(g);
  const auto [m2, v2] = moments(gp);
  const double a = v1 / g.size(), b = v2 / gp.size();
  const double t = (m2 - m1) / std::sqrt(a + b);
  const double df = (a + b) * (a + b) / (a * a / (g.size() - 1.0) + b * b / (gp.size() - 1.0));
  const boost::math::students_t dist(df);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  return {t, df, p};
}

TEST(IncompleteBeta, MatchesBoost) {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double a = 0.05 + rng.UniformReal() * 300.0;
    const double b = 0.05 + rng.UniformReal() * 300.0;
    const double x = rng.UniformReal();
    const double want = boost::math::ibeta(a, b, x);
    EXPECT_NEAR(RegularizedIncompleteBeta(a, b, x), want, 1e-12) << a << " " << b << " " << x;
  }
  EXPECT_EQ(RegularizedIncompleteBeta(2, 3, 0.0), 0.0);
  EXPECT_EQ(RegularizedIncompleteBeta(2, 3, 1.0), 1.0);
}

TEST(StudentT, TableValues) {
  // Upper 2.5% and 0.5% critical values.
  EXPECT_NEAR(StudentTCdf(12.7062047, 1), 0.975, 1e-4);
  EXPECT_NEAR(StudentTCdf(63.6567412, 1), 0.995, 1e-4);
  EXPECT_NEAR(StudentTCdf(2.2281389, 10), 0.975, 1e-4);
  EXPECT_NEAR(StudentTCdf(3.1692727, 10), 0.995, 1e-4);
  EXPECT_NEAR(StudentTCdf(1.9839715, 100), 0.975, 1e-4);
  EXPECT_NEAR(StudentTCdf(2.6258905, 100), 0.995, 1e-4);
  EXPECT_NEAR(StudentTTwoTailedP(2.2281389, 10), 0.05, 1e-4);
  EXPECT_NEAR(StudentTUpperTail(1.9839715, 100), 0.025, 1e-4);
}

TEST(StudentT, Symmetry) {
  Rng rng(6);
  for (int i = 0; i < 500; ++i) {
    const double t = (rng.UniformReal() - 0.5) * 20.0;
    const double df = 0.5 + rng.UniformReal() * 200.0;
    EXPECT_NEAR(StudentTCdf(t, df) + StudentTCdf(-t, df), 1.0, 1e-13);
    EXPECT_NEAR(StudentTTwoTailedP(t, df), StudentTTwoTailedP(-t, df), 1e-15);
    EXPECT_EQ(StudentTCdf(0.0, df), 0.5);
  }
}

TEST(Welch, HandComputedExample) {
  const WelchResult r = WelchTTest(std::vector<int>{0, 0, 1, 0}, std::vector<int>{1, 1, 1, 0});
  EXPECT_NEAR(r.t, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.df, 6.0, 1e-12);
  EXPECT_NEAR(r.mean_g, 0.25, 1e-15);
  EXPECT_NEAR(r.mean_g_prime, 0.75, 1e-15);
  EXPECT_NEAR(r.p, 0.20703125, 1e-12);
}

TEST(Welch, MatchesBoostOracleOnBinarySamples) {
  Rng rng(2024);
  int compared = 0;
  while (compared < 500) {
    const size_t n1 = 2 + rng.Uniform(499), n2 = 2 + rng.Uniform(499);
    const double q1 = rng.UniformReal(), q2 = rng.UniformReal();
    std::vector<int> g(n1), gp(n2);
    for (int& x : g) x = rng.Bernoulli(q1);
    for (int& x : gp) x = rng.Bernoulli(q2);
    const WelchResult r = WelchTTest(g, gp);
    const Reference ref = ReferenceWelch(g, gp);
    if (!std::isfinite(ref.t)) continue;  // zero-variance pairs are covered separately
    EXPECT_NEAR(r.t, ref.t, 1e-9);
    EXPECT_NEAR(r.df, ref.df, 1e-9 * std::max(1.0, ref.df));
    EXPECT_NEAR(r.p, ref.p, 1e-9);
    ++compared;
  }
}

TEST(Welch, OneSidedHalvesTheTailInTheRightDirection) {
  const std::vector<int> g{0, 0, 1, 0, 0, 1}, gp{1, 1, 1, 0, 1, 1};
  const WelchResult two = WelchTTest(g, gp);
  const WelchResult up = WelchTTest(g, gp, Alternative::kGreater);
  EXPECT_NEAR(up.p, two.p / 2.0, 1e-15);
  const WelchResult down = WelchTTest(gp, g, Alternative::kGreater);
  EXPECT_NEAR(down.p, 1.0 - two.p / 2.0, 1e-15);
  EXPECT_EQ(ParseAlternative("greater"), Alternative::kGreater);
  EXPECT_EQ(AlternativeName(Alternative::kTwoSided), "two-sided");
  EXPECT_THROW(ParseAlternative("less"), Error);
}

TEST(Welch, DegenerateVariance) {
  WelchResult r = WelchTTest(std::vector<int>{0, 0, 0}, std::vector<int>{0, 0});
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p, 1.0);
  EXPECT_EQ(r.df, 3.0);
  r = WelchTTest(std::vector<int>{0, 0, 0}, std::vector<int>{1, 1, 1});
  EXPECT_EQ(r.t, std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.p, 0.0);
  r = WelchTTest(std::vector<int>{1, 1}, std::vector<int>{0, 0}, Alternative::kGreater);
  EXPECT_EQ(r.t, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.p, 1.0);
  // One constant group still has a finite statistic.
  r = WelchTTest(std::vector<int>{0, 0, 0, 0}, std::vector<int>{1, 0, 1, 1});
  EXPECT_TRUE(std::isfinite(r.t));
  EXPECT_NEAR(r.df, 3.0, 1e-12);
}

TEST(Welch, RejectsTinyGroups) {
  EXPECT_THROW(WelchTTest(std::vector<int>{1}, std::vector<int>{0, 1}), Error);
  EXPECT_THROW(WelchTTest(std::vector<double>{0, 1}, std::vector<double>{}), Error);
}

}  // namespace
}  // namespace coprotector
