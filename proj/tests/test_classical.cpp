#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "qwalk/classical.hpp"

using namespace qwalk;

namespace {

// Counts the 4^t lattice paths of length t ending at each site.
std::map<std::pair<int, int>, long long> enumerate_paths(int t) {
  std::map<std::pair<int, int>, long long> ends;
  const long long total = 1LL << (2 * t);
  for (long long code = 0; code < total; ++code) {
    int x = 0, y = 0;
    long long c = code;
    for (int i = 0; i < t; ++i, c >>= 2) {
      switch (c & 3) {
        case 0: ++x; break;
        case 1: --x; break;
        case 2: ++y; break;
        default: --y;
      }
    }
    ++ends[{x, y}];
  }
  return ends;
}

}  // namespace

TEST(ClassicalExact, WorkedValues) {
  EXPECT_DOUBLE_EQ(crw_exact(2, 0, 0), 0.25);
  EXPECT_DOUBLE_EQ(crw_exact(2, 1, 1), 0.125);
  EXPECT_DOUBLE_EQ(crw_exact(2, 1, 0), 0.0);
  EXPECT_DOUBLE_EQ(crw_exact(2, 2, 0), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(crw_exact(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(crw_exact(3, 4, 0), 0.0);
  EXPECT_EQ(crw_exact_rational(2, 1, 1), Rational(1, 8));
  EXPECT_EQ(crw_exact_rational(2, 1, 0), Rational(0));
}

TEST(ClassicalExact, ParityRuleNegativeCoordinates) {
  EXPECT_DOUBLE_EQ(crw_exact(3, -1, 0), crw_exact(3, 1, 0));
  EXPECT_DOUBLE_EQ(crw_exact(3, -2, -1), crw_exact(3, 2, 1));
  EXPECT_DOUBLE_EQ(crw_exact(3, -2, 0), 0.0);
}

TEST(ClassicalExact, MatchesPathEnumeration) {
  for (int t = 0; t <= 8; ++t) {
    const auto ends = enumerate_paths(t);
    for (int x = -t - 1; x <= t + 1; ++x)
      for (int y = -t - 1; y <= t + 1; ++y) {
        const auto it = ends.find({x, y});
        const Rational want(it == ends.end() ? 0 : it->second, 1LL << (2 * t));
        ASSERT_EQ(crw_exact_rational(t, x, y), want) << "t=" << t << " (" << x << "," << y << ")";
      }
  }
}

TEST(ClassicalExact, RationalIteratedMapEqualsClosedForm) {
  auto p = ClassicalDistribution<Rational>::point_mass();
  for (int t = 1; t <= 12; ++t) {
    p = crw_disordered_step(p, 1);
    const auto want = crw_exact_distribution<Rational>(t);
    ASSERT_EQ(p.probabilities, want.probabilities) << "t=" << t;
    EXPECT_EQ(p.total(), Rational(1));
  }
}

TEST(ClassicalExact, DoubleIteratedMapWithinTolerance) {
  auto p = ClassicalDistribution<double>::point_mass();
  for (int t = 1; t <= 50; ++t) {
    p = crw_disordered_step(p, 1);
    double worst = 0.0;
    for (int x = -t; x <= t; ++x)
      for (int y = -t; y <= t; ++y) worst = std::max(worst, std::abs(p.at(x, y) - crw_exact(t, x, y)));
    ASSERT_LE(worst, 1e-12) << "t=" << t;
  }
}

TEST(ClassicalExact, LargeTimeUsesLogarithms) {
  // t > 60 switches branch; the two must agree at the boundary
  const double lhs = crw_exact(62, 2, 0);
  const double rhs = std::exp(detail::log_choose(62, 32) + detail::log_choose(62, 32) - 124.0 * std::numbers::ln2);
  EXPECT_NEAR(lhs / rhs, 1.0, 1e-12);
  EXPECT_THROW(crw_exact_rational(32, 0, 0), std::out_of_range);
}

TEST(ClassicalAsymptotic, OriginAtLargeTime) {
  EXPECT_NEAR(crw_exact(400, 0, 0) / crw_asymptotic(400, 0, 0), 1.0, 0.02);
  EXPECT_NEAR(crw_asymptotic(400, 0, 0), 2.0 / (400.0 * std::numbers::pi), 1e-15);
}

TEST(ClassicalAsymptotic, IntegratesToTwo) {
  // Only sites of one parity are reachable, so the approximant carries
  // twice the probability mass when summed over every lattice site.
  const int t = 100;
  double s = 0.0;
  for (int x = -200; x <= 200; ++x)
    for (int y = -200; y <= 200; ++y) s += crw_asymptotic(t, x, y);
  EXPECT_NEAR(s, 2.0, 1e-6);
  EXPECT_THROW(crw_asymptotic(0, 0, 0), std::invalid_argument);
}

TEST(ClassicalMap, ZeroJumpLeavesDistributionUnchanged) {
  auto p = crw_exact_distribution<Rational>(4);
  const auto q = crw_disordered_step(p, 0);
  EXPECT_EQ(q.probabilities, p.probabilities);
  EXPECT_EQ(q.time, 5);
}

TEST(ClassicalMap, ConservesMassUnderRandomJumps) {
  const auto seq = sample_sequence(DisorderSpec(Poisson{1.0}), 10, 4);
  auto p = ClassicalDistribution<Rational>::point_mass();
  for (int j : seq.values) {
    p = crw_disordered_step(p, j);
    EXPECT_EQ(p.total(), Rational(1));
  }
}

TEST(ClassicalMap, SymmetricUnderLatticeSymmetries) {
  const auto seq = sample_sequence(DisorderSpec(Geometric{0.5}), 20, 8);
  auto p = ClassicalDistribution<double>::point_mass();
  for (int j : seq.values) p = crw_disordered_step(p, j);
  for (int x = -p.radius; x <= p.radius; ++x)
    for (int y = -p.radius; y <= p.radius; ++y) {
      ASSERT_EQ(p.at(x, y), p.at(y, x));
      ASSERT_EQ(p.at(x, y), p.at(-x, y));
    }
}

TEST(ClassicalMap, RejectsNegativeJump) {
  EXPECT_THROW(crw_disordered_step(ClassicalDistribution<double>::point_mass(), -1), std::invalid_argument);
}

TEST(ClassicalMoments, SecondMomentGrowsLinearly) {
  std::vector<double> ratio;
  for (int t : {100, 200, 300, 400}) {
    const auto p = to_position_distribution(crw_exact_distribution<double>(t));
    const auto m = spread(p, SpreadMeasure::Radial);
    EXPECT_NEAR(m.m2 / t, 1.0, 1e-9);
    ratio.push_back(m.sigma * m.sigma / t);
  }
  for (double r : ratio) EXPECT_NEAR(r, 1.0 - std::numbers::pi / 4.0, 0.01);
}

TEST(ClassicalEnsemble, CleanWalkHasSquareRootSpreading) {
  const auto tr = classical_trace(60, std::nullopt, 0);
  const auto f = fit_exponent(tr.sigma, 18, 50);
  EXPECT_NEAR(f.alpha, 0.5, 0.01);
  for (double n : tr.norm) EXPECT_NEAR(n, 1.0, 1e-12);
}
