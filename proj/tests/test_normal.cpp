#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cqmc/normal.hpp"

using namespace cqmc;

namespace {

// Bisection on the cdf to 1e-15; the oracle for quantile values.
double quantile_by_bisection(double u) {
  double lo = -40.0, hi = 40.0;
  while (hi - lo > 1e-15 * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (normal::cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> log_grid(double lo_exp, double hi_exp, int per_decade) {
  std::vector<double> u;
  for (double e = lo_exp; e <= hi_exp + 1e-12; e += 1.0 / per_decade) u.push_back(std::pow(10.0, e));
  return u;
}

}  // namespace

TEST(Normal, Pdf) {
  EXPECT_DOUBLE_EQ(normal::pdf(0.0), 0.3989422804014327);
  EXPECT_EQ(normal::pdf(1.7), normal::pdf(-1.7));
  EXPECT_NEAR(normal::pdf(1.0), normal::pdf(0.0) * std::exp(-0.5), 1e-17);
  EXPECT_GT(normal::pdf(30.0), 0.0);
}

TEST(Normal, Cdf) {
  EXPECT_EQ(normal::cdf(0.0), 0.5);
  for (double x : {0.1, 0.7, 1.3, 2.5, 4.0, 7.9})
    EXPECT_NEAR(normal::cdf(x), 1.0 - normal::cdf(-x), 1e-15);
  EXPECT_NEAR(normal::cdf(1.959963984540054), 0.975, 1e-12);
  // Strictly increasing.
  double prev = 0.0;
  for (double x = -8.0; x <= 5.0; x += 0.01) {
    ASSERT_GT(normal::cdf(x), prev);
    prev = normal::cdf(x);
  }
}

TEST(Normal, InvCdfValues) {
  EXPECT_EQ(normal::inv_cdf(0.5), 0.0);
  EXPECT_NEAR(normal::inv_cdf(0.975), 1.959963984540054, 1e-9);
  EXPECT_NEAR(normal::inv_cdf(0.975), quantile_by_bisection(0.975), 1e-9);
  for (double u : {0x1p-30, 0x1p-17, 0x1p-7, 0.25, 0.4375})  // 1 - u exact
    EXPECT_NEAR(normal::inv_cdf(u), -normal::inv_cdf(1.0 - u), 1e-12 * std::max(1.0, std::abs(normal::inv_cdf(u))));
}

TEST(Normal, InvCdfRejectsOutsideOpenInterval) {
  for (double u : {0.0, 1.0, -0.1, 1.5, std::nan("")}) EXPECT_THROW(normal::inv_cdf(u), std::domain_error);
}

TEST(Normal, RoundTripOnLogGrid) {
  for (double u : log_grid(-12.0, std::log10(0.5), 20)) {
    ASSERT_LE(std::abs(normal::cdf(normal::inv_cdf(u)) - u), 1e-12) << u;
    ASSERT_LE(std::abs(normal::cdf(normal::inv_cdf(1.0 - u)) - (1.0 - u)), 1e-12) << u;
  }
  for (double u : {1e-15, 1.0 - 1e-15, 0x1p-32, 1.0 - 0x1p-32})
    EXPECT_LE(std::abs(normal::cdf(normal::inv_cdf(u)) - u), 1e-12) << u;
}

TEST(Normal, InvCdfMonotone) {
  double prev = -INFINITY;
  for (double u = 1e-6; u < 1.0; u += 1e-4) {
    const double x = normal::inv_cdf(u);
    ASSERT_GT(x, prev);
    prev = x;
  }
}

TEST(Normal, TailAsymptoteRatios) {
  auto ratio = [](double u) { return normal::inv_cdf(u) / -std::sqrt(-2.0 * std::log(u)); };
  // Bisection oracle: 1e-4 -> 0.8666, 1e-8 -> 0.9246.
  EXPECT_NEAR(ratio(1e-4), quantile_by_bisection(1e-4) / -std::sqrt(-2.0 * std::log(1e-4)), 1e-10);
  EXPECT_GT(ratio(1e-4), 0.85);
  EXPECT_LT(ratio(1e-4), 1.0);
  EXPECT_GT(ratio(1e-8), 0.92);
  EXPECT_LT(ratio(1e-8), 1.0);
  EXPECT_GT(ratio(1e-8), ratio(1e-4));
  EXPECT_NEAR(normal::tail_asymptote_probe(1e-4),
              normal::inv_cdf(1e-4) + std::sqrt(-2.0 * std::log(1e-4)), 1e-15);
  EXPECT_NEAR(normal::inv_cdf(1.0 - 1e-4), -normal::inv_cdf(1e-4), 1e-10);
  EXPECT_THROW(normal::tail_asymptote_probe(0.01), std::domain_error);
}

TEST(Normal, BoundaryGrowthProbeDecreases) {
  // (1 / pdf(inv_cdf(u))) * u^(1+B) with B = 0.1 along u = 1e-2 .. 1e-12.
  double prev = INFINITY;
  for (int e = 2; e <= 12; ++e) {
    const double u = std::pow(10.0, -e);
    const double q = std::pow(u, 1.1) / normal::pdf(normal::inv_cdf(u));
    ASSERT_LT(q, prev) << "u=1e-" << e;
    prev = q;
  }
}
