#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cqmc/anova.hpp"
#include "cqmc/normal.hpp"
#include "cqmc/payoff.hpp"
#include "cqmc/smooth.hpp"

using namespace cqmc;

namespace {

MarketParams market(std::size_t d) {
  MarketParams p;
  p.dates = d;
  return p;
}

// Black-Scholes call and its sensitivities; a single monitoring date reduces
// the Asian option to a European one.
struct BlackScholes {
  double price, delta, gamma, rho, theta, vega, binary;
};

BlackScholes black_scholes(const MarketParams& p) {
  const double st = p.sigma * std::sqrt(p.maturity);
  const double d1 = (std::log(p.s0 / p.strike) + (p.rate + 0.5 * p.sigma * p.sigma) * p.maturity) / st;
  const double d2 = d1 - st;
  const double disc = std::exp(-p.rate * p.maturity);
  const double n1 = normal::cdf(d1), n2 = normal::cdf(d2), pd1 = normal::pdf(d1);
  return {p.s0 * n1 - p.strike * disc * n2,
          n1,
          pd1 / (p.s0 * st),
          p.strike * p.maturity * disc * n2,
          p.s0 * pd1 * p.sigma / (2.0 * std::sqrt(p.maturity)) + p.rate * p.strike * disc * n2,
          p.s0 * pd1 * std::sqrt(p.maturity),
          disc * n2};
}

double bs_value(const BlackScholes& bs, Example e) {
  switch (e) {
    case Example::payoff: return bs.price;
    case Example::delta: return bs.delta;
    case Example::gamma: return bs.gamma;
    case Example::rho: return bs.rho;
    case Example::theta: return bs.theta;
    case Example::vega: return bs.vega;
    case Example::binary: return bs.binary;
  }
  return NAN;
}

double oracle_price(Example e, const MarketParams& p, Construction c = Construction::standard) {
  return AnovaOracle(IntegrandSpec(e, p, c)).integral();
}

}  // namespace

TEST(Payoff, ParseExample) {
  for (Example e : kAllExamples) EXPECT_EQ(parse_example(to_string(e)), e);
  EXPECT_THROW(parse_example("call"), std::invalid_argument);
}

TEST(Payoff, SpecRejectsWrongShape) {
  EXPECT_THROW(IntegrandSpec(Example::delta, market(3), standard_matrix(market(4))), std::invalid_argument);
  MarketParams bad = market(2);
  bad.strike = -1.0;
  EXPECT_THROW(IntegrandSpec(Example::delta, bad, Construction::standard), std::invalid_argument);
}

TEST(Payoff, PayoffAtOriginByHand) {
  const MarketParams p = market(2);
  const IntegrandSpec spec(Example::payoff, p, Construction::standard);
  const std::vector<double> zero(2, 0.0);
  const double s1 = 100.0 * std::exp(p.drift() * 0.5), s2 = 100.0 * std::exp(p.drift());
  const double avg = 0.5 * (s1 + s2);
  EXPECT_NEAR(phi(zero, spec), avg - 100.0, 1e-12);
  EXPECT_NEAR(g_eval(zero, spec), std::exp(-0.01) * (avg - 100.0), 1e-12);
  EXPECT_EQ(f_eval(zero, spec), 0.0);  // avg < K here
  const std::vector<double> up{1.0, 1.0};
  EXPECT_GT(f_eval(up, spec), 0.0);
  EXPECT_EQ(f_eval(up, spec), g_eval(up, spec));
}

TEST(Payoff, SingleDateMatchesBlackScholes) {
  for (double strike : {80.0, 100.0, 125.0}) {
    MarketParams p = market(1);
    p.strike = strike;
    const BlackScholes bs = black_scholes(p);
    for (Example e : kAllExamples) {
      const PreintegratedIntegrand pf(IntegrandSpec(e, p, Construction::standard), 0);
      const double got = pf(std::span<const double>{});
      const double want = bs_value(bs, e);
      EXPECT_NEAR(got, want, 1e-12 * std::max(1.0, std::abs(want))) << to_string(e) << " K=" << strike;
    }
  }
}

TEST(Payoff, DecompositionReproducesGAndPhi) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  for (std::size_t d : {2u, 3u, 5u}) {
    for (Construction c : {Construction::standard, Construction::brownian_bridge, Construction::pca}) {
      for (Example e : kAllExamples) {
        const IntegrandSpec spec(e, market(d), c);
        for (std::size_t j = 0; j < d; ++j) {
          std::vector<double> y(d - 1), x(d);
          for (double& v : y) v = z(rng);
          const TermDecomposition td = decompose(spec, j, y);
          for (double t : {-2.5, -0.3, 0.0, 0.7, 1.9}) {
            embed(y, j, t, x);
            const double g = g_eval(x, spec);
            ASSERT_NEAR(td.g(t), g, 1e-11 * std::max(1.0, std::abs(g)))
                << to_string(e) << " " << to_string(c) << " d=" << d << " j=" << j;
            ASSERT_NEAR(td.phi(t), phi(x, spec), 1e-10);
          }
        }
      }
    }
  }
}

TEST(Payoff, DecomposeRejectsBadArguments) {
  const IntegrandSpec spec(Example::delta, market(3), Construction::standard);
  const std::vector<double> y2(2, 0.0), y3(3, 0.0);
  EXPECT_THROW(decompose(spec, 3, y2), std::out_of_range);
  EXPECT_THROW(decompose(spec, 0, y3), std::invalid_argument);
}

// The Greek integrands are parameter derivatives of the price integral; check
// each against a central difference of the quadrature price at d = 2.
TEST(Payoff, GreeksAreDerivativesOfThePrice) {
  const MarketParams p = market(2);
  auto bumped = [&](auto mutate, double h, Example e = Example::payoff) {
    MarketParams up = p, dn = p;
    mutate(up, h);
    mutate(dn, -h);
    return (oracle_price(e, up) - oracle_price(e, dn)) / (2.0 * h);
  };
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };

  const double delta_fd = bumped([](MarketParams& q, double h) { q.s0 += h; }, 1e-2);
  EXPECT_LT(rel(oracle_price(Example::delta, p), delta_fd), 1e-6);

  const double gamma_fd = bumped([](MarketParams& q, double h) { q.s0 += h; }, 1e-2, Example::delta);
  EXPECT_LT(rel(oracle_price(Example::gamma, p), gamma_fd), 1e-5);

  const double rho_fd = bumped([](MarketParams& q, double h) { q.rate += h; }, 1e-5);
  EXPECT_LT(rel(oracle_price(Example::rho, p), rho_fd), 1e-6);

  const double vega_fd = bumped([](MarketParams& q, double h) { q.sigma += h; }, 1e-5);
  EXPECT_LT(rel(oracle_price(Example::vega, p), vega_fd), 1e-6);

  const double theta_fd = bumped([](MarketParams& q, double h) { q.maturity += h; }, 1e-5);
  EXPECT_LT(rel(oracle_price(Example::theta, p), theta_fd), 1e-6);

  const double binary_fd = -bumped([](MarketParams& q, double h) { q.strike += h; }, 1e-3);
  EXPECT_LT(rel(oracle_price(Example::binary, p), binary_fd), 1e-6);
}

TEST(Payoff, PriceIndependentOfConstruction) {
  for (Example e : kAllExamples) {
    const double a = oracle_price(e, market(2), Construction::standard);
    const double b = oracle_price(e, market(2), Construction::brownian_bridge);
    const double c = oracle_price(e, market(2), Construction::pca);
    EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(a))) << to_string(e);
    EXPECT_NEAR(a, c, 1e-8 * std::max(1.0, std::abs(a))) << to_string(e);
  }
}
