#include <gtest/gtest.h>

#include <cmath>

#include "cqmc/harness.hpp"
#include "cqmc/reduce.hpp"

using namespace cqmc;

namespace {

double orthogonality_error(const Matrix& u) {
  return max_abs_diff(u.transpose() * u, Matrix::identity(u.rows()));
}

}  // namespace

TEST(Gpca, RecoversRidgeDirection) {
  // F(y) = h(w . y) has every gradient parallel to w.
  const std::vector<double> w{0.0, 0.6, 0.8};
  Evaluator f = [&](std::span<const double> y) {
    const double t = w[0] * y[0] + w[1] * y[1] + w[2] * y[2];
    return std::tanh(t) + 0.1 * t * t;
  };
  const Matrix g = gradient_samples(f, 3, 128, {5, 0});
  const OrthogonalTransform t = gpca_matrix(g);
  EXPECT_EQ(t.provenance, TransformProvenance::gpca);
  EXPECT_LT(orthogonality_error(t.u), 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(t.u(i, 0), w[i], 1e-8);
  EXPECT_GT(t.eigenvalues[0], 0.0);
  EXPECT_NEAR(t.eigenvalues[1], 0.0, 1e-10 * t.eigenvalues[0]);
  EXPECT_GE(t.eigenvalues[0], t.eigenvalues[1]);
}

TEST(Gpca, FiniteDifferenceGradientsMatchAnalytic) {
  Evaluator f = [](std::span<const double> y) { return std::exp(0.3 * y[0]) + y[1] * y[1]; };
  const Matrix g = gradient_samples(f, 2, 16, {1, 1});
  SobolStream stream(DigitalNet(2), ScrambleSeed{1, 1});
  std::vector<double> u(2);
  for (std::size_t r = 0; r < 16; ++r) {
    stream.next(u);
    const double y0 = normal::inv_cdf(u[0]), y1 = normal::inv_cdf(u[1]);
    EXPECT_NEAR(g(r, 0), 0.3 * std::exp(0.3 * y0), 1e-8);
    EXPECT_NEAR(g(r, 1), 2.0 * y1, 1e-8);
  }
}

TEST(Gpca, ZeroGradientsFallBackToIdentity) {
  const OrthogonalTransform t = gpca_matrix(Matrix(10, 3));
  EXPECT_EQ(t.provenance, TransformProvenance::identity);
  EXPECT_FALSE(t.warning.empty());
  EXPECT_EQ(max_abs_diff(t.u, Matrix::identity(3)), 0.0);
}

TEST(Gpca, RejectsBadInput) {
  Matrix g(4, 2);
  g(1, 1) = NAN;
  EXPECT_THROW(gpca_matrix(g), std::invalid_argument);
  Evaluator f = [](std::span<const double>) { return 1.0; };
  EXPECT_THROW(gradient_samples(f, 4, 3, {1, 0}), std::invalid_argument);
  EXPECT_THROW(TransformedIntegrand<Evaluator>(f, Matrix(2, 3)), std::invalid_argument);
}

TEST(Gpca, RotationPreservesTheIntegral) {
  // The RQMC estimate of the rotated conditioned integrand stays unbiased:
  // compare averages over many replicates with the quadrature value.
  ExperimentConfig cfg;
  cfg.params.dates = 3;
  cfg.reduce = ReduceChoice::gpca;
  const Method m = build_method(cfg);
  EXPECT_EQ(m.dim, 2u);
  EXPECT_EQ(m.label, "CQMC+GPCA");
  const double exact = AnovaOracle(IntegrandSpec(cfg.example, cfg.params, cfg.construction)).integral();
  const std::size_t reps = 16;
  double sum = 0.0, sq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const double e = estimate(m.f, m.dim, Sampler::rqmc, 12, {77, r});
    sum += e;
    sq += e * e;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / (reps - 1));
  EXPECT_LT(se, 1e-4 * exact);
  EXPECT_NEAR(mean, exact, 5.0 * se);
}

TEST(Gpca, TransformIsOrthogonalForAsianIntegrand) {
  const PreintegratedIntegrand pf(IntegrandSpec(Example::delta, MarketParams{}, Construction::standard), 0);
  Evaluator f = [&](std::span<const double> y) { return pf(y); };
  const OrthogonalTransform t = gpca_matrix(gradient_samples(f, 3, 256, {42, 0}));
  EXPECT_LT(orthogonality_error(t.u), 1e-12);
  for (std::size_t k = 1; k < 3; ++k) EXPECT_GE(t.eigenvalues[k - 1], t.eigenvalues[k]);
  // F(U y) at y = U^T z reproduces F(z).
  const std::vector<double> z{0.3, -1.2, 0.5};
  std::vector<double> y(3);
  t.u.transpose().multiply(z, y);
  EXPECT_NEAR(apply(f, t)(y), f(z), 1e-12);
}
