#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cqmc/estimator.hpp"
#include "cqmc/lds.hpp"
#include "cqmc/matrix.hpp"
#include "cqmc/normal.hpp"

// Gradient principal component analysis on a conditioned integrand.
//
// Recipe: central-difference gradients of y -> F(y) at m scrambled Sobol'
// points mapped through inv_cdf (step 1e-5 in y-space), then the eigenvectors
// of (1/m) G^T G sorted by decreasing eigenvalue. Replacing F(y) by F(U y) for
// orthogonal U leaves E[F] unchanged.

namespace cqmc {

enum class TransformProvenance { identity, gpca };

struct OrthogonalTransform {
  Matrix u;
  TransformProvenance provenance = TransformProvenance::identity;
  std::vector<double> eigenvalues;
  std::string warning;

  static OrthogonalTransform identity(std::size_t n) {
    return {Matrix::identity(n), TransformProvenance::identity, std::vector<double>(n, 0.0), {}};
  }
};

template <class F>
Matrix gradient_samples(const F& f, std::size_t dim, std::size_t m, ScrambleSeed seed,
                        double step = 1e-5) {
  if (dim == 0) return Matrix(m, 0);
  if (m < dim + 1) throw std::invalid_argument("gradient_samples: need m >= d");
  Matrix g(m, dim);
  SobolStream stream(DigitalNet(dim), seed);
  std::vector<double> u(dim), y(dim);
  for (std::size_t r = 0; r < m; ++r) {
    stream.next(u);
    for (std::size_t k = 0; k < dim; ++k) y[k] = normal::inv_cdf(u[k]);
    for (std::size_t k = 0; k < dim; ++k) {
      const double keep = y[k];
      y[k] = keep + step;
      const double up = f(std::span<const double>(y));
      y[k] = keep - step;
      const double down = f(std::span<const double>(y));
      y[k] = keep;
      g(r, k) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

inline OrthogonalTransform gpca_matrix(const Matrix& gradients) {
  const std::size_t q = gradients.cols();
  const double m = static_cast<double>(gradients.rows());
  Matrix c(q, q);
  double scale = 0.0;
  for (std::size_t r = 0; r < gradients.rows(); ++r)
    for (std::size_t i = 0; i < q; ++i) {
      if (!std::isfinite(gradients(r, i)))
        throw std::invalid_argument("gpca_matrix: non-finite gradient entry");
      for (std::size_t j = 0; j < q; ++j) c(i, j) += gradients(r, i) * gradients(r, j) / m;
    }
  for (std::size_t i = 0; i < q; ++i) scale = std::max(scale, std::abs(c(i, i)));
  if (q == 0 || scale == 0.0) {
    auto t = OrthogonalTransform::identity(q);
    if (q > 0) t.warning = "gpca: all gradients are zero; using the identity transform";
    return t;
  }
  SymmetricEigen eig = symmetric_eigen(c);
  normalize_column_signs(eig.vectors);
  return {std::move(eig.vectors), TransformProvenance::gpca, std::move(eig.values), {}};
}

/// y -> F(U y)
template <class F>
class TransformedIntegrand {
 public:
  TransformedIntegrand(F f, Matrix u) : f_(std::move(f)), u_(std::move(u)) {
    if (u_.rows() != u_.cols()) throw std::invalid_argument("TransformedIntegrand: U must be square");
  }

  double operator()(std::span<const double> y) const {
    if (y.size() != u_.cols()) throw std::invalid_argument("TransformedIntegrand: dimension mismatch");
    std::vector<double> z(y.size());
    u_.multiply(y, z);
    return f_(std::span<const double>(z));
  }

  const Matrix& matrix() const { return u_; }

 private:
  F f_;
  Matrix u_;
};

template <class F>
TransformedIntegrand<F> apply(F f, const OrthogonalTransform& t) {
  return TransformedIntegrand<F>(std::move(f), t.u);
}

}  // namespace cqmc
