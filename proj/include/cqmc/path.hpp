#pragma once

#include <cmath>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqmc/matrix.hpp"

namespace cqmc {

/// Black-Scholes market with d equally spaced monitoring dates t_i = i T / d.
struct MarketParams {
  double s0 = 100.0;
  double strike = 100.0;
  double rate = 0.01;  // risk-free rate, also the drift under the pricing measure
  double sigma = 0.4;
  double maturity = 1.0;
  std::size_t dates = 4;

  double dt() const { return maturity / static_cast<double>(dates); }
  double drift() const { return rate - 0.5 * sigma * sigma; }
  double discount() const { return std::exp(-rate * maturity); }

  void validate() const {
    if (!(s0 > 0.0)) throw std::invalid_argument("MarketParams: S0 must be positive");
    if (!(strike > 0.0)) throw std::invalid_argument("MarketParams: K must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("MarketParams: sigma must be positive");
    if (!(maturity > 0.0)) throw std::invalid_argument("MarketParams: T must be positive");
    if (dates < 1) throw std::invalid_argument("MarketParams: d must be at least 1");
    if (!std::isfinite(rate)) throw std::invalid_argument("MarketParams: mu must be finite");
  }
};

enum class Construction { standard, brownian_bridge, pca, custom };

inline std::string_view to_string(Construction c) {
  switch (c) {
    case Construction::standard: return "standard";
    case Construction::brownian_bridge: return "bb";
    case Construction::pca: return "pca";
    case Construction::custom: return "custom";
  }
  return "?";
}

inline Construction parse_construction(std::string_view s) {
  if (s == "standard") return Construction::standard;
  if (s == "bb" || s == "brownian-bridge") return Construction::brownian_bridge;
  if (s == "pca") return Construction::pca;
  throw std::invalid_argument("unknown construction '" + std::string(s) +
                              "' (expected standard|bb|pca)");
}

/// A with A A^T = Sigma, plus per-column sign information.
struct GeneratingMatrix {
  Matrix a;
  Construction tag = Construction::custom;
  std::vector<bool> sign_ok;  // column entries share one sign (zeros allowed)
  std::vector<int> column_sign;  // +1 nonnegative, -1 nonpositive, 0 mixed

  std::size_t dim() const { return a.rows(); }

  static GeneratingMatrix from(Matrix a, Construction tag) {
    GeneratingMatrix g{std::move(a), tag, {}, {}};
    const std::size_t n = g.a.cols();
    g.sign_ok.resize(n);
    g.column_sign.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      bool pos = false, neg = false;
      for (std::size_t i = 0; i < g.a.rows(); ++i) {
        pos = pos || g.a(i, j) > 0.0;
        neg = neg || g.a(i, j) < 0.0;
      }
      g.sign_ok[j] = !(pos && neg);
      g.column_sign[j] = (pos && neg) ? 0 : (neg ? -1 : 1);
    }
    return g;
  }
};

inline Matrix covariance(const MarketParams& p) {
  p.validate();
  const std::size_t d = p.dates;
  Matrix s(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s(i, j) = p.dt() * static_cast<double>(std::min(i, j) + 1);
  return s;
}

inline GeneratingMatrix standard_matrix(const MarketParams& p) {
  p.validate();
  const std::size_t d = p.dates;
  const double h = std::sqrt(p.dt());
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = h;
  return GeneratingMatrix::from(std::move(a), Construction::standard);
}

/// Brownian bridge in level order: column 0 sets B(T), later columns fill the
/// midpoint of the widest remaining gap (breadth first).
inline GeneratingMatrix bb_matrix(const MarketParams& p) {
  p.validate();
  const std::size_t d = p.dates;
  const double dt = p.dt();
  // Rows indexed by time index 1..d; index 0 is B(0) = 0.
  Matrix path(d + 1, d);
  std::size_t col = 0;
  path(d, col++) = std::sqrt(p.maturity);
  std::queue<std::pair<std::size_t, std::size_t>> gaps;
  gaps.push({0, d});
  while (!gaps.empty()) {
    auto [l, r] = gaps.front();
    gaps.pop();
    if (r - l < 2) continue;
    const std::size_t m = l + (r - l) / 2;
    const double tl = static_cast<double>(l) * dt, tm = static_cast<double>(m) * dt,
                 tr = static_cast<double>(r) * dt;
    const double wl = (tr - tm) / (tr - tl), wr = (tm - tl) / (tr - tl);
    for (std::size_t k = 0; k < col; ++k) path(m, k) = wl * path(l, k) + wr * path(r, k);
    path(m, col++) = std::sqrt((tm - tl) * (tr - tm) / (tr - tl));
    gaps.push({l, m});
    gaps.push({m, r});
  }
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) a(i, k) = path(i + 1, k);
  return GeneratingMatrix::from(std::move(a), Construction::brownian_bridge);
}

/// Principal components from the closed-form eigensystem of min(i,j):
/// lambda_k = (dt/4) / sin^2((2k-1) pi / (4d+2)), v_k(i) ~ sin((2k-1) i pi / (2d+1)).
inline GeneratingMatrix pca_matrix(const MarketParams& p) {
  p.validate();
  const std::size_t d = p.dates;
  const double dd = static_cast<double>(d);
  Matrix a(d, d);
  for (std::size_t k = 1; k <= d; ++k) {
    const double odd = 2.0 * static_cast<double>(k) - 1.0;
    const double s = std::sin(odd * std::numbers::pi / (4.0 * dd + 2.0));
    const double lambda = 0.25 * p.dt() / (s * s);
    std::vector<double> v(d);
    double norm = 0.0;
    for (std::size_t i = 1; i <= d; ++i) {
      v[i - 1] = std::sin(odd * static_cast<double>(i) * std::numbers::pi / (2.0 * dd + 1.0));
      norm += v[i - 1] * v[i - 1];
    }
    const double scale = std::sqrt(lambda / norm);
    for (std::size_t i = 0; i < d; ++i) a(i, k - 1) = scale * v[i];
  }
  normalize_column_signs(a);
  return GeneratingMatrix::from(std::move(a), Construction::pca);
}

inline GeneratingMatrix make_matrix(Construction c, const MarketParams& p) {
  switch (c) {
    case Construction::standard: return standard_matrix(p);
    case Construction::brownian_bridge: return bb_matrix(p);
    case Construction::pca: return pca_matrix(p);
    case Construction::custom: break;
  }
  throw std::invalid_argument("make_matrix: custom matrices must be supplied explicitly");
}

/// A * U for an orthogonal U; the result still factors Sigma.
inline GeneratingMatrix compose(const GeneratingMatrix& g, const Matrix& u) {
  return GeneratingMatrix::from(g.a * u, Construction::custom);
}

/// log(S_i / S0) = drift * t_i + sigma * (A x)_i
inline void log_returns(std::span<const double> x, const Matrix& a, const MarketParams& p,
                        std::span<double> out) {
  a.multiply(x, out);
  const double dt = p.dt();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = p.drift() * static_cast<double>(i + 1) * dt + p.sigma * out[i];
}

inline std::vector<double> assets(std::span<const double> x, const Matrix& a, const MarketParams& p) {
  if (x.size() != p.dates || a.rows() != p.dates || a.cols() != p.dates)
    throw std::invalid_argument("assets: dimension mismatch");
  std::vector<double> s(p.dates);
  log_returns(x, a, p, s);
  const double log_s0 = std::log(p.s0);
  for (double& v : s) v = std::exp(log_s0 + v);
  return s;
}

}  // namespace cqmc
