#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace cqmc::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1].
inline Rule gauss_legendre(std::size_t n) {
  Rule r{std::vector<double>(n), std::vector<double>(n)};
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / static_cast<double>(j);
      }
      pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return r;
}

/// n-point Gauss-Hermite rule for the standard normal weight:
/// sum_k w_k h(x_k) ~ E[h(Z)], Z ~ N(0,1). The root finder is reliable up to n = 192.
inline Rule gauss_hermite(std::size_t n) {
  if (n < 1 || n > 192) throw std::invalid_argument("gauss_hermite: n must be in 1..192");
  // Newton on the orthonormal physicists' recurrence, then rescale.
  Rule r{std::vector<double>(n), std::vector<double>(n)};
  const double pim4 = 0.7511255444649425;  // pi^(-1/4)
  const std::size_t half = (n + 1) / 2;
  const double nd = static_cast<double>(n);
  double z = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(nd, 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * r.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * r.nodes[1];
    else
      z = 2.0 * z - r.nodes[i - 2];
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / jd) * p2 - std::sqrt((jd - 1.0) / jd) * p3;
      }
      pp = std::sqrt(2.0 * nd) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    r.nodes[i] = z;
    r.nodes[n - 1 - i] = -z;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  for (std::size_t i = 0; i < n; ++i) {
    r.nodes[i] *= std::numbers::sqrt2;
    r.weights[i] /= std::sqrt(std::numbers::pi);
  }
  std::reverse(r.nodes.begin(), r.nodes.end());
  std::reverse(r.weights.begin(), r.weights.end());
  return r;
}

/// E[f(Z)] for Z ~ N(0, I_dim) by the tensor product of a Gauss-Hermite rule.
template <class F>
double tensor_expectation(const F& f, std::size_t dim, const Rule& rule) {
  std::vector<double> x(dim, 0.0);
  std::function<double(std::size_t)> level = [&](std::size_t k) -> double {
    if (k == dim) return f(std::span<const double>(x));
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      x[k] = rule.nodes[i];
      s += rule.weights[i] * level(k + 1);
    }
    return s;
  };
  return level(0);
}

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

namespace detail {

// Gauss-Kronrod 10/21 (QUADPACK qk21).
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980307407, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment kronrod21(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double gauss = 0.0, kron = kWgk[10] * fc;
  for (int k = 0; k < 10; ++k) {
    const double dx = h * kXgk[k];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[k] * s;
    if (k % 2 == 1) gauss += kWg[k / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature of f on [a, b].
/// Stops when the summed error estimate is below max(abs_tol, rel_tol * |I|).
template <class F>
Result integrate(const F& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 1e-300,
                 std::size_t max_intervals = 4000) {
  if (a == b) return {0.0, 0.0, 0, true};
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::kronrod21(f, a, b));
  double value = heap.top().value, error = heap.top().error;
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (heap.size() >= max_intervals) return {value, error, heap.size(), false};
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::kronrod21(f, worst.a, mid);
    const auto right = detail::kronrod21(f, mid, worst.b);
    heap.push(left);
    heap.push(right);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    // Guard against the running error drifting negative through cancellation.
    if (error < 0.0) {
      error = 0.0;
      value = 0.0;
      auto copy = heap;
      while (!copy.empty()) {
        value += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  // Resum for accuracy.
  double total = 0.0;
  std::size_t count = heap.size();
  while (!heap.empty()) {
    total += heap.top().value;
    heap.pop();
  }
  return {total, error, count, true};
}

}  // namespace cqmc::quad
