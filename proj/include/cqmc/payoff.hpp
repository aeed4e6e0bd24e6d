#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cqmc/path.hpp"

// Asian-option integrands of the form f(x) = g(x) * 1{phi(x) >= 0} with
// phi = S_A - K and S_A the arithmetic average over the d monitoring dates.

namespace cqmc {

enum class Example { payoff, delta, gamma, rho, theta, vega, binary };

inline constexpr std::array<Example, 7> kAllExamples = {
    Example::payoff, Example::delta, Example::gamma, Example::rho,
    Example::theta,  Example::vega,  Example::binary};

inline std::string_view to_string(Example e) {
  switch (e) {
    case Example::payoff: return "payoff";
    case Example::delta: return "delta";
    case Example::gamma: return "gamma";
    case Example::rho: return "rho";
    case Example::theta: return "theta";
    case Example::vega: return "vega";
    case Example::binary: return "binary";
  }
  return "?";
}

inline Example parse_example(std::string_view s) {
  for (Example e : kAllExamples)
    if (to_string(e) == s) return e;
  throw std::invalid_argument("unknown example '" + std::string(s) +
                              "' (expected payoff|delta|gamma|rho|theta|vega|binary)");
}

struct IntegrandSpec {
  Example example = Example::payoff;
  MarketParams params;
  GeneratingMatrix gm;

  IntegrandSpec(Example e, const MarketParams& p, GeneratingMatrix g)
      : example(e), params(p), gm(std::move(g)) {
    params.validate();
    if (gm.a.rows() != params.dates || gm.a.cols() != params.dates)
      throw std::invalid_argument("IntegrandSpec: generating matrix must be d x d");
  }

  IntegrandSpec(Example e, const MarketParams& p, Construction c)
      : IntegrandSpec(e, p, make_matrix(c, p)) {}

  std::size_t dim() const { return params.dates; }
};

/// One summand w * (b + c x_j) * exp(ell x_j).
struct Term {
  double w = 0.0;
  double b = 1.0;
  double c = 0.0;
  double ell = 0.0;
};

/// phi(x_j, y) = sum_i weight_i exp(rate_i x_j) + constant.
struct PhiTerms {
  std::vector<double> weight;
  std::vector<double> rate;
  double constant = 0.0;

  double operator()(double x) const {
    double s = constant;
    for (std::size_t i = 0; i < weight.size(); ++i) s += weight[i] * std::exp(rate[i] * x);
    return s;
  }
  double derivative(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) s += weight[i] * rate[i] * std::exp(rate[i] * x);
    return s;
  }
};

/// g and phi restricted to the line through y along coordinate j.
struct TermDecomposition {
  std::vector<Term> terms;
  PhiTerms phi;

  double g(double x) const {
    double s = 0.0;
    for (const Term& t : terms) s += t.w * (t.b + t.c * x) * std::exp(t.ell * x);
    return s;
  }
};

namespace detail {

inline double g_from_log_returns(const IntegrandSpec& spec, std::span<const double> lr) {
  const MarketParams& p = spec.params;
  const std::size_t d = p.dates;
  const double dd = static_cast<double>(d);
  const double disc = p.discount();
  const double log_s0 = std::log(p.s0);
  double sa = 0.0;
  for (double l : lr) sa += std::exp(log_s0 + l);
  sa /= dd;

  switch (spec.example) {
    case Example::payoff:
      return disc * (sa - p.strike);
    case Example::delta:
      return disc * sa / p.s0;
    case Example::gamma: {
      const double h = p.dt();
      return disc * sa * (lr[0] - (p.rate + 0.5 * p.sigma * p.sigma) * h) /
             (p.s0 * p.s0 * p.sigma * p.sigma * h);
    }
    case Example::rho: {
      double weighted = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        weighted += static_cast<double>(i + 1) * std::exp(log_s0 + lr[i]);
      const double dsa_dr = p.maturity / (dd * dd) * weighted;
      return disc * (dsa_dr - p.maturity * (sa - p.strike));
    }
    case Example::theta: {
      const double omega = p.drift();
      double dsa_dt = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double ii = static_cast<double>(i + 1);
        dsa_dt += std::exp(log_s0 + lr[i]) * (omega * ii / (2.0 * dd) + lr[i] / (2.0 * p.maturity));
      }
      dsa_dt /= dd;
      return disc * (dsa_dt - p.rate * (sa - p.strike));
    }
    case Example::vega: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double ti = static_cast<double>(i + 1) * p.dt();
        s += std::exp(log_s0 + lr[i]) *
             (lr[i] - (p.rate + 0.5 * p.sigma * p.sigma) * ti) / p.sigma;
      }
      return disc * s / dd;
    }
    case Example::binary:
      return disc;
  }
  return 0.0;
}

}  // namespace detail

inline double phi(std::span<const double> x, const IntegrandSpec& spec) {
  std::vector<double> lr(spec.dim());
  log_returns(x, spec.gm.a, spec.params, lr);
  double sa = 0.0;
  for (double l : lr) sa += spec.params.s0 * std::exp(l);
  return sa / static_cast<double>(spec.dim()) - spec.params.strike;
}

inline double g_eval(std::span<const double> x, const IntegrandSpec& spec) {
  std::vector<double> lr(spec.dim());
  log_returns(x, spec.gm.a, spec.params, lr);
  return detail::g_from_log_returns(spec, lr);
}

inline double f_eval(std::span<const double> x, const IntegrandSpec& spec) {
  std::vector<double> lr(spec.dim());
  log_returns(x, spec.gm.a, spec.params, lr);
  double sa = 0.0;
  for (double l : lr) sa += spec.params.s0 * std::exp(l);
  if (sa / static_cast<double>(spec.dim()) - spec.params.strike < 0.0) return 0.0;
  return detail::g_from_log_returns(spec, lr);
}

/// Inserts x_j into y (the other d-1 coordinates, in order) to form a full point.
inline void embed(std::span<const double> y, std::size_t j, double xj, std::span<double> x) {
  for (std::size_t k = 0, m = 0; k < x.size(); ++k) x[k] = (k == j) ? xj : y[m++];
}

/// Fills `out` with the decomposition of g and phi in coordinate j at y.
/// Reuses the capacity of `out`; `scratch` must hold 2d doubles.
inline void decompose_into(const IntegrandSpec& spec, std::size_t j, std::span<const double> y,
                           TermDecomposition& out, std::span<double> scratch) {
  const MarketParams& p = spec.params;
  const std::size_t d = p.dates;
  if (j >= d) throw std::out_of_range("decompose: column index out of range");
  if (y.size() + 1 != d) throw std::invalid_argument("decompose: y must have d-1 entries");

  std::span<double> x = scratch.first(d), lr0 = scratch.subspan(d, d);
  embed(y, j, 0.0, x);
  log_returns(x, spec.gm.a, p, lr0);

  const double dd = static_cast<double>(d);
  const double disc = p.discount();
  const double half_var = 0.5 * p.sigma * p.sigma;
  const double log_s0 = std::log(p.s0);

  out.terms.clear();
  out.phi.weight.resize(d);
  out.phi.rate.resize(d);
  out.phi.constant = -p.strike;
  for (std::size_t i = 0; i < d; ++i) {
    out.phi.weight[i] = std::exp(log_s0 + lr0[i]) / dd;
    out.phi.rate[i] = p.sigma * spec.gm.a(i, j);
  }

  auto constant = [&](double v) { out.terms.push_back({v, 1.0, 0.0, 0.0}); };

  for (std::size_t i = 0; i < d; ++i) {
    const double gi = std::exp(log_s0 + lr0[i]);
    const double ell = p.sigma * spec.gm.a(i, j);
    const double ii = static_cast<double>(i + 1);
    switch (spec.example) {
      case Example::payoff:
        out.terms.push_back({disc * gi / dd, 1.0, 0.0, ell});
        break;
      case Example::delta:
        out.terms.push_back({disc * gi / (dd * p.s0), 1.0, 0.0, ell});
        break;
      case Example::gamma: {
        const double h = p.dt();
        const double scale = disc / (dd * p.s0 * p.s0 * p.sigma * p.sigma * h);
        out.terms.push_back({scale * gi, lr0[0] - (p.rate + half_var) * h,
                             p.sigma * spec.gm.a(0, j), ell});
        break;
      }
      case Example::rho:
        out.terms.push_back({disc * gi * p.maturity * (ii / (dd * dd) - 1.0 / dd), 1.0, 0.0, ell});
        break;
      case Example::theta:
        out.terms.push_back({disc * gi / dd,
                             p.drift() * ii / (2.0 * dd) + lr0[i] / (2.0 * p.maturity) - p.rate,
                             ell / (2.0 * p.maturity), ell});
        break;
      case Example::vega:
        out.terms.push_back({disc * gi / (dd * p.sigma),
                             lr0[i] - (p.rate + half_var) * ii * p.dt(), ell, ell});
        break;
      case Example::binary:
        break;
    }
  }

  switch (spec.example) {
    case Example::payoff: constant(-disc * p.strike); break;
    case Example::rho: constant(disc * p.maturity * p.strike); break;
    case Example::theta: constant(disc * p.rate * p.strike); break;
    case Example::binary: constant(disc); break;
    default: break;
  }
}

inline TermDecomposition decompose(const IntegrandSpec& spec, std::size_t j,
                                   std::span<const double> y) {
  TermDecomposition out;
  std::vector<double> scratch(2 * spec.dim());
  decompose_into(spec, j, y, out, scratch);
  return out;
}

}  // namespace cqmc
