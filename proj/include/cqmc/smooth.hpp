#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cqmc/normal.hpp"
#include "cqmc/payoff.hpp"
#include "cqmc/quadrature.hpp"

// Conditioning on one coordinate: P_j f(y) = E[f(x) | x_{-j} = y].
//
// For a column j of A with one sign, x_j -> phi(x_j, y) is monotone and convex,
// so {phi >= 0} is a half-line [psi(y), inf) and
//
//     P_j f(y) = sum_m w_m * mu(psi(y), b_m, c_m, ell_m),
//     mu(a, b, c, l) = (2 pi)^(-1/2) int_a^inf (b + c x) exp(-x^2/2 + l x) dx
//                    = exp(l^2/2) [(b + c l)(1 - Phi(a - l)) + c rho(a - l)].

namespace cqmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double mu(double a, double b, double c, double ell) {
  const double growth = std::exp(0.5 * ell * ell);
  if (a == kNegInf) return growth * (b + c * ell);
  const double z = a - ell;
  return growth * ((b + c * ell) * normal::sf(z) + c * normal::pdf(z));
}

enum class Region { crossing, all_above, all_below };

inline std::string_view to_string(Region r) {
  switch (r) {
    case Region::crossing: return "crossing";
    case Region::all_above: return "all_above";
    case Region::all_below: return "all_below";
  }
  return "?";
}

struct RootSettings {
  double tolerance = 1e-12;  // scaled by (K + 1)
  int max_iterations = 100;
};

struct RootResult {
  Region region = Region::crossing;
  double root = 0.0;  // meaningful for Region::crossing
  int iterations = 0;
};

namespace detail {

/// Safeguarded Newton for an increasing F on a bracket F(lo) < 0 < F(hi).
template <class F, class DF>
double newton_bracketed(const F& f, const DF& df, double lo, double hi, double start, double tol,
                        int max_iter, int& iterations) {
  double x = start;
  double fx = f(x);
  for (iterations = 0; iterations < max_iter; ++iterations) {
    if (std::abs(fx) <= tol) return x;
    if (fx < 0.0) lo = x; else hi = x;
    const double slope = df(x);
    double next = slope > 0.0 ? x - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      return next;
    x = next;
    fx = f(x);
  }
  throw std::runtime_error("root solver did not converge within " + std::to_string(max_iter) +
                           " iterations");
}

/// Expands from `from` in direction `dir` until sign(F) == want.
template <class F>
double expand(const F& f, double from, double dir, bool want_positive) {
  double step = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double x = from + dir * step;
    if ((f(x) > 0.0) == want_positive) return x;
    step *= 2.0;
  }
  throw std::runtime_error("root bracket search failed");
}

/// Root of a phi with all rates >= 0 (monotone nondecreasing, convex).
inline RootResult solve_increasing(const PhiTerms& phi, double tol, int max_iter) {
  double c0 = phi.constant, varying = 0.0;
  double common_rate = 0.0;
  bool single_rate = true;
  for (std::size_t i = 0; i < phi.rate.size(); ++i) {
    if (phi.rate[i] == 0.0) {
      c0 += phi.weight[i];
      continue;
    }
    if (varying == 0.0) common_rate = phi.rate[i];
    else if (phi.rate[i] != common_rate) single_rate = false;
    varying += phi.weight[i];
  }
  if (c0 >= 0.0) return {Region::all_above, kNegInf, 0};
  if (varying == 0.0) return {Region::all_below, std::numeric_limits<double>::infinity(), 0};
  if (single_rate) return {Region::crossing, (std::log(-c0) - std::log(varying)) / common_rate, 0};

  auto f = [&](double x) { return phi(x); };
  auto df = [&](double x) { return phi.derivative(x); };
  double lo, hi, start;
  if (f(0.0) > 0.0) {
    hi = 0.0;
    lo = expand(f, 0.0, -1.0, false);
  } else {
    lo = 0.0;
    hi = expand(f, 0.0, 1.0, true);
  }
  start = hi;  // from the right, Newton on a convex increasing map stays bracketed
  int it = 0;
  const double root = newton_bracketed(f, df, lo, hi, start, tol, max_iter, it);
  return {Region::crossing, root, it};
}

inline PhiTerms reflect(const PhiTerms& phi) {
  PhiTerms r = phi;
  for (double& l : r.rate) l = -l;
  return r;
}

inline int rate_sign(const PhiTerms& phi) {
  bool pos = false, neg = false;
  for (double l : phi.rate) {
    pos = pos || l > 0.0;
    neg = neg || l < 0.0;
  }
  return (pos && neg) ? 0 : (neg ? -1 : 1);
}

}  // namespace detail

/// Half-open pieces of the real line where phi(x_j, y) >= 0.
struct Interval {
  double lo;
  double hi;
};

/// {x : phi(x) >= 0} for any sign pattern: a half-line when the rates share a
/// sign, otherwise (phi strictly convex) the complement of (psi_L, psi_R).
inline std::vector<Interval> positive_set(const PhiTerms& phi, const RootSettings& rs, double scale) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double tol = rs.tolerance * scale;
  const int sign = detail::rate_sign(phi);
  if (sign > 0) {
    const RootResult r = detail::solve_increasing(phi, tol, rs.max_iterations);
    if (r.region == Region::all_above) return {{-inf, inf}};
    if (r.region == Region::all_below) return {};
    return {{r.root, inf}};
  }
  if (sign < 0) {
    const RootResult r = detail::solve_increasing(detail::reflect(phi), tol, rs.max_iterations);
    if (r.region == Region::all_above) return {{-inf, inf}};
    if (r.region == Region::all_below) return {};
    return {{-inf, -r.root}};
  }
  // Mixed signs: phi' is increasing with a unique zero at the minimizer.
  auto dphi = [&](double x) { return phi.derivative(x); };
  auto d2phi = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < phi.weight.size(); ++i)
      s += phi.weight[i] * phi.rate[i] * phi.rate[i] * std::exp(phi.rate[i] * x);
    return s;
  };
  double lo, hi;
  if (dphi(0.0) > 0.0) {
    hi = 0.0;
    lo = detail::expand(dphi, 0.0, -1.0, false);
  } else {
    lo = 0.0;
    hi = detail::expand(dphi, 0.0, 1.0, true);
  }
  int it = 0;
  const double argmin = detail::newton_bracketed(dphi, d2phi, lo, hi, hi, 1e-14 * scale,
                                                 rs.max_iterations, it);
  const double floor_value = phi(argmin);
  if (floor_value >= 0.0) return {{-inf, inf}};
  auto f = [&](double x) { return phi(x); };
  auto df = [&](double x) { return phi.derivative(x); };
  const double right_hi = detail::expand(f, argmin, 1.0, true);
  const double right = detail::newton_bracketed(f, df, argmin, right_hi, right_hi, tol,
                                                rs.max_iterations, it);
  auto g = [&](double x) { return phi(-x); };
  auto dg = [&](double x) { return -phi.derivative(-x); };
  const double left_hi = detail::expand(g, -argmin, 1.0, true);
  const double left = -detail::newton_bracketed(g, dg, -argmin, left_hi, left_hi, tol,
                                                rs.max_iterations, it);
  return {{-inf, left}, {right, inf}};
}

/// psi_j(y) for a single-signed column j. For a nonpositive column the root is
/// reported in the original coordinate, with {phi >= 0} = (-inf, root].
inline RootResult psi(std::span<const double> y, const IntegrandSpec& spec, std::size_t j,
                      const RootSettings& rs = {}) {
  if (j >= spec.dim()) throw std::out_of_range("psi: column index out of range");
  if (!spec.gm.sign_ok[j])
    throw std::invalid_argument("psi: column " + std::to_string(j + 1) + " has mixed signs");
  const TermDecomposition td = decompose(spec, j, y);
  const double tol = rs.tolerance * (spec.params.strike + 1.0);
  if (spec.gm.column_sign[j] >= 0) return detail::solve_increasing(td.phi, tol, rs.max_iterations);
  RootResult r = detail::solve_increasing(detail::reflect(td.phi), tol, rs.max_iterations);
  if (r.region == Region::crossing) r.root = -r.root;
  return r;
}

enum class PreintegrationMethod { analytic, quadrature };

/// Quadrature of g(x_j, y) rho(x_j) over {phi >= 0}; works for any column.
inline double conditional_expectation_quadrature(const IntegrandSpec& spec, std::size_t j,
                                                 std::span<const double> y,
                                                 const RootSettings& rs = {},
                                                 double rel_tol = 1e-10) {
  const TermDecomposition td = decompose(spec, j, y);
  const auto pieces = positive_set(td.phi, rs, spec.params.strike + 1.0);
  std::vector<double> x(spec.dim());
  auto integrand = [&](double t) {
    embed(y, j, t, x);
    return g_eval(x, spec) * normal::pdf(t);
  };
  constexpr double cut = 40.0;
  double total = 0.0;
  for (const Interval& iv : pieces) {
    const double lo = std::max(iv.lo, -cut);
    const double hi = std::isinf(iv.hi) ? std::max(iv.lo, 0.0) + cut : std::min(iv.hi, cut);
    if (!(hi > lo)) continue;
    const auto r = quad::integrate(integrand, lo, hi, rel_tol);
    total += r.value;
  }
  return total;
}

/// P_j f as an evaluator of the remaining d-1 coordinates.
class PreintegratedIntegrand {
 public:
  PreintegratedIntegrand(IntegrandSpec spec, std::size_t j,
                         PreintegrationMethod method = PreintegrationMethod::analytic,
                         RootSettings rs = {})
      : spec_(std::move(spec)), j_(j), method_(method), rs_(rs) {
    if (j_ >= spec_.dim()) throw std::out_of_range("PreintegratedIntegrand: column out of range");
    if (!spec_.gm.sign_ok[j_])
      throw std::invalid_argument("PreintegratedIntegrand: column " + std::to_string(j_ + 1) +
                                  " of the generating matrix has mixed signs");
  }

  std::size_t dim() const { return spec_.dim() - 1; }
  std::size_t column() const { return j_; }
  const IntegrandSpec& spec() const { return spec_; }
  PreintegrationMethod method() const { return method_; }

  double operator()(std::span<const double> y) const {
    if (method_ == PreintegrationMethod::quadrature)
      return conditional_expectation_quadrature(spec_, j_, y, rs_);
    return analytic(y);
  }

  double analytic(std::span<const double> y) const {
    thread_local TermDecomposition td;
    thread_local std::vector<double> scratch;
    scratch.resize(2 * spec_.dim());
    decompose_into(spec_, j_, y, td, scratch);
    const double tol = rs_.tolerance * (spec_.params.strike + 1.0);
    if (spec_.gm.column_sign[j_] < 0) {
      // Integrate in t = -x_j so the event becomes t >= -root.
      for (Term& t : td.terms) {
        t.c = -t.c;
        t.ell = -t.ell;
      }
      for (double& l : td.phi.rate) l = -l;
    }
    const RootResult r = detail::solve_increasing(td.phi, tol, rs_.max_iterations);
    if (r.region == Region::all_below) return 0.0;
    const double a = r.region == Region::all_above ? kNegInf : r.root;
    double s = 0.0;
    for (const Term& t : td.terms) s += t.w * mu(a, t.b, t.c, t.ell);
    return s;
  }

 private:
  IntegrandSpec spec_;
  std::size_t j_;
  PreintegrationMethod method_;
  RootSettings rs_;
};

struct SmoothnessReport {
  double max_abs_d1 = 0.0;    // largest one-sided or central first difference
  double max_d1_jump = 0.0;   // max |D1+ - D1-| (second-order one-sided stencils)
  double max_d2_jump = 0.0;   // max |D2+ - D2-|
  double max_abs_d2 = 0.0;
  std::size_t samples = 0;
};

/// Finite-difference derivatives of F along y(t) = origin + t * direction for t
/// on an even grid over [t0, t1]. One-sided second-order stencils from the left
/// and the right agree to O(h^2) where F is C^2; a kink or a cusp shows up as a
/// jump that does not shrink with h.
template <class F>
SmoothnessReport smoothness_probe(const F& f, std::span<const double> origin,
                                  std::span<const double> direction, double t0, double t1,
                                  std::size_t samples, double h) {
  if (origin.size() != direction.size())
    throw std::invalid_argument("smoothness_probe: origin/direction size mismatch");
  SmoothnessReport rep;
  rep.samples = samples;
  std::vector<double> y(origin.size());
  auto at = [&](double t) {
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = origin[k] + t * direction[k];
    return f(std::span<const double>(y));
  };
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = samples == 1 ? t0 : t0 + (t1 - t0) * static_cast<double>(k) /
                                               static_cast<double>(samples - 1);
    double v[7];
    for (int s = -3; s <= 3; ++s) v[s + 3] = at(t + s * h);
    const double f0 = v[3];
    const double d1p = (-3.0 * f0 + 4.0 * v[4] - v[5]) / (2.0 * h);
    const double d1m = (3.0 * f0 - 4.0 * v[2] + v[1]) / (2.0 * h);
    const double d1c = (v[4] - v[2]) / (2.0 * h);
    const double d2p = (2.0 * f0 - 5.0 * v[4] + 4.0 * v[5] - v[6]) / (h * h);
    const double d2m = (2.0 * f0 - 5.0 * v[2] + 4.0 * v[1] - v[0]) / (h * h);
    const double d2c = (v[4] - 2.0 * f0 + v[2]) / (h * h);
    rep.max_abs_d1 = std::max({rep.max_abs_d1, std::abs(d1p), std::abs(d1m), std::abs(d1c)});
    rep.max_abs_d2 = std::max(rep.max_abs_d2, std::abs(d2c));
    rep.max_d1_jump = std::max(rep.max_d1_jump, std::abs(d1p - d1m));
    rep.max_d2_jump = std::max(rep.max_d2_jump, std::abs(d2p - d2m));
  }
  return rep;
}

}  // namespace cqmc
