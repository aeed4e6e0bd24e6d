#pragma once

#include <bit>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqmc/estimator.hpp"
#include "cqmc/normal.hpp"
#include "cqmc/payoff.hpp"
#include "cqmc/quadrature.hpp"

// Quadrature ANOVA oracle for d <= 3.
//
// Subsets of 1:d are bit masks (bit k <-> coordinate k+1). P_v f integrates f
// over the coordinates in v by tensor Gauss-Hermite, except that one axis of v
// whose generating-matrix column has a single sign is integrated innermost with
// a composite Gauss-Legendre rule split at the discontinuity psi along that axis.
// With no such axis, plain Gauss-Hermite with twice the nodes is used.

namespace cqmc {

using SubsetMask = unsigned;

class AnovaOracle {
 public:
  static constexpr std::size_t kMaxDim = 3;

  explicit AnovaOracle(IntegrandSpec spec, std::size_t nodes = 64)
      : spec_(std::move(spec)),
        gh_(quad::gauss_hermite(nodes)),
        gh_double_(quad::gauss_hermite(2 * nodes)),
        gl_(quad::gauss_legendre(32)) {
    if (spec_.dim() > kMaxDim)
      throw std::invalid_argument("AnovaOracle: d = " + std::to_string(spec_.dim()) +
                                  " exceeds the oracle limit of 3");
    std::vector<double> x(spec_.dim(), 0.0);
    integral_ = project(full(), x);
  }

  std::size_t dim() const { return spec_.dim(); }
  SubsetMask full() const { return (1u << spec_.dim()) - 1u; }
  const IntegrandSpec& spec() const { return spec_; }

  /// I(f) = f_emptyset.
  double integral() const { return integral_; }

  /// (P_v f)(x_{-v}); entries of x inside v are ignored.
  double project(SubsetMask v, std::span<const double> x) const {
    check(v, x);
    std::vector<double> work(x.begin(), x.end());
    auto f = [this](std::span<const double> z) { return f_eval(z, spec_); };
    return integrate_subset(f, v, work, /*indicator_only_positive=*/true);
  }

  /// f_v(x) = sum_{w subset v} (-1)^{|v|-|w|} (P_{-w} f)(x_w).
  double term(SubsetMask v, std::span<const double> x) const {
    check(v, x);
    double s = 0.0;
    for (SubsetMask w = v;; w = (w - 1) & v) {
      const SubsetMask complement = full() & ~w;
      const double pw = complement == full() ? integral_ : project(complement, x);
      s += ((std::popcount(v) - std::popcount(w)) % 2 == 0 ? 1.0 : -1.0) * pw;
      if (w == 0) break;
    }
    return s;
  }

  /// E[h(x)] over all d coordinates for an h whose only discontinuity along
  /// the split axis is the surface phi = 0.
  double expectation(const std::function<double(std::span<const double>)>& h) const {
    std::vector<double> work(spec_.dim(), 0.0);
    return integrate_subset(h, full(), work, /*indicator_only_positive=*/false);
  }

  /// E[f_v f_w] by split-aware quadrature.
  double inner_product(SubsetMask v, SubsetMask w) const {
    return expectation([&](std::span<const double> x) { return term(v, x) * term(w, x); });
  }

  /// Root of phi along `axis` with the other coordinates from x (bisection).
  /// Returns -inf / +inf when phi keeps one sign on [-60, 60].
  double split_point(std::size_t axis, std::span<const double> x) const {
    std::vector<double> z(x.begin(), x.end());
    const double sign = spec_.gm.column_sign[axis] < 0 ? -1.0 : 1.0;
    auto phi_at = [&](double t) {
      z[axis] = t;
      return sign * phi(z, spec_);
    };
    double lo = -60.0, hi = 60.0;
    if (phi_at(lo) >= 0.0) return sign > 0 ? -INFINITY : INFINITY;
    if (phi_at(hi) < 0.0) return sign > 0 ? INFINITY : -INFINITY;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi_at(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  void check(SubsetMask v, std::span<const double> x) const {
    if (x.size() != spec_.dim()) throw std::invalid_argument("AnovaOracle: x must have d entries");
    if ((v & ~full()) != 0) throw std::invalid_argument("AnovaOracle: subset outside 1:d");
  }

  // Prefers a column without zero entries: then phi crosses zero along that
  // axis for every value of the others, and the outer integrand is analytic.
  int split_axis(SubsetMask v) const {
    for (std::size_t k = 0; k < spec_.dim(); ++k) {
      if (!((v >> k) & 1u) || !spec_.gm.sign_ok[k]) continue;
      bool strict = true;
      for (std::size_t i = 0; i < spec_.dim(); ++i) strict = strict && spec_.gm.a(i, k) != 0.0;
      if (strict) return static_cast<int>(k);
    }
    for (int k = static_cast<int>(spec_.dim()) - 1; k >= 0; --k)
      if ((v >> k) & 1u && spec_.gm.sign_ok[static_cast<std::size_t>(k)]) return k;
    return -1;
  }

  template <class H>
  double integrate_subset(const H& h, SubsetMask v, std::vector<double>& x,
                          bool indicator_only_positive) const {
    if (v == 0) return h(std::span<const double>(x));
    const int s = split_axis(v);
    std::vector<std::size_t> outer;
    for (std::size_t k = 0; k < spec_.dim(); ++k)
      if ((v >> k) & 1u && static_cast<int>(k) != s) outer.push_back(k);
    const quad::Rule& rule = s >= 0 ? gh_ : gh_double_;
    return nested(h, outer, 0, x, rule, s, indicator_only_positive);
  }

  template <class H>
  double nested(const H& h, const std::vector<std::size_t>& outer, std::size_t level,
                std::vector<double>& x, const quad::Rule& rule, int split,
                bool indicator_only_positive) const {
    if (level == outer.size()) {
      if (split < 0) return h(std::span<const double>(x));
      return axis_integral(h, static_cast<std::size_t>(split), x, indicator_only_positive);
    }
    const std::size_t axis = outer[level];
    const double keep = x[axis];
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      x[axis] = rule.nodes[i];
      s += rule.weights[i] * nested(h, outer, level + 1, x, rule, split, indicator_only_positive);
    }
    x[axis] = keep;
    return s;
  }

  template <class H>
  double axis_integral(const H& h, std::size_t axis, std::vector<double>& x,
                       bool only_positive) const {
    constexpr double reach = 12.0;
    const double keep = x[axis];
    const double psi_root = split_point(axis, x);
    const bool increasing = spec_.gm.column_sign[axis] >= 0;
    double total = 0.0;
    auto piece = [&](double lo, double hi) {
      lo = std::max(lo, -reach - 30.0);
      hi = std::min(hi, reach + 30.0);
      if (!(hi > lo)) return;
      const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / 4.0)));
      const double width = (hi - lo) / panels;
      for (int p = 0; p < panels; ++p) {
        const double a = lo + p * width, half = 0.5 * width, mid = a + half;
        for (std::size_t i = 0; i < gl_.size(); ++i) {
          const double t = mid + half * gl_.nodes[i];
          x[axis] = t;
          total += half * gl_.weights[i] * h(std::span<const double>(x)) * normal::pdf(t);
        }
      }
    };
    // Integration window: the Gaussian weight is negligible beyond +-reach of
    // the window's nearest point to the origin.
    auto window = [&](double lo, double hi) {
      const double a = std::max(lo, std::min(hi, 0.0) - reach);
      const double b = std::min(hi, std::max(lo, 0.0) + reach);
      piece(a, b);
    };
    if (std::isinf(psi_root)) {
      const bool all_positive = (psi_root < 0) == increasing;
      if (all_positive || !only_positive) window(-INFINITY, INFINITY);
    } else {
      if (increasing || !only_positive) window(psi_root, INFINITY);
      if (!increasing || !only_positive) window(-INFINITY, psi_root);
    }
    x[axis] = keep;
    return total;
  }

  IntegrandSpec spec_;
  quad::Rule gh_;
  quad::Rule gh_double_;
  quad::Rule gl_;
  double integral_ = 0.0;
};

/// RQMC mean-error curve for integrating f_v over its |v| coordinates; the
/// exact integral is 0 for v != {} and I(f) for v = {}.
inline ConvergenceReport term_rate_study(const AnovaOracle& oracle, SubsetMask v,
                                         const StudySettings& cfg) {
  for (unsigned m : cfg.exponents)
    if (m > 12) throw std::invalid_argument("term_rate_study: n is limited to 2^12 (oracle cost)");
  if (cfg.replicates > 20) throw std::invalid_argument("term_rate_study: at most 20 replicates");
  std::vector<std::size_t> coords;
  for (std::size_t k = 0; k < oracle.dim(); ++k)
    if ((v >> k) & 1u) coords.push_back(k);
  const std::size_t d = oracle.dim();
  Evaluator fv = [&oracle, v, coords, d](std::span<const double> z) {
    std::vector<double> x(d, 0.0);
    for (std::size_t k = 0; k < coords.size(); ++k) x[coords[k]] = z[k];
    return oracle.term(v, x);
  };
  const double reference = v == 0 ? oracle.integral() : 0.0;
  std::string label = "anova term {";
  for (std::size_t k = 0; k < coords.size(); ++k)
    label += (k ? "," : "") + std::to_string(coords[k] + 1);
  label += "}";
  return measure_convergence(fv, coords.size(), Sampler::rqmc, reference, cfg, label);
}

}  // namespace cqmc
