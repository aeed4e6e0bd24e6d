#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cqmc/anova.hpp"
#include "cqmc/estimator.hpp"
#include "cqmc/path.hpp"
#include "cqmc/payoff.hpp"
#include "cqmc/reduce.hpp"
#include "cqmc/report.hpp"
#include "cqmc/smooth.hpp"

namespace cqmc {

/// Which coordinate to integrate out before sampling, if any.
struct Smoothing {
  enum class Kind { none, first, last, index };
  Kind kind = Kind::none;
  std::size_t index = 0;  // 0-based, for Kind::index

  static Smoothing none() { return {}; }
  static Smoothing first() { return {Kind::first, 0}; }
  static Smoothing last() { return {Kind::last, 0}; }
  static Smoothing column(std::size_t j) { return {Kind::index, j}; }

  bool enabled() const { return kind != Kind::none; }

  std::size_t resolve(std::size_t d) const {
    switch (kind) {
      case Kind::first: return 0;
      case Kind::last: return d - 1;
      case Kind::index:
        if (index >= d)
          throw std::invalid_argument("smoothing column " + std::to_string(index + 1) +
                                      " exceeds d = " + std::to_string(d));
        return index;
      case Kind::none: break;
    }
    throw std::logic_error("Smoothing::resolve called without conditioning");
  }

  std::string str() const {
    switch (kind) {
      case Kind::none: return "none";
      case Kind::first: return "cond:first";
      case Kind::last: return "cond:last";
      case Kind::index: return "cond:" + std::to_string(index + 1);
    }
    return "?";
  }
};

inline Smoothing parse_smoothing(std::string_view s) {
  if (s == "none") return Smoothing::none();
  if (s.substr(0, 5) == "cond:") {
    const std::string_view arg = s.substr(5);
    if (arg == "first") return Smoothing::first();
    if (arg == "last") return Smoothing::last();
    try {
      std::size_t pos = 0;
      const long j = std::stol(std::string(arg), &pos);
      if (pos == arg.size() && j >= 1) return Smoothing::column(static_cast<std::size_t>(j - 1));
    } catch (const std::exception&) {
    }
  }
  throw std::invalid_argument("unknown smoothing '" + std::string(s) +
                              "' (expected none|cond:<j>|cond:first|cond:last)");
}

enum class ReduceChoice { none, gpca };

inline std::string_view to_string(ReduceChoice r) { return r == ReduceChoice::gpca ? "gpca" : "none"; }

inline ReduceChoice parse_reduce(std::string_view s) {
  if (s == "none") return ReduceChoice::none;
  if (s == "gpca") return ReduceChoice::gpca;
  throw std::invalid_argument("unknown reduce choice '" + std::string(s) + "' (expected none|gpca)");
}

/// Parses "8..18", "8,10,12" or "12".
inline std::vector<unsigned> parse_exponents(std::string_view s) {
  std::vector<unsigned> out;
  auto to_uint = [&](std::string_view t) {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(std::string(t), &pos);
    if (pos != t.size()) throw std::invalid_argument("bad sample-size exponent '" + std::string(t) + "'");
    return static_cast<unsigned>(v);
  };
  if (const auto dots = s.find(".."); dots != std::string_view::npos) {
    const unsigned lo = to_uint(s.substr(0, dots)), hi = to_uint(s.substr(dots + 2));
    if (lo > hi) throw std::invalid_argument("empty exponent range '" + std::string(s) + "'");
    for (unsigned m = lo; m <= hi; ++m) out.push_back(m);
    return out;
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    out.push_back(to_uint(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct ExperimentConfig {
  Example example = Example::delta;
  MarketParams params;  // params.dates is d
  Construction construction = Construction::standard;
  Smoothing smoothing = Smoothing::first();
  ReduceChoice reduce = ReduceChoice::none;
  Sampler sampler = Sampler::rqmc;
  std::vector<unsigned> exponents = parse_exponents("8..18");
  std::size_t replicates = 200;
  std::uint64_t seed = 42;
  std::size_t threads = 0;
  std::size_t gpca_samples = 256;
  unsigned reference_exponent = 20;
  std::size_t reference_replicates = 32;
  std::string out_csv;
  std::string out_svg;

  std::size_t d() const { return params.dates; }

  void validate() const {
    params.validate();
    if (exponents.empty()) throw std::invalid_argument("no sample sizes configured");
    for (unsigned m : exponents)
      if (m > 20) throw std::invalid_argument("sample-size exponents must be <= 20");
    if (replicates < 2) throw std::invalid_argument("at least 2 replicates are required");
    if (reference_exponent > 20) throw std::invalid_argument("reference exponent must be <= 20");
    if (reference_replicates < 2) throw std::invalid_argument("reference needs at least 2 replicates");
    if (reduce == ReduceChoice::gpca && !smoothing.enabled())
      throw std::invalid_argument("--reduce gpca requires a conditioning choice (cond:<j>)");
    if (smoothing.enabled()) smoothing.resolve(d());
  }

  /// Desk-scale profile: R = 50, n = 2^8..2^14.
  static ExperimentConfig desk() {
    ExperimentConfig c;
    c.replicates = 50;
    c.exponents = parse_exponents("8..14");
    return c;
  }

  /// The full profile: R = 200, n = 2^8..2^18, d = 4.
  static ExperimentConfig figure1() {
    ExperimentConfig c;
    c.replicates = 200;
    c.exponents = parse_exponents("8..18");
    return c;
  }
};

struct Method {
  Evaluator f;
  std::size_t dim = 0;
  std::string label;
  std::string warning;
};

inline std::string method_label(const ExperimentConfig& cfg) {
  std::string base = cfg.smoothing.enabled() ? "CQMC" : (cfg.sampler == Sampler::mc ? "MC" : "QMC");
  if (cfg.smoothing.enabled() && cfg.sampler == Sampler::mc) base = "CMC";
  if (cfg.reduce == ReduceChoice::gpca) base += "+GPCA";
  return base;
}

/// Integrand as sampled: f itself, P_j f, or P_j f composed with a GPCA rotation.
inline Method build_method(const ExperimentConfig& cfg) {
  cfg.validate();
  IntegrandSpec spec(cfg.example, cfg.params, cfg.construction);
  Method m;
  m.label = method_label(cfg);
  if (!cfg.smoothing.enabled()) {
    auto shared = std::make_shared<const IntegrandSpec>(std::move(spec));
    m.f = [shared](std::span<const double> x) { return f_eval(x, *shared); };
    m.dim = cfg.d();
    return m;
  }
  const std::size_t j = cfg.smoothing.resolve(cfg.d());
  auto pint = std::make_shared<const PreintegratedIntegrand>(std::move(spec), j);
  m.dim = pint->dim();
  Evaluator base = [pint](std::span<const double> y) { return (*pint)(y); };
  if (cfg.reduce == ReduceChoice::none || m.dim == 0) {
    m.f = std::move(base);
    return m;
  }
  const ScrambleSeed gseed{splitmix64(cfg.seed ^ 0x4750434147524144ULL), 0};
  const Matrix grads = gradient_samples(base, m.dim, std::max(cfg.gpca_samples, m.dim + 1), gseed);
  const OrthogonalTransform t = gpca_matrix(grads);
  m.warning = t.warning;
  auto rotated = std::make_shared<const TransformedIntegrand<Evaluator>>(apply(base, t));
  m.f = [rotated](std::span<const double> y) { return (*rotated)(y); };
  return m;
}

struct ReferenceValue {
  double value = 0.0;
  double std_error = 0.0;
  std::string provenance;
};

/// Reference by CQMC+GPCA (column 1) with a large sample, cross-checked against
/// the quadrature oracle when d <= 3.
inline ReferenceValue reference_value(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentConfig rc = cfg;
  rc.smoothing = Smoothing::first();
  rc.reduce = ReduceChoice::gpca;
  rc.sampler = Sampler::rqmc;
  const Method method = build_method(rc);
  const std::uint64_t master = splitmix64(cfg.seed ^ 0x5245464552454e43ULL);
  const auto est = run_replicates(cfg.reference_replicates, cfg.threads, [&](std::size_t r) {
    return estimate(method.f, method.dim, Sampler::rqmc, cfg.reference_exponent, ScrambleSeed{master, r});
  });
  const double rr = static_cast<double>(est.size());
  double mean = 0.0;
  for (double e : est) mean += e;
  mean /= rr;
  double var = 0.0;
  for (double e : est) var += (e - mean) * (e - mean);
  ReferenceValue ref{mean, std::sqrt(var / (rr - 1.0) / rr), {}};

  std::ostringstream prov;
  prov.precision(6);
  prov << "CQMC+GPCA (" << to_string(cfg.construction) << ", cond:first) n=2^" << cfg.reference_exponent
       << " x " << cfg.reference_replicates << " replicates, stderr " << ref.std_error;
  if (cfg.d() <= AnovaOracle::kMaxDim) {
    const AnovaOracle oracle(IntegrandSpec(cfg.example, cfg.params, cfg.construction));
    const double q = oracle.integral();
    const double diff = std::abs(q - ref.value);
    const double allowed = std::max(5.0 * ref.std_error, 1e-9 * std::abs(q) + 1e-12);
    if (!(diff <= allowed)) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "reference cross-check failed: CQMC " << ref.value << " +- " << ref.std_error
          << " vs quadrature " << q << " (|diff| " << diff << " > " << allowed << ")";
      throw std::runtime_error(msg.str());
    }
    prov << "; quadrature cross-check " << q << " (|diff| " << diff << ")";
  }
  ref.provenance = prov.str();
  return ref;
}

inline ConvergenceReport convergence_study(const ExperimentConfig& cfg, const ReferenceValue& ref) {
  const Method method = build_method(cfg);
  StudySettings st;
  st.exponents = cfg.exponents;
  st.replicates = cfg.replicates;
  st.threads = cfg.threads;
  // MC and each randomized method draw from distinct streams.
  st.seed = splitmix64(cfg.seed + static_cast<std::uint64_t>(cfg.sampler) * 7919u);
  ConvergenceReport rep = measure_convergence(method.f, method.dim, cfg.sampler, ref.value, st, method.label);
  rep.seed = cfg.seed;
  rep.reference_provenance = ref.provenance;
  return rep;
}

inline ConvergenceReport convergence_study(const ExperimentConfig& cfg) {
  return convergence_study(cfg, reference_value(cfg));
}

}  // namespace cqmc
