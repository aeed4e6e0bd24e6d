#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cqmc/lds.hpp"
#include "cqmc/normal.hpp"
#include "cqmc/report.hpp"

namespace cqmc {

using Evaluator = std::function<double(std::span<const double>)>;

enum class Sampler { mc, rqmc };

inline std::string_view to_string(Sampler s) { return s == Sampler::mc ? "mc" : "rqmc"; }

inline Sampler parse_sampler(std::string_view s) {
  if (s == "mc") return Sampler::mc;
  if (s == "rqmc" || s == "qmc") return Sampler::rqmc;
  throw std::invalid_argument("unknown sampler '" + std::string(s) + "' (expected mc|rqmc)");
}

/// Average of f(inv_cdf(u_i)) over n = 2^m points in (0,1)^s. For rqmc the
/// points are a scrambled Sobol' net keyed by `seed`; for mc they are i.i.d.
/// uniforms from the same key. s = 0 evaluates the constant f() once.
inline double estimate(const Evaluator& f, std::size_t s, Sampler sampler, unsigned m,
                       ScrambleSeed seed) {
  if (s == 0) return f(std::span<const double>{});
  const std::uint64_t n = std::uint64_t{1} << m;
  std::vector<double> u(s), x(s);
  double sum = 0.0;

  auto accumulate = [&](std::uint64_t i) {
    for (std::size_t k = 0; k < s; ++k) x[k] = normal::inv_cdf(u[k]);
    const double v = f(x);
    if (std::isnan(v))
      throw std::runtime_error("estimate: evaluator returned NaN at point " + std::to_string(i) +
                               " (replicate " + std::to_string(seed.replicate) + ")");
    sum += v;
  };

  if (sampler == Sampler::rqmc) {
    SobolStream stream(DigitalNet(s), seed);
    for (std::uint64_t i = 0; i < n; ++i) {
      stream.next(u);
      accumulate(i);
    }
  } else {
    std::mt19937_64 rng(seed.derive());
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    for (std::uint64_t i = 0; i < n; ++i) {
      for (auto& uk : u) uk = (static_cast<double>(rng() >> 11) + 0.5) * scale;
      accumulate(i);
    }
  }
  return sum / static_cast<double>(n);
}

inline std::size_t resolve_threads(std::size_t threads) {
  if (threads != 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(0..count-1) on up to `threads` workers; results are stored by index
/// so the output never depends on scheduling.
template <class Fn>
std::vector<double> run_replicates(std::size_t count, std::size_t threads, const Fn& fn) {
  std::vector<double> out(count);
  threads = std::min(resolve_threads(threads), std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    for (std::size_t r = 0; r < count; ++r) out[r] = fn(r);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < count; r = next++) {
        try {
          out[r] = fn(r);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

struct StudySettings {
  std::vector<unsigned> exponents;
  std::size_t replicates = 50;
  std::uint64_t seed = 42;
  std::size_t threads = 0;
  std::size_t fit_skip = 2;
};

/// Replicated estimates at each n = 2^m, summarized against `reference`.
inline ConvergenceReport measure_convergence(const Evaluator& f, std::size_t s, Sampler sampler,
                                             double reference, const StudySettings& cfg,
                                             std::string label) {
  if (cfg.replicates < 2) throw std::invalid_argument("convergence study needs at least 2 replicates");
  ConvergenceReport rep;
  rep.label = std::move(label);
  rep.reference = reference;
  rep.replicates = cfg.replicates;
  rep.seed = cfg.seed;
  rep.fit_skip = cfg.fit_skip;
  for (unsigned m : cfg.exponents) {
    if (m > 20) throw std::invalid_argument("sample-size exponent must be <= 20");
    const std::uint64_t stream_master = splitmix64(cfg.seed + 0x51ed2701u * (m + 1));
    const auto est = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t r) {
      return estimate(f, s, sampler, m, ScrambleSeed{stream_master, r});
    });
    ConvergencePoint p;
    p.n = std::uint64_t{1} << m;
    const double rr = static_cast<double>(cfg.replicates);
    double sum_abs = 0.0, sum_sq = 0.0, sum_est = 0.0;
    for (double e : est) {
      sum_abs += std::abs(e - reference);
      sum_sq += (e - reference) * (e - reference);
      sum_est += e;
    }
    p.mean_abs_error = sum_abs / rr;
    p.rmse = std::sqrt(sum_sq / rr);
    p.mean_estimate = sum_est / rr;
    double var = 0.0;
    for (double e : est) {
      const double dev = std::abs(e - reference) - p.mean_abs_error;
      var += dev * dev;
    }
    p.std_error = std::sqrt(var / (rr - 1.0) / rr);
    rep.points.push_back(p);
  }
  rep.fit = fit_slope(rep.points, cfg.fit_skip);
  return rep;
}

}  // namespace cqmc
