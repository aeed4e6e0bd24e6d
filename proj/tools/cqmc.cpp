// cqmc: convergence studies for preintegrated (conditional) RQMC on Asian
// option integrands.
//
//   cqmc run --example delta --d 4 --smoothing cond:first --n 8..14 --reps 50 --out r.csv --plot r.svg
//   cqmc reference --example theta --d 2
//   cqmc anova-check --example binary --d 2 --n 6..12
//   cqmc probe-smoothness --construction pca --d 3 --smoothing cond:2 --example binary
//
// Any long flag may also be given in a file passed with --config, one
// `key = value` per line ('#' starts a comment). Flags on the command line win.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "cqmc/cqmc.hpp"

namespace {

using namespace cqmc;

struct Options {
  std::string example = "delta";
  std::size_t d = 4;
  std::string construction = "standard";
  std::string smoothing = "cond:first";
  std::string reduce = "none";
  std::string sampler = "rqmc";
  std::string n = "8..14";
  std::size_t reps = 50;
  std::uint64_t seed = 42;
  std::size_t threads = 0;
  std::string out;
  std::string plot;
  std::string profile;
  bool compare = false;
  unsigned reference_n = 20;
  std::size_t reference_reps = 32;
  double s0 = 100.0, strike = 100.0, mu = 0.01, sigma = 0.4, maturity = 1.0;
  // probe-smoothness
  std::string steps = "1e-2,1e-3,1e-4,1e-5,1e-6";
  std::size_t samples = 41;
  double span = 3.0;
  // anova-check
  std::size_t points = 100;
  std::size_t nodes = 64;
};

void add_market(CLI::App* sub, Options& o) {
  sub->add_option("--example", o.example, "payoff|delta|gamma|rho|theta|vega|binary");
  sub->add_option("--d", o.d, "number of monitoring dates")->check(CLI::Range(1, 65));
  sub->add_option("--construction", o.construction, "standard|bb|pca");
  sub->add_option("--S0", o.s0, "initial price");
  sub->add_option("--K", o.strike, "strike");
  sub->add_option("--mu", o.mu, "interest rate");
  sub->add_option("--sigma", o.sigma, "volatility");
  sub->add_option("--T", o.maturity, "maturity");
}

void add_study(CLI::App* sub, Options& o) {
  sub->add_option("--smoothing", o.smoothing, "none|cond:<j>|cond:first|cond:last");
  sub->add_option("--reduce", o.reduce, "none|gpca");
  sub->add_option("--sampler", o.sampler, "rqmc|mc");
  sub->add_option("--n", o.n, "sample-size exponents: 8..18, 8,10,12 or 12");
  sub->add_option("--reps", o.reps, "replicates per sample size");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  sub->add_option("--reference-n", o.reference_n, "reference sample-size exponent")->check(CLI::Range(4, 20));
  sub->add_option("--reference-reps", o.reference_reps, "reference replicates");
}

ExperimentConfig to_config(const Options& o) {
  ExperimentConfig cfg;
  if (o.profile == "figure1") cfg = ExperimentConfig::figure1();
  else if (o.profile == "desk") cfg = ExperimentConfig::desk();
  else if (!o.profile.empty()) throw std::invalid_argument("unknown profile '" + o.profile + "' (desk|figure1)");
  cfg.example = parse_example(o.example);
  cfg.params.s0 = o.s0;
  cfg.params.strike = o.strike;
  cfg.params.rate = o.mu;
  cfg.params.sigma = o.sigma;
  cfg.params.maturity = o.maturity;
  cfg.params.dates = o.d;
  cfg.construction = parse_construction(o.construction);
  cfg.smoothing = parse_smoothing(o.smoothing);
  cfg.reduce = parse_reduce(o.reduce);
  cfg.sampler = parse_sampler(o.sampler);
  if (o.profile.empty()) {
    cfg.exponents = parse_exponents(o.n);
    cfg.replicates = o.reps;
  }
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.reference_exponent = o.reference_n;
  cfg.reference_replicates = o.reference_reps;
  cfg.out_csv = o.out;
  cfg.out_svg = o.plot;
  cfg.validate();
  return cfg;
}

void print_report(const ConvergenceReport& rep) {
  std::printf("%s\n", rep.label.c_str());
  std::printf("  %10s  %14s  %14s  %12s\n", "n", "mean|err|", "rmse", "stderr");
  for (const auto& p : rep.points)
    std::printf("  %10llu  %14.6e  %14.6e  %12.4e\n", static_cast<unsigned long long>(p.n),
                p.mean_abs_error, p.rmse, p.std_error);
  std::printf("  slope %.3f +- %.3f (fit over %zu points, smallest %zu n skipped)\n", rep.fit.slope,
              rep.fit.slope_std_error, rep.fit.points_used, rep.fit_skip);
}

std::string with_suffix(const std::string& path, const std::string& tag) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "-" + tag;
  return path.substr(0, dot) + "-" + tag + path.substr(dot);
}

int cmd_run(const Options& o) {
  const ExperimentConfig cfg = to_config(o);
  const auto t0 = std::chrono::steady_clock::now();
  const ReferenceValue ref = reference_value(cfg);
  std::printf("reference %.12g  [%s]\n\n", ref.value, ref.provenance.c_str());

  std::vector<ConvergenceReport> reports;
  if (o.compare) {
    // Plain MC, plain RQMC, the configured CQMC and CQMC+GPCA on one reference.
    ExperimentConfig base = cfg;
    base.reduce = ReduceChoice::none;
    if (!base.smoothing.enabled()) base.smoothing = Smoothing::first();
    ExperimentConfig mc = base, qmc = base, cqmc = base, gpca = base;
    mc.smoothing = qmc.smoothing = Smoothing::none();
    mc.sampler = Sampler::mc;
    qmc.sampler = cqmc.sampler = gpca.sampler = Sampler::rqmc;
    gpca.reduce = ReduceChoice::gpca;
    for (const auto& v : {mc, qmc, cqmc, gpca}) reports.push_back(convergence_study(v, ref));
  } else {
    const Method m = build_method(cfg);
    if (!m.warning.empty()) std::fprintf(stderr, "warning: %s\n", m.warning.c_str());
    reports.push_back(convergence_study(cfg, ref));
  }
  for (const auto& r : reports) print_report(r);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("\nelapsed %.1f s\n", secs);

  if (!cfg.out_csv.empty()) {
    if (reports.size() == 1) {
      emit_csv(reports[0], cfg.out_csv);
    } else {
      for (const auto& r : reports) emit_csv(r, with_suffix(cfg.out_csv, r.label));
    }
  }
  if (!cfg.out_svg.empty()) emit_svg(reports, cfg.out_svg);
  return 0;
}

int cmd_reference(const Options& o) {
  const ExperimentConfig cfg = to_config(o);
  const ReferenceValue ref = reference_value(cfg);
  std::printf("%.15g\n%.3e\n%s\n", ref.value, ref.std_error, ref.provenance.c_str());
  return 0;
}

int cmd_anova(const Options& o) {
  const ExperimentConfig cfg = to_config(o);
  const AnovaOracle oracle(IntegrandSpec(cfg.example, cfg.params, cfg.construction), o.nodes);
  std::printf("I(f) = %.15g (split-aware tensor quadrature, %zu nodes)\n", oracle.integral(), o.nodes);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> z;
  double worst = 0.0;
  std::vector<double> x(cfg.d());
  for (std::size_t k = 0; k < o.points; ++k) {
    for (double& v : x) v = z(rng);
    double sum = 0.0;
    for (SubsetMask v = 0; v <= oracle.full(); ++v) sum += oracle.term(v, x);
    const double f = f_eval(x, oracle.spec());
    worst = std::max(worst, std::abs(sum - f) / std::max(1.0, std::abs(f)));
  }
  std::printf("max relative |sum_v f_v - f| over %zu points: %.3e\n", o.points, worst);

  double total = 0.0;
  for (SubsetMask v = 1; v <= oracle.full(); ++v) total += oracle.inner_product(v, v);
  for (SubsetMask v = 1; v <= oracle.full(); ++v) {
    std::string name = "{";
    for (std::size_t k = 0; k < cfg.d(); ++k)
      if ((v >> k) & 1u) name += (name.size() > 1 ? "," : "") + std::to_string(k + 1);
    name += "}";
    std::printf("  sigma^2 %-8s %.6e  (%.2f%%)\n", name.c_str(), oracle.inner_product(v, v),
                100.0 * oracle.inner_product(v, v) / total);
  }

  StudySettings st;
  st.exponents = cfg.exponents;
  st.replicates = std::min<std::size_t>(cfg.replicates, 20);
  st.seed = cfg.seed;
  st.threads = cfg.threads;
  bool small_enough = true;
  for (unsigned m : st.exponents) small_enough = small_enough && m <= 12;
  if (!small_enough) {
    std::printf("term-rate study skipped: --n must stay within 2^12 for the oracle\n");
    return 0;
  }
  std::vector<ConvergenceReport> reports;
  for (SubsetMask v = 1; v <= oracle.full(); ++v) {
    reports.push_back(term_rate_study(oracle, v, st));
    print_report(reports.back());
  }
  if (!cfg.out_svg.empty()) emit_svg(reports, cfg.out_svg);
  return 0;
}

int cmd_probe(const Options& o) {
  ExperimentConfig cfg = to_config(o);
  if (!cfg.smoothing.enabled()) throw std::invalid_argument("probe-smoothness needs --smoothing cond:<j>");
  const std::size_t j = cfg.smoothing.resolve(cfg.d());
  if (cfg.d() < 2) throw std::invalid_argument("probe-smoothness needs d >= 2");
  const IntegrandSpec spec(cfg.example, cfg.params, cfg.construction);
  const bool analytic = spec.gm.sign_ok[j];
  Evaluator pf;
  if (analytic) {
    auto p = std::make_shared<const PreintegratedIntegrand>(spec, j);
    pf = [p](std::span<const double> y) { return (*p)(y); };
  } else {
    pf = [&spec, j](std::span<const double> y) { return conditional_expectation_quadrature(spec, j, y, {}, 1e-13); };
  }
  std::vector<double> origin(cfg.d() - 1, 0.0), dir(cfg.d() - 1, 0.0);
  dir[0] = 1.0;
  std::printf("P_%zu f along y_1 in [-%g, %g], %s column (%s)\n", j + 1, o.span, o.span,
              analytic ? "single-signed" : "mixed-sign",
              analytic ? "closed form" : "adaptive quadrature");
  std::printf("  %10s  %14s  %14s  %14s\n", "h", "max|D1|", "max D1 jump", "max D2 jump");
  for (double h : [&] {
         std::vector<double> hs;
         std::size_t start = 0;
         while (start <= o.steps.size()) {
           const auto comma = o.steps.find(',', start);
           hs.push_back(std::stod(o.steps.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
           if (comma == std::string::npos) break;
           start = comma + 1;
         }
         return hs;
       }()) {
    const SmoothnessReport r = smoothness_probe(pf, origin, dir, -o.span, o.span, o.samples, h);
    std::printf("  %10.1e  %14.6e  %14.6e  %14.6e\n", h, r.max_abs_d1, r.max_d1_jump, r.max_d2_jump);
  }
  return 0;
}

// Lines of `key = value` become `--key value` arguments placed before the
// command-line flags, so that later (command-line) occurrences win.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
    if (key == "compare") {
      if (value == "true" || value == "1") args.push_back("--compare");
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Conditional quasi-Monte Carlo convergence studies"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config;

  auto* run = app.add_subcommand("run", "replicated convergence study with CSV/SVG output");
  add_market(run, o);
  add_study(run, o);
  run->add_option("--out", o.out, "CSV report path");
  run->add_option("--plot", o.plot, "SVG plot path");
  run->add_option("--profile", o.profile, "desk (R=50, n<=2^14) or figure1 (R=200, n<=2^18)");
  run->add_flag("--compare", o.compare, "run MC, RQMC, CQMC and CQMC+GPCA against one reference");

  auto* ref = app.add_subcommand("reference", "high-accuracy reference value");
  add_market(ref, o);
  add_study(ref, o);

  auto* anova = app.add_subcommand("anova-check", "ANOVA identities and term rates (d <= 3)");
  add_market(anova, o);
  add_study(anova, o);
  anova->add_option("--points", o.points, "random points for the reconstruction check");
  anova->add_option("--nodes", o.nodes, "Gauss-Hermite nodes per axis")->check(CLI::Range(4, 96));
  anova->add_option("--plot", o.plot, "SVG plot of term-rate curves");

  auto* probe = app.add_subcommand("probe-smoothness", "finite-difference derivative probe of P_j f");
  add_market(probe, o);
  add_study(probe, o);
  probe->add_option("--steps", o.steps, "comma-separated FD steps");
  probe->add_option("--samples", o.samples, "probe points along the line");
  probe->add_option("--span", o.span, "probe y_1 over [-span, span]");

  for (auto* sub : {run, ref, anova, probe}) sub->add_option("--config", config, "key = value file");

  // Merge the config file ahead of the command-line flags.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] != "--config") continue;
      const auto extra = config_arguments(args[i + 1]);
      std::size_t at = 0;
      while (at < args.size() && args[at].rfind("--", 0) == 0) ++at;  // the subcommand name
      if (at < args.size()) args.insert(args.begin() + static_cast<long>(at) + 1, extra.begin(), extra.end());
      break;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (*run) return cmd_run(o);
    if (*ref) return cmd_reference(o);
    if (*anova) return cmd_anova(o);
    if (*probe) return cmd_probe(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
