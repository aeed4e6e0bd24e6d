// Delta of an arithmetic Asian call (d = 4) by plain RQMC and by RQMC on the
// integrand with the first coordinate integrated out in closed form.

#include <cstdio>

#include "cqmc/cqmc.hpp"

int main() {
  using namespace cqmc;
  MarketParams p;  // S0 = K = 100, rate 0.01, sigma 0.4, T = 1, d = 4
  const IntegrandSpec spec(Example::delta, p, Construction::standard);
  const PreintegratedIntegrand smoothed(spec, 0);

  Evaluator plain = [&](std::span<const double> x) { return f_eval(x, spec); };
  Evaluator conditioned = [&](std::span<const double> y) { return smoothed(y); };

  std::printf("%8s  %14s  %14s\n", "n", "RQMC", "CQMC");
  for (unsigned m = 8; m <= 16; m += 2) {
    const ScrambleSeed seed{2024, m};
    std::printf("%8u  %14.10f  %14.10f\n", 1u << m, estimate(plain, 4, Sampler::rqmc, m, seed),
                estimate(conditioned, 3, Sampler::rqmc, m, seed));
  }
  return 0;
}
