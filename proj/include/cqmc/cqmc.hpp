#pragma once

// Umbrella header.

#include "cqmc/anova.hpp"
#include "cqmc/estimator.hpp"
#include "cqmc/harness.hpp"
#include "cqmc/lds.hpp"
#include "cqmc/matrix.hpp"
#include "cqmc/normal.hpp"
#include "cqmc/path.hpp"
#include "cqmc/payoff.hpp"
#include "cqmc/quadrature.hpp"
#include "cqmc/reduce.hpp"
#include "cqmc/report.hpp"
#include "cqmc/smooth.hpp"
