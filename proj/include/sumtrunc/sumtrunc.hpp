#pragma once

// Umbrella header: log-space kernels, guaranteed-error truncation of
// convergent non-negative series, the series catalog, and the two
// statistical applications built on top of them.

#include "log_value.hpp"
#include "kahan.hpp"
#include "log_sum_exp.hpp"
#include "math_util.hpp"
#include "series.hpp"
#include "truncation.hpp"
#include "catalog.hpp"
#include "moments.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "mcmc.hpp"
#include "comp_model.hpp"
#include "erlang_model.hpp"
#include "csv.hpp"
#include "bench.hpp"
