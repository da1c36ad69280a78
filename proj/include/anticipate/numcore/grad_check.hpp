// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "anticipate/numcore/param_store.hpp"

namespace anticipate::numcore {

// Scalar loss built on a fresh tape from the given parameters. Must be pure:
// the same parameter values always give the same loss.
using LossFn = std::function<Var<double>(Tape<double>&, ParamStore<double>&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Compares reverse-mode gradients against central differences
// (f(p+eps) - f(p-eps)) / 2eps for every scalar parameter. Relative error uses
// the denominator max(|g|, |g_num|, 1e-8).
GradCheckResult grad_check(const LossFn& loss_fn, ParamStore<double>& params, double eps);

}  // namespace anticipate::numcore
