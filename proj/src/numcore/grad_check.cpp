// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "anticipate/errors.hpp"

namespace anticipate::numcore {

namespace {

double evaluate(const LossFn& loss_fn, ParamStore<double>& params) {
  Tape<double> tape;
  const double loss = loss_fn(tape, params).value()[0];
  if (!std::isfinite(loss)) throw NumericError("grad_check: loss is not finite");
  return loss;
}

}  // namespace

GradCheckResult grad_check(const LossFn& loss_fn, ParamStore<double>& params, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("grad_check: eps must be a positive finite number");

  params.zero_grad();
  {
    Tape<double> tape;
    auto loss = loss_fn(tape, params);
    if (loss.value().size() != 1) throw DimensionError("grad_check: loss must be a scalar");
    if (!std::isfinite(loss.value()[0])) throw NumericError("grad_check: loss is not finite");
    tape.backward(loss);
  }

  GradCheckResult result;
  for (auto& [name, entry] : params.entries()) {
    auto& values = entry.value;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + eps;
      const double plus = evaluate(loss_fn, params);
      values[i] = original - eps;
      const double minus = evaluate(loss_fn, params);
      values[i] = original;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double analytic = entry.grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error || result.checked == 1) {
        result.max_rel_error = rel;
        result.worst_param = name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace anticipate::numcore
