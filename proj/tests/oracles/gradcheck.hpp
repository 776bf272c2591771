// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "adapterforge/autograd.hpp"

namespace adapterforge::oracle {

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;
};

/// Compares tape gradients of a scalar loss with central differences over
/// every entry of `params`. `loss(tape)` must build the loss from scratch on
/// the given tape. Relative error uses max(|a|, |b|, floor) as denominator.
inline GradCheck check_gradients(const std::vector<Parameter*>& params, const std::function<Var(Tape&)>& loss,
                                 double step = 1e-6, double floor = 1e-3) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape(true);
    Var l = loss(tape);
    tape.backward(l);
  }
  auto eval = [&] {
    Tape tape(false);
    return static_cast<double>(tape.value(loss(tape)).item());
  };
  GradCheck out;
  for (Parameter* p : params) {
    const Tensor analytic = p->grad;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const real saved = p->value[i];
      p->value[i] = static_cast<real>(saved + step);
      const double up = eval();
      p->value[i] = static_cast<real>(saved - step);
      const double down = eval();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic.empty() ? 0.0 : static_cast<double>(analytic[i]);
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

}  // namespace adapterforge::oracle
