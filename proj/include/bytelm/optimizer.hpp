// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "bytelm/model.hpp"

namespace bytelm {

struct LrSchedule {
  double lr0 = 5e-4;
  std::uint64_t total_steps = 1;
};

/// lr0 * (1 - t / total_steps), clamped at zero once t passes the budget.
double lr_at(const LrSchedule& schedule, std::uint64_t t);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  ModelParams<Scalar> m;
  ModelParams<Scalar> v;
  std::uint64_t step = 0;
  AdamConfig config;

  static AdamState fresh(const ModelParams<Scalar>& params, AdamConfig config = {}) {
    return {params.zeros_like(), params.zeros_like(), 0, config};
  }
};

/// One bias-corrected Adam update. Throws NumericalError naming the tensor
/// if any gradient entry is not finite; params and state are untouched in
/// that case.
template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, const Gradients<Scalar>& grads,
               AdamState<Scalar>& state, double lr);

/// Elementwise mean, accumulated in index order.
template <typename Scalar>
Gradients<Scalar> average_gradients(std::span<const Gradients<Scalar>> grads);

template <typename Scalar>
double global_norm(const Gradients<Scalar>& grads);

/// Rescales so the global L2 norm is at most `max_norm`. Returns the norm
/// before clipping.
template <typename Scalar>
double clip_global_norm(Gradients<Scalar>& grads, double max_norm);

}  // namespace bytelm
