// SPDX-License-Identifier: Apache-2.0
#include "bytelm/optimizer.hpp"

#include <cmath>

#include "bytelm/errors.hpp"

namespace bytelm {

double lr_at(const LrSchedule& schedule, std::uint64_t t) {
  if (!(schedule.lr0 > 0.0) || schedule.total_steps == 0) {
    throw ConfigError("learning-rate schedule needs lr0 > 0 and total_steps >= 1");
  }
  if (t >= schedule.total_steps) return 0.0;
  return schedule.lr0 *
         (1.0 - static_cast<double>(t) / static_cast<double>(schedule.total_steps));
}

namespace {

template <typename Scalar>
void require_congruent(const ModelParams<Scalar>& a, const ModelParams<Scalar>& b) {
  if (a.cell != b.cell || a.embed != b.embed || a.hidden != b.hidden) {
    throw ContractError("parameter trees are not shape-congruent");
  }
}

}  // namespace

template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, const Gradients<Scalar>& grads,
               AdamState<Scalar>& state, double lr) {
  require_congruent(params, grads);
  require_congruent(params, state.m);
  require_congruent(params, state.v);
  const auto g_views = tensor_views(grads);
  for (const auto& g : g_views) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!std::isfinite(static_cast<double>(g.data[k]))) {
        throw NumericalError("non-finite gradient in " + g.name + " at index " +
                             std::to_string(k));
      }
    }
  }

  const AdamConfig& cfg = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const auto b1 = static_cast<Scalar>(cfg.beta1);
  const auto b2 = static_cast<Scalar>(cfg.beta2);
  const auto step_size = static_cast<Scalar>(lr / bc1);
  const auto inv_sqrt_bc2 = static_cast<Scalar>(1.0 / std::sqrt(bc2));
  const auto eps = static_cast<Scalar>(cfg.epsilon);

  auto p_views = tensor_views(params);
  auto m_views = tensor_views(state.m);
  auto v_views = tensor_views(state.v);
  for (std::size_t i = 0; i < p_views.size(); ++i) {
    using Arr = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
    const auto n = static_cast<Eigen::Index>(p_views[i].size());
    Eigen::Map<Arr> p(p_views[i].data, n);
    Eigen::Map<Arr> m(m_views[i].data, n);
    Eigen::Map<Arr> v(v_views[i].data, n);
    Eigen::Map<const Arr> g(g_views[i].data, n);
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.square();
    p -= step_size * m / (v.sqrt() * inv_sqrt_bc2 + eps);
  }
}

template <typename Scalar>
Gradients<Scalar> average_gradients(std::span<const Gradients<Scalar>> grads) {
  if (grads.empty()) throw ContractError("cannot average zero gradient sets");
  Gradients<Scalar> out = grads.front().zeros_like();
  auto out_views = tensor_views(out);
  for (const auto& g : grads) {
    require_congruent(out, g);
    const auto views = tensor_views(g);
    for (std::size_t i = 0; i < views.size(); ++i) {
      for (std::size_t k = 0; k < views[i].size(); ++k) out_views[i].data[k] += views[i].data[k];
    }
  }
  const auto inv = Scalar(1) / static_cast<Scalar>(grads.size());
  for (auto& v : out_views) {
    for (std::size_t k = 0; k < v.size(); ++k) v.data[k] *= inv;
  }
  return out;
}

template <typename Scalar>
double global_norm(const Gradients<Scalar>& grads) {
  double sq = 0.0;
  for (const auto& v : tensor_views(grads)) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      sq += static_cast<double>(v.data[k]) * static_cast<double>(v.data[k]);
    }
  }
  return std::sqrt(sq);
}

template <typename Scalar>
double clip_global_norm(Gradients<Scalar>& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip norm must be positive");
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const auto s = static_cast<Scalar>(max_norm / norm);
    for (auto& v : tensor_views(grads)) {
      for (std::size_t k = 0; k < v.size(); ++k) v.data[k] *= s;
    }
  }
  return norm;
}

#define BYTELM_INSTANTIATE(S)                                                        \
  template void adam_step(ModelParams<S>&, const Gradients<S>&, AdamState<S>&,       \
                          double);                                                   \
  template Gradients<S> average_gradients(std::span<const Gradients<S>>);            \
  template double global_norm(const Gradients<S>&);                                  \
  template double clip_global_norm(Gradients<S>&, double);

BYTELM_INSTANTIATE(float)
BYTELM_INSTANTIATE(double)

#undef BYTELM_INSTANTIATE

}  // namespace bytelm
