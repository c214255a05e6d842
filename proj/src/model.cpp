// SPDX-License-Identifier: Apache-2.0
#include "bytelm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bytelm/errors.hpp"
#include "bytelm/rng.hpp"

namespace bytelm {

std::string cell_kind_name(CellKind kind) {
  return kind == CellKind::kMLSTM ? "mlstm" : "lstm";
}

CellKind parse_cell_kind(std::string_view name) {
  if (name == "mlstm") return CellKind::kMLSTM;
  if (name == "lstm") return CellKind::kLSTM;
  throw ConfigError("unknown cell kind '" + std::string(name) + "' (mlstm|lstm)");
}

namespace {

constexpr const char* kGateNames[4] = {"i", "f", "o", "u"};

template <typename Scalar>
WeightNormMatrix<Scalar> zero_wn(int rows, int cols) {
  return {Matrix<Scalar>::Zero(rows, cols), Vector<Scalar>::Zero(rows)};
}

template <typename To, typename From>
WeightNormMatrix<To> cast_wn(const WeightNormMatrix<From>& w) {
  return {w.direction.template cast<To>(), w.scale.template cast<To>()};
}

// Shared walker for const and mutable parameter trees.
template <typename Params, typename Fn>
void visit_tensors(Params& p, Fn&& fn) {
  fn("embedding", p.embedding, 2);
  const bool mlstm = p.cell == CellKind::kMLSTM;
  if (mlstm) {
    fn("V_mx", p.mult_x.direction, 2);
    fn("g_mx", p.mult_x.scale, 1);
    fn("V_mh", p.mult_h.direction, 2);
    fn("g_mh", p.mult_h.scale, 1);
  }
  for (int k = 0; k < 4; ++k) {
    fn(std::string("V_") + kGateNames[k] + "x", p.gate_x[k].direction, 2);
    fn(std::string("g_") + kGateNames[k] + "x", p.gate_x[k].scale, 1);
  }
  const char* rec = mlstm ? "m" : "h";
  for (int k = 0; k < 4; ++k) {
    fn(std::string("V_") + kGateNames[k] + rec, p.gate_r[k].direction, 2);
    fn(std::string("g_") + kGateNames[k] + rec, p.gate_r[k].scale, 1);
  }
  for (int k = 0; k < 4; ++k) {
    fn(std::string("b_") + kGateNames[k], p.gate_bias[k], 1);
  }
  fn("W_y", p.output, 2);
  fn("b_y", p.output_bias, 1);
}

template <typename Derived>
auto stable_sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using S = typename Derived::Scalar;
  const auto e = (-x.abs()).exp();
  return (x >= S(0)).select(S(1) / (S(1) + e), e / (S(1) + e));
}

template <typename Scalar>
void check_finite_state(const ModelState<Scalar>& state, std::size_t step) {
  if (!state.h.allFinite() || !state.c.allFinite()) {
    throw NumericalError("non-finite state entering step " + std::to_string(step));
  }
}

// Applies the gate nonlinearities to a 4H x n pre-activation block in place.
template <typename Block>
void activate_gates(Block&& pre, int hidden) {
  const auto h3 = 3 * static_cast<Eigen::Index>(hidden);
  pre.topRows(h3) = stable_sigmoid(pre.topRows(h3).array()).matrix();
  pre.bottomRows(hidden) = pre.bottomRows(hidden).array().tanh().matrix();
}

template <typename Scalar>
void gather_embeddings(const Matrix<Scalar>& embedding,
                       std::span<const std::uint8_t> bytes, Matrix<Scalar>& out) {
  out.resize(embedding.cols(), static_cast<Eigen::Index>(bytes.size()));
  for (std::size_t j = 0; j < bytes.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = embedding.row(bytes[j]).transpose();
  }
}

template <typename Scalar>
void weight_norm_backward(const WeightNormMatrix<Scalar>& param,
                          const Matrix<Scalar>& grad_weight,
                          WeightNormMatrix<Scalar>& out) {
  const Vector<Scalar> norms = param.direction.rowwise().norm();
  const Vector<Scalar> unit_dot =
      grad_weight.cwiseProduct(param.direction).rowwise().sum().cwiseQuotient(norms);
  out.scale = unit_dot;
  const Vector<Scalar> coef = param.scale.cwiseQuotient(norms);
  const Vector<Scalar> proj = unit_dot.cwiseQuotient(norms);
  out.direction = coef.asDiagonal() *
                  (grad_weight - proj.asDiagonal() * param.direction);
}

template <typename Scalar>
void check_dims(const ModelParams<Scalar>& p) {
  if (p.embed < 1 || p.hidden < 1) {
    throw ConfigError("embedding and hidden widths must be positive");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelParams

template <typename Scalar>
ModelParams<Scalar> ModelParams<Scalar>::zeros(CellKind cell, int embed, int hidden) {
  if (embed < 1 || hidden < 1) {
    throw ConfigError("embedding and hidden widths must be positive");
  }
  ModelParams p;
  p.cell = cell;
  p.embed = embed;
  p.hidden = hidden;
  p.embedding = Matrix<Scalar>::Zero(kVocab, embed);
  if (cell == CellKind::kMLSTM) {
    p.mult_x = zero_wn<Scalar>(hidden, embed);
    p.mult_h = zero_wn<Scalar>(hidden, hidden);
  }
  for (int k = 0; k < 4; ++k) {
    p.gate_x[k] = zero_wn<Scalar>(hidden, embed);
    p.gate_r[k] = zero_wn<Scalar>(hidden, hidden);
    p.gate_bias[k] = Vector<Scalar>::Zero(hidden);
  }
  p.output = Matrix<Scalar>::Zero(kVocab, hidden);
  p.output_bias = Vector<Scalar>::Zero(kVocab);
  return p;
}

template <typename Scalar>
template <typename Other>
ModelParams<Other> ModelParams<Scalar>::cast() const {
  ModelParams<Other> out;
  out.cell = cell;
  out.embed = embed;
  out.hidden = hidden;
  out.embedding = embedding.template cast<Other>();
  out.mult_x = cast_wn<Other>(mult_x);
  out.mult_h = cast_wn<Other>(mult_h);
  for (int k = 0; k < 4; ++k) {
    out.gate_x[k] = cast_wn<Other>(gate_x[k]);
    out.gate_r[k] = cast_wn<Other>(gate_r[k]);
    out.gate_bias[k] = gate_bias[k].template cast<Other>();
  }
  out.output = output.template cast<Other>();
  out.output_bias = output_bias.template cast<Other>();
  return out;
}

template <typename Scalar>
std::size_t ModelParams<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensor_views(*this)) n += t.size();
  return n;
}

template <typename Scalar>
std::vector<TensorView<Scalar>> tensor_views(ModelParams<Scalar>& params) {
  std::vector<TensorView<Scalar>> out;
  visit_tensors(params, [&](std::string name, auto& t, int rank) {
    out.push_back({std::move(name), t.data(), t.rows(), t.cols(), rank});
  });
  return out;
}

template <typename Scalar>
std::vector<TensorView<const Scalar>> tensor_views(const ModelParams<Scalar>& params) {
  std::vector<TensorView<const Scalar>> out;
  visit_tensors(params, [&](std::string name, const auto& t, int rank) {
    out.push_back({std::move(name), t.data(), t.rows(), t.cols(), rank});
  });
  return out;
}

template <typename Scalar>
ModelParams<Scalar> init_params(CellKind cell, int embed, int hidden,
                                std::uint64_t seed, double scale) {
  if (!(scale > 0.0)) throw ConfigError("init scale must be positive");
  ModelParams<Scalar> p = ModelParams<Scalar>::zeros(cell, embed, hidden);
  Rng rng(seed);
  for (auto& t : tensor_views(p)) {
    if (t.rank != 2) continue;  // scales and biases are derived or zero
    for (std::size_t k = 0; k < t.size(); ++k) {
      t.data[k] = static_cast<Scalar>(rng.uniform(-scale, scale));
    }
  }
  auto match_norm = [](WeightNormMatrix<Scalar>& w) {
    w.scale = w.direction.rowwise().norm();
  };
  if (cell == CellKind::kMLSTM) {
    match_norm(p.mult_x);
    match_norm(p.mult_h);
  }
  for (int k = 0; k < 4; ++k) {
    match_norm(p.gate_x[k]);
    match_norm(p.gate_r[k]);
  }
  p.gate_bias[1].setOnes();
  return p;
}

template <typename Scalar>
ModelParams<Scalar> zero_params(CellKind cell, int embed, int hidden) {
  ModelParams<Scalar> p = ModelParams<Scalar>::zeros(cell, embed, hidden);
  auto unit_rows = [](WeightNormMatrix<Scalar>& w) { w.direction.setOnes(); };
  if (cell == CellKind::kMLSTM) {
    unit_rows(p.mult_x);
    unit_rows(p.mult_h);
  }
  for (int k = 0; k < 4; ++k) {
    unit_rows(p.gate_x[k]);
    unit_rows(p.gate_r[k]);
  }
  return p;
}

template <typename Scalar>
Matrix<Scalar> effective_weight(const Matrix<Scalar>& direction,
                                const Vector<Scalar>& scale) {
  if (scale.size() != direction.rows()) {
    throw ContractError("weight-norm scale length does not match row count");
  }
  const Vector<Scalar> norms = direction.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms[i] > Scalar(0))) {
      throw NumericalError("weight-norm direction row " + std::to_string(i) +
                           " has zero norm");
    }
  }
  return scale.cwiseQuotient(norms).asDiagonal() * direction;
}

template <typename Scalar>
StackedWeights<Scalar> stack_weights(const ModelParams<Scalar>& p) {
  check_dims(p);
  const Eigen::Index H = p.hidden;
  StackedWeights<Scalar> w;
  w.cell = p.cell;
  w.embed = p.embed;
  w.hidden = p.hidden;
  w.gates_x.resize(4 * H, p.embed);
  w.gates_r.resize(4 * H, H);
  w.gates_b.resize(4 * H);
  for (int k = 0; k < 4; ++k) {
    w.gates_x.middleRows(k * H, H) =
        effective_weight(p.gate_x[k].direction, p.gate_x[k].scale);
    w.gates_r.middleRows(k * H, H) =
        effective_weight(p.gate_r[k].direction, p.gate_r[k].scale);
    w.gates_b.segment(k * H, H) = p.gate_bias[k];
  }
  if (p.cell == CellKind::kMLSTM) {
    w.mult_x = effective_weight(p.mult_x.direction, p.mult_x.scale);
    w.mult_h = effective_weight(p.mult_h.direction, p.mult_h.scale);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Single step

template <typename Scalar>
CellRunner<Scalar>::CellRunner(const ModelParams<Scalar>& params)
    : params_(params), weights_(stack_weights(params)) {}

template <typename Scalar>
void CellRunner<Scalar>::step(ModelState<Scalar>& state,
                              std::span<const std::uint8_t> bytes,
                              const std::optional<Clamp>& clamp,
                              Matrix<Scalar>* logits, std::size_t step_index) const {
  const Eigen::Index H = weights_.hidden;
  const auto B = static_cast<Eigen::Index>(bytes.size());
  if (state.h.rows() != H || state.c.rows() != H || state.h.cols() != B ||
      state.c.cols() != B) {
    throw ContractError("state shape does not match hidden width / batch");
  }
  if (clamp && clamp->unit >= static_cast<std::size_t>(H)) {
    throw ContractError("clamp unit " + std::to_string(clamp->unit) +
                        " out of range for hidden width " + std::to_string(H));
  }
  check_finite_state(state, step_index);

  Matrix<Scalar> x;
  gather_embeddings(params_.embedding, bytes, x);
  Matrix<Scalar> pre = weights_.gates_x * x;
  if (weights_.cell == CellKind::kMLSTM) {
    const Matrix<Scalar> m =
        (weights_.mult_x * x).cwiseProduct(weights_.mult_h * state.h);
    pre.noalias() += weights_.gates_r * m;
  } else {
    pre.noalias() += weights_.gates_r * state.h;
  }
  pre.colwise() += weights_.gates_b;
  activate_gates(pre, weights_.hidden);

  state.c = pre.middleRows(H, H).cwiseProduct(state.c) +
            pre.topRows(H).cwiseProduct(pre.bottomRows(H));
  if (clamp) {
    state.c.row(static_cast<Eigen::Index>(clamp->unit))
        .setConstant(static_cast<Scalar>(clamp->value));
  }
  state.h = pre.middleRows(2 * H, H).cwiseProduct(state.c.array().tanh().matrix());
  if (logits != nullptr) {
    *logits = params_.output * state.h;
    logits->colwise() += params_.output_bias;
  }
}

template <typename Scalar>
Matrix<Scalar> forward_step(const ModelParams<Scalar>& params, ModelState<Scalar>& state,
                            std::span<const std::uint8_t> bytes,
                            const std::optional<Clamp>& clamp) {
  Matrix<Scalar> logits;
  CellRunner<Scalar>(params).step(state, bytes, clamp, &logits);
  return logits;
}

// ---------------------------------------------------------------------------
// Sequence forward / backward

template <typename Scalar>
ForwardResult<Scalar> forward_sequence(const ModelParams<Scalar>& params,
                                       const ModelState<Scalar>& state0,
                                       std::span<const std::uint8_t> inputs,
                                       std::span<const std::uint8_t> targets,
                                       std::size_t batch, std::size_t steps) {
  if (batch == 0 || steps == 0) throw ContractError("empty batch");
  if (inputs.size() != batch * steps || targets.size() != batch * steps) {
    throw ContractError("inputs/targets must hold B*T bytes");
  }
  const Eigen::Index H = params.hidden;
  const auto B = static_cast<Eigen::Index>(batch);
  const auto N = static_cast<Eigen::Index>(batch * steps);
  if (state0.h.rows() != H || state0.h.cols() != B || state0.c.rows() != H ||
      state0.c.cols() != B) {
    throw ContractError("initial state shape does not match hidden width / batch");
  }

  ForwardResult<Scalar> result;
  ForwardCache<Scalar>& cache = result.cache;
  cache.weights = stack_weights(params);
  cache.batch = batch;
  cache.steps = steps;
  cache.inputs.resize(batch * steps);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      cache.inputs[t * batch + b] = inputs[b * steps + t];
    }
  }
  const auto& w = cache.weights;
  const bool mlstm = params.cell == CellKind::kMLSTM;

  gather_embeddings(params.embedding, std::span<const std::uint8_t>(cache.inputs), cache.x);
  Matrix<Scalar> pre_all = w.gates_x * cache.x;
  pre_all.colwise() += w.gates_b;
  if (mlstm) {
    cache.mult_xproj = w.mult_x * cache.x;
    cache.mult_hproj.resize(H, N);
    cache.mult.resize(H, N);
  }
  cache.h_prev.resize(H, N);
  cache.c_prev.resize(H, N);
  cache.tanh_c.resize(H, N);
  cache.h_out.resize(H, N);

  ModelState<Scalar> state = state0;
  for (std::size_t t = 0; t < steps; ++t) {
    check_finite_state(state, t);
    const auto col = static_cast<Eigen::Index>(t) * B;
    cache.h_prev.middleCols(col, B) = state.h;
    cache.c_prev.middleCols(col, B) = state.c;
    auto pre = pre_all.middleCols(col, B);
    if (mlstm) {
      auto mh = cache.mult_hproj.middleCols(col, B);
      mh.noalias() = w.mult_h * state.h;
      auto m = cache.mult.middleCols(col, B);
      m = cache.mult_xproj.middleCols(col, B).cwiseProduct(mh);
      pre.noalias() += w.gates_r * m;
    } else {
      pre.noalias() += w.gates_r * state.h;
    }
    activate_gates(pre, params.hidden);
    state.c = pre.middleRows(H, H).cwiseProduct(state.c) +
              pre.topRows(H).cwiseProduct(pre.bottomRows(H));
    auto tc = cache.tanh_c.middleCols(col, B);
    tc = state.c.array().tanh().matrix();
    state.h = pre.middleRows(2 * H, H).cwiseProduct(tc);
    cache.h_out.middleCols(col, B) = state.h;
  }
  cache.gates = std::move(pre_all);

  Matrix<Scalar> logits = params.output * cache.h_out;
  logits.colwise() += params.output_bias;
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> maxes = logits.colwise().maxCoeff();
  cache.probs = (logits.rowwise() - maxes).array().exp().matrix();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> sums = cache.probs.colwise().sum();
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const auto j = static_cast<Eigen::Index>(t * batch + b);
      const std::uint8_t y = targets[b * steps + t];
      total += std::log(static_cast<double>(sums[j])) + static_cast<double>(maxes[j]) -
               static_cast<double>(logits(y, j));
    }
  }
  cache.probs.array().rowwise() /= sums.array();
  result.loss = total / static_cast<double>(N);
  result.final_state = std::move(state);
  return result;
}

template <typename Scalar>
Gradients<Scalar> backward_sequence(const ModelParams<Scalar>& params,
                                    const ForwardCache<Scalar>& cache,
                                    std::span<const std::uint8_t> targets) {
  const auto& w = cache.weights;
  if (w.cell != params.cell || w.embed != params.embed || w.hidden != params.hidden) {
    throw ContractError("forward cache was built for a different model");
  }
  const std::size_t batch = cache.batch;
  const std::size_t steps = cache.steps;
  if (targets.size() != batch * steps) {
    throw ContractError("targets do not match cached sequence shape");
  }
  const Eigen::Index H = params.hidden;
  const auto B = static_cast<Eigen::Index>(batch);
  const auto N = static_cast<Eigen::Index>(batch * steps);
  const bool mlstm = params.cell == CellKind::kMLSTM;

  Gradients<Scalar> grads = params.zeros_like();

  Matrix<Scalar> dlogits = cache.probs;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      dlogits(targets[b * steps + t], static_cast<Eigen::Index>(t * batch + b)) -= Scalar(1);
    }
  }
  dlogits *= Scalar(1) / static_cast<Scalar>(N);
  grads.output.noalias() = dlogits * cache.h_out.transpose();
  grads.output_bias = dlogits.rowwise().sum();
  const Matrix<Scalar> dh_out = params.output.transpose() * dlogits;

  Matrix<Scalar> dpre(4 * H, N);
  Matrix<Scalar> dmx, dmh;
  if (mlstm) {
    dmx.resize(H, N);
    dmh.resize(H, N);
  }
  Matrix<Scalar> dh_next = Matrix<Scalar>::Zero(H, B);
  Matrix<Scalar> dc_next = Matrix<Scalar>::Zero(H, B);
  Matrix<Scalar> dh(H, B), dc(H, B);

  for (std::size_t step = steps; step-- > 0;) {
    const auto col = static_cast<Eigen::Index>(step) * B;
    const auto g = cache.gates.middleCols(col, B);
    const auto gi = g.topRows(H).array();
    const auto gf = g.middleRows(H, H).array();
    const auto go = g.middleRows(2 * H, H).array();
    const auto gu = g.bottomRows(H).array();
    const auto tc = cache.tanh_c.middleCols(col, B).array();

    dh = dh_out.middleCols(col, B) + dh_next;
    dc = (dh.array() * go * (Scalar(1) - tc.square())).matrix() + dc_next;

    auto dp = dpre.middleCols(col, B);
    dp.topRows(H) = (dc.array() * gu * gi * (Scalar(1) - gi)).matrix();
    dp.middleRows(H, H) =
        (dc.array() * cache.c_prev.middleCols(col, B).array() * gf * (Scalar(1) - gf)).matrix();
    dp.middleRows(2 * H, H) = (dh.array() * tc * go * (Scalar(1) - go)).matrix();
    dp.bottomRows(H) = (dc.array() * gi * (Scalar(1) - gu.square())).matrix();
    dc_next = (dc.array() * gf).matrix();

    if (mlstm) {
      const Matrix<Scalar> dm = w.gates_r.transpose() * dp;
      dmx.middleCols(col, B) = dm.cwiseProduct(cache.mult_hproj.middleCols(col, B));
      dmh.middleCols(col, B) = dm.cwiseProduct(cache.mult_xproj.middleCols(col, B));
      dh_next.noalias() = w.mult_h.transpose() * dmh.middleCols(col, B);
    } else {
      dh_next.noalias() = w.gates_r.transpose() * dp;
    }
  }
  // dh_next / dc_next now hold the gradient w.r.t. the initial state, which
  // truncated BPTT discards.

  const Matrix<Scalar> d_gates_x = dpre * cache.x.transpose();
  const Matrix<Scalar> d_gates_r =
      dpre * (mlstm ? cache.mult : cache.h_prev).transpose();
  const Vector<Scalar> d_bias = dpre.rowwise().sum();
  Matrix<Scalar> dx = w.gates_x.transpose() * dpre;
  for (int k = 0; k < 4; ++k) {
    weight_norm_backward<Scalar>(params.gate_x[k], d_gates_x.middleRows(k * H, H),
                                 grads.gate_x[k]);
    weight_norm_backward<Scalar>(params.gate_r[k], d_gates_r.middleRows(k * H, H),
                                 grads.gate_r[k]);
    grads.gate_bias[k] = d_bias.segment(k * H, H);
  }
  if (mlstm) {
    weight_norm_backward<Scalar>(params.mult_x, dmx * cache.x.transpose(), grads.mult_x);
    weight_norm_backward<Scalar>(params.mult_h, dmh * cache.h_prev.transpose(),
                                 grads.mult_h);
    dx.noalias() += w.mult_x.transpose() * dmx;
  }
  for (Eigen::Index j = 0; j < N; ++j) {
    grads.embedding.row(cache.inputs[static_cast<std::size_t>(j)]) += dx.col(j).transpose();
  }
  return grads;
}

double loss_to_bpb(double nats) {
  if (nats < 0.0) throw ContractError("loss in nats must be nonnegative");
  return nats / std::numbers::ln2;
}

// ---------------------------------------------------------------------------
// Gradient checking

GradCheckReport compare_gradients(const ModelParams<double>& params,
                                  const ModelState<double>& state0, const Batch& batch,
                                  const Gradients<double>& analytic, double epsilon) {
  if (!(epsilon > 0.0)) throw ContractError("finite-difference step must be positive");
  ModelParams<double> probe = params;
  auto probe_views = tensor_views(probe);
  const auto grad_views = tensor_views(analytic);
  if (probe_views.size() != grad_views.size()) {
    throw ContractError("gradient tree does not match parameters");
  }
  GradCheckReport report;
  for (std::size_t ti = 0; ti < probe_views.size(); ++ti) {
    const auto& pv = probe_views[ti];
    const auto& gv = grad_views[ti];
    if (pv.size() != gv.size()) throw ContractError("gradient shape mismatch for " + pv.name);
    for (std::size_t k = 0; k < pv.size(); ++k) {
      double& entry = pv.at_row_major(k);
      const double saved = entry;
      entry = saved + epsilon;
      const double plus = forward_sequence(probe, state0, batch).loss;
      entry = saved - epsilon;
      const double minus = forward_sequence(probe, state0, batch).loss;
      entry = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double a = gv.at_row_major(k);
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_relative_error || report.worst_tensor.empty()) {
        report.max_relative_error = std::max(rel, report.max_relative_error);
        report.worst_tensor = pv.name;
        report.worst_index = k;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

GradCheckReport grad_check(const ModelParams<double>& params,
                           const ModelState<double>& state0, const Batch& batch,
                           double epsilon) {
  if (!(epsilon > 0.0)) throw ContractError("finite-difference step must be positive");
  const auto fwd = forward_sequence(params, state0, batch);
  const auto grads = backward_sequence(params, fwd.cache, batch.targets);
  return compare_gradients(params, state0, batch, grads, epsilon);
}

// ---------------------------------------------------------------------------
// Instantiations

#define BYTELM_INSTANTIATE(S)                                                          \
  template struct ModelParams<S>;                                                      \
  template ModelParams<double> ModelParams<S>::cast<double>() const;                   \
  template ModelParams<float> ModelParams<S>::cast<float>() const;                     \
  template std::vector<TensorView<S>> tensor_views(ModelParams<S>&);                   \
  template std::vector<TensorView<const S>> tensor_views(const ModelParams<S>&);       \
  template ModelParams<S> init_params<S>(CellKind, int, int, std::uint64_t, double);   \
  template ModelParams<S> zero_params<S>(CellKind, int, int);                          \
  template Matrix<S> effective_weight(const Matrix<S>&, const Vector<S>&);             \
  template StackedWeights<S> stack_weights(const ModelParams<S>&);                     \
  template class CellRunner<S>;                                                        \
  template Matrix<S> forward_step(const ModelParams<S>&, ModelState<S>&,               \
                                  std::span<const std::uint8_t>,                       \
                                  const std::optional<Clamp>&);                        \
  template ForwardResult<S> forward_sequence(const ModelParams<S>&,                    \
                                             const ModelState<S>&,                     \
                                             std::span<const std::uint8_t>,            \
                                             std::span<const std::uint8_t>,            \
                                             std::size_t, std::size_t);                \
  template Gradients<S> backward_sequence(const ModelParams<S>&,                       \
                                          const ForwardCache<S>&,                      \
                                          std::span<const std::uint8_t>);

BYTELM_INSTANTIATE(float)
BYTELM_INSTANTIATE(double)

#undef BYTELM_INSTANTIATE

}  // namespace bytelm
