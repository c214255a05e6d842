// SPDX-License-Identifier: Apache-2.0
#pragma once

// Weight-normalized multiplicative LSTM (and a plain LSTM baseline) over
// bytes: parameters, forward pass, exact truncated-BPTT gradients.
//
// Per step, with x the byte embedding and W = g * V / ||V|| row-wise:
//
//   m  = (W_mx x) * (W_mh h)                 [mLSTM only; LSTM uses m = h]
//   i  = sigmoid(W_ix x + W_im m + b_i)
//   f  = sigmoid(W_fx x + W_fm m + b_f)
//   o  = sigmoid(W_ox x + W_om m + b_o)
//   u  = tanh(W_ux x + W_um m + b_u)
//   c' = f * c + i * u          (optionally c'[unit] := value)
//   h' = o * tanh(c')
//   logits = W_y h' + b_y
//
// Matrices store one stream per column: state is H x B.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bytelm/corpus.hpp"

namespace bytelm {

inline constexpr int kVocab = 256;

enum class CellKind : std::uint32_t { kMLSTM = 0, kLSTM = 1 };

std::string cell_kind_name(CellKind kind);
CellKind parse_cell_kind(std::string_view name);

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct WeightNormMatrix {
  Matrix<Scalar> direction;  // V
  Vector<Scalar> scale;      // g, one entry per output row
};

/// Also used as the gradient tree (see Gradients) and as Adam moment storage.
template <typename Scalar>
struct ModelParams {
  CellKind cell = CellKind::kMLSTM;
  int embed = 0;
  int hidden = 0;

  Matrix<Scalar> embedding;  // 256 x E

  WeightNormMatrix<Scalar> mult_x;  // W_mx, H x E (mLSTM only)
  WeightNormMatrix<Scalar> mult_h;  // W_mh, H x H (mLSTM only)

  // Input-side gate matrices, H x E, in gate order i, f, o, u.
  WeightNormMatrix<Scalar> gate_x[4];
  // Recurrent-side gate matrices, H x H. They read m for the mLSTM and h for
  // the LSTM baseline.
  WeightNormMatrix<Scalar> gate_r[4];
  Vector<Scalar> gate_bias[4];

  Matrix<Scalar> output;       // W_y, 256 x H
  Vector<Scalar> output_bias;  // b_y

  /// All tensors zero-filled with the right shapes.
  static ModelParams zeros(CellKind cell, int embed, int hidden);

  ModelParams zeros_like() const { return zeros(cell, embed, hidden); }

  template <typename Other>
  ModelParams<Other> cast() const;

  std::size_t parameter_count() const;
};

template <typename Scalar>
using Gradients = ModelParams<Scalar>;

/// A named, column-major view of one tensor inside ModelParams.
template <typename Scalar>
struct TensorView {
  std::string name;
  Scalar* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  int rank = 2;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
  /// Element (r, c) in row-major order index `r * cols + c`.
  Scalar& at_row_major(std::size_t k) const {
    const auto r = static_cast<Eigen::Index>(k) / cols;
    const auto c = static_cast<Eigen::Index>(k) % cols;
    return data[c * rows + r];
  }
};

/// Canonical tensor order and names (`embedding`, `V_mx`, `g_mx`, ...,
/// `W_y`, `b_y`). The two mult_* matrices are absent for the LSTM cell.
template <typename Scalar>
std::vector<TensorView<Scalar>> tensor_views(ModelParams<Scalar>& params);
template <typename Scalar>
std::vector<TensorView<const Scalar>> tensor_views(const ModelParams<Scalar>& params);

/// Direction matrices, embedding and output projection are drawn uniformly
/// from [-scale, scale]; every g starts at the row norm of its V so the
/// effective weight equals V. Biases are zero except the forget bias (1).
template <typename Scalar>
ModelParams<Scalar> init_params(CellKind cell, int embed, int hidden,
                                std::uint64_t seed, double scale);

/// The all-zero model: every effective weight, bias and embedding entry is
/// zero. Directions are all-ones rows with g = 0 so that weight
/// normalization stays well defined.
template <typename Scalar>
ModelParams<Scalar> zero_params(CellKind cell, int embed, int hidden);

/// Row i is g[i] * V[i] / ||V[i]||. Throws NumericalError on a zero row.
template <typename Scalar>
Matrix<Scalar> effective_weight(const Matrix<Scalar>& direction,
                                const Vector<Scalar>& scale);

template <typename Scalar>
struct ModelState {
  Matrix<Scalar> h;  // H x B
  Matrix<Scalar> c;  // H x B

  static ModelState zeros(int hidden, std::size_t batch) {
    return {Matrix<Scalar>::Zero(hidden, static_cast<Eigen::Index>(batch)),
            Matrix<Scalar>::Zero(hidden, static_cast<Eigen::Index>(batch))};
  }
};

struct Clamp {
  std::size_t unit = 0;
  double value = 0.0;
};

/// Effective weights stacked for batched evaluation. Gate blocks are laid
/// out i, f, o, u along the rows.
template <typename Scalar>
struct StackedWeights {
  CellKind cell = CellKind::kMLSTM;
  int embed = 0;
  int hidden = 0;
  Matrix<Scalar> gates_x;  // 4H x E
  Matrix<Scalar> gates_r;  // 4H x H
  Vector<Scalar> gates_b;  // 4H
  Matrix<Scalar> mult_x;   // H x E
  Matrix<Scalar> mult_h;   // H x H
};

template <typename Scalar>
StackedWeights<Scalar> stack_weights(const ModelParams<Scalar>& params);

/// Steps B streams one byte forward. Reusable across calls; holds the
/// effective weights so they are computed once.
template <typename Scalar>
class CellRunner {
 public:
  explicit CellRunner(const ModelParams<Scalar>& params);

  /// Advances `state` in place. `logits` (256 x B) is filled when non-null.
  /// `step_index` only labels error messages.
  void step(ModelState<Scalar>& state, std::span<const std::uint8_t> bytes,
            const std::optional<Clamp>& clamp, Matrix<Scalar>* logits,
            std::size_t step_index = 0) const;

  int hidden() const { return weights_.hidden; }

 private:
  const ModelParams<Scalar>& params_;
  StackedWeights<Scalar> weights_;
};

template <typename Scalar>
Matrix<Scalar> forward_step(const ModelParams<Scalar>& params, ModelState<Scalar>& state,
                            std::span<const std::uint8_t> bytes,
                            const std::optional<Clamp>& clamp = std::nullopt);

/// Everything backward_sequence needs. Columns are time-major: step t of
/// stream b is column t * B + b.
template <typename Scalar>
struct ForwardCache {
  StackedWeights<Scalar> weights;
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<std::uint8_t> inputs;  // time-major
  Matrix<Scalar> x;                  // E x BT
  Matrix<Scalar> mult_xproj;         // H x BT, W_mx x (mLSTM)
  Matrix<Scalar> mult_hproj;         // H x BT, W_mh h_{t-1} (mLSTM)
  Matrix<Scalar> mult;               // H x BT, m (mLSTM)
  Matrix<Scalar> h_prev;             // H x BT
  Matrix<Scalar> c_prev;             // H x BT
  Matrix<Scalar> gates;              // 4H x BT, post-activation
  Matrix<Scalar> tanh_c;             // H x BT
  Matrix<Scalar> h_out;              // H x BT
  Matrix<Scalar> probs;              // 256 x BT

  std::size_t length() const { return steps; }
};

template <typename Scalar>
struct ForwardResult {
  double loss = 0.0;  // mean nats per byte
  ModelState<Scalar> final_state;
  ForwardCache<Scalar> cache;
};

/// `inputs`/`targets` are row-major B x T as produced by BatchStream.
template <typename Scalar>
ForwardResult<Scalar> forward_sequence(const ModelParams<Scalar>& params,
                                       const ModelState<Scalar>& state0,
                                       std::span<const std::uint8_t> inputs,
                                       std::span<const std::uint8_t> targets,
                                       std::size_t batch, std::size_t steps);

template <typename Scalar>
ForwardResult<Scalar> forward_sequence(const ModelParams<Scalar>& params,
                                       const ModelState<Scalar>& state0,
                                       const Batch& batch) {
  return forward_sequence(params, state0, batch.inputs, batch.targets,
                          batch.batch_size, batch.seq_len);
}

/// Exact gradient of the mean loss, including the weight-norm chain rule.
/// The gradient reaching state0 is computed and dropped (truncated BPTT).
template <typename Scalar>
Gradients<Scalar> backward_sequence(const ModelParams<Scalar>& params,
                                    const ForwardCache<Scalar>& cache,
                                    std::span<const std::uint8_t> targets);

double loss_to_bpb(double nats);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;  // row-major index within worst_tensor
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Entries whose analytic and numeric values are both below this magnitude
/// are compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-5;

/// Central differences over every parameter entry, compared against
/// `analytic`.
GradCheckReport compare_gradients(const ModelParams<double>& params,
                                  const ModelState<double>& state0,
                                  const Batch& batch,
                                  const Gradients<double>& analytic,
                                  double epsilon);

/// compare_gradients against backward_sequence.
GradCheckReport grad_check(const ModelParams<double>& params,
                           const ModelState<double>& state0, const Batch& batch,
                           double epsilon);

}  // namespace bytelm
