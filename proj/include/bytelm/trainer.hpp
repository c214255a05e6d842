// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bytelm/checkpoint.hpp"
#include "bytelm/model.hpp"

namespace bytelm {

struct TrainConfig {
  CellKind cell = CellKind::kMLSTM;
  int embed = 64;
  int hidden = 256;
  std::size_t batch = 16;
  std::size_t seq_len = 64;
  double lr0 = 5e-4;
  /// The whole budget; the learning rate decays linearly to zero over it.
  /// Shards are revisited in order if one pass does not use it up.
  std::uint64_t total_steps = 1000;
  std::uint64_t seed = 1;
  double init_scale = 0.1;
  bool zero_init = false;
  std::optional<double> clip_norm;

  std::vector<std::filesystem::path> train_shards;
  std::optional<std::filesystem::path> val_shard;
  std::size_t val_bytes = 1 << 16;  // validation prefix scored during training

  std::uint64_t log_interval = 10;
  std::uint64_t eval_interval = 0;  // 0: evaluate only after the last step
  std::uint64_t checkpoint_interval = 0;
  std::optional<std::filesystem::path> checkpoint_path;

  std::size_t workers = 1;   // data-parallel replicas; must divide batch
  std::size_t prefetch = 2;  // batches queued ahead; 0 disables the thread

  /// H=4096, B=128, T=256, lr0=5e-4.
  static TrainConfig full_scale();
  /// H=256, B=16, T=64.
  static TrainConfig desk_scale();
};

struct MetricsRow {
  std::uint64_t step = 0;
  double lr = 0.0;
  double train_nats = 0.0;
  std::optional<double> val_bpb;
};

struct StepEvent {
  std::uint64_t step = 0;
  std::size_t shard = 0;
  std::size_t batch_in_shard = 0;
  const ModelState<float>* state_in = nullptr;  // state fed into this update
};

struct TrainHooks {
  std::function<void(const StepEvent&)> on_step;
  std::function<void(const MetricsRow&)> on_metrics;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRow> metrics;
};

TrainResult train(const TrainConfig& config, const TrainHooks& hooks = {});

/// Same as train() with shard contents supplied in memory.
TrainResult train_on_bytes(const TrainConfig& config,
                           std::span<const std::vector<std::uint8_t>> shards,
                           const std::optional<std::vector<std::uint8_t>>& val,
                           const TrainHooks& hooks = {});

/// One data-parallel update's worth of work: forward and backward on each
/// of `workers` equal slices of the batch, gradients averaged in index
/// order. `state` is advanced to the post-window state.
template <typename Scalar>
struct StepResult {
  double loss = 0.0;
  Gradients<Scalar> grads;
};

template <typename Scalar>
StepResult<Scalar> compute_gradients(const ModelParams<Scalar>& params,
                                     ModelState<Scalar>& state, const Batch& batch,
                                     std::size_t workers);

/// Mean bits per byte over every full window of `bytes`, streams starting
/// from zero state and persisting across windows.
template <typename Scalar>
double evaluate_bpb(const ModelParams<Scalar>& params, std::span<const std::uint8_t> bytes,
                    std::size_t batch, std::size_t seq_len);

double evaluate_bpb(const ModelParams<float>& params, const std::filesystem::path& shard,
                    std::size_t batch, std::size_t seq_len);

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows);

/// Equal-budget mLSTM vs LSTM runs on the same data.
struct CellComparison {
  std::vector<MetricsRow> mlstm;
  std::vector<MetricsRow> lstm;
  double mlstm_final_bpb = 0.0;
  double lstm_final_bpb = 0.0;
};

CellComparison compare_cells(TrainConfig config,
                             std::span<const std::vector<std::uint8_t>> shards,
                             const std::vector<std::uint8_t>& val);

/// CSV `step,mlstm_val_bpb,lstm_val_bpb` over steps where both were scored.
void write_comparison_csv(const std::filesystem::path& path, const CellComparison& cmp);

}  // namespace bytelm
