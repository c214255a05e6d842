// SPDX-License-Identifier: Apache-2.0
#include "bytelm/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <numbers>
#include <thread>

#include "bytelm/binary_io.hpp"
#include "bytelm/errors.hpp"
#include "bytelm/optimizer.hpp"

namespace bytelm {

namespace fs = std::filesystem;

TrainConfig TrainConfig::full_scale() {
  TrainConfig c;
  c.hidden = 4096;
  c.batch = 128;
  c.seq_len = 256;
  c.lr0 = 5e-4;
  return c;
}

TrainConfig TrainConfig::desk_scale() {
  TrainConfig c;
  c.hidden = 256;
  c.batch = 16;
  c.seq_len = 64;
  return c;
}

template <typename Scalar>
StepResult<Scalar> compute_gradients(const ModelParams<Scalar>& params,
                                     ModelState<Scalar>& state, const Batch& batch,
                                     std::size_t workers) {
  const std::size_t B = batch.batch_size;
  const std::size_t T = batch.seq_len;
  if (workers == 0 || B % workers != 0) {
    throw ConfigError("worker count " + std::to_string(workers) +
                      " must divide batch size " + std::to_string(B));
  }
  if (workers == 1) {
    auto fwd = forward_sequence(params, state, batch);
    StepResult<Scalar> out{fwd.loss, backward_sequence(params, fwd.cache, batch.targets)};
    state = std::move(fwd.final_state);
    return out;
  }

  const std::size_t slice = B / workers;
  const auto cols = static_cast<Eigen::Index>(slice);
  std::vector<Gradients<Scalar>> grads(workers);
  std::vector<double> losses(workers);
  std::vector<ModelState<Scalar>> finals(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](std::size_t k) {
    try {
      const auto first = static_cast<Eigen::Index>(k * slice);
      ModelState<Scalar> sub{state.h.middleCols(first, cols), state.c.middleCols(first, cols)};
      const auto in = std::span(batch.inputs).subspan(k * slice * T, slice * T);
      const auto tg = std::span(batch.targets).subspan(k * slice * T, slice * T);
      auto fwd = forward_sequence(params, sub, in, tg, slice, T);
      grads[k] = backward_sequence(params, fwd.cache, tg);
      losses[k] = fwd.loss;
      finals[k] = std::move(fwd.final_state);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(run, k);
    run(0);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  StepResult<Scalar> out;
  out.grads = average_gradients(std::span<const Gradients<Scalar>>(grads));
  for (std::size_t k = 0; k < workers; ++k) {
    out.loss += losses[k];
    const auto first = static_cast<Eigen::Index>(k * slice);
    state.h.middleCols(first, cols) = finals[k].h;
    state.c.middleCols(first, cols) = finals[k].c;
  }
  out.loss /= static_cast<double>(workers);
  return out;
}

template <typename Scalar>
double evaluate_bpb(const ModelParams<Scalar>& params, std::span<const std::uint8_t> bytes,
                    std::size_t batch, std::size_t seq_len) {
  BatchStream stream(std::vector<std::uint8_t>(bytes.begin(), bytes.end()), batch, seq_len);
  auto state = ModelState<Scalar>::zeros(params.hidden, batch);
  double total = 0.0;
  std::size_t windows = 0;
  for (Batch b = stream.next_batch(); !b.exhausted; b = stream.next_batch()) {
    auto fwd = forward_sequence(params, state, b);
    total += fwd.loss;
    state = std::move(fwd.final_state);
    ++windows;
  }
  return loss_to_bpb(total / static_cast<double>(windows));
}

double evaluate_bpb(const ModelParams<float>& params, const fs::path& shard,
                    std::size_t batch, std::size_t seq_len) {
  return evaluate_bpb(params, std::span<const std::uint8_t>(read_file_bytes(shard)), batch,
                      seq_len);
}

namespace {

void validate(const TrainConfig& c) {
  if (c.batch < 1 || c.seq_len < 1) throw ConfigError("batch and seqlen must be >= 1");
  if (c.embed < 1 || c.hidden < 1) throw ConfigError("embed and hidden must be >= 1");
  if (!(c.lr0 > 0.0)) throw ConfigError("lr must be positive");
  if (c.workers < 1 || c.batch % c.workers != 0) {
    throw ConfigError("workers must divide the batch size");
  }
  if (c.log_interval == 0) throw ConfigError("log interval must be >= 1");
}

// Wraps either a plain or a prefetching stream.
class ShardReader {
 public:
  ShardReader(const std::vector<std::uint8_t>& bytes, const TrainConfig& c) {
    BatchStream stream(bytes, c.batch, c.seq_len);
    if (c.prefetch > 0) {
      prefetch_ = std::make_unique<PrefetchingBatchStream>(std::move(stream), c.prefetch);
    } else {
      plain_ = std::make_unique<BatchStream>(std::move(stream));
    }
  }
  Batch next() { return prefetch_ ? prefetch_->next_batch() : plain_->next_batch(); }

 private:
  std::unique_ptr<BatchStream> plain_;
  std::unique_ptr<PrefetchingBatchStream> prefetch_;
};

}  // namespace

TrainResult train_on_bytes(const TrainConfig& config,
                           std::span<const std::vector<std::uint8_t>> shards,
                           const std::optional<std::vector<std::uint8_t>>& val,
                           const TrainHooks& hooks) {
  validate(config);
  if (shards.empty()) throw ConfigError("no training shards");
  for (std::size_t s = 0; s < shards.size(); ++s) {
    if (shards[s].size() < config.batch * (config.seq_len + 1)) {
      throw ConfigError("training shard " + std::to_string(s) + " holds " +
                        std::to_string(shards[s].size()) + " bytes, fewer than B*(T+1)");
    }
  }
  std::optional<std::vector<std::uint8_t>> val_prefix;
  if (val) {
    const std::size_t n = std::min(val->size(), config.val_bytes);
    val_prefix.emplace(val->begin(), val->begin() + static_cast<std::ptrdiff_t>(n));
    if (val_prefix->size() < config.batch * (config.seq_len + 1)) {
      throw ConfigError("validation prefix smaller than B*(T+1)");
    }
  }

  TrainResult result;
  Checkpoint& ckpt = result.checkpoint;
  ckpt.params = config.zero_init
                    ? zero_params<float>(config.cell, config.embed, config.hidden)
                    : init_params<float>(config.cell, config.embed, config.hidden,
                                         config.seed, config.init_scale);
  AdamState<float> adam = AdamState<float>::fresh(ckpt.params);
  const LrSchedule schedule{config.lr0, std::max<std::uint64_t>(config.total_steps, 1)};

  auto score_val = [&]() -> std::optional<double> {
    if (!val_prefix) return std::nullopt;
    return evaluate_bpb(ckpt.params, std::span<const std::uint8_t>(*val_prefix),
                        config.batch, config.seq_len);
  };
  auto snapshot = [&](const fs::path& path) {
    ckpt.adam = adam;
    save_checkpoint(ckpt, path);
  };

  std::uint64_t step = 0;
  try {
    while (step < config.total_steps) {
      for (std::size_t s = 0; s < shards.size() && step < config.total_steps; ++s) {
        ShardReader reader(shards[s], config);
        auto state = ModelState<float>::zeros(config.hidden, config.batch);
        std::size_t in_shard = 0;
        while (step < config.total_steps) {
          const Batch batch = reader.next();
          if (batch.exhausted) break;
          if (hooks.on_step) hooks.on_step({step, s, in_shard, &state});
          const double lr = lr_at(schedule, step);
          auto update = compute_gradients(ckpt.params, state, batch, config.workers);
          if (config.clip_norm) clip_global_norm(update.grads, *config.clip_norm);
          adam_step(ckpt.params, update.grads, adam, lr);
          ++step;
          ++in_shard;
          ckpt.step = step;

          const bool last = step == config.total_steps;
          const bool eval_now =
              last || (config.eval_interval > 0 && step % config.eval_interval == 0);
          if (eval_now || step % config.log_interval == 0 || step == 1) {
            MetricsRow row{step, lr, update.loss, eval_now ? score_val() : std::nullopt};
            if (hooks.on_metrics) hooks.on_metrics(row);
            result.metrics.push_back(row);
          }
          if (config.checkpoint_path && config.checkpoint_interval > 0 &&
              step % config.checkpoint_interval == 0) {
            snapshot(*config.checkpoint_path);
          }
        }
      }
    }
  } catch (const NumericalError&) {
    if (config.checkpoint_path) {
      fs::path dump = *config.checkpoint_path;
      dump += ".crash";
      snapshot(dump);
    }
    throw;
  }

  ckpt.adam = std::move(adam);
  if (config.checkpoint_path) save_checkpoint(ckpt, *config.checkpoint_path);
  return result;
}

TrainResult train(const TrainConfig& config, const TrainHooks& hooks) {
  std::vector<std::vector<std::uint8_t>> shards;
  for (const auto& p : config.train_shards) shards.push_back(read_file_bytes(p));
  std::optional<std::vector<std::uint8_t>> val;
  if (config.val_shard) val = read_file_bytes(*config.val_shard);
  return train_on_bytes(config, shards, val, hooks);
}

void write_metrics_csv(const fs::path& path, std::span<const MetricsRow> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "step,lr,train_nats,val_bpb\n" << std::setprecision(9);
  for (const auto& r : rows) {
    out << r.step << ',' << r.lr << ',' << r.train_nats << ',';
    if (r.val_bpb) out << *r.val_bpb;
    out << '\n';
  }
}

CellComparison compare_cells(TrainConfig config,
                             std::span<const std::vector<std::uint8_t>> shards,
                             const std::vector<std::uint8_t>& val) {
  CellComparison out;
  config.checkpoint_path.reset();
  for (CellKind cell : {CellKind::kMLSTM, CellKind::kLSTM}) {
    config.cell = cell;
    auto res = train_on_bytes(config, shards, val);
    const double final_bpb = res.metrics.back().val_bpb.value_or(NAN);
    if (cell == CellKind::kMLSTM) {
      out.mlstm = std::move(res.metrics);
      out.mlstm_final_bpb = final_bpb;
    } else {
      out.lstm = std::move(res.metrics);
      out.lstm_final_bpb = final_bpb;
    }
  }
  return out;
}

void write_comparison_csv(const fs::path& path, const CellComparison& cmp) {
  std::map<std::uint64_t, std::pair<double, double>> rows;
  for (const auto& r : cmp.mlstm) {
    if (r.val_bpb) rows[r.step].first = *r.val_bpb;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "step,mlstm_val_bpb,lstm_val_bpb\n" << std::setprecision(9);
  for (const auto& r : cmp.lstm) {
    if (!r.val_bpb) continue;
    const auto it = rows.find(r.step);
    if (it == rows.end()) continue;
    out << r.step << ',' << it->second.first << ',' << *r.val_bpb << '\n';
  }
}

template StepResult<float> compute_gradients(const ModelParams<float>&, ModelState<float>&,
                                             const Batch&, std::size_t);
template StepResult<double> compute_gradients(const ModelParams<double>&,
                                              ModelState<double>&, const Batch&,
                                              std::size_t);
template double evaluate_bpb(const ModelParams<float>&, std::span<const std::uint8_t>,
                             std::size_t, std::size_t);
template double evaluate_bpb(const ModelParams<double>&, std::span<const std::uint8_t>,
                             std::size_t, std::size_t);

}  // namespace bytelm
