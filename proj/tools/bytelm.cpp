// SPDX-License-Identifier: Apache-2.0
// bytelm: command-line driver for the byte-level language model pipeline.

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bytelm/analysis.hpp"
#include "bytelm/binary_io.hpp"
#include "bytelm/checkpoint.hpp"
#include "bytelm/corpus.hpp"
#include "bytelm/errors.hpp"
#include "bytelm/features.hpp"
#include "bytelm/generator.hpp"
#include "bytelm/model.hpp"
#include "bytelm/probe.hpp"
#include "bytelm/trainer.hpp"

namespace fs = std::filesystem;
using namespace bytelm;

namespace {

// Settings addressable from both the command line and the config file.
struct Settings {
  std::uint64_t seed = 1;
  int hidden = 256;
  int embed = 64;
  std::size_t batch = 16;
  std::size_t seqlen = 64;
  double lr = 5e-4;
  std::uint64_t steps = 1000;
  std::string cell = "mlstm";
  std::size_t workers = 1;
  std::string checkpoint;
  std::size_t unit = 0;
  std::optional<double> clampval;
  double temperature = 1.0;
  std::optional<double> lambda;
  std::size_t runs = 100;
  double init_scale = 0.1;
  std::optional<double> clip_norm;
  std::size_t val_bytes = 1 << 16;
  std::uint64_t log_interval = 10;
  std::uint64_t eval_interval = 0;
  std::uint64_t checkpoint_interval = 0;
  std::size_t prefetch = 2;
  std::size_t length = 200;
  std::string prime;
  bool zero_init = false;
};

std::size_t thread_cap() {
  const char* env = std::getenv("BYTELM_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0) throw ConfigError("BYTELM_THREADS must be a positive integer");
  return v;
}

// Largest divisor of the batch size not above the cap.
std::size_t capped_workers(std::size_t requested, std::size_t batch) {
  const std::size_t cap = thread_cap();
  if (cap == 0 || requested <= cap) return requested;
  std::size_t k = cap;
  while (k > 1 && batch % k != 0) --k;
  std::cerr << "workers capped to " << k << " by BYTELM_THREADS\n";
  return k;
}

void require_checkpoint(const Settings& s) {
  if (s.checkpoint.empty()) throw ConfigError("--checkpoint is required");
}

Checkpoint load_model(const Settings& s) {
  require_checkpoint(s);
  return load_checkpoint(s.checkpoint);
}

std::vector<fs::path> shard_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("shard_", 0) == 0 && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 3) throw ConfigError(dir.string() + " holds fewer than 3 shards");
  return files;
}

struct LabeledFeatures {
  FeatureMatrix X;
  std::vector<int> y;
};

LabeledFeatures load_labeled_features(const fs::path& path) {
  FeatureFile f = load_features(path);
  if (f.labels.empty()) throw FormatError(path.string() + " carries no labels");
  return {f.features.cast<double>(), std::move(f.labels)};
}

TrainConfig train_config(const Settings& s) {
  TrainConfig c;
  c.cell = parse_cell_kind(s.cell);
  c.embed = s.embed;
  c.hidden = s.hidden;
  c.batch = s.batch;
  c.seq_len = s.seqlen;
  c.lr0 = s.lr;
  c.total_steps = s.steps;
  c.seed = s.seed;
  c.init_scale = s.init_scale;
  c.zero_init = s.zero_init;
  c.clip_norm = s.clip_norm;
  c.val_bytes = s.val_bytes;
  c.log_interval = s.log_interval;
  c.eval_interval = s.eval_interval;
  c.checkpoint_interval = s.checkpoint_interval;
  if (!s.checkpoint.empty()) c.checkpoint_path = s.checkpoint;
  c.workers = capped_workers(s.workers, s.batch);
  c.prefetch = s.prefetch;
  return c;
}

std::optional<Clamp> clamp_of(const Settings& s) {
  if (!s.clampval) return std::nullopt;
  if (*s.clampval < -1.0 || *s.clampval > 1.0) throw ConfigError("--clampval must lie in [-1, 1]");
  return Clamp{s.unit, *s.clampval};
}

void print_bytes(const std::vector<std::uint8_t>& bytes) {
  std::cout << lossy_utf8(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()))
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byte-level multiplicative LSTM language model toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key = value configuration file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Settings s;
  app.add_option("--seed", s.seed, "Random seed");
  app.add_option("--hidden", s.hidden, "Hidden units H")->check(CLI::PositiveNumber);
  app.add_option("--embed", s.embed, "Embedding width E")->check(CLI::PositiveNumber);
  app.add_option("--batch", s.batch, "Streams per batch B")->check(CLI::PositiveNumber);
  app.add_option("--seqlen", s.seqlen, "Truncated BPTT length T")->check(CLI::PositiveNumber);
  app.add_option("--lr", s.lr, "Initial learning rate")->check(CLI::PositiveNumber);
  app.add_option("--steps", s.steps, "Total optimizer updates");
  app.add_option("--cell", s.cell, "Recurrent cell")->check(CLI::IsMember({"mlstm", "lstm"}));
  app.add_option("--workers", s.workers, "Data-parallel replicas")->check(CLI::PositiveNumber);
  app.add_option("--checkpoint", s.checkpoint, "Checkpoint path");
  app.add_option("--unit", s.unit, "Hidden unit index");
  app.add_option("--clampval", s.clampval, "Clamp the unit's cell to this value")
      ->check(CLI::Range(-1.0, 1.0));
  app.add_option("--temperature", s.temperature, "Sampling temperature, 0 for greedy")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--lambda", s.lambda, "Fixed L1 strength (skips path selection)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--runs", s.runs, "Resamples per size")->check(CLI::PositiveNumber);
  app.add_option("--init-scale", s.init_scale, "Uniform init half-width");
  app.add_option("--clip-norm", s.clip_norm, "Global gradient norm clip");
  app.add_option("--val-bytes", s.val_bytes, "Validation prefix length");
  app.add_option("--log-interval", s.log_interval, "Steps between metric rows");
  app.add_option("--eval-interval", s.eval_interval, "Steps between validation passes");
  app.add_option("--checkpoint-interval", s.checkpoint_interval, "Steps between checkpoints");
  app.add_option("--prefetch", s.prefetch, "Batches loaded ahead");
  app.add_option("--length", s.length, "Bytes to generate")->check(CLI::PositiveNumber);
  app.add_option("--prime", s.prime, "Text that seeds generation");
  app.add_flag("--zero-init", s.zero_init, "Start from the all-zero model");

  auto sub = [&](const char* name, const char* desc) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->fallthrough();
    return cmd;
  };

  std::string out;
  std::string input;

  CLI::App* synth = sub("synth", "Write the synthetic labeled review corpus");
  std::size_t n_reviews = 10000;
  double balance = 0.5;
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--reviews", n_reviews, "Number of reviews")->check(CLI::PositiveNumber);
  synth->add_option("--balance", balance, "Fraction of positive reviews")->check(CLI::Range(0.0, 1.0));

  CLI::App* shard = sub("shard", "Split a review file into shards");
  std::size_t n_shards = 10;
  shard->add_option("--input", input, "One review per line")->required();
  shard->add_option("--shards", n_shards, "Shard count (>= 3)");
  shard->add_option("--out", out, "Output directory")->required();

  CLI::App* train_cmd = sub("train", "Train a model");
  std::string shard_dir;
  std::vector<std::string> train_files;
  std::string val_file;
  std::string metrics_csv;
  train_cmd->add_option("--shard-dir", shard_dir, "Directory of shard_*.txt files");
  train_cmd->add_option("--train", train_files, "Training shard files");
  train_cmd->add_option("--val", val_file, "Validation shard");
  train_cmd->add_option("--metrics", metrics_csv, "Metrics CSV output");

  CLI::App* eval = sub("eval", "Bits per byte of a checkpoint on a file");
  eval->add_option("--input", input, "Bytes to score")->required();

  CLI::App* extract = sub("extract", "Feature vectors for labeled documents");
  extract->add_option("--input", input, "label<TAB>text lines")->required();
  extract->add_option("--out", out, "Feature file")->required();

  CLI::App* probe_cmd = sub("probe", "Fit an L1 logistic probe");
  std::string train_feats;
  std::string test_feats;
  probe_cmd->add_option("--train-features", train_feats, "Training feature file")->required();
  probe_cmd->add_option("--test-features", test_feats, "Held-out feature file");
  probe_cmd->add_option("--out", out, "Probe text file");

  CLI::App* curve = sub("curve", "Accuracy against labeled-set size");
  std::vector<std::size_t> sizes{8, 16, 32, 64, 128, 256};
  curve->add_option("--train-features", train_feats, "Pool to sample from")->required();
  curve->add_option("--test-features", test_feats, "Fixed test set")->required();
  curve->add_option("--sizes", sizes, "Sample sizes");
  curve->add_option("--out", out, "Curve CSV")->required();

  CLI::App* analyze = sub("analyze", "Single-unit report from a probe");
  std::string probe_path;
  std::string hist_csv;
  std::size_t bins = kDefaultHistogramBins;
  analyze->add_option("--probe", probe_path, "Probe text file")->required();
  analyze->add_option("--train-features", train_feats, "Threshold fitting features")->required();
  analyze->add_option("--test-features", test_feats, "Evaluation features")->required();
  analyze->add_option("--out", out, "Report text file");
  analyze->add_option("--histogram", hist_csv, "Histogram CSV");
  analyze->add_option("--bins", bins, "Histogram bins")->check(CLI::Range(2, 100000));

  CLI::App* trace = sub("trace", "Per-byte value of one unit");
  std::string text;
  std::string color = "auto";
  trace->add_option("--text", text, "Document text");
  trace->add_option("--input", input, "Read the document from a file");
  trace->add_option("--out", out, "Trace CSV");
  trace->add_option("--color", color, "auto, always or never")
      ->check(CLI::IsMember({"auto", "always", "never"}));

  CLI::App* sample_cmd = sub("sample", "Generate text");
  sample_cmd->add_option("--out", out, "Raw byte output file");

  CLI::App* gradcheck = sub("gradcheck", "Finite-difference gradient check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::cerr << "resolved config:\n" << app.config_to_str(true, false);

  try {
    if (synth->parsed()) {
      SynthConfig cfg = default_synth_config();
      cfg.n_reviews = n_reviews;
      cfg.label_balance = balance;
      cfg.seed = s.seed;
      const LabeledCorpus corpus = synthesize_corpus(cfg);
      fs::create_directories(out);
      write_reviews(fs::path(out) / "reviews.txt", corpus.reviews);
      LabeledDataset data;
      for (std::size_t i = 0; i < corpus.reviews.size(); ++i) {
        data.texts.push_back(corpus.reviews[i].text);
        data.labels.push_back(corpus.labels[i]);
      }
      data.n_classes = 2;
      save_labeled(fs::path(out) / "labeled.tsv", data);
      std::cout << corpus.reviews.size() << " reviews written to " << out << '\n';
    } else if (shard->parsed()) {
      const auto reviews = load_reviews(input);
      const ShardSet set = make_shards(reviews, n_shards, s.seed);
      for (const auto& p : write_shards(set, out)) std::cout << p.string() << '\n';
    } else if (train_cmd->parsed()) {
      TrainConfig cfg = train_config(s);
      if (!shard_dir.empty()) {
        const auto files = shard_files(shard_dir);
        cfg.train_shards.assign(files.begin(), files.end() - 2);
        cfg.val_shard = files[files.size() - 2];
      }
      for (const auto& f : train_files) cfg.train_shards.emplace_back(f);
      if (!val_file.empty()) cfg.val_shard = val_file;
      if (!cfg.checkpoint_path) throw ConfigError("--checkpoint is required");

      TrainResult result;
      if (cfg.total_steps == 0) {
        result.checkpoint.params =
            cfg.zero_init ? zero_params<float>(cfg.cell, cfg.embed, cfg.hidden)
                          : init_params<float>(cfg.cell, cfg.embed, cfg.hidden, cfg.seed,
                                               cfg.init_scale);
        save_checkpoint(result.checkpoint, *cfg.checkpoint_path);
      } else {
        TrainHooks hooks;
        hooks.on_metrics = [](const MetricsRow& r) {
          std::cerr << "step " << r.step << " lr " << r.lr << " train_nats " << std::fixed
                    << std::setprecision(4) << r.train_nats;
          if (r.val_bpb) std::cerr << " val_bpb " << *r.val_bpb;
          std::cerr << std::defaultfloat << '\n';
        };
        result = train(cfg, hooks);
      }
      if (!metrics_csv.empty()) write_metrics_csv(metrics_csv, result.metrics);
      std::cout << "checkpoint " << cfg.checkpoint_path->string() << " step "
                << result.checkpoint.step << '\n';
    } else if (eval->parsed()) {
      const Checkpoint ckpt = load_model(s);
      const double bpb = evaluate_bpb(ckpt.params, fs::path(input), s.batch, s.seqlen);
      std::cout << std::fixed << std::setprecision(4) << bpb << '\n';
    } else if (extract->parsed()) {
      const Checkpoint ckpt = load_model(s);
      const LabeledDataset data = load_labeled(input);
      FeatureFile f;
      f.features = extract_features(ckpt.params, std::span<const std::string>(data.texts));
      f.labels = data.labels;
      save_features(f, out);
      std::cout << f.features.rows() << " x " << f.features.cols() << " features written to "
                << out << '\n';
    } else if (probe_cmd->parsed()) {
      const auto tr = load_labeled_features(train_feats);
      EfficiencyOptions opts;
      ProbeModel model = s.lambda ? fit_l1(tr.X, tr.y, *s.lambda, opts.solver)
                                  : fit_selected(tr.X, tr.y, s.seed, opts);
      std::cout << std::setprecision(6) << "lambda " << model.lambda << " nnz " << model.nnz
                << " train_accuracy " << accuracy(model, tr.X, tr.y) << '\n';
      if (!test_feats.empty()) {
        const auto te = load_labeled_features(test_feats);
        std::cout << "test_accuracy " << accuracy(model, te.X, te.y) << '\n';
      }
      if (!out.empty()) save_probe(model, out);
    } else if (curve->parsed()) {
      const auto tr = load_labeled_features(train_feats);
      const auto te = load_labeled_features(test_feats);
      EfficiencyOptions opts;
      opts.threads = std::max<std::size_t>(1, thread_cap());
      const EfficiencyCurve c =
          data_efficiency_curve(tr.X, tr.y, te.X, te.y, sizes, s.runs, s.seed, opts);
      write_curve_csv(out, c);
      for (const auto& p : c.points) {
        std::cout << std::fixed << std::setprecision(4) << p.size << " mean " << p.mean << " p10 "
                  << p.p10 << " p90 " << p.p90 << '\n';
      }
    } else if (analyze->parsed()) {
      const auto tr = load_labeled_features(train_feats);
      const auto te = load_labeled_features(test_feats);
      const ProbeModel model = load_probe(probe_path, tr.X.cols());
      const UnitReport report = analyze_units(model, tr.X, tr.y, te.X, te.y, bins);
      const std::string body = format_report(report);
      std::cout << body;
      if (!out.empty()) {
        std::ofstream f(out);
        if (!(f << body)) throw IoError("write failed for " + out);
      }
      if (!hist_csv.empty()) write_histogram_csv(hist_csv, report.histogram);
    } else if (trace->parsed()) {
      const Checkpoint ckpt = load_model(s);
      if (!input.empty()) {
        const auto raw = read_file_bytes(input);
        text.assign(raw.begin(), raw.end());
      }
      const Trace t = trace_unit(ckpt.params, text, s.unit);
      if (!out.empty()) write_trace_csv(out, t);
      const bool use_color = color == "always" || (color == "auto" && isatty(STDOUT_FILENO));
      std::cout << render_trace(t, use_color) << '\n';
    } else if (sample_cmd->parsed()) {
      const Checkpoint ckpt = load_model(s);
      GenConfig cfg;
      cfg.prime = s.prime;
      cfg.length = s.length;
      cfg.temperature = s.temperature;
      cfg.clamp = clamp_of(s);
      cfg.seed = s.seed;
      const auto bytes = sample(ckpt.params, cfg);
      if (!out.empty()) write_file_bytes(out, bytes);
      print_bytes(bytes);
    } else if (gradcheck->parsed()) {
      // Small defaults: central differences touch every parameter twice.
      const int hidden = app.count("--hidden") ? s.hidden : 8;
      const int embed = app.count("--embed") ? s.embed : 4;
      const std::size_t batch = app.count("--batch") ? s.batch : 2;
      const std::size_t seqlen = app.count("--seqlen") ? s.seqlen : 5;
      const CellKind cell = parse_cell_kind(s.cell);
      const auto params = init_params<double>(cell, embed, hidden, s.seed, 0.5);
      Rng rng(derive_seed(s.seed, {7}));
      std::vector<std::uint8_t> bytes(batch * (seqlen + 1) + 1);
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(kVocab));
      BatchStream stream(bytes, batch, seqlen);
      const Batch b = stream.next_batch();
      auto state0 = ModelState<double>::zeros(hidden, batch);
      for (Eigen::Index i = 0; i < state0.h.size(); ++i) {
        state0.h.data()[i] = rng.uniform(-0.5, 0.5);
        state0.c.data()[i] = rng.uniform(-0.5, 0.5);
      }
      const GradCheckReport rep = grad_check(params, state0, b, 1e-5);
      std::cout << std::scientific << std::setprecision(3) << "max_relative_error "
                << rep.max_relative_error << " tensor " << rep.worst_tensor << " index "
                << rep.worst_index << " checked " << rep.checked << '\n';
      return rep.max_relative_error < 1e-4 ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << kind_name(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
