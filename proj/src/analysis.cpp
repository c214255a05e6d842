// SPDX-License-Identifier: Apache-2.0
#include "bytelm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bytelm/corpus.hpp"
#include "bytelm/errors.hpp"
#include "bytelm/features.hpp"

namespace bytelm {

namespace fs = std::filesystem;

std::vector<std::pair<std::size_t, double>> rank_units(const ProbeModel& probe) {
  if (!probe.binary()) throw ContractError("unit ranking needs a binary probe");
  std::vector<std::pair<std::size_t, double>> ranked;
  for (Eigen::Index j = 0; j < probe.width(); ++j) {
    const double w = std::abs(probe.weights(0, j));
    if (w != 0.0) ranked.emplace_back(static_cast<std::size_t>(j), w);
  }
  if (ranked.empty()) {
    throw ContractError("probe has no nonzero weights; lower lambda to rank units");
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

Histogram activation_histogram(std::span<const double> values, std::span<const int> labels,
                               std::size_t bins) {
  if (bins < 2) throw ConfigError("histogram needs at least 2 bins");
  if (values.size() != labels.size()) throw ContractError("values and labels differ in length");
  Histogram h;
  h.bins = bins;
  h.class0.assign(bins, 0);
  h.class1.assign(bins, 0);
  const double width = 2.0 / static_cast<double>(bins);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= -1.0 && v <= 1.0)) {
      throw ContractError("activation " + std::to_string(v) + " at index " + std::to_string(i) +
                          " outside [-1, 1]");
    }
    const auto bin = std::min(static_cast<std::size_t>(std::floor((v + 1.0) / width)), bins - 1);
    if (labels[i] == 0) {
      ++h.class0[bin];
    } else if (labels[i] == 1) {
      ++h.class1[bin];
    } else {
      throw ContractError("histogram labels must be 0 or 1");
    }
  }
  return h;
}

ThresholdRule fit_threshold(std::span<const double> values, std::span<const int> labels) {
  if (values.size() != labels.size()) throw ContractError("values and labels differ in length");
  std::vector<std::pair<double, int>> sorted;
  sorted.reserve(values.size());
  std::size_t total_pos = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ContractError("threshold labels must be 0 or 1");
    if (!std::isfinite(values[i])) throw ContractError("non-finite activation");
    sorted.emplace_back(values[i], labels[i]);
    total_pos += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t n = sorted.size();
  if (total_pos == 0 || total_pos == n) {
    throw DegenerateLabelsError("threshold fit needs both classes present");
  }
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> candidates{-1.0, 1.0};
  for (std::size_t i = 1; i < n; ++i) {
    if (sorted[i].first != sorted[i - 1].first) {
      candidates.push_back(0.5 * (sorted[i - 1].first + sorted[i].first));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Sweep candidates upward, tracking how many of each class sit at or below t.
  std::size_t idx = 0;
  std::size_t pos_le = 0;
  std::size_t neg_le = 0;
  std::size_t best_correct = 0;
  ThresholdRule best;
  bool have = false;
  for (double t : candidates) {
    while (idx < n && sorted[idx].first <= t) {
      (sorted[idx].second == 1 ? pos_le : neg_le) += 1;
      ++idx;
    }
    const std::size_t plus = (total_pos - pos_le) + neg_le;
    const std::size_t minus = n - plus;
    if (!have || plus > best_correct) {
      best = {t, 1, 0.0};
      best_correct = plus;
      have = true;
    }
    if (minus > best_correct) {
      best = {t, -1, 0.0};
      best_correct = minus;
    }
  }
  best.accuracy = static_cast<double>(best_correct) / static_cast<double>(n);
  return best;
}

double rule_accuracy(const ThresholdRule& rule, std::span<const double> values,
                     std::span<const int> labels) {
  if (values.size() != labels.size()) throw ContractError("values and labels differ in length");
  if (values.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < values.size(); ++i) hit += rule.predict(values[i]) == labels[i];
  return static_cast<double>(hit) / static_cast<double>(values.size());
}

template <typename Scalar>
Trace trace_unit(const ModelParams<Scalar>& params, std::string_view text, std::size_t unit) {
  if (unit >= static_cast<std::size_t>(params.hidden)) {
    throw ContractError("unit " + std::to_string(unit) + " out of range for hidden size " +
                        std::to_string(params.hidden));
  }
  Trace trace;
  trace.text = preprocess_text(text);
  trace.values.resize(trace.text.size());
  const std::vector<std::vector<std::uint8_t>> docs{trace.text};
  const auto row = static_cast<Eigen::Index>(unit);
  final_cell_states<Scalar>(params, docs,
                            [&](std::size_t, std::size_t offset,
                                const Eigen::Ref<const Vector<Scalar>>& cell) {
                              trace.values[offset] = static_cast<double>(std::tanh(cell[row]));
                            });
  return trace;
}

UnitReport analyze_units(const ProbeModel& probe, const FeatureMatrix& X_train,
                         std::span<const int> y_train, const FeatureMatrix& X_test,
                         std::span<const int> y_test, std::size_t bins, std::size_t top_k) {
  if (X_train.cols() != probe.width() || X_test.cols() != probe.width()) {
    throw DimensionMismatchError("feature width does not match the probe");
  }
  UnitReport report;
  auto ranked = rank_units(probe);
  report.unit = ranked.front().first;
  ranked.resize(std::min(ranked.size(), top_k));
  report.weight_rank = std::move(ranked);

  const auto col = static_cast<Eigen::Index>(report.unit);
  const Eigen::VectorXd train_values = X_train.col(col);
  const Eigen::VectorXd test_values = X_test.col(col);
  const std::span<const double> train_span(train_values.data(),
                                           static_cast<std::size_t>(train_values.size()));
  const std::span<const double> test_span(test_values.data(),
                                          static_cast<std::size_t>(test_values.size()));
  report.rule = fit_threshold(train_span, y_train);
  report.train_accuracy = report.rule.accuracy;
  report.test_accuracy = rule_accuracy(report.rule, test_span, y_test);
  report.histogram = activation_histogram(test_span, y_test, bins);
  report.probe_test_accuracy = accuracy(probe, X_test, y_test);
  return report;
}

std::string format_report(const UnitReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "unit " << r.unit << '\n';
  out << "threshold " << r.rule.threshold << " orientation " << (r.rule.orientation > 0 ? "+1" : "-1")
      << '\n';
  out << "unit train accuracy " << r.train_accuracy << '\n';
  out << "unit test accuracy " << r.test_accuracy << '\n';
  out << "probe test accuracy " << r.probe_test_accuracy << '\n';
  out << "gap " << (r.probe_test_accuracy - r.test_accuracy) << '\n';
  out << "top units (index |weight|):\n";
  for (const auto& [idx, w] : r.weight_rank) out << "  " << idx << ' ' << w << '\n';
  return out.str();
}

void write_histogram_csv(const fs::path& path, const Histogram& hist) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "bin_lo,bin_hi,count_class0,count_class1\n" << std::setprecision(6);
  for (std::size_t i = 0; i < hist.bins; ++i) {
    out << hist.bin_lo(i) << ',' << hist.bin_hi(i) << ',' << hist.class0[i] << ','
        << hist.class1[i] << '\n';
  }
}

void write_trace_csv(const fs::path& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "offset,value\n" << std::setprecision(9);
  for (std::size_t i = 0; i < trace.values.size(); ++i) out << i << ',' << trace.values[i] << '\n';
}

std::string render_trace(const Trace& trace, bool color) {
  const std::string_view bytes(reinterpret_cast<const char*>(trace.text.data()), trace.text.size());
  if (!color) return lossy_utf8(bytes);
  std::string out;
  char esc[48];
  for (std::size_t i = 0; i < bytes.size();) {
    const std::size_t len = std::max<std::size_t>(utf8_char_length(bytes, i), 1);
    const double v = trace.values[i];
    const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::min(1.0, std::abs(v)))));
    const int r = v < 0 ? 255 : fade;
    const int g = v > 0 ? 255 : fade;
    std::snprintf(esc, sizeof esc, "\x1b[30;48;2;%d;%d;%dm", r, g, fade);
    out += esc;
    out += lossy_utf8(bytes.substr(i, len));
    i += len;
  }
  out += "\x1b[0m";
  return out;
}

template Trace trace_unit(const ModelParams<float>&, std::string_view, std::size_t);
template Trace trace_unit(const ModelParams<double>&, std::string_view, std::size_t);

}  // namespace bytelm
