// SPDX-License-Identifier: Apache-2.0
#pragma once

// Single-unit analysis: pick the unit the probe leans on hardest, fit a
// one-dimensional threshold rule to it, and follow it byte by byte.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bytelm/model.hpp"
#include "bytelm/probe.hpp"

namespace bytelm {

/// (unit index, |weight|) for every nonzero weight, largest first, ties by
/// index. Throws ContractError when the probe has no nonzero weight.
std::vector<std::pair<std::size_t, double>> rank_units(const ProbeModel& probe);

struct Histogram {
  std::size_t bins = 0;
  std::vector<std::size_t> class0;
  std::vector<std::size_t> class1;

  double bin_lo(std::size_t i) const { return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(bins); }
  double bin_hi(std::size_t i) const { return bin_lo(i + 1); }
};

inline constexpr std::size_t kDefaultHistogramBins = 100;

/// Uniform bins over [-1, 1]. A value on an interior edge goes to the upper
/// bin; 1 itself lands in the last bin.
Histogram activation_histogram(std::span<const double> values, std::span<const int> labels,
                               std::size_t bins = kDefaultHistogramBins);

struct ThresholdRule {
  double threshold = 0.0;
  int orientation = 1;  // +1: class 1 iff v > t.  -1: class 1 iff v <= t.
  double accuracy = 0.0;

  int predict(double v) const { return ((v > threshold) == (orientation > 0)) ? 1 : 0; }
};

/// Best rule over thresholds at midpoints of consecutive sorted unique
/// values plus the sentinels -1 and 1, both orientations. Ties go to the
/// smaller threshold, then to orientation +1.
ThresholdRule fit_threshold(std::span<const double> values, std::span<const int> labels);

double rule_accuracy(const ThresholdRule& rule, std::span<const double> values,
                     std::span<const int> labels);

struct Trace {
  std::vector<std::uint8_t> text;  // processed bytes
  std::vector<double> values;      // tanh(c[unit]) after each byte
};

template <typename Scalar>
Trace trace_unit(const ModelParams<Scalar>& params, std::string_view text, std::size_t unit);

struct UnitReport {
  std::size_t unit = 0;
  std::vector<std::pair<std::size_t, double>> weight_rank;  // top-k
  Histogram histogram;  // over the evaluation split
  ThresholdRule rule;   // fitted on the fitting split
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double probe_test_accuracy = 0.0;
};

UnitReport analyze_units(const ProbeModel& probe, const FeatureMatrix& X_train,
                         std::span<const int> y_train, const FeatureMatrix& X_test,
                         std::span<const int> y_test, std::size_t bins = kDefaultHistogramBins,
                         std::size_t top_k = 10);

std::string format_report(const UnitReport& report);
void write_histogram_csv(const std::filesystem::path& path, const Histogram& hist);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);

/// Text with each character tinted by the unit value (red below zero, green
/// above, stronger with |v|). Continuation bytes of a multi-byte character
/// share the lead byte's color. Plain lossy UTF-8 when `color` is false.
std::string render_trace(const Trace& trace, bool color);

}  // namespace bytelm
