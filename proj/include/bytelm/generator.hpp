// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bytelm/model.hpp"
#include "bytelm/rng.hpp"

namespace bytelm {

struct GenConfig {
  std::string prime;
  std::size_t length = 200;
  double temperature = 1.0;  // 0 means greedy
  std::optional<Clamp> clamp;
  std::uint64_t seed = 1;
};

/// Draws a byte with probability proportional to exp(logit / temperature).
/// Temperature 0 takes the argmax, ties to the lowest byte.
template <typename Scalar>
std::uint8_t categorical_sample(std::span<const Scalar> logits, double temperature, Rng& rng);

/// Called with the state after every model step, prime bytes included.
template <typename Scalar>
using StepObserver = std::function<void(std::size_t step, const ModelState<Scalar>& state)>;

/// Runs "\n " + prime (newlines mapped to spaces) through a zero state, then
/// samples `length` bytes, feeding each one back. The clamp holds on every
/// step. Returns only the generated bytes.
template <typename Scalar>
std::vector<std::uint8_t> sample(const ModelParams<Scalar>& params, const GenConfig& config,
                                 const StepObserver<Scalar>& observer = {});

}  // namespace bytelm
