// SPDX-License-Identifier: Apache-2.0
#include "bytelm/generator.hpp"

#include <cmath>

#include "bytelm/errors.hpp"

namespace bytelm {

template <typename Scalar>
std::uint8_t categorical_sample(std::span<const Scalar> logits, double temperature, Rng& rng) {
  if (logits.size() != static_cast<std::size_t>(kVocab)) {
    throw ContractError("expected 256 logits, got " + std::to_string(logits.size()));
  }
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw ContractError("temperature must be finite and >= 0");
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) throw NumericalError("non-finite logit at byte " + std::to_string(i));
    if (logits[i] > logits[best]) best = i;
  }
  if (temperature == 0.0) return static_cast<std::uint8_t>(best);

  const double top = static_cast<double>(logits[best]);
  double weights[kVocab];
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    weights[i] = std::exp((static_cast<double>(logits[i]) - top) / temperature);
    total += weights[i];
  }
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return static_cast<std::uint8_t>(i);
  }
  // Rounding left u a hair above zero; fall back to the last positive weight.
  for (std::size_t i = logits.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<std::uint8_t>(i);
  }
  return static_cast<std::uint8_t>(best);
}

template <typename Scalar>
std::vector<std::uint8_t> sample(const ModelParams<Scalar>& params, const GenConfig& config,
                                 const StepObserver<Scalar>& observer) {
  if (config.length < 1) throw ConfigError("generation length must be >= 1");
  if (config.clamp && config.clamp->unit >= static_cast<std::size_t>(params.hidden)) {
    throw ConfigError("clamp unit " + std::to_string(config.clamp->unit) +
                      " out of range for hidden size " + std::to_string(params.hidden));
  }
  std::vector<std::uint8_t> prime{'\n', ' '};
  for (char ch : config.prime) prime.push_back(ch == '\n' ? std::uint8_t{' '} : static_cast<std::uint8_t>(ch));

  const CellRunner<Scalar> runner(params);
  auto state = ModelState<Scalar>::zeros(params.hidden, 1);
  Matrix<Scalar> logits(kVocab, 1);
  Rng rng(config.seed);
  std::size_t step = 0;
  auto feed = [&](std::uint8_t byte) {
    runner.step(state, std::span<const std::uint8_t>(&byte, 1), config.clamp, &logits, step);
    if (observer) observer(step, state);
    ++step;
  };
  for (std::uint8_t b : prime) feed(b);

  std::vector<std::uint8_t> out;
  out.reserve(config.length);
  while (true) {
    const std::uint8_t next = categorical_sample<Scalar>(
        std::span<const Scalar>(logits.data(), kVocab), config.temperature, rng);
    out.push_back(next);
    if (out.size() == config.length) break;
    feed(next);
  }
  return out;
}

template std::uint8_t categorical_sample(std::span<const float>, double, Rng&);
template std::uint8_t categorical_sample(std::span<const double>, double, Rng&);
template std::vector<std::uint8_t> sample(const ModelParams<float>&, const GenConfig&,
                                          const StepObserver<float>&);
template std::vector<std::uint8_t> sample(const ModelParams<double>&, const GenConfig&,
                                          const StepObserver<double>&);

}  // namespace bytelm
