// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bytelm {

enum class ErrorKind {
  kConfig,
  kIo,
  kDecode,
  kNumerical,
  kContract,
  kFormat,
  kCorruption,
  kDegenerateLabels,
  kDimensionMismatch,
};

/// Short machine-readable tag, e.g. "config" or "corruption".
std::string_view kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class KindedError : public Error {
 public:
  explicit KindedError(const std::string& message) : Error(K, message) {}
};

using ConfigError = KindedError<ErrorKind::kConfig>;
using IoError = KindedError<ErrorKind::kIo>;
using DecodeError = KindedError<ErrorKind::kDecode>;
using NumericalError = KindedError<ErrorKind::kNumerical>;
using ContractError = KindedError<ErrorKind::kContract>;
using FormatError = KindedError<ErrorKind::kFormat>;
using CorruptionError = KindedError<ErrorKind::kCorruption>;
using DegenerateLabelsError = KindedError<ErrorKind::kDegenerateLabels>;
using DimensionMismatchError = KindedError<ErrorKind::kDimensionMismatch>;

}  // namespace bytelm
