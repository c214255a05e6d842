// SPDX-License-Identifier: Apache-2.0
#include "bytelm/errors.hpp"

namespace bytelm {

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kDecode: return "decode";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kCorruption: return "corruption";
    case ErrorKind::kDegenerateLabels: return "degenerate-labels";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
  }
  return "unknown";
}

}  // namespace bytelm
