// SPDX-License-Identifier: Apache-2.0
#pragma once

// Checkpoint file, little-endian:
//
//   "BYTEMLM1" | u32 version | u32 cell_kind | u32 E | u32 H | u64 step
//   then repeated tensor records until the trailer:
//     u32 name_len | name | u32 rank | u64 dims[rank] | f32 row-major payload
//   u32 CRC32 of everything after the magic
//
// Adam moments, when present, are stored as extra records named
// `adam_m.<tensor>` and `adam_v.<tensor>`.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "bytelm/model.hpp"
#include "bytelm/optimizer.hpp"

namespace bytelm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t step = 0;
  ModelParams<float> params;
  std::optional<AdamState<float>> adam;  // adam->step mirrors `step`
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws DimensionMismatchError unless the checkpoint matches.
void require_dims(const Checkpoint& ckpt, CellKind cell, int embed, int hidden);

}  // namespace bytelm
