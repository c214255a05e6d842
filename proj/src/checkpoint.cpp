// SPDX-License-Identifier: Apache-2.0
#include "bytelm/checkpoint.hpp"

#include <map>
#include <string>

#include "bytelm/binary_io.hpp"
#include "bytelm/errors.hpp"

namespace bytelm {

namespace {

constexpr std::string_view kMagic = "BYTEMLM1";

void put_tensor(ByteWriter& out, const std::string& name, const TensorView<const float>& t) {
  out.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
  out.put_string(name);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank));
  out.put<std::uint64_t>(static_cast<std::uint64_t>(t.rows));
  if (t.rank == 2) out.put<std::uint64_t>(static_cast<std::uint64_t>(t.cols));
  for (std::size_t k = 0; k < t.size(); ++k) out.put<float>(t.at_row_major(k));
}

struct RawTensor {
  std::vector<std::uint64_t> dims;
  std::span<const std::uint8_t> payload;
};

void fill_tensor(const TensorView<float>& t, const std::string& name,
                 std::map<std::string, RawTensor>& raw) {
  const auto it = raw.find(name);
  if (it == raw.end()) throw FormatError("checkpoint is missing tensor " + name);
  const RawTensor& r = it->second;
  const bool ok = static_cast<int>(r.dims.size()) == t.rank &&
                  r.dims[0] == static_cast<std::uint64_t>(t.rows) &&
                  (t.rank == 1 || r.dims[1] == static_cast<std::uint64_t>(t.cols));
  if (!ok) throw DimensionMismatchError("tensor " + name + " has unexpected dimensions");
  for (std::size_t k = 0; k < t.size(); ++k) {
    float v;
    std::memcpy(&v, r.payload.data() + k * sizeof(float), sizeof(float));
    t.at_row_major(k) = v;
  }
  raw.erase(it);
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  ByteWriter out;
  out.put_string(kMagic);
  out.put<std::uint32_t>(kCheckpointVersion);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(p.cell));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(p.embed));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(p.hidden));
  out.put<std::uint64_t>(ckpt.step);
  for (const auto& t : tensor_views(p)) put_tensor(out, t.name, t);
  if (ckpt.adam) {
    for (const auto& t : tensor_views(ckpt.adam->m)) put_tensor(out, "adam_m." + t.name, t);
    for (const auto& t : tensor_views(ckpt.adam->v)) put_tensor(out, "adam_v." + t.name, t);
  }
  seal_with_crc(out.bytes(), kMagic.size());
  return std::move(out.bytes());
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  // Magic and version are checked before the CRC so that foreign files get
  // a format error rather than a checksum complaint.
  if (bytes.size() < kMagic.size() + 4 ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("not a checkpoint: bad magic");
  }
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + kMagic.size(), sizeof(version));
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  ByteReader in(open_sealed(bytes, kMagic, "checkpoint"));
  in.get<std::uint32_t>();  // version, checked above
  const auto cell_raw = in.get<std::uint32_t>();
  if (cell_raw > 1) throw FormatError("unknown cell kind " + std::to_string(cell_raw));
  const auto embed = in.get<std::uint32_t>();
  const auto hidden = in.get<std::uint32_t>();
  const auto step = in.get<std::uint64_t>();
  if (embed == 0 || hidden == 0 || embed > (1u << 20) || hidden > (1u << 20)) {
    throw FormatError("implausible checkpoint dimensions");
  }

  std::map<std::string, RawTensor> raw;
  while (in.remaining() > 0) {
    const auto name_len = in.get<std::uint32_t>();
    const auto name_bytes = in.get_bytes(name_len);
    std::string name(name_bytes.begin(), name_bytes.end());
    const auto rank = in.get<std::uint32_t>();
    if (rank < 1 || rank > 2) throw FormatError("tensor " + name + " has rank " + std::to_string(rank));
    RawTensor t;
    std::uint64_t count = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.dims.push_back(in.get<std::uint64_t>());
      count *= t.dims.back();
    }
    if (count > in.remaining() / sizeof(float)) {
      throw CorruptionError("tensor " + name + " payload exceeds file size");
    }
    t.payload = in.get_bytes(count * sizeof(float));
    if (!raw.emplace(name, t).second) throw FormatError("duplicate tensor " + name);
  }

  Checkpoint ckpt;
  ckpt.step = step;
  ckpt.params = ModelParams<float>::zeros(static_cast<CellKind>(cell_raw),
                                          static_cast<int>(embed), static_cast<int>(hidden));
  for (const auto& t : tensor_views(ckpt.params)) fill_tensor(t, t.name, raw);
  if (raw.contains("adam_m.embedding")) {
    AdamState<float> adam = AdamState<float>::fresh(ckpt.params);
    adam.step = step;
    for (const auto& t : tensor_views(adam.m)) fill_tensor(t, "adam_m." + t.name, raw);
    for (const auto& t : tensor_views(adam.v)) fill_tensor(t, "adam_v." + t.name, raw);
    ckpt.adam = std::move(adam);
  }
  if (!raw.empty()) throw FormatError("unexpected tensor " + raw.begin()->first);
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file_bytes(path));
}

void require_dims(const Checkpoint& ckpt, CellKind cell, int embed, int hidden) {
  const auto& p = ckpt.params;
  if (p.cell != cell || p.embed != embed || p.hidden != hidden) {
    throw DimensionMismatchError(
        "checkpoint is " + cell_kind_name(p.cell) + " E=" + std::to_string(p.embed) +
        " H=" + std::to_string(p.hidden) + ", expected " + cell_kind_name(cell) +
        " E=" + std::to_string(embed) + " H=" + std::to_string(hidden));
  }
}

}  // namespace bytelm
