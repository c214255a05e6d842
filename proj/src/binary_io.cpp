// SPDX-License-Identifier: Apache-2.0
#include "bytelm/binary_io.hpp"

#include <zlib.h>

#include <fstream>
#include <algorithm>
#include <iterator>

namespace bytelm {

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large payloads.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void seal_with_crc(std::vector<std::uint8_t>& bytes, std::size_t magic_size) {
  const std::uint32_t crc =
      crc32_of(std::span(bytes).subspan(magic_size));
  const auto* p = reinterpret_cast<const std::uint8_t*>(&crc);
  bytes.insert(bytes.end(), p, p + sizeof(crc));
}

std::span<const std::uint8_t> open_sealed(std::span<const std::uint8_t> bytes,
                                          std::string_view magic,
                                          std::string_view what) {
  if (bytes.size() < magic.size() ||
      std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
    throw FormatError(std::string(what) + ": bad magic, expected " +
                      std::string(magic));
  }
  if (bytes.size() < magic.size() + sizeof(std::uint32_t)) {
    throw CorruptionError(std::string(what) + ": file truncated");
  }
  const auto body = bytes.subspan(
      magic.size(), bytes.size() - magic.size() - sizeof(std::uint32_t));
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - sizeof(stored),
              sizeof(stored));
  if (crc32_of(body) != stored) {
    throw CorruptionError(std::string(what) + ": CRC32 mismatch");
  }
  return body;
}

}  // namespace bytelm
