// SPDX-License-Identifier: Apache-2.0
#include <cstring>

#include "bytelm/binary_io.hpp"
#include "bytelm/checkpoint.hpp"
#include "bytelm/errors.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bytelm;
using bytelm::testing::TempDir;

namespace {

Checkpoint sample_checkpoint(CellKind cell, bool with_adam) {
  Checkpoint c;
  c.step = 1234;
  c.params = init_params<float>(cell, 3, 5, 77, 0.2);
  if (with_adam) {
    auto adam = AdamState<float>::fresh(c.params);
    adam_step(c.params, init_params<float>(cell, 3, 5, 78, 0.2), adam, 0.01);
    adam.step = c.step;
    c.adam = adam;
  }
  return c;
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("header layout") {
  const auto bytes = serialize_checkpoint(sample_checkpoint(CellKind::kLSTM, false));
  REQUIRE(bytes.size() > 36);
  CHECK(std::memcmp(bytes.data(), "BYTEMLM1", 8) == 0);
  std::uint32_t version, cell, embed, hidden;
  std::uint64_t step;
  std::memcpy(&version, bytes.data() + 8, 4);
  std::memcpy(&cell, bytes.data() + 12, 4);
  std::memcpy(&embed, bytes.data() + 16, 4);
  std::memcpy(&hidden, bytes.data() + 20, 4);
  std::memcpy(&step, bytes.data() + 24, 8);
  CHECK(version == 1);
  CHECK(cell == 1);
  CHECK(embed == 3);
  CHECK(hidden == 5);
  CHECK(step == 1234);
  std::uint32_t name_len;
  std::memcpy(&name_len, bytes.data() + 32, 4);
  CHECK(name_len == 9);
  CHECK(std::string(reinterpret_cast<const char*>(bytes.data()) + 36, 9) == "embedding");
  std::uint32_t crc;
  std::memcpy(&crc, bytes.data() + bytes.size() - 4, 4);
  CHECK(crc == crc32_of(std::span(bytes).subspan(8, bytes.size() - 12)));
}

TEST_CASE("row-major payload order") {
  Checkpoint c = sample_checkpoint(CellKind::kLSTM, false);
  c.params.embedding(0, 1) = 42.5f;
  const auto bytes = serialize_checkpoint(c);
  // embedding record: name_len(4) name(9) rank(4) dims(16), then the payload.
  float second;
  std::memcpy(&second, bytes.data() + 32 + 4 + 9 + 4 + 16 + 4, 4);
  CHECK(second == 42.5f);
}

TEST_CASE("round trip is bit-exact, with and without Adam state") {
  TempDir dir("ckpt");
  for (CellKind cell : {CellKind::kMLSTM, CellKind::kLSTM}) {
    for (bool adam : {false, true}) {
      const Checkpoint c = sample_checkpoint(cell, adam);
      const auto path = dir / "a.ckpt";
      save_checkpoint(c, path);
      const Checkpoint back = load_checkpoint(path);
      CHECK(back.step == c.step);
      CHECK(back.adam.has_value() == adam);
      if (adam) CHECK(back.adam->step == c.step);
      save_checkpoint(back, dir / "b.ckpt");
      CHECK(read_file_bytes(path) == read_file_bytes(dir / "b.ckpt"));
      const auto va = tensor_views(c.params);
      const auto vb = tensor_views(back.params);
      for (std::size_t t = 0; t < va.size(); ++t) {
        CHECK(std::memcmp(va[t].data, vb[t].data, va[t].size() * sizeof(float)) == 0);
      }
    }
  }
}

TEST_CASE("every single-byte flip after the magic is rejected") {
  const auto good = serialize_checkpoint(sample_checkpoint(CellKind::kMLSTM, false));
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto bad = good;
    const std::size_t at = 8 + rng.below(bad.size() - 8);
    bad[at] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    CHECK_THROWS_AS(parse_checkpoint(bad), Error);
  }
  auto payload_flip = good;
  payload_flip[good.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(parse_checkpoint(payload_flip), CorruptionError);
}

TEST_CASE("format, truncation and dimension errors") {
  auto bytes = serialize_checkpoint(sample_checkpoint(CellKind::kMLSTM, false));
  auto wrong_magic = bytes;
  wrong_magic[0] = 'X';
  CHECK_THROWS_AS(parse_checkpoint(wrong_magic), FormatError);
  auto wrong_version = bytes;
  wrong_version[8] = 2;
  CHECK_THROWS_AS(parse_checkpoint(wrong_version), FormatError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 100);
  CHECK_THROWS_AS(parse_checkpoint(truncated), CorruptionError);
  CHECK_THROWS_AS(parse_checkpoint(std::span(bytes).first(4)), FormatError);

  const Checkpoint c = parse_checkpoint(bytes);
  CHECK_NOTHROW(require_dims(c, CellKind::kMLSTM, 3, 5));
  CHECK_THROWS_AS(require_dims(c, CellKind::kMLSTM, 3, 6), DimensionMismatchError);
  CHECK_THROWS_AS(require_dims(c, CellKind::kLSTM, 3, 5), DimensionMismatchError);

  TempDir dir("ckpt");
  CHECK_THROWS_AS(load_checkpoint(dir / "absent.ckpt"), IoError);
}

}  // TEST_SUITE
