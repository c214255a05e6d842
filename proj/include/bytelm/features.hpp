// SPDX-License-Identifier: Apache-2.0
#pragma once

// Document representations: canonicalize the text, run the model from a
// zero state, keep tanh of the final cell state.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bytelm/model.hpp"

namespace bytelm {

/// Newlines become spaces; leading whitespace is replaced by "\n " and
/// trailing whitespace by a single " ". Whitespace here means ASCII space,
/// tab, CR and LF.
std::vector<std::uint8_t> preprocess_text(std::string_view text);

/// Documents run as independent zero-state streams, `kExtractionLanes` at a
/// time. Lane count is fixed so a document's arithmetic does not depend on
/// which other documents share its chunk.
inline constexpr std::size_t kExtractionLanes = 16;

/// Called after each byte of each document with the post-step cell column.
template <typename Scalar>
using CellObserver = std::function<void(std::size_t doc, std::size_t offset,
                                        const Eigen::Ref<const Vector<Scalar>>& cell)>;

/// Runs every document through the model and returns the final cell states
/// (pre-tanh), one row per document.
template <typename Scalar>
Matrix<Scalar> final_cell_states(const ModelParams<Scalar>& params,
                                 std::span<const std::vector<std::uint8_t>> docs,
                                 const CellObserver<Scalar>& observer = {});

/// N x H matrix of tanh(final cell state), rows in input order.
template <typename Scalar>
Matrix<Scalar> extract_features(const ModelParams<Scalar>& params,
                                std::span<const std::string> texts);

/// [|u - v|, u * v].
template <typename Scalar>
Vector<Scalar> pair_features(const Vector<Scalar>& u, const Vector<Scalar>& v);

struct LabeledDataset {
  std::vector<std::string> texts;
  std::vector<int> labels;
  int n_classes = 0;
};

/// Lines of `<label>\t<text>`; blank lines are skipped.
LabeledDataset load_labeled(const std::filesystem::path& path);
void save_labeled(const std::filesystem::path& path, const LabeledDataset& data);

struct FeatureFile {
  Matrix<float> features;   // N x H
  std::vector<int> labels;  // empty when the file carries none
};

// "FEATMAT1" | u32 version | u64 N | u32 H | u32 has_labels |
// f32 row-major payload | [i32 labels] | u32 CRC32 of everything after magic
std::vector<std::uint8_t> serialize_features(const FeatureFile& file);
FeatureFile parse_features(std::span<const std::uint8_t> bytes);
void save_features(const FeatureFile& file, const std::filesystem::path& path);
FeatureFile load_features(const std::filesystem::path& path);

}  // namespace bytelm
