// SPDX-License-Identifier: Apache-2.0
#include "bytelm/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "bytelm/binary_io.hpp"
#include "bytelm/corpus.hpp"
#include "bytelm/errors.hpp"

namespace bytelm {

namespace fs = std::filesystem;

namespace {

bool is_space(std::uint8_t b) { return b == ' ' || b == '\t' || b == '\r' || b == '\n'; }

constexpr std::string_view kFeatureMagic = "FEATMAT1";
constexpr std::uint32_t kFeatureVersion = 1;

}  // namespace

std::vector<std::uint8_t> preprocess_text(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(static_cast<std::uint8_t>(text[begin]))) ++begin;
  while (end > begin && is_space(static_cast<std::uint8_t>(text[end - 1]))) --end;

  std::vector<std::uint8_t> out;
  out.reserve(end - begin + 3);
  out.push_back('\n');
  out.push_back(' ');
  for (std::size_t i = begin; i < end; ++i) {
    const auto b = static_cast<std::uint8_t>(text[i]);
    out.push_back(b == '\n' ? std::uint8_t{' '} : b);
  }
  out.push_back(' ');
  return out;
}

template <typename Scalar>
Matrix<Scalar> final_cell_states(const ModelParams<Scalar>& params,
                                 std::span<const std::vector<std::uint8_t>> docs,
                                 const CellObserver<Scalar>& observer) {
  const CellRunner<Scalar> runner(params);
  Matrix<Scalar> out = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(docs.size()),
                                            params.hidden);
  // Similar lengths share a chunk to cut padding.
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return docs[a].size() < docs[b].size();
  });

  std::vector<std::uint8_t> lane_bytes(kExtractionLanes);
  for (std::size_t first = 0; first < order.size(); first += kExtractionLanes) {
    const std::size_t used = std::min(kExtractionLanes, order.size() - first);
    std::size_t longest = 0;
    for (std::size_t l = 0; l < used; ++l) longest = std::max(longest, docs[order[first + l]].size());

    auto state = ModelState<Scalar>::zeros(params.hidden, kExtractionLanes);
    for (std::size_t t = 0; t < longest; ++t) {
      for (std::size_t l = 0; l < kExtractionLanes; ++l) {
        const bool live = l < used && t < docs[order[first + l]].size();
        // Padding lanes replay a space; their output is never read.
        lane_bytes[l] = live ? docs[order[first + l]][t] : std::uint8_t{' '};
      }
      try {
        runner.step(state, lane_bytes, std::nullopt, nullptr, t);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " in document chunk starting at " +
                             std::to_string(order[first]));
      }
      for (std::size_t l = 0; l < used; ++l) {
        const std::size_t doc = order[first + l];
        if (t >= docs[doc].size()) continue;
        const auto lane = static_cast<Eigen::Index>(l);
        if (observer) observer(doc, t, state.c.col(lane));
        if (t + 1 == docs[doc].size()) {
          out.row(static_cast<Eigen::Index>(doc)) = state.c.col(lane).transpose();
        }
      }
    }
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> extract_features(const ModelParams<Scalar>& params,
                                std::span<const std::string> texts) {
  std::vector<std::vector<std::uint8_t>> docs;
  docs.reserve(texts.size());
  for (const auto& t : texts) docs.push_back(preprocess_text(t));
  Matrix<Scalar> cells = final_cell_states(params, std::span<const std::vector<std::uint8_t>>(docs));
  // Scalar std::tanh so per-unit traces reproduce these values bit for bit.
  return cells.unaryExpr([](Scalar v) { return std::tanh(v); });
}

template <typename Scalar>
Vector<Scalar> pair_features(const Vector<Scalar>& u, const Vector<Scalar>& v) {
  if (u.size() != v.size()) throw ContractError("pair_features needs equal-length vectors");
  Vector<Scalar> out(2 * u.size());
  out.head(u.size()) = (u - v).cwiseAbs();
  out.tail(u.size()) = u.cwiseProduct(v);
  return out;
}

LabeledDataset load_labeled(const fs::path& path) {
  const std::vector<std::uint8_t> raw = read_file_bytes(path);
  const std::string_view text(reinterpret_cast<const char*>(raw.data()), raw.size());
  validate_utf8(text);
  LabeledDataset data;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    int label = -1;
    const auto* first = line.data();
    const auto* last = line.data() + (tab == std::string_view::npos ? 0 : tab);
    const auto [ptr, ec] = std::from_chars(first, last, label);
    if (tab == std::string_view::npos || ec != std::errc() || ptr != last || label < 0) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected '<label>\\t<text>'");
    }
    data.labels.push_back(label);
    data.texts.emplace_back(line.substr(tab + 1));
    data.n_classes = std::max(data.n_classes, label + 1);
  }
  if (data.texts.empty()) throw ConfigError(path.string() + " holds no labeled examples");
  return data;
}

void save_labeled(const fs::path& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < data.texts.size(); ++i) {
    out << data.labels[i] << '\t' << data.texts[i] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::uint8_t> serialize_features(const FeatureFile& file) {
  const auto& X = file.features;
  if (!file.labels.empty() && file.labels.size() != static_cast<std::size_t>(X.rows())) {
    throw ContractError("label count does not match feature rows");
  }
  ByteWriter out;
  out.put_string(kFeatureMagic);
  out.put<std::uint32_t>(kFeatureVersion);
  out.put<std::uint64_t>(static_cast<std::uint64_t>(X.rows()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(X.cols()));
  out.put<std::uint32_t>(file.labels.empty() ? 0u : 1u);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) out.put<float>(X(i, j));
  }
  for (int label : file.labels) out.put<std::int32_t>(label);
  seal_with_crc(out.bytes(), kFeatureMagic.size());
  return std::move(out.bytes());
}

FeatureFile parse_features(std::span<const std::uint8_t> bytes) {
  ByteReader in(open_sealed(bytes, kFeatureMagic, "feature file"));
  const auto version = in.get<std::uint32_t>();
  if (version != kFeatureVersion) {
    throw FormatError("unsupported feature file version " + std::to_string(version));
  }
  const auto n = in.get<std::uint64_t>();
  const auto h = in.get<std::uint32_t>();
  const auto has_labels = in.get<std::uint32_t>();
  if (has_labels > 1) throw FormatError("feature file has_labels flag must be 0 or 1");
  const std::uint64_t expected =
      n * h * sizeof(float) + (has_labels ? n * sizeof(std::int32_t) : 0);
  if (in.remaining() != expected) {
    throw FormatError("feature file header says " + std::to_string(n) + "x" +
                      std::to_string(h) + " but payload holds " +
                      std::to_string(in.remaining()) + " bytes");
  }
  FeatureFile file;
  file.features.resize(static_cast<Eigen::Index>(n), h);
  for (Eigen::Index i = 0; i < file.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < file.features.cols(); ++j) file.features(i, j) = in.get<float>();
  }
  if (has_labels) {
    file.labels.resize(n);
    for (auto& l : file.labels) l = in.get<std::int32_t>();
  }
  return file;
}

void save_features(const FeatureFile& file, const fs::path& path) {
  write_file_bytes(path, serialize_features(file));
}

FeatureFile load_features(const fs::path& path) {
  return parse_features(read_file_bytes(path));
}

template Matrix<float> final_cell_states(const ModelParams<float>&,
                                         std::span<const std::vector<std::uint8_t>>,
                                         const CellObserver<float>&);
template Matrix<double> final_cell_states(const ModelParams<double>&,
                                          std::span<const std::vector<std::uint8_t>>,
                                          const CellObserver<double>&);
template Matrix<float> extract_features(const ModelParams<float>&, std::span<const std::string>);
template Matrix<double> extract_features(const ModelParams<double>&,
                                         std::span<const std::string>);
template Vector<float> pair_features(const Vector<float>&, const Vector<float>&);
template Vector<double> pair_features(const Vector<double>&, const Vector<double>&);

}  // namespace bytelm
