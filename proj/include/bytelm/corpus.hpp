// SPDX-License-Identifier: Apache-2.0
#pragma once

// Review ingestion, sharding, batch streaming and the synthetic sentiment
// corpus.

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace bytelm {

struct Review {
  std::string text;  // never contains '\n'

  friend bool operator==(const Review&, const Review&) = default;
};

/// Throws DecodeError carrying the absolute byte offset of the first
/// malformed sequence. `base_offset` is added to the reported position.
void validate_utf8(std::string_view bytes, std::size_t base_offset = 0);

/// Length of the well-formed UTF-8 sequence starting at `at`, or 0.
std::size_t utf8_char_length(std::string_view bytes, std::size_t at);

/// Copy of `bytes` with each ill-formed byte replaced by U+FFFD.
std::string lossy_utf8(std::string_view bytes);

/// One review per nonempty line; order preserved.
std::vector<Review> load_reviews(const std::filesystem::path& path);

/// Newline-terminated review text, the shard and review file format.
std::string join_reviews(std::span<const Review> reviews);
void write_reviews(const std::filesystem::path& path,
                   std::span<const Review> reviews);

struct ShardSet {
  std::vector<std::vector<Review>> shards;
  std::vector<std::size_t> train_ids;
  std::size_t val_id = 0;
  std::size_t test_id = 0;

  std::size_t n_shards() const { return shards.size(); }
};

/// Shuffles with `seed`, then deals round-robin so that remainder reviews
/// land in the lowest-index shards. The last shard is the test shard and the
/// one before it the validation shard.
ShardSet make_shards(std::span<const Review> reviews, std::size_t n_shards,
                     std::uint64_t seed);

/// `shard_0007.txt`; the index is zero-padded to at least four digits.
std::string shard_file_name(std::size_t index, std::size_t n_shards);

/// Writes every shard into `dir` and returns the paths in index order.
std::vector<std::filesystem::path> write_shards(
    const ShardSet& set, const std::filesystem::path& dir);

/// B×T byte windows. Both arrays are row-major: element (b, t) lives at
/// `b * seq_len + t`.
struct Batch {
  std::size_t batch_size = 0;
  std::size_t seq_len = 0;
  std::vector<std::uint8_t> inputs;
  std::vector<std::uint8_t> targets;
  bool exhausted = false;  // set on the empty batch returned past the end
};

/// Splits a shard into `batch_size` equal contiguous segments, one per
/// recurrent stream, and walks them in lockstep `seq_len` bytes at a time.
/// Trailing bytes that cannot fill a whole window are dropped.
class BatchStream {
 public:
  BatchStream(std::vector<std::uint8_t> bytes, std::size_t batch_size,
              std::size_t seq_len);

  /// Next window, or an empty batch with `exhausted` set once any segment
  /// can no longer supply seq_len + 1 bytes.
  Batch next_batch();

  bool exhausted() const;
  void rewind() { windows_done_ = 0; }

  std::size_t batch_size() const { return batch_size_; }
  std::size_t seq_len() const { return seq_len_; }
  std::size_t segment_length() const { return segment_length_; }
  std::size_t windows_per_pass() const;
  std::span<const std::uint8_t> segment(std::size_t stream) const;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t batch_size_;
  std::size_t seq_len_;
  std::size_t segment_length_;
  std::size_t windows_done_ = 0;
};

/// Runs a BatchStream on a background thread, keeping at most `depth`
/// batches queued ahead of the consumer. Output order is identical to the
/// wrapped stream.
class PrefetchingBatchStream {
 public:
  PrefetchingBatchStream(BatchStream stream, std::size_t depth);
  ~PrefetchingBatchStream();

  PrefetchingBatchStream(const PrefetchingBatchStream&) = delete;
  PrefetchingBatchStream& operator=(const PrefetchingBatchStream&) = delete;

  Batch next_batch();

 private:
  void produce(std::stop_token stop);

  BatchStream stream_;
  std::size_t depth_;
  std::mutex mutex_;
  std::condition_variable_any cv_;
  std::deque<Batch> queue_;
  std::jthread worker_;
};

struct SynthConfig {
  std::size_t n_reviews = 10000;
  std::vector<std::string> positive_words;
  std::vector<std::string> negative_words;
  /// Sentence patterns. `{adj}` / `{Adj}` draw a polarity word of the
  /// review's label (capitalized for the latter), `{noun}`, `{person}` and
  /// `{time}` draw from the neutral vocabularies below.
  std::vector<std::string> polar_templates;
  std::vector<std::string> neutral_templates;
  std::vector<std::string> nouns;
  std::vector<std::string> people;
  std::vector<std::string> times;
  std::size_t min_sentences = 3;
  std::size_t max_sentences = 6;
  double polar_fraction = 0.85;  // chance that a sentence is polar
  bool verdict_last = true;      // the closing sentence is always polar
  double label_balance = 0.5;  // fraction of positive reviews
  std::uint64_t seed = 1;
};

/// The shipped desk-scale configuration: 10k balanced reviews.
SynthConfig default_synth_config();

struct LabeledCorpus {
  std::vector<Review> reviews;
  std::vector<int> labels;  // 1 = positive, 0 = negative
};

LabeledCorpus synthesize_corpus(const SynthConfig& cfg);

/// Lowercased alphabetic tokens, used for lexicon membership checks.
std::vector<std::string> word_tokens(std::string_view text);

}  // namespace bytelm
