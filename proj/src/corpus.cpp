// SPDX-License-Identifier: Apache-2.0
#include "bytelm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "bytelm/binary_io.hpp"
#include "bytelm/errors.hpp"
#include "bytelm/rng.hpp"

namespace bytelm {

namespace fs = std::filesystem;

std::size_t utf8_char_length(std::string_view bytes, std::size_t at) {
  const auto* s = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  const unsigned char b = s[at];
  if (b < 0x80) return 1;
  std::size_t len = 0;
  std::uint32_t cp = 0;
  if ((b & 0xE0) == 0xC0) {
    len = 2;
    cp = b & 0x1F;
  } else if ((b & 0xF0) == 0xE0) {
    len = 3;
    cp = b & 0x0F;
  } else if ((b & 0xF8) == 0xF0) {
    len = 4;
    cp = b & 0x07;
  } else {
    return 0;
  }
  if (at + len > n) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    if ((s[at + k] & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (s[at + k] & 0x3F);
  }
  const bool overlong = (len == 2 && cp < 0x80) ||
                        (len == 3 && cp < 0x800) ||
                        (len == 4 && cp < 0x10000);
  if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

void validate_utf8(std::string_view bytes, std::size_t base_offset) {
  for (std::size_t i = 0; i < bytes.size();) {
    const std::size_t len = utf8_char_length(bytes, i);
    if (len == 0) {
      throw DecodeError("invalid UTF-8 at byte offset " + std::to_string(base_offset + i));
    }
    i += len;
  }
}

std::string lossy_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (std::size_t i = 0; i < bytes.size();) {
    const std::size_t len = utf8_char_length(bytes, i);
    if (len == 0) {
      out += "\xEF\xBF\xBD";  // U+FFFD
      ++i;
    } else {
      out.append(bytes.substr(i, len));
      i += len;
    }
  }
  return out;
}

std::vector<Review> load_reviews(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
  const std::vector<std::uint8_t> raw = read_file_bytes(path);
  const std::string_view text(reinterpret_cast<const char*>(raw.data()),
                              raw.size());
  validate_utf8(text);

  std::vector<Review> reviews;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    if (end > start) reviews.push_back({std::string(text.substr(start, end - start))});
    start = end + 1;
  }
  return reviews;
}

std::string join_reviews(std::span<const Review> reviews) {
  std::string out;
  for (const Review& r : reviews) {
    out += r.text;
    out += '\n';
  }
  return out;
}

void write_reviews(const fs::path& path, std::span<const Review> reviews) {
  const std::string text = join_reviews(reviews);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                   text.size()));
}

ShardSet make_shards(std::span<const Review> reviews, std::size_t n_shards,
                     std::uint64_t seed) {
  if (n_shards < 3) {
    throw ConfigError("need at least 3 shards (train, validation, test), got " +
                      std::to_string(n_shards));
  }
  if (reviews.empty()) throw ConfigError("no reviews to shard");
  if (n_shards > reviews.size()) {
    throw ConfigError("cannot split " + std::to_string(reviews.size()) +
                      " reviews into " + std::to_string(n_shards) + " shards");
  }

  std::vector<std::size_t> order(reviews.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));

  ShardSet set;
  set.shards.resize(n_shards);
  for (std::size_t i = 0; i < order.size(); ++i) {
    set.shards[i % n_shards].push_back(reviews[order[i]]);
  }
  set.test_id = n_shards - 1;
  set.val_id = n_shards - 2;
  for (std::size_t i = 0; i + 2 < n_shards; ++i) set.train_ids.push_back(i);
  return set;
}

std::string shard_file_name(std::size_t index, std::size_t n_shards) {
  std::size_t width = 4;
  for (std::size_t v = n_shards > 0 ? n_shards - 1 : 0; v >= 10000; v /= 10) ++width;
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "shard_" + digits + ".txt";
}

std::vector<fs::path> write_shards(const ShardSet& set, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> paths;
  for (std::size_t i = 0; i < set.shards.size(); ++i) {
    fs::path p = dir / shard_file_name(i, set.shards.size());
    write_reviews(p, set.shards[i]);
    paths.push_back(std::move(p));
  }
  return paths;
}

// ---------------------------------------------------------------------------
// Batch streaming

BatchStream::BatchStream(std::vector<std::uint8_t> bytes, std::size_t batch_size,
                         std::size_t seq_len)
    : bytes_(std::move(bytes)), batch_size_(batch_size), seq_len_(seq_len) {
  if (batch_size_ == 0 || seq_len_ == 0) {
    throw ConfigError("batch size and sequence length must be positive");
  }
  if (bytes_.size() < batch_size_ * (seq_len_ + 1)) {
    throw ConfigError("shard of " + std::to_string(bytes_.size()) +
                      " bytes is smaller than B*(T+1) = " +
                      std::to_string(batch_size_ * (seq_len_ + 1)));
  }
  segment_length_ = bytes_.size() / batch_size_;
}

std::size_t BatchStream::windows_per_pass() const {
  return (segment_length_ - 1) / seq_len_;
}

bool BatchStream::exhausted() const { return windows_done_ >= windows_per_pass(); }

std::span<const std::uint8_t> BatchStream::segment(std::size_t stream) const {
  return std::span(bytes_).subspan(stream * segment_length_, segment_length_);
}

Batch BatchStream::next_batch() {
  Batch batch;
  batch.batch_size = batch_size_;
  batch.seq_len = seq_len_;
  if (exhausted()) {
    batch.exhausted = true;
    return batch;
  }
  batch.inputs.resize(batch_size_ * seq_len_);
  batch.targets.resize(batch_size_ * seq_len_);
  const std::size_t offset = windows_done_ * seq_len_;
  for (std::size_t b = 0; b < batch_size_; ++b) {
    const std::uint8_t* src = bytes_.data() + b * segment_length_ + offset;
    std::copy_n(src, seq_len_, batch.inputs.begin() + b * seq_len_);
    std::copy_n(src + 1, seq_len_, batch.targets.begin() + b * seq_len_);
  }
  ++windows_done_;
  return batch;
}

PrefetchingBatchStream::PrefetchingBatchStream(BatchStream stream, std::size_t depth)
    : stream_(std::move(stream)), depth_(std::max<std::size_t>(depth, 1)) {
  worker_ = std::jthread([this](std::stop_token st) { produce(st); });
}

PrefetchingBatchStream::~PrefetchingBatchStream() {
  worker_.request_stop();
  cv_.notify_all();
}

void PrefetchingBatchStream::produce(std::stop_token stop) {
  while (!stop.stop_requested()) {
    Batch batch = stream_.next_batch();
    const bool last = batch.exhausted;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, stop, [&] { return queue_.size() < depth_; });
      if (stop.stop_requested()) return;
      queue_.push_back(std::move(batch));
    }
    cv_.notify_all();
    if (last) return;
  }
}

Batch PrefetchingBatchStream::next_batch() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return !queue_.empty(); });
  // The terminal exhausted batch stays queued so repeated calls keep
  // reporting exhaustion.
  if (queue_.front().exhausted) return queue_.front();
  Batch batch = std::move(queue_.front());
  queue_.pop_front();
  lock.unlock();
  cv_.notify_all();
  return batch;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalpha(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.positive_words = {"great",     "excellent", "wonderful", "perfect",
                        "amazing",   "fantastic", "superb",    "lovely",
                        "sturdy",    "delightful", "brilliant", "reliable"};
  cfg.negative_words = {"terrible",  "awful",     "horrible",  "useless",
                        "flimsy",    "broken",    "dreadful",  "defective",
                        "disappointing", "worthless", "shoddy", "poor"};
  cfg.polar_templates = {
      "The {noun} is {adj} and {adj}.",
      "{Adj} {noun}, {adj} build.",
      "What a {adj} {noun}, so {adj}.",
      "I found the {noun} {adj} and {adj}.",
      "The {noun} felt {adj} after a week.",
      "My {person} said it was {adj}.",
      "Honestly {adj}.",
      "Quality is {adj}, truly {adj}.",
      "Overall a {adj} purchase, {adj} value.",
      "It is {adj} for the price.",
      "The {noun} looks {adj} and the finish is {adj}.",
      "{Adj}, {adj}, {adj}.",
  };
  cfg.neutral_templates = {
      "I bought this {noun} for my {person}.",
      "It arrived {time}.",
      "I ordered it {time} for my {person}.",
      "The box had a {noun} inside.",
      "We tried it {time}.",
      "It came with a {noun}.",
  };
  cfg.nouns = {"blender", "kettle", "backpack", "lamp",    "charger", "jacket",
               "toaster", "speaker", "blanket", "watch",   "keyboard", "mug"};
  cfg.people = {"wife", "husband", "son", "daughter", "friend", "mother",
                "father", "office"};
  cfg.times = {"last week", "on Monday", "yesterday", "two days ago",
               "in March", "this morning"};
  return cfg;
}

namespace {

bool starts_with_vowel(std::string_view w) {
  if (w.empty()) return false;
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(w[0])));
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// "a amazing" -> "an amazing".
std::string fix_articles(const std::string& s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const bool at_word = i == 0 || s[i - 1] == ' ';
    if (at_word && (s[i] == 'a' || s[i] == 'A') && i + 2 < s.size() && s[i + 1] == ' ' &&
        starts_with_vowel(std::string_view(s).substr(i + 2))) {
      out += s[i];
      out += 'n';
      ++i;
      continue;
    }
    out += s[i++];
  }
  return out;
}

std::string fill_template(const std::string& pattern, const SynthConfig& cfg,
                          std::span<const std::string> polar, Rng& rng) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] != '{') {
      out += pattern[i++];
      continue;
    }
    const std::size_t close = pattern.find('}', i);
    if (close == std::string::npos) {
      throw ConfigError("unterminated placeholder in template: " + pattern);
    }
    const std::string key = pattern.substr(i + 1, close - i - 1);
    std::string word;
    if (key == "adj" || key == "Adj") {
      word = rng.pick(polar);
      if (key == "Adj") word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
    } else if (key == "noun") {
      word = rng.pick(std::span<const std::string>(cfg.nouns));
    } else if (key == "person") {
      word = rng.pick(std::span<const std::string>(cfg.people));
    } else if (key == "time") {
      word = rng.pick(std::span<const std::string>(cfg.times));
    } else {
      throw ConfigError("unknown placeholder {" + key + "}");
    }
    out += word;
    i = close + 1;
  }
  return fix_articles(out);
}

void check_synth_config(const SynthConfig& cfg) {
  if (cfg.positive_words.empty() || cfg.negative_words.empty()) {
    throw ConfigError("polarity lexicons must be nonempty");
  }
  if (cfg.polar_templates.empty()) throw ConfigError("no polar templates");
  if (cfg.nouns.empty() || cfg.people.empty() || cfg.times.empty()) {
    throw ConfigError("neutral vocabularies must be nonempty");
  }
  if (cfg.min_sentences < 1 || cfg.max_sentences < cfg.min_sentences) {
    throw ConfigError("invalid sentence count range");
  }
  if (!(cfg.polar_fraction > 0.0 && cfg.polar_fraction <= 1.0)) {
    throw ConfigError("polar_fraction must lie in (0, 1]");
  }
  if (cfg.label_balance < 0.0 || cfg.label_balance > 1.0) {
    throw ConfigError("label_balance must lie in [0, 1]");
  }
  const std::set<std::string> pos(cfg.positive_words.begin(), cfg.positive_words.end());
  for (const auto& w : cfg.negative_words) {
    if (pos.contains(w)) throw ConfigError("lexicons overlap on '" + w + "'");
  }
  // Template text and neutral words must not smuggle in polarity tokens.
  std::set<std::string> lexicon = pos;
  lexicon.insert(cfg.negative_words.begin(), cfg.negative_words.end());
  auto check = [&](const std::string& s) {
    for (const auto& tok : word_tokens(s)) {
      if (lexicon.contains(tok)) {
        throw ConfigError("neutral text '" + s + "' contains lexicon word '" + tok + "'");
      }
    }
  };
  for (const auto* list : {&cfg.polar_templates, &cfg.neutral_templates, &cfg.nouns,
                           &cfg.people, &cfg.times}) {
    for (const auto& s : *list) check(s);
  }
}

}  // namespace

LabeledCorpus synthesize_corpus(const SynthConfig& cfg) {
  check_synth_config(cfg);

  const auto n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(cfg.n_reviews) * cfg.label_balance));
  LabeledCorpus corpus;
  corpus.labels.assign(cfg.n_reviews, 0);
  std::fill_n(corpus.labels.begin(), n_pos, 1);
  Rng rng(cfg.seed);
  rng.shuffle(std::span(corpus.labels));

  corpus.reviews.reserve(cfg.n_reviews);
  for (int label : corpus.labels) {
    const auto& polar = label == 1 ? cfg.positive_words : cfg.negative_words;
    const std::size_t n_sent =
        cfg.min_sentences + rng.below(cfg.max_sentences - cfg.min_sentences + 1);
    std::vector<bool> is_polar(n_sent);
    bool any = false;
    for (std::size_t s = 0; s < n_sent; ++s) {
      is_polar[s] = cfg.neutral_templates.empty() || rng.uniform() < cfg.polar_fraction;
      any = any || is_polar[s];
    }
    if (cfg.verdict_last || !any) is_polar[n_sent - 1] = true;

    std::string text;
    for (std::size_t s = 0; s < n_sent; ++s) {
      const auto& pool = is_polar[s] ? cfg.polar_templates : cfg.neutral_templates;
      if (s > 0) text += ' ';
      text += fill_template(rng.pick(std::span<const std::string>(pool)), cfg, polar, rng);
    }
    corpus.reviews.push_back({std::move(text)});
  }
  return corpus;
}

}  // namespace bytelm
