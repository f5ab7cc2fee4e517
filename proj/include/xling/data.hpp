#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace xling {

struct LabeledDoc {
  std::string label;
  std::string text;

  friend bool operator==(const LabeledDoc&, const LabeledDoc&) = default;
};

struct Corpus {
  std::string language;
  std::vector<LabeledDoc> docs;

  /// Sorted unique labels present in `docs`.
  std::vector<std::string> label_set() const;
  std::map<std::string, std::size_t> label_counts() const;
  std::size_t size() const { return docs.size(); }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Corpus files hold one "label<TAB>text" per line, UTF-8 with LF endings.
// Inside text, tab, newline, carriage return and backslash are written as
// \t, \n, \r and \\.
Corpus parse_corpus(std::string_view content, std::string language);
Corpus read_corpus(const std::filesystem::path& path, std::string language);
std::string format_corpus(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

std::string escape_field(std::string_view raw);
std::string unescape_field(std::string_view escaped);

bool is_valid_utf8(std::string_view s);

/// Lowercases (Latin, Greek, Cyrillic), splits on Unicode whitespace and strips
/// leading/trailing punctuation from each token. Never fails; never emits
/// empty tokens.
std::vector<std::string> tokenize(std::string_view text, bool lowercase = true);

/// First min(size, max_len) tokens.
std::vector<std::string> truncate_tokens(std::vector<std::string> tokens,
                                         std::size_t max_len = 100);

struct SplitSpec {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
  std::uint64_t seed = 0;
};

struct CorpusSplit {
  Corpus train;
  Corpus validation;
  Corpus test;
};

/// Per-label shuffle and floor-based allocation (remainders go to train),
/// then each split is shuffled after merging.
CorpusSplit stratified_split(const Corpus& corpus, const SplitSpec& spec);

/// Per-label allocation used by stratified_split: {train, validation, test}.
struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};
SplitCounts split_counts(std::size_t n, const SplitSpec& spec);

/// Label <-> class index, ascending lexicographic order.
class LabelEncoder {
 public:
  LabelEncoder() = default;
  explicit LabelEncoder(std::vector<std::string> labels);

  static LabelEncoder fit(const Corpus& corpus);
  static LabelEncoder fit(const std::vector<const Corpus*>& corpora);

  std::size_t encode(std::string_view label) const;
  const std::string& decode(std::size_t index) const;
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  friend bool operator==(const LabelEncoder&, const LabelEncoder&) = default;

 private:
  std::vector<std::string> labels_;
};

}  // namespace xling
