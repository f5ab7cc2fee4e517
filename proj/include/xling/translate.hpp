#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xling/align.hpp"
#include "xling/data.hpp"

namespace xling {

/// Source word -> target words, first entry preferred.
struct BilingualLexicon {
  std::string source_language;
  std::string target_language;
  std::map<std::string, std::vector<std::string>, std::less<>> entries;

  /// Keeps dictionary order per source word, so the first pair is preferred.
  static BilingualLexicon from_dictionary(const SeedDictionary& dict, std::string source_language,
                                          std::string target_language);
  const std::string* preferred(std::string_view word) const;
  /// Target -> source, using the first pair seen for each target word.
  BilingualLexicon inverted() const;
  std::size_t size() const { return entries.size(); }
};

enum class OovPolicy { keep, drop };
std::string_view oov_policy_name(OovPolicy p);
OovPolicy oov_policy_from_name(std::string_view name);

std::vector<std::string> translate_tokens_lexicon(std::span<const std::string> tokens,
                                                  const BilingualLexicon& lexicon,
                                                  OovPolicy oov = OovPolicy::keep);

struct ExternalEndpointConfig {
  std::string url;        // http://host[:port]/path
  std::string token_env;  // name of the variable holding the bearer token; empty = no auth
  std::string source_language;
  std::string target_language;
  std::size_t batch_size = 16;
  std::size_t max_retries = 3;
  unsigned backoff_ms = 250;
  std::size_t max_in_flight = 1;
  double timeout_seconds = 30.0;
  std::filesystem::path cache_path;  // empty = in-memory only
};

/// Source text -> translated text. Appends each insert to the backing file.
class TranslationCache {
 public:
  TranslationCache() = default;
  explicit TranslationCache(std::filesystem::path path);

  std::optional<std::string> find(const std::string& source) const;
  void insert(const std::string& source, const std::string& target);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> entries_;
};

struct TranslateStats {
  std::size_t requests = 0;  // HTTP requests issued, retries included
  std::size_t retries = 0;
  std::size_t cache_hits = 0;
};

/// Client for the generic JSON translation contract:
///   POST {"q": [...], "source": s, "target": t} -> {"translations": [...]}
class ExternalTranslator {
 public:
  explicit ExternalTranslator(ExternalEndpointConfig config);

  std::vector<std::string> translate(std::span<const std::string> texts);
  TranslateStats stats() const;
  const ExternalEndpointConfig& config() const { return config_; }

 private:
  std::vector<std::string> post_batch(std::span<const std::string> batch);

  ExternalEndpointConfig config_;
  std::string bearer_;
  TranslationCache cache_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> retries_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

/// One-shot wrapper around ExternalTranslator.
std::vector<std::string> external_translate_batch(std::span<const std::string> texts,
                                                  const ExternalEndpointConfig& endpoint,
                                                  TranslateStats* stats = nullptr);

struct LexiconTranslator {
  BilingualLexicon lexicon;
  OovPolicy oov = OovPolicy::keep;
};

struct TranslatorSpec {
  std::variant<LexiconTranslator, ExternalEndpointConfig> kind;

  const std::string& source_language() const;
  const std::string& target_language() const;
};

/// Labels and order are preserved; the language becomes the target.
/// Lexicon texts are tokenized, mapped word by word and joined by spaces.
Corpus translate_corpus(const Corpus& corpus, const TranslatorSpec& translator,
                        TranslateStats* stats = nullptr);

}  // namespace xling
