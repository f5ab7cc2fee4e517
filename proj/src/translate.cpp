#include "xling/translate.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "xling/error.hpp"

namespace xling {

BilingualLexicon BilingualLexicon::from_dictionary(const SeedDictionary& dict,
                                                   std::string source_language,
                                                   std::string target_language) {
  BilingualLexicon lex;
  lex.source_language = std::move(source_language);
  lex.target_language = std::move(target_language);
  for (const auto& [s, t] : dict.pairs) {
    auto& targets = lex.entries[s];
    if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
  }
  return lex;
}

const std::string* BilingualLexicon::preferred(std::string_view word) const {
  auto it = entries.find(word);
  return it == entries.end() ? nullptr : &it->second.front();
}

BilingualLexicon BilingualLexicon::inverted() const {
  // Walk sources in sorted order so the result does not depend on insertion history.
  BilingualLexicon inv;
  inv.source_language = target_language;
  inv.target_language = source_language;
  for (const auto& [s, targets] : entries) {
    for (const auto& t : targets) {
      auto& back = inv.entries[t];
      if (std::find(back.begin(), back.end(), s) == back.end()) back.push_back(s);
    }
  }
  return inv;
}

std::string_view oov_policy_name(OovPolicy p) { return p == OovPolicy::keep ? "keep" : "drop"; }

OovPolicy oov_policy_from_name(std::string_view name) {
  if (name == "keep") return OovPolicy::keep;
  if (name == "drop") return OovPolicy::drop;
  throw FormatError("unknown oov policy '" + std::string(name) + "' (expected keep or drop)");
}

std::vector<std::string> translate_tokens_lexicon(std::span<const std::string> tokens,
                                                  const BilingualLexicon& lexicon, OovPolicy oov) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    if (const std::string* t = lexicon.preferred(tok)) {
      out.push_back(*t);
    } else if (oov == OovPolicy::keep) {
      out.push_back(tok);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cache

TranslationCache::TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw IoError("cannot open translation cache " + path_.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError(path_.string() + ":" + std::to_string(line_no) +
                        ": expected exactly one tab");
    }
    entries_[unescape_field(std::string_view(line).substr(0, tab))] =
        unescape_field(std::string_view(line).substr(tab + 1));
  }
}

std::optional<std::string> TranslationCache::find(const std::string& source) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(source);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::insert(const std::string& source, const std::string& target) {
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(source, target);
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to translation cache " + path_.string());
  out << escape_field(source) << '\t' << escape_field(target) << '\n';
  if (!out.flush()) throw IoError("write failure on " + path_.string());
}

std::size_t TranslationCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// HTTP client

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host:port
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FormatError("endpoint url lacks a scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw FormatError("unsupported url scheme '" + scheme + "'");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") {
    throw FormatError("https endpoints need a build with XLING_WITH_OPENSSL=ON");
  }
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

ExternalTranslator::ExternalTranslator(ExternalEndpointConfig config)
    : config_(std::move(config)), cache_(config_.cache_path) {
  if (config_.batch_size == 0) throw FormatError("translator batch_size must be at least 1");
  if (config_.max_in_flight == 0) throw FormatError("translator max_in_flight must be at least 1");
  split_url(config_.url);
  if (!config_.token_env.empty()) {
    const char* tok = std::getenv(config_.token_env.c_str());
    if (tok == nullptr) {
      throw FormatError("environment variable " + config_.token_env + " is not set");
    }
    bearer_ = tok;
  }
}

TranslateStats ExternalTranslator::stats() const {
  return {requests_.load(), retries_.load(), cache_hits_.load()};
}

std::vector<std::string> ExternalTranslator::post_batch(std::span<const std::string> batch) {
  const ParsedUrl url = split_url(config_.url);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  if (!bearer_.empty()) client.set_bearer_token_auth(bearer_);

  nlohmann::json body;
  body["q"] = std::vector<std::string>(batch.begin(), batch.end());
  body["source"] = config_.source_language;
  body["target"] = config_.target_language;
  const std::string payload = body.dump();

  std::string last_failure;
  for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      retries_.fetch_add(1);
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<long long>(config_.backoff_ms) << (attempt - 1)));
    }
    requests_.fetch_add(1);
    auto res = client.Post(url.path, payload, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw IoError("translation endpoint returned HTTP " + std::to_string(res->status));
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed translation response: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("translations") ||
        !reply["translations"].is_array()) {
      throw IoError("translation response lacks a \"translations\" array");
    }
    const auto& arr = reply["translations"];
    if (arr.size() != batch.size()) {
      throw IoError("translation response has " + std::to_string(arr.size()) +
                    " entries for " + std::to_string(batch.size()) + " inputs");
    }
    std::vector<std::string> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
      if (!v.is_string()) throw IoError("translation response entry is not a string");
      out.push_back(v.get<std::string>());
    }
    return out;
  }
  throw IoError("translation failed after " + std::to_string(config_.max_retries) +
                " retries: " + last_failure);
}

std::vector<std::string> ExternalTranslator::translate(std::span<const std::string> texts) {
  std::vector<std::string> out(texts.size());
  std::vector<std::string> pending;  // unique uncached texts in first-seen order
  std::set<std::string> queued;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) continue;
    if (auto hit = cache_.find(texts[i])) {
      out[i] = std::move(*hit);
      cache_hits_.fetch_add(1);
    } else if (queued.insert(texts[i]).second) {
      pending.push_back(texts[i]);
    }
  }

  if (!pending.empty()) {
    const std::size_t n_batches = (pending.size() + config_.batch_size - 1) / config_.batch_size;
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= n_batches) return;
        {
          std::lock_guard lock(error_mutex);
          if (error) return;
        }
        const std::size_t lo = b * config_.batch_size;
        const std::size_t hi = std::min(pending.size(), lo + config_.batch_size);
        try {
          std::span<const std::string> batch(pending.data() + lo, hi - lo);
          const auto translated = post_batch(batch);
          for (std::size_t k = 0; k < batch.size(); ++k) cache_.insert(batch[k], translated[k]);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    };
    const std::size_t n_threads = std::min(config_.max_in_flight, n_batches);
    if (n_threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (!texts[i].empty() && out[i].empty()) out[i] = cache_.find(texts[i]).value_or("");
    }
  }
  return out;
}

std::vector<std::string> external_translate_batch(std::span<const std::string> texts,
                                                  const ExternalEndpointConfig& endpoint,
                                                  TranslateStats* stats) {
  ExternalTranslator client(endpoint);
  auto out = client.translate(texts);
  if (stats) *stats = client.stats();
  return out;
}

// ---------------------------------------------------------------------------

const std::string& TranslatorSpec::source_language() const {
  if (const auto* lex = std::get_if<LexiconTranslator>(&kind)) return lex->lexicon.source_language;
  return std::get<ExternalEndpointConfig>(kind).source_language;
}

const std::string& TranslatorSpec::target_language() const {
  if (const auto* lex = std::get_if<LexiconTranslator>(&kind)) return lex->lexicon.target_language;
  return std::get<ExternalEndpointConfig>(kind).target_language;
}

Corpus translate_corpus(const Corpus& corpus, const TranslatorSpec& translator,
                        TranslateStats* stats) {
  if (corpus.language != translator.source_language()) {
    throw FormatError("corpus language '" + corpus.language + "' does not match translator source '" +
                      translator.source_language() + "'");
  }
  Corpus out;
  out.language = translator.target_language();
  out.docs.reserve(corpus.docs.size());
  if (const auto* lex = std::get_if<LexiconTranslator>(&translator.kind)) {
    for (const auto& d : corpus.docs) {
      const auto mapped = translate_tokens_lexicon(tokenize(d.text), lex->lexicon, lex->oov);
      std::string text;
      for (const auto& t : mapped) {
        if (!text.empty()) text += ' ';
        text += t;
      }
      out.docs.push_back({d.label, std::move(text)});
    }
    if (stats) *stats = {};
    return out;
  }
  std::vector<std::string> texts;
  texts.reserve(corpus.docs.size());
  for (const auto& d : corpus.docs) texts.push_back(d.text);
  const auto translated =
      external_translate_batch(texts, std::get<ExternalEndpointConfig>(translator.kind), stats);
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    out.docs.push_back({corpus.docs[i].label, translated[i]});
  }
  return out;
}

}  // namespace xling
