#include "xling/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "xling/error.hpp"
#include "xling/rng.hpp"

namespace xling {

std::vector<std::string> Corpus::label_set() const {
  std::set<std::string> s;
  for (const auto& d : docs) s.insert(d.label);
  return {s.begin(), s.end()};
}

std::map<std::string, std::size_t> Corpus::label_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs) ++counts[d.label];
  return counts;
}

// ---------------------------------------------------------------------------
// UTF-8

namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point at s[i]; advances i. Returns kInvalid (consuming one
// byte) for malformed sequences.
char32_t decode_one(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return kInvalid;
  }
  if (i + len > s.size()) {
    ++i;
    return kInvalid;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return kInvalid;
  }
  i += len;
  return cp;
}

void encode_one(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_unicode_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0xFF01 && c <= 0xFF0F);
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c < 0xC0) return c;
  if (c <= 0xDE) return c == 0xD7 ? c : c + 0x20;
  if (c >= 0x100 && c <= 0x137) return c % 2 == 0 ? c + 1 : c;
  if (c >= 0x139 && c <= 0x148) return c % 2 == 1 ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c % 2 == 0 ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return c % 2 == 1 ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

struct Piece {
  char32_t cp;
  std::string_view raw;  // original bytes
};

}  // namespace

bool is_valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    if (decode_one(s, i) == kInvalid) return false;
  }
  return true;
}

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
  std::vector<std::string> tokens;
  std::vector<Piece> word;
  auto flush = [&] {
    std::size_t b = 0, e = word.size();
    while (b < e && is_punctuation(word[b].cp)) ++b;
    while (e > b && is_punctuation(word[e - 1].cp)) --e;
    if (b < e) {
      std::string tok;
      for (std::size_t k = b; k < e; ++k) {
        if (word[k].cp == kInvalid) {
          tok.append(word[k].raw);
        } else {
          encode_one(lowercase ? to_lower(word[k].cp) : word[k].cp, tok);
        }
      }
      tokens.push_back(std::move(tok));
    }
    word.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t start = i;
    const char32_t cp = decode_one(text, i);
    if (cp != kInvalid && is_unicode_space(cp)) {
      flush();
    } else {
      word.push_back({cp, text.substr(start, i - start)});
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> truncate_tokens(std::vector<std::string> tokens, std::size_t max_len) {
  if (max_len == 0) throw FormatError("max_len must be at least 1");
  if (tokens.size() > max_len) tokens.resize(max_len);
  return tokens;
}

// ---------------------------------------------------------------------------
// Corpus files

std::string escape_field(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    if (escaped[i] == '\\' && i + 1 < escaped.size()) {
      const char n = escaped[i + 1];
      if (n == 't' || n == 'n' || n == 'r' || n == '\\') {
        out += n == 't' ? '\t' : n == 'n' ? '\n' : n == 'r' ? '\r' : '\\';
        ++i;
        continue;
      }
    }
    out += escaped[i];
  }
  return out;
}

Corpus parse_corpus(std::string_view content, std::string language) {
  Corpus corpus;
  corpus.language = std::move(language);
  std::size_t line_no = 0;
  while (!content.empty()) {
    const std::size_t nl = content.find('\n');
    std::string_view line = content.substr(0, nl);
    content.remove_prefix(nl == std::string_view::npos ? content.size() : nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "corpus line " + std::to_string(line_no);
    if (!is_valid_utf8(line)) throw FormatError(where + ": invalid UTF-8");
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError(where + ": missing tab separator");
    if (tab == 0) throw FormatError(where + ": empty label");
    corpus.docs.push_back({std::string(line.substr(0, tab)), unescape_field(line.substr(tab + 1))});
  }
  return corpus;
}

Corpus read_corpus(const std::filesystem::path& path, std::string language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_corpus(buf.str(), std::move(language));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.docs) {
    if (d.label.empty() || d.label.find_first_of("\t\n\r") != std::string::npos) {
      throw FormatError("label '" + d.label + "' is empty or contains a tab or newline");
    }
    out += d.label;
    out += '\t';
    out += escape_field(d.text);
    out += '\n';
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  const std::string content = format_corpus(corpus);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out.flush()) throw IoError("write failure on " + path.string());
}

// ---------------------------------------------------------------------------
// Splitting

SplitCounts split_counts(std::size_t n, const SplitSpec& spec) {
  // Guard against products such as 0.15 * 20 landing just below an integer.
  auto portion = [n](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  SplitCounts c;
  c.validation = portion(spec.validation);
  c.test = portion(spec.test);
  c.train = n - c.validation - c.test;
  return c;
}

CorpusSplit stratified_split(const Corpus& corpus, const SplitSpec& spec) {
  if (!(spec.train > 0.0 && spec.validation > 0.0 && spec.test > 0.0) ||
      std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-9) {
    throw FormatError("split fractions must be positive and sum to 1");
  }
  const auto labels = corpus.label_set();
  CorpusSplit out;
  out.train.language = out.validation.language = out.test.language = corpus.language;
  for (std::size_t li = 0; li < labels.size(); ++li) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
      if (corpus.docs[i].label == labels[li]) members.push_back(i);
    }
    if (members.size() < 3) {
      throw FormatError("label '" + labels[li] + "' has " + std::to_string(members.size()) +
                        " documents; at least 3 are needed to split");
    }
    Rng rng(derive_seed(spec.seed, "split", li));
    rng.shuffle(std::span<std::size_t>(members));
    const SplitCounts counts = split_counts(members.size(), spec);
    std::size_t k = 0;
    for (; k < counts.train; ++k) out.train.docs.push_back(corpus.docs[members[k]]);
    for (; k < counts.train + counts.validation; ++k) {
      out.validation.docs.push_back(corpus.docs[members[k]]);
    }
    for (; k < members.size(); ++k) out.test.docs.push_back(corpus.docs[members[k]]);
  }
  std::size_t part = 0;
  for (Corpus* c : {&out.train, &out.validation, &out.test}) {
    Rng rng(derive_seed(spec.seed, "merge", part++));
    rng.shuffle(std::span<LabeledDoc>(c->docs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labels

LabelEncoder::LabelEncoder(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

LabelEncoder LabelEncoder::fit(const Corpus& corpus) { return fit(std::vector{&corpus}); }

LabelEncoder LabelEncoder::fit(const std::vector<const Corpus*>& corpora) {
  std::vector<std::string> all;
  for (const Corpus* c : corpora) {
    for (const auto& d : c->docs) all.push_back(d.label);
  }
  if (all.empty()) throw FormatError("cannot fit a label encoder on an empty corpus");
  return LabelEncoder(std::move(all));
}

std::size_t LabelEncoder::encode(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) {
    throw FormatError("label '" + std::string(label) + "' was not seen when the encoder was fit");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

const std::string& LabelEncoder::decode(std::size_t index) const {
  if (index >= labels_.size()) {
    throw FormatError("class index " + std::to_string(index) + " out of range");
  }
  return labels_[index];
}

}  // namespace xling
