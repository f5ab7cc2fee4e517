#include "xling/embedstore.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "xling/error.hpp"
#include "xling/rng.hpp"

namespace xling {

EmbeddingSpace::EmbeddingSpace(std::string language, std::size_t dim,
                               std::vector<std::string> words, std::vector<double> matrix,
                               bool normalized)
    : language_(std::move(language)),
      dim_(dim),
      words_(std::move(words)),
      matrix_(std::move(matrix)),
      normalized_(normalized) {
  if (dim_ == 0) throw FormatError("embedding dimension must be positive");
  if (matrix_.size() != words_.size() * dim_) {
    throw FormatError("embedding matrix has " + std::to_string(matrix_.size()) +
                      " values, expected " + std::to_string(words_.size()) + " x " +
                      std::to_string(dim_));
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw FormatError("duplicate word '" + words_[i] + "' at row " + std::to_string(i + 1));
    }
  }
  if (normalized_) {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      double ss = 0.0;
      for (double v : row(i)) ss += v * v;
      if (std::abs(std::sqrt(ss) - 1.0) > 1e-9) {
        throw FormatError("row '" + words_[i] + "' is not unit norm");
      }
    }
  }
}

std::optional<std::size_t> EmbeddingSpace::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view next_field(std::string_view& line) {
  std::size_t b = 0;
  while (b < line.size() && is_space(line[b])) ++b;
  std::size_t e = b;
  while (e < line.size() && !is_space(line[e])) ++e;
  std::string_view field = line.substr(b, e - b);
  line.remove_prefix(e);
  return field;
}

template <class T>
T parse_number(std::string_view s, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": cannot parse number '" +
                      std::string(s) + "'");
  }
  return value;
}

}  // namespace

EmbeddingSpace parse_vec(std::string_view text, std::string language) {
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& out) {
    if (text.empty()) return false;
    std::size_t nl = text.find('\n');
    out = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    return true;
  };

  std::string_view header;
  if (!next_line(header)) throw FormatError("empty .vec file: missing '<count> <dim>' header");
  auto count = parse_number<std::size_t>(next_field(header), line_no);
  auto dim = parse_number<std::size_t>(next_field(header), line_no);
  if (!next_field(header).empty()) throw FormatError("line 1: header must be '<count> <dim>'");
  if (dim == 0) throw FormatError("line 1: dimension must be positive");

  std::vector<std::string> words;
  std::vector<double> matrix;
  words.reserve(count);
  matrix.reserve(count * dim);
  std::string_view line;
  while (next_line(line)) {
    std::string_view word = next_field(line);
    if (word.empty()) continue;
    if (words.size() == count) {
      throw FormatError("line " + std::to_string(line_no) + ": more rows than the header count " +
                        std::to_string(count));
    }
    words.emplace_back(word);
    std::size_t n = 0;
    for (std::string_view f = next_field(line); !f.empty(); f = next_field(line), ++n) {
      if (n == dim) break;
      double v = parse_number<double>(f, line_no);
      if (!std::isfinite(v)) {
        throw FormatError("line " + std::to_string(line_no) + ": non-finite value");
      }
      matrix.push_back(v);
    }
    if (n != dim || !next_field(line).empty()) {
      throw FormatError("line " + std::to_string(line_no) + ": word '" + std::string(word) +
                        "' has a value count different from dim " + std::to_string(dim));
    }
  }
  if (words.size() != count) {
    throw FormatError("header declares " + std::to_string(count) + " rows but file has " +
                      std::to_string(words.size()));
  }
  return EmbeddingSpace(std::move(language), dim, std::move(words), std::move(matrix));
}

EmbeddingSpace load_vec(const std::filesystem::path& path, std::string language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on " + path.string());
  try {
    return parse_vec(buf.str(), std::move(language));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_vec(const EmbeddingSpace& space) {
  std::string out = std::to_string(space.size()) + " " + std::to_string(space.dim()) + "\n";
  char buf[64];
  for (std::size_t i = 0; i < space.size(); ++i) {
    out += space.word(i);
    for (double v : space.row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out += ' ';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

void save_vec(const EmbeddingSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << format_vec(space);
  if (!out.flush()) throw IoError("write failure on " + path.string());
}

std::optional<std::span<const double>> lookup(const EmbeddingSpace& space, std::string_view word) {
  auto idx = space.index_of(word);
  if (!idx) return std::nullopt;
  return space.row(*idx);
}

EmbeddingSpace normalize(const EmbeddingSpace& space) {
  std::vector<double> matrix(space.matrix().begin(), space.matrix().end());
  const std::size_t d = space.dim();
  for (std::size_t i = 0; i < space.size(); ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < d; ++j) ss += matrix[i * d + j] * matrix[i * d + j];
    double norm = std::sqrt(ss);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw FormatError("cannot normalize zero-norm vector of word '" + space.word(i) + "'");
    }
    for (std::size_t j = 0; j < d; ++j) matrix[i * d + j] /= norm;
  }
  return EmbeddingSpace(space.language(), d, space.words(), std::move(matrix), true);
}

double PaddingPolicy::value(std::size_t row, std::size_t column) const {
  if (kind == Kind::zero || sigma == 0.0) return 0.0;
  return sigma * counter_gaussian(derive_seed(seed, row, column));
}

EmbeddedSequence embed_sequence(const EmbeddingSpace& space, std::span<const std::string> tokens,
                                std::size_t max_len, const PaddingPolicy& policy) {
  if (max_len == 0) throw FormatError("max_len must be at least 1");
  if (policy.sigma < 0.0) throw FormatError("padding sigma must be non-negative");
  const std::size_t d = space.dim();
  EmbeddedSequence out{Tensor({max_len, d}), 0};
  const std::size_t used = std::min(tokens.size(), max_len);
  for (std::size_t r = 0; r < max_len; ++r) {
    auto dst = out.matrix.row(r);
    if (r < used) {
      if (auto vec = lookup(space, tokens[r])) {
        std::copy(vec->begin(), vec->end(), dst.begin());
        continue;
      }
      ++out.oov_count;
    }
    for (std::size_t c = 0; c < d; ++c) dst[c] = policy.value(r, c);
  }
  return out;
}

}  // namespace xling
