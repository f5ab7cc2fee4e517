#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xling/tensor.hpp"

namespace xling {

/// A language's vocabulary with one row of `dim` doubles per word.
///
/// Immutable after construction; concurrent reads are safe.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  /// Validates that words are unique and that `matrix` is |words| x dim.
  EmbeddingSpace(std::string language, std::size_t dim, std::vector<std::string> words,
                 std::vector<double> matrix, bool normalized = false);

  const std::string& language() const { return language_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool normalized() const { return normalized_; }

  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(std::size_t index) const { return words_.at(index); }
  std::optional<std::size_t> index_of(std::string_view word) const;

  std::span<const double> row(std::size_t index) const {
    return {matrix_.data() + index * dim_, dim_};
  }
  std::span<const double> matrix() const { return matrix_; }

  friend bool operator==(const EmbeddingSpace& a, const EmbeddingSpace& b) {
    return a.language_ == b.language_ && a.dim_ == b.dim_ && a.words_ == b.words_ &&
           a.matrix_ == b.matrix_ && a.normalized_ == b.normalized_;
  }

 private:
  std::string language_;
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> matrix_;
  bool normalized_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Parses a fastText `.vec` file: "<count> <dim>" then "<word> <dim values>" per line.
EmbeddingSpace load_vec(const std::filesystem::path& path, std::string language);
EmbeddingSpace parse_vec(std::string_view text, std::string language);

/// Writes the `.vec` format with shortest round-trip decimals (17 significant
/// digits at most). Output is a pure function of the space.
void save_vec(const EmbeddingSpace& space, const std::filesystem::path& path);
std::string format_vec(const EmbeddingSpace& space);

/// Row for `word`, or nullopt if absent.
std::optional<std::span<const double>> lookup(const EmbeddingSpace& space, std::string_view word);

/// Rescales every row to unit L2 norm. Throws FormatError naming the first zero-norm word.
EmbeddingSpace normalize(const EmbeddingSpace& space);

struct PaddingPolicy {
  enum class Kind { gaussian_noise, zero };
  Kind kind = Kind::gaussian_noise;
  double sigma = 0.1;
  std::uint64_t seed = 0;

  static PaddingPolicy zero() { return {Kind::zero, 0.0, 0}; }
  static PaddingPolicy noise(double sigma, std::uint64_t seed) {
    return {Kind::gaussian_noise, sigma, seed};
  }

  /// Pad value at (row, column); a pure function of (kind, sigma, seed, row, column).
  double value(std::size_t row, std::size_t column) const;
};

struct EmbeddedSequence {
  Tensor matrix;  // max_len x dim
  std::size_t oov_count = 0;
};

/// Stacks the vectors of the first `max_len` tokens into a max_len x dim
/// matrix. Out-of-vocabulary tokens and trailing rows take pad vectors.
EmbeddedSequence embed_sequence(const EmbeddingSpace& space, std::span<const std::string> tokens,
                                std::size_t max_len, const PaddingPolicy& policy);

}  // namespace xling
