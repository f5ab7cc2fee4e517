#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xling/align.hpp"
#include "xling/embedstore.hpp"
#include "xling/experiment.hpp"

namespace xling {

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

/// Bilingual toy world. Each class owns a set of topic words whose vectors
/// sit around a class centroid; the rest of the vocabulary is class-neutral.
/// Language B's vectors are language A's rotated by a random orthogonal
/// matrix plus Gaussian noise, and word i of A translates to word i of B.
struct SynthConfig {
  std::string language_a = "a";
  std::string language_b = "b";
  std::size_t dim = 16;
  std::size_t classes = 3;
  std::size_t topic_words = 30;    // per class
  std::size_t neutral_words = 90;
  double cluster_spread = 0.8;     // topic word = centroid + spread * gaussian / sqrt(dim)
  double rotation_noise = 0.05;    // per-coordinate sigma on B
  double signal_rate = 0.2;        // chance that a token is a topic word of the doc's class
  std::size_t min_length = 16;
  std::size_t max_length = 32;
  SplitSizes sizes_a{600, 150, 150};
  SplitSizes sizes_b{60, 30, 300};
  std::uint64_t seed = 0;
};

struct SyntheticBilingual {
  EmbeddingSpace space_a;
  EmbeddingSpace space_b;
  Tensor rotation;            // dim x dim, orthogonal
  SeedDictionary dictionary;  // every A word -> its B counterpart
  LanguageData corpus_a;
  LanguageData corpus_b;
  std::vector<std::string> labels;
};

SyntheticBilingual make_synthetic(const SynthConfig& cfg);

/// Random orthogonal matrix (QR of a Gaussian matrix with sign-fixed R).
Tensor random_orthogonal(std::size_t dim, std::uint64_t seed);

}  // namespace xling
