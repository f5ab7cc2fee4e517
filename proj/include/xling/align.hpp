#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xling/embedstore.hpp"
#include "xling/tensor.hpp"

namespace xling {

/// Ordered (source word, target word) anchor pairs. Exact duplicates are dropped on insertion.
struct SeedDictionary {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string provenance;

  void add(std::string source, std::string target);
  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// "source<TAB>target" per line; '#' lines and blank lines are skipped.
SeedDictionary parse_dictionary(std::string_view text, std::string provenance = {});
SeedDictionary load_dictionary(const std::filesystem::path& path);

enum class AlignMethod { procrustes, rcsls };
std::string_view method_name(AlignMethod m);
AlignMethod method_from_name(std::string_view name);

struct FitReport {
  std::size_t retained_pairs = 0;
  std::size_t dropped_pairs = 0;
  double objective = 0.0;
};

/// Linear map applied to row vectors as x * W.
struct AlignmentMap {
  Tensor weights;  // dim x dim
  std::string source_language;
  std::string target_language;
  AlignMethod method = AlignMethod::procrustes;
  FitReport report;

  std::size_t dim() const { return weights.empty() ? 0 : weights.rows(); }
  static AlignmentMap identity(std::size_t dim, std::string source, std::string target);
};

/// Two header lines ("<dim> <dim>", "<src> <tgt> <method>") then dim rows of dim values.
void save_map(const AlignmentMap& map, const std::filesystem::path& path);
AlignmentMap load_map(const std::filesystem::path& path);
std::string format_map(const AlignmentMap& map);
AlignmentMap parse_map(std::string_view text);

struct AlignHyper {
  std::size_t k_neighbors = 10;
  double learning_rate = 1.0;
  std::size_t epochs = 10;
  std::size_t batch = 0;  // 0 = full batch
  std::size_t neighbor_pool = 10000;
};

struct AlignmentQuality {
  double accuracy_at_1 = 0.0;
  double accuracy_at_5 = 0.0;
  double mean_csls_margin = 0.0;
  std::size_t evaluated_pairs = 0;
};

/// Dictionary pairs whose words exist on both sides, as row indices.
struct ResolvedPairs {
  std::vector<std::size_t> source_rows;
  std::vector<std::size_t> target_rows;
  std::size_t dropped = 0;
  std::size_t size() const { return source_rows.size(); }
};
ResolvedPairs resolve_pairs(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                            const SeedDictionary& dict);

/// Row-major block of unit vectors.
struct VectorPool {
  std::span<const double> values;
  std::size_t dim = 0;
  std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t i) const { return values.subspan(i * dim, dim); }
};

/// Mean of the k largest dot products between `query` and the pool rows.
/// The top-k values are summed in descending order.
double mean_top_k_similarity(std::span<const double> query, const VectorPool& pool, std::size_t k);

/// 2 cos(x, y) - r_tgt(x) - r_src(y). All inputs unit norm.
double csls_score(std::span<const double> x, std::span<const double> y,
                  const VectorPool& mapped_source_pool, const VectorPool& target_pool,
                  std::size_t k);

/// Orthogonal W = U V^T from the SVD of X^T Y over resolved pairs.
AlignmentMap fit_procrustes(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                            const SeedDictionary& dict);

/// Relaxed-CSLS objective averaged over resolved pairs, evaluated at `weights`.
double rcsls_objective(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       const ResolvedPairs& pairs, const Tensor& weights,
                       const AlignHyper& hyper);

/// Full-batch gradient ascent on the relaxed-CSLS objective from `init`;
/// returns the best iterate seen (possibly `init` itself).
AlignmentMap fit_rcsls(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       const SeedDictionary& dict, const AlignmentMap& init,
                       const AlignHyper& hyper);

/// Maps every row through the map. The result is not normalized.
EmbeddingSpace apply_map(const EmbeddingSpace& space, const AlignmentMap& map);

/// Normalized x * W.
std::vector<double> map_vector(std::span<const double> x, const Tensor& weights);

struct Candidate {
  std::string word;
  std::size_t index = 0;
  double score = 0.0;
};

/// CSLS nearest-neighbour retrieval from a mapped source space into a target
/// space. Precomputes the target-side neighbourhood terms once.
class CslsRetriever {
 public:
  CslsRetriever(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const AlignmentMap& map,
                std::size_t k_neighbors = 10, std::size_t neighbor_pool = 10000);

  /// Top `k_candidates` target words for a source word, score descending,
  /// ties by target vocabulary index.
  std::vector<Candidate> translate(std::string_view word, std::size_t k_candidates) const;
  std::vector<Candidate> translate_row(std::size_t source_row, std::size_t k_candidates) const;

  /// CSLS scores of one source row against every target word.
  std::vector<double> scores(std::size_t source_row) const;

 private:
  const EmbeddingSpace& src_;
  const EmbeddingSpace& tgt_;
  Tensor weights_;
  std::size_t k_;
  std::vector<double> mapped_pool_;  // normalized mapped source rows, pool-limited
  VectorPool target_pool_;
  std::vector<double> target_penalty_;  // r_src(y) for every target word
};

std::vector<Candidate> translate_word(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                      const AlignmentMap& map, std::string_view word,
                                      std::size_t k_candidates, std::size_t k_neighbors = 10,
                                      std::size_t neighbor_pool = 10000);

AlignmentQuality eval_alignment(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                const AlignmentMap& map, const SeedDictionary& test_dict,
                                std::size_t k_neighbors = 10, std::size_t neighbor_pool = 10000);

}  // namespace xling
