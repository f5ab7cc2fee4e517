#include "xling/align.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "xling/error.hpp"
#include "xling/kernels.hpp"

namespace xling {

void SeedDictionary::add(std::string source, std::string target) {
  auto pair = std::make_pair(std::move(source), std::move(target));
  if (std::find(pairs.begin(), pairs.end(), pair) == pairs.end()) pairs.push_back(std::move(pair));
}

SeedDictionary parse_dictionary(std::string_view text, std::string provenance) {
  SeedDictionary dict;
  dict.provenance = std::move(provenance);
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size()) {
      throw FormatError("dictionary line " + std::to_string(line_no) +
                        ": expected 'source<TAB>target'");
    }
    std::string src(line.substr(0, tab));
    std::string tgt(line.substr(tab + 1));
    if (seen.emplace(src, tgt).second) dict.pairs.emplace_back(std::move(src), std::move(tgt));
  }
  return dict;
}

SeedDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dictionary(buf.str(), path.string());
}

std::string_view method_name(AlignMethod m) {
  return m == AlignMethod::procrustes ? "procrustes" : "rcsls";
}

AlignMethod method_from_name(std::string_view name) {
  if (name == "procrustes") return AlignMethod::procrustes;
  if (name == "rcsls") return AlignMethod::rcsls;
  throw FormatError("unknown alignment method '" + std::string(name) + "'");
}

AlignmentMap AlignmentMap::identity(std::size_t dim, std::string source, std::string target) {
  AlignmentMap m;
  m.weights = Tensor({dim, dim});
  for (std::size_t i = 0; i < dim; ++i) m.weights.at(i, i) = 1.0;
  m.source_language = std::move(source);
  m.target_language = std::move(target);
  return m;
}

std::string format_map(const AlignmentMap& map) {
  const std::size_t d = map.dim();
  std::string out = std::to_string(d) + " " + std::to_string(d) + "\n";
  out += map.source_language + " " + map.target_language + " " +
         std::string(method_name(map.method)) + "\n";
  char buf[64];
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, map.weights.at(r, c));
      if (c) out += ' ';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

AlignmentMap parse_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t rows = 0, cols = 0;
  AlignmentMap map;
  std::string method;
  if (!(in >> rows >> cols) || rows != cols || rows == 0) {
    throw FormatError("alignment map header must be '<dim> <dim>'");
  }
  if (!(in >> map.source_language >> map.target_language >> method)) {
    throw FormatError("alignment map second line must be '<src> <tgt> <method>'");
  }
  map.method = method_from_name(method);
  std::vector<double> values(rows * cols);
  std::string token;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(in >> token)) throw FormatError("alignment map has fewer than dim*dim values");
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), values[i]);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(values[i])) {
      throw FormatError("alignment map: cannot parse value '" + token + "'");
    }
  }
  if (in >> token) throw FormatError("alignment map has more than dim*dim values");
  map.weights = Tensor({rows, cols}, std::move(values));
  return map;
}

void save_map(const AlignmentMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << format_map(map);
  if (!out.flush()) throw IoError("write failure on " + path.string());
}

AlignmentMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str());
}

ResolvedPairs resolve_pairs(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                            const SeedDictionary& dict) {
  ResolvedPairs out;
  for (const auto& [s, t] : dict.pairs) {
    auto si = src.index_of(s);
    auto ti = tgt.index_of(t);
    if (si && ti) {
      out.source_rows.push_back(*si);
      out.target_rows.push_back(*ti);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

namespace {

void require_compatible(const EmbeddingSpace& src, const EmbeddingSpace& tgt) {
  if (src.dim() != tgt.dim()) {
    throw FormatError("embedding dimensions differ: " + std::to_string(src.dim()) + " vs " +
                      std::to_string(tgt.dim()));
  }
}

void require_normalized(const EmbeddingSpace& s) {
  if (!s.normalized()) {
    throw FormatError("embedding space '" + s.language() + "' must be normalized for alignment");
  }
}

// out = x * W, accumulated row by row.
void multiply_row(std::span<const double> x, const Tensor& w, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) kernels::axpy(x[i], w.row(i), out);
}

double normalize_in_place(std::span<double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  double n = std::sqrt(ss);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return n;
}

// Indices of the k pool rows most similar to `query`, most similar first
// (ties by row index).
std::vector<std::size_t> top_k_rows(std::span<const double> query, const VectorPool& pool,
                                    std::size_t k, std::vector<double>& sims) {
  const std::size_t n = pool.size();
  sims.resize(n);
  for (std::size_t i = 0; i < n; ++i) sims[i] = kernels::dot(query, pool.row(i));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return sims[a] > sims[b] || (sims[a] == sims[b] && a < b);
                    });
  order.resize(k);
  return order;
}

void require_k(std::size_t k, std::size_t pool_size) {
  if (k == 0) throw FormatError("k_neighbors must be at least 1");
  if (k > pool_size) {
    throw FormatError("k = " + std::to_string(k) + " exceeds neighbour pool size " +
                      std::to_string(pool_size));
  }
}

}  // namespace

double mean_top_k_similarity(std::span<const double> query, const VectorPool& pool,
                             std::size_t k) {
  require_k(k, pool.size());
  std::vector<double> sims;
  auto rows = top_k_rows(query, pool, k, sims);
  double sum = 0.0;
  for (std::size_t r : rows) sum += sims[r];
  return sum / static_cast<double>(k);
}

double csls_score(std::span<const double> x, std::span<const double> y,
                  const VectorPool& mapped_source_pool, const VectorPool& target_pool,
                  std::size_t k) {
  const double cos_xy = kernels::dot(x, y);
  const double r_tgt = mean_top_k_similarity(x, target_pool, k);
  const double r_src = mean_top_k_similarity(y, mapped_source_pool, k);
  return 2.0 * cos_xy - r_tgt - r_src;
}

std::vector<double> map_vector(std::span<const double> x, const Tensor& weights) {
  std::vector<double> out(weights.cols());
  multiply_row(x, weights, out);
  normalize_in_place(out);
  return out;
}

AlignmentMap fit_procrustes(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                            const SeedDictionary& dict) {
  require_compatible(src, tgt);
  require_normalized(src);
  require_normalized(tgt);
  ResolvedPairs pairs = resolve_pairs(src, tgt, dict);
  if (pairs.size() == 0) throw FormatError("procrustes: no dictionary pair resolves in both spaces");
  const std::size_t d = src.dim();
  if (pairs.size() < d) {
    std::cerr << "warning: procrustes fit with " << pairs.size() << " pairs in dimension " << d
              << "; the map is underdetermined\n";
  }

  // M = X^T Y accumulated over pairs.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                            static_cast<Eigen::Index>(d));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto x = src.row(pairs.source_rows[p]);
    auto y = tgt.row(pairs.target_rows[p]);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += x[i] * y[j];
      }
    }
  }
  if (!m.allFinite()) throw NumericError("procrustes: non-finite cross-covariance");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericError("procrustes: SVD failed");
  Eigen::MatrixXd w = svd.matrixU() * svd.matrixV().transpose();
  if (!w.allFinite()) throw NumericError("procrustes: SVD produced non-finite factors");

  AlignmentMap map;
  map.weights = Tensor({d, d});
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      map.weights.at(i, j) = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  map.source_language = src.language();
  map.target_language = tgt.language();
  map.method = AlignMethod::procrustes;
  map.report.retained_pairs = pairs.size();
  map.report.dropped_pairs = pairs.dropped;
  // Mean cosine of mapped pairs; W is orthogonal so x*W stays unit norm.
  double total = 0.0;
  std::vector<double> mapped(d);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    multiply_row(src.row(pairs.source_rows[p]), map.weights, mapped);
    total += kernels::dot(mapped, tgt.row(pairs.target_rows[p]));
  }
  map.report.objective = total / static_cast<double>(pairs.size());
  return map;
}

namespace {

struct RcslsEvaluation {
  double objective = 0.0;
  Tensor gradient;
};

// Objective and (when `with_gradient`) its gradient with respect to W.
// Neighbourhoods are recomputed at the current W and held fixed for the
// derivative.
RcslsEvaluation evaluate_rcsls(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                               const ResolvedPairs& pairs, const Tensor& w,
                               const AlignHyper& hyper, bool with_gradient) {
  const std::size_t d = src.dim();
  const std::size_t k = hyper.k_neighbors;
  const std::size_t src_pool_n = std::min(hyper.neighbor_pool, src.size());
  const std::size_t tgt_pool_n = std::min(hyper.neighbor_pool, tgt.size());
  require_k(k, src_pool_n);
  require_k(k, tgt_pool_n);

  // Mapped, normalized source pool plus the pre-normalization norms.
  std::vector<double> mapped_pool(src_pool_n * d);
  std::vector<double> pool_norms(src_pool_n);
  for (std::size_t s = 0; s < src_pool_n; ++s) {
    std::span<double> out(mapped_pool.data() + s * d, d);
    multiply_row(src.row(s), w, out);
    pool_norms[s] = normalize_in_place(out);
    if (!(pool_norms[s] > 0.0)) throw NumericError("rcsls: source vector mapped to zero");
  }
  VectorPool mapped{mapped_pool, d};
  VectorPool target{tgt.matrix().subspan(0, tgt_pool_n * d), d};

  RcslsEvaluation out;
  if (with_gradient) out.gradient = Tensor({d, d});
  std::vector<double> pool_grad(with_gradient ? src_pool_n * d : 0, 0.0);
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  const double inv_k = 1.0 / static_cast<double>(k);

  std::vector<double> u(d), g(d), sims;
  double total = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto x = src.row(pairs.source_rows[p]);
    auto y = tgt.row(pairs.target_rows[p]);
    multiply_row(x, w, u);
    const double norm = normalize_in_place(u);
    if (!(norm > 0.0)) throw NumericError("rcsls: source vector mapped to zero");

    double term = 2.0 * kernels::dot(u, y);
    auto nn_t = top_k_rows(u, target, k, sims);
    double r_t = 0.0;
    for (std::size_t r : nn_t) r_t += sims[r];
    term -= r_t * inv_k;
    auto nn_s = top_k_rows(y, mapped, k, sims);
    double r_s = 0.0;
    for (std::size_t r : nn_s) r_s += sims[r];
    term -= r_s * inv_k;
    total += term;

    if (!with_gradient) continue;
    // d/d(u_hat) = 2y - mean of target neighbours.
    for (std::size_t j = 0; j < d; ++j) g[j] = 2.0 * y[j];
    for (std::size_t r : nn_t) kernels::axpy(-inv_k, target.row(r), g);
    // Project through the normalization: (g - (g.u)u) / |xW|.
    const double gu = kernels::dot(g, u);
    for (std::size_t j = 0; j < d; ++j) g[j] = (g[j] - gu * u[j]) / norm * inv_n;
    for (std::size_t i = 0; i < d; ++i) kernels::axpy(x[i], g, out.gradient.row(i));
    // Source-side neighbours of y each receive -y/k.
    for (std::size_t r : nn_s) {
      kernels::axpy(-inv_k * inv_n, y, std::span<double>(pool_grad.data() + r * d, d));
    }
  }
  out.objective = total * inv_n;

  if (with_gradient) {
    for (std::size_t s = 0; s < src_pool_n; ++s) {
      std::span<double> gs(pool_grad.data() + s * d, d);
      auto uhat = mapped.row(s);
      const double gu = kernels::dot(gs, uhat);
      if (gu == 0.0 && std::all_of(gs.begin(), gs.end(), [](double v) { return v == 0.0; })) {
        continue;
      }
      for (std::size_t j = 0; j < d; ++j) gs[j] = (gs[j] - gu * uhat[j]) / pool_norms[s];
      auto x = src.row(s);
      for (std::size_t i = 0; i < d; ++i) kernels::axpy(x[i], gs, out.gradient.row(i));
    }
  }
  return out;
}

}  // namespace

double rcsls_objective(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       const ResolvedPairs& pairs, const Tensor& weights,
                       const AlignHyper& hyper) {
  if (pairs.size() == 0) throw FormatError("rcsls: no resolved dictionary pairs");
  return evaluate_rcsls(src, tgt, pairs, weights, hyper, false).objective;
}

AlignmentMap fit_rcsls(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       const SeedDictionary& dict, const AlignmentMap& init,
                       const AlignHyper& hyper) {
  require_compatible(src, tgt);
  require_normalized(src);
  require_normalized(tgt);
  if (init.dim() != src.dim()) {
    throw FormatError("rcsls: initial map has dim " + std::to_string(init.dim()) +
                      ", spaces have dim " + std::to_string(src.dim()));
  }
  if (hyper.epochs == 0) return init;
  ResolvedPairs all = resolve_pairs(src, tgt, dict);
  if (all.size() == 0) throw FormatError("rcsls: no dictionary pair resolves in both spaces");

  const std::size_t batch = hyper.batch == 0 ? all.size() : std::min(hyper.batch, all.size());
  Tensor w = init.weights;
  const double initial = evaluate_rcsls(src, tgt, all, w, hyper, false).objective;
  if (!std::isfinite(initial)) throw NumericError("rcsls: non-finite objective at iteration 0");
  Tensor best_w = w;
  double best = initial;

  std::size_t iteration = 0;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t start = 0; start < all.size(); start += batch) {
      ResolvedPairs chunk;
      const std::size_t end = std::min(start + batch, all.size());
      chunk.source_rows.assign(all.source_rows.begin() + static_cast<std::ptrdiff_t>(start),
                               all.source_rows.begin() + static_cast<std::ptrdiff_t>(end));
      chunk.target_rows.assign(all.target_rows.begin() + static_cast<std::ptrdiff_t>(start),
                               all.target_rows.begin() + static_cast<std::ptrdiff_t>(end));
      RcslsEvaluation step = evaluate_rcsls(src, tgt, chunk, w, hyper, true);
      kernels::axpy(hyper.learning_rate, step.gradient.values(), w.values());
      ++iteration;
    }
    const double objective = evaluate_rcsls(src, tgt, all, w, hyper, false).objective;
    if (!std::isfinite(objective)) {
      throw NumericError("rcsls: non-finite objective at iteration " + std::to_string(iteration));
    }
    if (objective > best) {
      best = objective;
      best_w = w;
    }
  }

  AlignmentMap map;
  map.weights = std::move(best_w);
  map.source_language = src.language();
  map.target_language = tgt.language();
  map.method = AlignMethod::rcsls;
  map.report.retained_pairs = all.size();
  map.report.dropped_pairs = all.dropped;
  map.report.objective = best;
  return map;
}

EmbeddingSpace apply_map(const EmbeddingSpace& space, const AlignmentMap& map) {
  if (map.dim() != space.dim()) {
    throw FormatError("map dim " + std::to_string(map.dim()) + " does not match space dim " +
                      std::to_string(space.dim()));
  }
  if (map.source_language != space.language()) {
    throw FormatError("map source language '" + map.source_language +
                      "' does not match space language '" + space.language() + "'");
  }
  const std::size_t d = space.dim();
  std::vector<double> out(space.size() * d);
  for (std::size_t r = 0; r < space.size(); ++r) {
    multiply_row(space.row(r), map.weights, std::span<double>(out.data() + r * d, d));
  }
  return EmbeddingSpace(space.language(), d, space.words(), std::move(out), false);
}

CslsRetriever::CslsRetriever(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                             const AlignmentMap& map, std::size_t k_neighbors,
                             std::size_t neighbor_pool)
    : src_(src), tgt_(tgt), weights_(map.weights), k_(k_neighbors) {
  require_compatible(src, tgt);
  if (map.dim() != src.dim()) throw FormatError("map dim does not match the embedding spaces");
  const std::size_t d = src.dim();
  const std::size_t src_pool_n = std::min(neighbor_pool, src.size());
  const std::size_t tgt_pool_n = std::min(neighbor_pool, tgt.size());
  require_k(k_, src_pool_n);
  require_k(k_, tgt_pool_n);
  mapped_pool_.resize(src_pool_n * d);
  for (std::size_t s = 0; s < src_pool_n; ++s) {
    auto v = map_vector(src.row(s), weights_);
    std::copy(v.begin(), v.end(), mapped_pool_.begin() + static_cast<std::ptrdiff_t>(s * d));
  }
  target_pool_ = VectorPool{tgt.matrix().subspan(0, tgt_pool_n * d), d};
  VectorPool mapped{mapped_pool_, d};
  target_penalty_.resize(tgt.size());
  for (std::size_t t = 0; t < tgt.size(); ++t) {
    target_penalty_[t] = mean_top_k_similarity(tgt.row(t), mapped, k_);
  }
}

std::vector<double> CslsRetriever::scores(std::size_t source_row) const {
  auto x = map_vector(src_.row(source_row), weights_);
  const double r_tgt = mean_top_k_similarity(x, target_pool_, k_);
  std::vector<double> out(tgt_.size());
  for (std::size_t t = 0; t < tgt_.size(); ++t) {
    out[t] = 2.0 * kernels::dot(x, tgt_.row(t)) - r_tgt - target_penalty_[t];
  }
  return out;
}

std::vector<Candidate> CslsRetriever::translate_row(std::size_t source_row,
                                                    std::size_t k_candidates) const {
  auto s = scores(source_row);
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n = std::min(k_candidates, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return s[a] > s[b] || (s[a] == s[b] && a < b);
                    });
  std::vector<Candidate> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({tgt_.word(order[i]), order[i], s[order[i]]});
  return out;
}

std::vector<Candidate> CslsRetriever::translate(std::string_view word,
                                                std::size_t k_candidates) const {
  auto row = src_.index_of(word);
  if (!row) throw FormatError("word '" + std::string(word) + "' is not in the source vocabulary");
  return translate_row(*row, k_candidates);
}

std::vector<Candidate> translate_word(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                      const AlignmentMap& map, std::string_view word,
                                      std::size_t k_candidates, std::size_t k_neighbors,
                                      std::size_t neighbor_pool) {
  if (!src.index_of(word)) {
    throw FormatError("word '" + std::string(word) + "' is not in the source vocabulary");
  }
  return CslsRetriever(src, tgt, map, k_neighbors, neighbor_pool).translate(word, k_candidates);
}

AlignmentQuality eval_alignment(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                const AlignmentMap& map, const SeedDictionary& test_dict,
                                std::size_t k_neighbors, std::size_t neighbor_pool) {
  ResolvedPairs pairs = resolve_pairs(src, tgt, test_dict);
  if (pairs.size() == 0) throw FormatError("eval_alignment: no test pair resolves in both spaces");
  CslsRetriever retriever(src, tgt, map, k_neighbors, neighbor_pool);
  std::size_t hit1 = 0, hit5 = 0;
  double margin = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const std::size_t gold = pairs.target_rows[p];
    auto s = retriever.scores(pairs.source_rows[p]);
    // Rank of gold under (score desc, index asc).
    std::size_t better = 0;
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (t == gold) continue;
      if (s[t] > s[gold] || (s[t] == s[gold] && t < gold)) ++better;
      best_other = std::max(best_other, s[t]);
    }
    if (better == 0) ++hit1;
    if (better < 5) ++hit5;
    margin += std::isfinite(best_other) ? s[gold] - best_other : 0.0;
  }
  AlignmentQuality q;
  q.evaluated_pairs = pairs.size();
  q.accuracy_at_1 = static_cast<double>(hit1) / static_cast<double>(pairs.size());
  q.accuracy_at_5 = static_cast<double>(hit5) / static_cast<double>(pairs.size());
  q.mean_csls_margin = margin / static_cast<double>(pairs.size());
  return q;
}

}  // namespace xling
