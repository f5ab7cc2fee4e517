#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "xling/align.hpp"
#include "xling/error.hpp"
#include "xling/kernels.hpp"
#include "xling/synth.hpp"

using namespace xling;
using testing::CslsOracle;

namespace {

SeedDictionary index_dictionary(std::size_t from, std::size_t to, const std::string& sp,
                                const std::string& tp) {
  SeedDictionary d;
  for (std::size_t i = from; i < to; ++i) d.add(sp + std::to_string(i), tp + std::to_string(i));
  return d;
}

double frobenius_distance(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("dictionary parsing skips comments and duplicates") {
  auto d = parse_dictionary("# header\nhello\tbonjour\n\nhello\tbonjour\nhello\tsalut\n", "test");
  CHECK(d.size() == 2);
  CHECK(d.pairs[1] == std::pair<std::string, std::string>{"hello", "salut"});
  CHECK_THROWS_AS(parse_dictionary("no tab here\n"), FormatError);
}

TEST_CASE("map files round-trip") {
  AlignmentMap m;
  m.weights = random_orthogonal(5, 3);
  m.source_language = "fr";
  m.target_language = "en";
  m.method = AlignMethod::rcsls;
  auto back = parse_map(format_map(m));
  CHECK(back.weights == m.weights);
  CHECK(back.source_language == "fr");
  CHECK(back.method == AlignMethod::rcsls);
  CHECK_THROWS_AS(parse_map("2 2\nfr en procrustes\n1 0\n"), FormatError);
}

TEST_CASE("Procrustes recovers an exact rotation") {
  auto src = testing::random_unit_space("s", "s", 500, 10, 1);
  const Tensor r = random_orthogonal(10, 2);
  auto tgt = testing::transformed_space(src, r, "t", "t", 0.0, 0);
  auto dict = index_dictionary(0, 500, "s", "t");
  auto map = fit_procrustes(src, tgt, dict);
  CHECK(frobenius_distance(map.weights, r) <= 1e-6);
  CHECK(map.report.retained_pairs == 500);
  CHECK(eval_alignment(src, tgt, map, dict).accuracy_at_1 == 1.0);
}

TEST_CASE("Procrustes drops pairs missing from either side") {
  auto src = testing::random_unit_space("s", "s", 30, 4, 1);
  auto tgt = testing::transformed_space(src, random_orthogonal(4, 2), "t", "t", 0.0, 0);
  auto dict = index_dictionary(0, 30, "s", "t");
  dict.add("s0", "ghost");
  dict.add("ghost", "t0");
  auto map = fit_procrustes(src, tgt, dict);
  CHECK(map.report.retained_pairs == 30);
  CHECK(map.report.dropped_pairs == 2);
  SeedDictionary none;
  none.add("x", "y");
  CHECK_THROWS_AS(fit_procrustes(src, tgt, none), FormatError);
}

TEST_CASE("CSLS score and retrieval match the exhaustive oracle") {
  kernels::ScopedBackend scalar(kernels::Backend::scalar);
  auto src = testing::random_unit_space("s", "s", 120, 6, 11);
  auto tgt = testing::transformed_space(src, random_orthogonal(6, 12), "t", "t", 0.3, 13);
  AlignmentMap map = fit_procrustes(src, tgt, index_dictionary(0, 60, "s", "t"));
  const std::size_t k = 10;
  CslsOracle oracle(src, tgt, map.weights);
  VectorPool mapped_pool{std::span<const double>(), 6};
  std::vector<double> flat;
  for (const auto& v : oracle.mapped) flat.insert(flat.end(), v.begin(), v.end());
  mapped_pool.values = flat;
  VectorPool target_pool{tgt.matrix(), 6};
  CslsRetriever retriever(src, tgt, map, k);
  Rng rng(99);
  for (int q = 0; q < 100; ++q) {
    const std::size_t s = rng.below(src.size());
    const std::size_t t = rng.below(tgt.size());
    CHECK(csls_score(oracle.mapped[s], oracle.target[t], mapped_pool, target_pool, k) ==
          oracle.score(s, t, k));
    const auto ranking = oracle.ranking(s, k);
    const auto got = translate_word(src, tgt, map, src.word(s), 5, k);
    REQUIRE(got.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(got[i].index == ranking[i]);
      CHECK(got[i].score == oracle.score(s, ranking[i], k));
    }
    CHECK(retriever.translate_row(s, 1)[0].index == ranking[0]);
  }
}

TEST_CASE("CSLS ties break by target index") {
  // Two identical target vectors: the lower index must win.
  auto src = parse_vec("3 2\nx 1 0\ny 0 1\nz -1 0\n", "s");
  auto tgt = parse_vec("3 2\nq 1 0\nr 1 0\nu 0 1\n", "t");
  auto map = AlignmentMap::identity(2, "s", "t");
  auto got = translate_word(normalize(src), normalize(tgt), map, "x", 2, 1);
  CHECK(got[0].word == "q");
  CHECK(got[1].word == "r");
  CHECK(got[0].score == got[1].score);
}

TEST_CASE("mean_top_k_similarity validates k") {
  std::vector<double> pool{1, 0, 0, 1};
  VectorPool p{pool, 2};
  std::vector<double> q{1, 0};
  CHECK(mean_top_k_similarity(q, p, 1) == 1.0);
  CHECK(mean_top_k_similarity(q, p, 2) == 0.5);
  CHECK_THROWS_AS(mean_top_k_similarity(q, p, 0), FormatError);
  CHECK_THROWS_AS(mean_top_k_similarity(q, p, 3), FormatError);
}

TEST_CASE("RCSLS returns an iterate at least as good as its start") {
  auto src = testing::random_unit_space("s", "s", 300, 8, 21);
  auto tgt = testing::transformed_space(src, random_orthogonal(8, 22), "t", "t", 0.05, 23);
  auto train = index_dictionary(0, 200, "s", "t");
  auto init = fit_procrustes(src, tgt, train);
  AlignHyper hyper;
  auto fitted = fit_rcsls(src, tgt, train, init, hyper);
  CHECK(fitted.method == AlignMethod::rcsls);
  auto pairs = resolve_pairs(src, tgt, train);
  const double before = rcsls_objective(src, tgt, pairs, init.weights, hyper);
  const double after = rcsls_objective(src, tgt, pairs, fitted.weights, hyper);
  CHECK(after >= before);
  CHECK(fitted.report.objective == doctest::Approx(after).epsilon(1e-12));
}

TEST_CASE("apply_map with the identity reproduces the input") {
  auto raw = parse_vec("2 3\na 1 2 3\nb -4 5 0.5\n", "s");
  auto out = apply_map(raw, AlignmentMap::identity(3, "s", "t"));
  CHECK(out.words() == raw.words());
  for (std::size_t i = 0; i < 6; ++i) CHECK(out.matrix()[i] == raw.matrix()[i]);
  CHECK(out.language() == "s");  // words are still source words
  CHECK_THROWS_AS(apply_map(raw, AlignmentMap::identity(3, "q", "t")), FormatError);
}

TEST_CASE("eval_alignment requires resolvable pairs") {
  auto src = testing::random_unit_space("s", "s", 20, 4, 1);
  SeedDictionary d;
  d.add("nope", "nada");
  CHECK_THROWS_AS(eval_alignment(src, src, AlignmentMap::identity(4, "s", "s"), d), FormatError);
}
