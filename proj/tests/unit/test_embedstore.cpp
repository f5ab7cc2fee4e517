#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "xling/embedstore.hpp"
#include "xling/error.hpp"

using namespace xling;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "xling-unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("parse a small .vec file") {
  auto s = parse_vec("2 3\nhello 1 0 0\nwörld 0.5 -0.25 1e-3\n", "en");
  CHECK(s.size() == 2);
  CHECK(s.dim() == 3);
  CHECK(s.language() == "en");
  CHECK(s.word(1) == "wörld");
  CHECK(*s.index_of("hello") == 0);
  CHECK_FALSE(s.index_of("missing"));
  CHECK(s.row(1)[2] == 1e-3);
  CHECK((*lookup(s, "hello"))[0] == 1.0);
  CHECK_FALSE(lookup(s, "nope"));
}

TEST_CASE("malformed .vec files are rejected") {
  CHECK_THROWS_AS(parse_vec("", "x"), FormatError);
  CHECK_THROWS_AS(parse_vec("2 3\na 1 2 3\n", "x"), FormatError);        // too few rows
  CHECK_THROWS_AS(parse_vec("1 3\na 1 2\n", "x"), FormatError);          // short row
  CHECK_THROWS_AS(parse_vec("1 2\na 1 zz\n", "x"), FormatError);         // bad number
  CHECK_THROWS_AS(parse_vec("2 2\na 1 2\na 3 4\n", "x"), FormatError);   // duplicate word
  CHECK_THROWS_AS(parse_vec("1 2\na 1 nan\n", "x"), FormatError);
  CHECK_THROWS_AS(load_vec(temp_path("does-not-exist.vec"), "x"), IoError);
}

TEST_CASE(".vec load-save-load is an identity") {
  auto space = testing::random_unit_space("xx", "w", 50, 7, 5);
  // Unnormalized values with awkward decimals too.
  std::vector<double> m(space.matrix().begin(), space.matrix().end());
  for (double& v : m) v *= 1234.5678;
  EmbeddingSpace raw("xx", 7, space.words(), m);
  const auto path = temp_path("roundtrip.vec");
  save_vec(raw, path);
  const auto back = load_vec(path, "xx");
  CHECK(back.words() == raw.words());
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(back.matrix()[i] == raw.matrix()[i]);
  CHECK(format_vec(back) == format_vec(raw));
}

TEST_CASE("normalize gives unit rows and is idempotent") {
  auto raw = parse_vec("2 2\na 3 4\nb -1 0\n", "x");
  auto n = normalize(raw);
  CHECK(n.normalized());
  CHECK(n.row(0)[0] == doctest::Approx(0.6));
  CHECK(n.row(0)[1] == doctest::Approx(0.8));
  auto twice = normalize(n);
  for (std::size_t i = 0; i < 4; ++i) CHECK(twice.matrix()[i] == doctest::Approx(n.matrix()[i]).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(normalize(parse_vec("1 2\nzero 0 0\n", "x")), doctest::Contains("zero"), FormatError);
}

TEST_CASE("padding values are a pure function of their coordinates") {
  auto p = PaddingPolicy::noise(0.1, 42);
  CHECK(p.value(3, 4) == p.value(3, 4));
  CHECK(p.value(3, 4) != p.value(4, 3));
  CHECK(PaddingPolicy::zero().value(1, 1) == 0.0);
  // Mean and spread of the noise.
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = PaddingPolicy::noise(1.0, 7).value(static_cast<std::size_t>(i), 0);
    sum += v;
    sq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("embed_sequence stacks, truncates and pads") {
  auto space = parse_vec("2 2\na 1 0\nb 0 1\n", "x");
  std::vector<std::string> tokens{"a", "zzz", "b", "a", "b"};
  SUBCASE("zero padding") {
    auto e = embed_sequence(space, tokens, 4, PaddingPolicy::zero());
    CHECK(e.matrix.shape() == std::vector<std::size_t>{4, 2});
    CHECK(e.oov_count == 1);
    CHECK(e.matrix.at(0, 0) == 1.0);
    CHECK(e.matrix.at(1, 0) == 0.0);
    CHECK(e.matrix.at(2, 1) == 1.0);
    CHECK(e.matrix.at(3, 0) == 1.0);
  }
  SUBCASE("noise fills the OOV row and the tail") {
    auto policy = PaddingPolicy::noise(0.1, 9);
    auto e = embed_sequence(space, std::span(tokens).first(2), 4, policy);
    CHECK(e.oov_count == 1);
    CHECK(e.matrix.at(1, 0) == policy.value(1, 0));
    CHECK(e.matrix.at(3, 1) == policy.value(3, 1));
    CHECK(e.matrix.at(3, 1) != 0.0);
  }
  CHECK_THROWS_AS(embed_sequence(space, tokens, 0, PaddingPolicy::zero()), FormatError);
}
