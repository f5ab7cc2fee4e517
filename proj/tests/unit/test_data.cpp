#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "xling/data.hpp"
#include "xling/error.hpp"
#include "xling/rng.hpp"

using namespace xling;

namespace {

Corpus labelled(std::map<std::string, std::size_t> counts) {
  Corpus c{"en", {}};
  for (const auto& [label, n] : counts) {
    for (std::size_t i = 0; i < n; ++i) c.docs.push_back({label, label + " doc " + std::to_string(i)});
  }
  return c;
}

std::multiset<std::string> texts(const Corpus& c) {
  std::multiset<std::string> out;
  for (const auto& d : c.docs) out.insert(d.label + "|" + d.text);
  return out;
}

}  // namespace

TEST_CASE("parse_corpus") {
  auto c = parse_corpus("pos\tgreat café\nneg\tbad\\tthing\n\n", "fr");
  REQUIRE(c.size() == 2);
  CHECK(c.language == "fr");
  CHECK(c.docs[0] == LabeledDoc{"pos", "great café"});
  CHECK(c.docs[1].text == "bad\tthing");
  CHECK_THROWS_WITH_AS(parse_corpus("pos no tab\n", "x"), doctest::Contains("line 1"), FormatError);
  CHECK_THROWS_AS(parse_corpus("\ttext\n", "x"), FormatError);
  CHECK_THROWS_AS(parse_corpus("pos\t\xff\xfe\n", "x"), FormatError);
}

TEST_CASE("corpus write-read is an identity") {
  Corpus c{"de", {{"a", "plain"}, {"b", "tab\there"}, {"a", "new\nline and back\\slash \\t literal"},
                  {"c", "ünïcödé €"}, {"b", "cr\r"}, {"a", ""}}};
  auto path = std::filesystem::temp_directory_path() / "xling-unit" / "corpus.tsv";
  write_corpus(c, path);
  CHECK(read_corpus(path, "de") == c);
  CHECK(parse_corpus(format_corpus(c), "de") == c);
  CHECK_THROWS_AS(read_corpus(path.parent_path() / "missing.tsv", "de"), IoError);
  Corpus bad{"x", {{"has\ttab", "t"}}};
  CHECK_THROWS_AS(format_corpus(bad), FormatError);
}

TEST_CASE("escape and unescape") {
  for (std::string s : {"", "a\\b", "\t\n\r", "\\t", "x\\"}) CHECK(unescape_field(escape_field(s)) == s);
  CHECK(escape_field("a\tb") == "a\\tb");
}

TEST_CASE("tokenize") {
  CHECK(tokenize("Hello, world!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  \t\n ").empty());
  CHECK(tokenize("«Ça va?» — ÉTÉ") == std::vector<std::string>{"ça", "va", "été"});
  CHECK(tokenize("ПРИВЕТ мир") == std::vector<std::string>{"привет", "мир"});
  CHECK(tokenize("don't stop", false) == std::vector<std::string>{"don't", "stop"});
  CHECK(tokenize("Keep CASE", false) == std::vector<std::string>{"Keep", "CASE"});
  CHECK(tokenize("a b　c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("... !!! ,") .empty());
}

TEST_CASE("tokenize is total and idempotent on its own output") {
  Rng rng(3);
  const std::vector<std::string> pieces{"Foo", "bar,", " ", "\t", "(baz)", "É", "ß", "\xff", "!", "q\"", "日本", "。"};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    const auto n = rng.below(12);
    for (std::uint64_t j = 0; j < n; ++j) text += pieces[rng.below(pieces.size())];
    auto tokens = tokenize(text);
    for (const auto& t : tokens) CHECK_FALSE(t.empty());
    std::string joined;
    for (const auto& t : tokens) joined += (joined.empty() ? "" : " ") + t;
    CHECK(tokenize(joined) == tokens);
  }
}

TEST_CASE("truncate_tokens") {
  std::vector<std::string> many(150, "w");
  many[99] = "last";
  auto t = truncate_tokens(many);
  CHECK(t.size() == 100);
  CHECK(t.back() == "last");
  CHECK(truncate_tokens(std::vector<std::string>(40, "x")).size() == 40);
  CHECK(truncate_tokens({}).empty());
  CHECK_THROWS_AS(truncate_tokens({"a"}, 0), FormatError);
}

TEST_CASE("split counts follow the floor-plus-remainder rule") {
  auto c = split_counts(1000, {});
  CHECK(c.train == 700);
  CHECK(c.validation == 150);
  CHECK(c.test == 150);
  auto odd = split_counts(11, {});
  CHECK(odd.validation == 1);
  CHECK(odd.test == 1);
  CHECK(odd.train == 9);
  CHECK(split_counts(20, {}).validation == 3);
}

TEST_CASE("stratified_split on 1000 docs per label") {
  auto corpus = labelled({{"books", 1000}, {"dvd", 1000}, {"music", 1000}});
  auto s = stratified_split(corpus, {.seed = 4});
  for (const auto& label : {"books", "dvd", "music"}) {
    CHECK(s.train.label_counts()[label] == 700);
    CHECK(s.validation.label_counts()[label] == 150);
    CHECK(s.test.label_counts()[label] == 150);
  }
  CHECK(s.train.language == "en");
}

TEST_CASE("stratified_split is a deterministic stratified partition") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<std::string, std::size_t> counts;
    const auto labels = 1 + rng.below(4);
    for (std::uint64_t l = 0; l < labels; ++l) counts["L" + std::to_string(l)] = 3 + rng.below(40);
    auto corpus = labelled(counts);
    SplitSpec spec{.seed = rng.next()};
    auto s = stratified_split(corpus, spec);
    auto all = texts(s.train);
    for (const auto& t : texts(s.validation)) all.insert(t);
    for (const auto& t : texts(s.test)) all.insert(t);
    CHECK(all == texts(corpus));  // disjoint and exhaustive (texts are unique)
    for (const auto& [label, n] : counts) {
      const auto want = split_counts(n, spec);
      CHECK(s.train.label_counts()[label] == want.train);
      CHECK(s.validation.label_counts()[label] == want.validation);
      CHECK(s.test.label_counts()[label] == want.test);
      // Proportions within one document of the overall share.
      CHECK(std::abs(static_cast<double>(s.test.label_counts()[label]) - 0.15 * static_cast<double>(n)) <= 1.0);
    }
    auto again = stratified_split(corpus, spec);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);
  }
  CHECK_THROWS_AS(stratified_split(labelled({{"a", 10}, {"b", 2}}), {}), FormatError);
}

TEST_CASE("LabelEncoder") {
  auto enc = LabelEncoder::fit(labelled({{"music", 1}, {"books", 2}, {"dvd", 1}}));
  CHECK(enc.encode("books") == 0);
  CHECK(enc.encode("dvd") == 1);
  CHECK(enc.encode("music") == 2);
  for (std::size_t i = 0; i < enc.size(); ++i) CHECK(enc.encode(enc.decode(i)) == i);
  CHECK_THROWS_AS(enc.encode("games"), FormatError);
  auto a = labelled({{"x", 1}});
  auto b = labelled({{"y", 1}});
  CHECK(LabelEncoder::fit(std::vector<const Corpus*>{&b, &a}).labels() == std::vector<std::string>{"x", "y"});
}
