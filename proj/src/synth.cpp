#include "xling/synth.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>

#include "xling/error.hpp"
#include "xling/rng.hpp"

namespace xling {

Tensor random_orthogonal(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g(dim, dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) g(r, c) = rng.gaussian();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t c = 0; c < dim; ++c) {
    if (rr(c, c) < 0) q.col(c) = -q.col(c);
  }
  Tensor out({dim, dim});
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) out.at(r, c) = q(r, c);
  }
  return out;
}

namespace {

std::string word_name(const std::string& lang, std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return lang + buf;
}

Corpus sample_corpus(const SynthConfig& cfg, const std::string& lang,
                     const std::vector<std::string>& labels, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t topic_total = cfg.classes * cfg.topic_words;
  Corpus corpus;
  corpus.language = lang;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % cfg.classes;
    const std::size_t len = cfg.min_length + rng.below(cfg.max_length - cfg.min_length + 1);
    std::string text;
    for (std::size_t t = 0; t < len; ++t) {
      std::size_t word;
      if (rng.uniform() < cfg.signal_rate) {
        word = cls * cfg.topic_words + rng.below(cfg.topic_words);
      } else {
        word = topic_total + rng.below(cfg.neutral_words);
      }
      if (!text.empty()) text += ' ';
      text += word_name(lang, word);
    }
    corpus.docs.push_back({labels[cls], std::move(text)});
  }
  return corpus;
}

LanguageData sample_language(const SynthConfig& cfg, const std::string& lang,
                             const std::vector<std::string>& labels, const SplitSizes& sizes,
                             std::uint64_t seed) {
  return {sample_corpus(cfg, lang, labels, sizes.train, derive_seed(seed, "train", 0)),
          sample_corpus(cfg, lang, labels, sizes.validation, derive_seed(seed, "validation", 0)),
          sample_corpus(cfg, lang, labels, sizes.test, derive_seed(seed, "test", 0))};
}

}  // namespace

SyntheticBilingual make_synthetic(const SynthConfig& cfg) {
  if (cfg.dim == 0 || cfg.classes < 2 || cfg.topic_words == 0 || cfg.neutral_words == 0) {
    throw FormatError("synthetic config needs dim >= 1, classes >= 2 and non-empty vocabularies");
  }
  if (cfg.min_length == 0 || cfg.max_length < cfg.min_length) {
    throw FormatError("synthetic document lengths must satisfy 1 <= min_length <= max_length");
  }
  if (!(cfg.signal_rate >= 0.0 && cfg.signal_rate <= 1.0)) {
    throw FormatError("signal_rate must lie in [0, 1]");
  }
  if (cfg.language_a == cfg.language_b) throw FormatError("synthetic languages must differ");

  const std::size_t d = cfg.dim;
  const std::size_t vocab = cfg.classes * cfg.topic_words + cfg.neutral_words;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  Rng rng(derive_seed(cfg.seed, "synth-vectors", 0));
  std::vector<double> centroids(cfg.classes * d);
  for (auto& v : centroids) v = rng.gaussian() * scale;

  std::vector<std::string> words_a, words_b;
  std::vector<double> a(vocab * d);
  for (std::size_t w = 0; w < vocab; ++w) {
    words_a.push_back(word_name(cfg.language_a, w));
    words_b.push_back(word_name(cfg.language_b, w));
    const std::size_t cls = w / cfg.topic_words;
    const bool topic = cls < cfg.classes;
    for (std::size_t k = 0; k < d; ++k) {
      const double noise = rng.gaussian() * scale;
      a[w * d + k] = topic ? centroids[cls * d + k] + cfg.cluster_spread * noise : noise;
    }
  }

  SyntheticBilingual out;
  out.rotation = random_orthogonal(d, derive_seed(cfg.seed, "synth-rotation", 0));
  std::vector<double> b(vocab * d, 0.0);
  Rng noise(derive_seed(cfg.seed, "synth-noise", 0));
  for (std::size_t w = 0; w < vocab; ++w) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += a[w * d + k] * out.rotation.at(k, j);
      b[w * d + j] = s + cfg.rotation_noise * noise.gaussian();
    }
  }
  out.space_a = EmbeddingSpace(cfg.language_a, d, words_a, std::move(a));
  out.space_b = EmbeddingSpace(cfg.language_b, d, words_b, std::move(b));
  out.dictionary.provenance = "synthetic";
  for (std::size_t w = 0; w < vocab; ++w) out.dictionary.add(words_a[w], words_b[w]);

  for (std::size_t c = 0; c < cfg.classes; ++c) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "class%zu", c);
    out.labels.push_back(buf);
  }
  out.corpus_a = sample_language(cfg, cfg.language_a, out.labels, cfg.sizes_a,
                                 derive_seed(cfg.seed, "synth-corpus", 0));
  out.corpus_b = sample_language(cfg, cfg.language_b, out.labels, cfg.sizes_b,
                                 derive_seed(cfg.seed, "synth-corpus", 1));
  return out;
}

}  // namespace xling
