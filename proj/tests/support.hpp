#pragma once

// Shared helpers for the test binaries: random fixtures and independent
// reference computations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xling/embedstore.hpp"
#include "xling/nn/model.hpp"
#include "xling/rng.hpp"
#include "xling/tensor.hpp"

namespace xling::testing {

inline Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed,
                            double scale = 1.0) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.values()) v = scale * rng.gaussian();
  return t;
}

/// Mean cross-entropy over a batch computed from forward passes only.
inline double batch_loss(const nn::ModelParams& params, const std::vector<nn::Sample>& batch,
                         nn::Mode mode, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    auto probs = nn::forward(*batch[j].input, params, mode, nn::sample_dropout_seed(seed, j));
    total += -std::log(std::max(probs[batch[j].label], 1e-12));
  }
  return total / static_cast<double>(batch.size());
}

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  double analytic_l1 = 0.0;
};

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps coordinates
// whose true gradient is ~0 from dividing round-off by round-off.
inline constexpr double kRelativeErrorFloor = 1e-10;

/// Central finite differences over every trainable coordinate.
inline GradientCheck finite_difference_check(const nn::ModelParams& params,
                                             const nn::ModelParams& analytic,
                                             const std::vector<nn::Sample>& batch, nn::Mode mode,
                                             std::uint64_t seed, double step = 1e-5) {
  GradientCheck out;
  nn::ModelParams probe = params;
  auto probe_tensors = nn::tensors(probe);
  auto grad_tensors = nn::tensors(analytic);
  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    for (std::size_t i = 0; i < probe_tensors[t]->size(); ++i) {
      double& v = (*probe_tensors[t])[i];
      const double saved = v;
      v = saved + step;
      const double plus = batch_loss(probe, batch, mode, seed);
      v = saved - step;
      const double minus = batch_loss(probe, batch, mode, seed);
      v = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = (*grad_tensors[t])[i];
      out.analytic_l1 += std::abs(a);
      const double denom = std::max({std::abs(a), std::abs(numeric), kRelativeErrorFloor});
      out.max_relative_error = std::max(out.max_relative_error, std::abs(a - numeric) / denom);
      ++out.coordinates;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSLS by exhaustive sorting. Written without the kernels so it can serve as
// an oracle; with the scalar backend the summation order matches exactly.

inline double plain_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<double> plain_map(std::span<const double> x, const Tensor& w) {
  std::vector<double> out(w.cols(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += x[i] * w.at(i, j);
  }
  double ss = 0.0;
  for (double v : out) ss += v * v;
  const double n = std::sqrt(ss);
  for (double& v : out) v /= n;
  return out;
}

// Mean of the k largest cosines, summed largest first.
inline double sorted_top_k_mean(std::span<const double> q, const std::vector<std::vector<double>>& pool,
                                std::size_t k) {
  std::vector<double> sims;
  for (const auto& p : pool) sims.push_back(plain_dot(q, p));
  std::sort(sims.begin(), sims.end(), std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += sims[i];
  return s / static_cast<double>(k);
}

struct CslsOracle {
  std::vector<std::vector<double>> mapped;  // mapped, normalized source rows
  std::vector<std::vector<double>> target;

  CslsOracle(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const Tensor& w) {
    for (std::size_t i = 0; i < src.size(); ++i) mapped.push_back(plain_map(src.row(i), w));
    for (std::size_t i = 0; i < tgt.size(); ++i) {
      target.emplace_back(tgt.row(i).begin(), tgt.row(i).end());
    }
  }

  double score(std::size_t s, std::size_t t, std::size_t k) const {
    return 2.0 * plain_dot(mapped[s], target[t]) - sorted_top_k_mean(mapped[s], target, k) -
           sorted_top_k_mean(target[t], mapped, k);
  }

  // Target indices ranked by score desc, index asc.
  std::vector<std::size_t> ranking(std::size_t s, std::size_t k) const {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t t = 0; t < target.size(); ++t) all.push_back({-score(s, t, k), t});
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> out;
    for (const auto& [neg, t] : all) out.push_back(t);
    return out;
  }
};

/// Space of `n` unit vectors named <prefix>0..n-1 with Gaussian directions.
inline EmbeddingSpace random_unit_space(std::string language, std::string prefix, std::size_t n,
                                        std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> words;
  std::vector<double> m(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    words.push_back(prefix + std::to_string(i));
    for (std::size_t j = 0; j < dim; ++j) m[i * dim + j] = rng.gaussian();
  }
  return normalize(EmbeddingSpace(std::move(language), dim, std::move(words), std::move(m)));
}

/// Rows of `space` multiplied by `w` (plus optional noise), renamed with `prefix`.
inline EmbeddingSpace transformed_space(const EmbeddingSpace& space, const Tensor& w,
                                        std::string language, std::string prefix, double noise,
                                        std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = space.dim();
  std::vector<std::string> words;
  std::vector<double> m(space.size() * d, 0.0);
  for (std::size_t i = 0; i < space.size(); ++i) {
    words.push_back(prefix + std::to_string(i));
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) m[i * d + b] += space.row(i)[a] * w.at(a, b);
    }
    for (std::size_t b = 0; b < d; ++b) m[i * d + b] += noise * rng.gaussian();
  }
  return normalize(EmbeddingSpace(std::move(language), d, std::move(words), std::move(m)));
}

}  // namespace xling::testing
