#pragma once

#include <cstdint>
#include <vector>

#include "xling/nn/model.hpp"

namespace xling::nn {

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const ModelParams& params);
};

/// One bias-corrected Adam update:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,  t <- t+1
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// Throws before mutating anything if a gradient is non-finite or shapes disagree.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr);

/// Same update over explicit tensor lists.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, double lr);

}  // namespace xling::nn
