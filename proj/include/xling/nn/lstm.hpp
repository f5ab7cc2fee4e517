#pragma once

#include <array>
#include <span>
#include <vector>

#include "xling/tensor.hpp"

namespace xling::nn {

// Cell state update variants. `paper_exact` wraps the new cell state in a
// logistic sigmoid, C_t = sigmoid(f*C_{t-1} + i*C~_t); `standard` is the
// usual C_t = f*C_{t-1} + i*C~_t. Both emit h_t = tanh(C_t) * o_t.
enum class LstmVariant { paper_exact, standard };

std::string_view variant_name(LstmVariant v);
LstmVariant variant_from_name(std::string_view name);

enum Gate : std::size_t { kForget = 0, kInput = 1, kOutput = 2, kCandidate = 3 };

struct LstmParams {
  std::array<Tensor, 4> input_weights;      // U, each d x H
  std::array<Tensor, 4> recurrent_weights;  // W, each H x H
  std::array<Tensor, 4> biases;             // H each; empty unless has_bias
  bool has_bias = false;
  LstmVariant variant = LstmVariant::standard;

  std::size_t input_dim() const { return input_weights[0].rows(); }
  std::size_t hidden() const { return input_weights[0].cols(); }
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

LstmState lstm_cell_step(std::span<const double> x, std::span<const double> h_prev,
                         std::span<const double> c_prev, const LstmParams& params);

/// Runs the cell over every row of `sequence` (T x d) from zero state; returns T x H.
Tensor lstm_layer_forward(const Tensor& sequence, const LstmParams& params);

namespace detail {

/// Squashing applied to the cell-state sum. `paper_exact` uses the sigmoid;
/// tests swap in other functions to relate the two variants.
struct CellSquash {
  double (*value)(double);
  double (*derivative)(double pre, double post);
};

CellSquash squash_for(LstmVariant v);

LstmState lstm_cell_step_with(std::span<const double> x, std::span<const double> h_prev,
                              std::span<const double> c_prev, const LstmParams& params,
                              const CellSquash& squash);

}  // namespace detail

}  // namespace xling::nn
