#include "xling/nn/lstm.hpp"

#include <cmath>
#include <string>

#include "xling/error.hpp"
#include "xling/kernels.hpp"
#include "xling/nn/layers.hpp"

namespace xling::nn {

std::string_view variant_name(LstmVariant v) {
  return v == LstmVariant::paper_exact ? "paper_exact" : "standard";
}

LstmVariant variant_from_name(std::string_view name) {
  if (name == "paper_exact") return LstmVariant::paper_exact;
  if (name == "standard") return LstmVariant::standard;
  throw FormatError("unknown LSTM variant '" + std::string(name) + "'");
}

namespace detail {

namespace {
double identity_value(double x) { return x; }
double identity_derivative(double, double) { return 1.0; }
double sigmoid_derivative(double, double y) { return y * (1.0 - y); }
}  // namespace

CellSquash squash_for(LstmVariant v) {
  switch (v) {
    case LstmVariant::paper_exact: return {&sigmoid, &sigmoid_derivative};
    case LstmVariant::standard: return {&identity_value, &identity_derivative};
  }
  throw FormatError("unknown LSTM variant");
}

LstmState lstm_cell_step_with(std::span<const double> x, std::span<const double> h_prev,
                              std::span<const double> c_prev, const LstmParams& params,
                              const CellSquash& squash) {
  const std::size_t d = params.input_dim();
  const std::size_t hidden = params.hidden();
  if (x.size() != d || h_prev.size() != hidden || c_prev.size() != hidden) {
    throw FormatError("lstm_cell_step: expected x of " + std::to_string(d) +
                      " and state of " + std::to_string(hidden));
  }
  std::array<std::vector<double>, 4> gate;
  for (std::size_t g = 0; g < 4; ++g) {
    gate[g] = params.has_bias
                  ? std::vector<double>(params.biases[g].values().begin(),
                                        params.biases[g].values().end())
                  : std::vector<double>(hidden, 0.0);
    for (std::size_t i = 0; i < d; ++i) kernels::axpy(x[i], params.input_weights[g].row(i), gate[g]);
    for (std::size_t j = 0; j < hidden; ++j) {
      kernels::axpy(h_prev[j], params.recurrent_weights[g].row(j), gate[g]);
    }
  }
  LstmState next{std::vector<double>(hidden), std::vector<double>(hidden)};
  for (std::size_t j = 0; j < hidden; ++j) {
    const double f = sigmoid(gate[kForget][j]);
    const double in = sigmoid(gate[kInput][j]);
    const double o = sigmoid(gate[kOutput][j]);
    const double cand = std::tanh(gate[kCandidate][j]);
    next.c[j] = squash.value(f * c_prev[j] + in * cand);
    next.h[j] = std::tanh(next.c[j]) * o;
  }
  return next;
}

}  // namespace detail

LstmState lstm_cell_step(std::span<const double> x, std::span<const double> h_prev,
                         std::span<const double> c_prev, const LstmParams& params) {
  return detail::lstm_cell_step_with(x, h_prev, c_prev, params, detail::squash_for(params.variant));
}

Tensor lstm_layer_forward(const Tensor& sequence, const LstmParams& params) {
  if (sequence.rank() != 2 || sequence.rows() == 0) {
    throw FormatError("lstm_layer_forward: sequence must be a non-empty matrix");
  }
  if (sequence.cols() != params.input_dim()) {
    throw FormatError("lstm_layer_forward: input width " + std::to_string(sequence.cols()) +
                      " does not match " + std::to_string(params.input_dim()));
  }
  const std::size_t hidden = params.hidden();
  Tensor out({sequence.rows(), hidden});
  LstmState state{std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)};
  for (std::size_t t = 0; t < sequence.rows(); ++t) {
    state = lstm_cell_step(sequence.row(t), state.h, state.c, params);
    std::copy(state.h.begin(), state.h.end(), out.row(t).begin());
  }
  return out;
}

}  // namespace xling::nn
