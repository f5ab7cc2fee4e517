#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "xling/tensor.hpp"

namespace xling::nn {

enum class Activation { identity, relu, tanh, sigmoid };

std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

double activate(Activation a, double x);
/// Derivative expressed through the pre-activation `x` and the output `y`.
double activation_derivative(Activation a, double x, double y);

double sigmoid(double x);

enum class Mode { train, eval };

/// One convolution channel: F filters of height h spanning the full input width.
struct ConvChannel {
  std::size_t height = 0;
  Activation activation = Activation::relu;
  Tensor weights;  // F x (height * width); a filter's rows are contiguous
  Tensor bias;     // F

  std::size_t num_filters() const { return weights.rows(); }
  std::size_t width() const { return weights.cols() / height; }
};

/// Feature maps c_i = f(<w, x_{i:i+h-1}> + b) for every window; shape F x (n-h+1).
Tensor conv_forward(const Tensor& input, const ConvChannel& channel);

/// Largest entry of a non-empty feature map.
double max_over_time(std::span<const double> map);

/// Fully connected layer applied to row vectors: activation(x * weight + bias).
struct Dense {
  Tensor weight;  // in x out
  Tensor bias;    // out

  std::size_t inputs() const { return weight.rows(); }
  std::size_t outputs() const { return weight.cols(); }
};

std::vector<double> dense_forward(std::span<const double> x, const Dense& layer,
                                  Activation activation);

std::vector<double> softmax(std::span<const double> logits);

struct DropoutResult {
  std::vector<double> output;
  std::vector<double> mask;  // 0 for dropped entries, 1/(1-rate) for survivors
};

/// Inverted dropout. Eval mode is the identity with an all-ones mask.
DropoutResult dropout_forward(std::span<const double> x, double rate, Mode mode,
                              std::uint64_t seed);

/// -ln(max(probs[label], 1e-12)).
double cross_entropy_loss(std::span<const double> probs, std::size_t label);

inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace xling::nn
