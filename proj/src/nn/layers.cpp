#include "xling/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xling/error.hpp"
#include "xling/kernels.hpp"
#include "xling/rng.hpp"

namespace xling::nn {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "unknown";
}

Activation activation_from_name(std::string_view name) {
  for (Activation a : {Activation::identity, Activation::relu, Activation::tanh,
                       Activation::sigmoid}) {
    if (activation_name(a) == name) return a;
  }
  throw FormatError("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return sigmoid(x);
  }
  return x;
}

double activation_derivative(Activation a, double x, double y) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - y * y;
    case Activation::sigmoid: return y * (1.0 - y);
  }
  return 1.0;
}

Tensor conv_forward(const Tensor& input, const ConvChannel& channel) {
  if (input.rank() != 2) throw FormatError("conv_forward: input must be a matrix");
  const std::size_t n = input.rows();
  const std::size_t k = input.cols();
  const std::size_t h = channel.height;
  if (h == 0 || channel.weights.cols() != h * k) {
    throw FormatError("conv_forward: filter " + channel.weights.shape_string() +
                      " does not span input width " + std::to_string(k) + " at height " +
                      std::to_string(h));
  }
  if (n < h) {
    throw FormatError("conv_forward: sequence length " + std::to_string(n) +
                      " is shorter than filter height " + std::to_string(h));
  }
  const std::size_t positions = n - h + 1;
  const std::size_t filters = channel.num_filters();
  Tensor out({filters, positions});
  for (std::size_t f = 0; f < filters; ++f) {
    auto w = channel.weights.row(f);
    for (std::size_t i = 0; i < positions; ++i) {
      // Rows i..i+h-1 are contiguous in row-major storage.
      std::span<const double> window(input.data() + i * k, h * k);
      out.at(f, i) = activate(channel.activation, kernels::dot(w, window) + channel.bias[f]);
    }
  }
  return out;
}

double max_over_time(std::span<const double> map) {
  if (map.empty()) throw FormatError("max_over_time: empty feature map");
  return *std::max_element(map.begin(), map.end());
}

std::vector<double> dense_forward(std::span<const double> x, const Dense& layer,
                                  Activation activation) {
  if (x.size() != layer.inputs() || layer.bias.size() != layer.outputs()) {
    throw FormatError("dense_forward: input of length " + std::to_string(x.size()) +
                      " against weight " + layer.weight.shape_string());
  }
  std::vector<double> out(layer.bias.values().begin(), layer.bias.values().end());
  for (std::size_t i = 0; i < x.size(); ++i) kernels::axpy(x[i], layer.weight.row(i), out);
  for (double& v : out) v = activate(activation, v);
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw FormatError("softmax: empty logits");
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericError("softmax: non-finite logit");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

DropoutResult dropout_forward(std::span<const double> x, double rate, Mode mode,
                              std::uint64_t seed) {
  if (!(rate >= 0.0) || rate >= 1.0) throw FormatError("dropout rate must lie in [0, 1)");
  DropoutResult r{std::vector<double>(x.begin(), x.end()), std::vector<double>(x.size(), 1.0)};
  if (mode == Mode::eval) return r;
  const double keep_scale = 1.0 / (1.0 - rate);
  Rng rng(seed);
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.mask[i] = rng.uniform() >= rate ? keep_scale : 0.0;
    r.output[i] = x[i] * r.mask[i];
  }
  return r;
}

double cross_entropy_loss(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) {
    throw FormatError("label " + std::to_string(label) + " out of range for " +
                      std::to_string(probs.size()) + " classes");
  }
  return -std::log(std::max(probs[label], kProbabilityFloor));
}

}  // namespace xling::nn
