#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xling/nn/layers.hpp"
#include "xling/nn/lstm.hpp"
#include "xling/tensor.hpp"

namespace xling::nn {

enum class ModelKind { cnn, rnn };
std::string_view model_kind_name(ModelKind k);
ModelKind model_kind_from_name(std::string_view name);

/// How the second LSTM layer's output sequence reaches the dense layers.
enum class SequenceReduction { final_state, flatten };
std::string_view reduction_name(SequenceReduction r);
SequenceReduction reduction_from_name(std::string_view name);

inline constexpr std::array<std::size_t, 4> kFilterHeights{2, 3, 4, 5};

struct CnnConfig {
  std::size_t embed_dim = 300;
  std::size_t max_len = 100;
  std::size_t filters = 100;  // per channel
  std::size_t dense = 128;
  std::size_t classes = 3;
  Activation conv_activation = Activation::relu;
  double dropout = 0.5;

  friend bool operator==(const CnnConfig&, const CnnConfig&) = default;
};

struct RnnConfig {
  std::size_t embed_dim = 300;
  std::size_t max_len = 100;
  std::size_t hidden1 = 128;
  std::size_t hidden2 = 128;
  std::size_t dense = 128;
  std::size_t classes = 3;
  LstmVariant variant = LstmVariant::standard;
  bool lstm_bias = false;
  SequenceReduction reduction = SequenceReduction::final_state;
  double dropout = 0.5;

  friend bool operator==(const RnnConfig&, const RnnConfig&) = default;
};

/// Four parallel convolution + max-over-time channels (heights 2..5), then
/// dense (relu) -> dropout -> dense -> softmax.
struct CnnParams {
  CnnConfig config;
  std::array<ConvChannel, 4> channels;
  Dense dense1;  // 4F x D1
  Dense dense2;  // D1 x classes
};

/// Two stacked LSTM layers, then the same dense head as the CNN.
struct RnnParams {
  RnnConfig config;
  LstmParams layer1;  // d -> H1
  LstmParams layer2;  // H1 -> H2
  Dense dense1;
  Dense dense2;
};

using ModelParams = std::variant<CnnParams, RnnParams>;

ModelKind kind_of(const ModelParams& params);
std::size_t num_classes(const ModelParams& params);
std::size_t max_len(const ModelParams& params);
std::size_t embed_dim(const ModelParams& params);

/// Visits every trainable tensor in a fixed order with a stable name.
void for_each_tensor(ModelParams& params, const std::function<void(std::string_view, Tensor&)>& f);
void for_each_tensor(const ModelParams& params,
                     const std::function<void(std::string_view, const Tensor&)>& f);

std::vector<Tensor*> tensors(ModelParams& params);
std::vector<const Tensor*> tensors(const ModelParams& params);

/// Same structure and config, all values zero.
ModelParams zeros_like(const ModelParams& params);

/// Glorot-uniform weights, zero biases; a pure function of (config, seed).
CnnParams init_cnn(const CnnConfig& config, std::uint64_t seed);
RnnParams init_rnn(const RnnConfig& config, std::uint64_t seed);

std::vector<double> cnn_forward(const Tensor& input, const CnnParams& params, Mode mode,
                                std::uint64_t seed);
std::vector<double> rnn_forward(const Tensor& input, const RnnParams& params, Mode mode,
                                std::uint64_t seed);
std::vector<double> forward(const Tensor& input, const ModelParams& params, Mode mode,
                            std::uint64_t seed);

/// Max-pooled CNN features (length 4F), exposed for inspection and tests.
std::vector<double> cnn_pooled_features(const Tensor& input, const CnnParams& params);

struct Sample {
  const Tensor* input = nullptr;
  std::size_t label = 0;
};

struct GradientResult {
  ModelParams gradients;
  double mean_loss = 0.0;
};

/// Exact gradients of the mean cross-entropy over `batch`. Sample j's dropout
/// mask is seeded from (seed, j) and shared by its forward and backward pass.
GradientResult backward(const ModelParams& params, std::span<const Sample> batch, Mode mode,
                        std::uint64_t seed);

/// Dropout seed of the j-th sample of a batch.
std::uint64_t sample_dropout_seed(std::uint64_t batch_seed, std::size_t j);

}  // namespace xling::nn
