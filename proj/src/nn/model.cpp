#include "xling/nn/model.hpp"

#include <cmath>
#include <string>
#include <type_traits>

#include "xling/error.hpp"
#include "xling/kernels.hpp"
#include "xling/rng.hpp"

namespace xling::nn {

std::string_view model_kind_name(ModelKind k) { return k == ModelKind::cnn ? "cnn" : "rnn"; }

ModelKind model_kind_from_name(std::string_view name) {
  if (name == "cnn") return ModelKind::cnn;
  if (name == "rnn") return ModelKind::rnn;
  throw FormatError("unknown model kind '" + std::string(name) + "'");
}

std::string_view reduction_name(SequenceReduction r) {
  return r == SequenceReduction::final_state ? "final_state" : "flatten";
}

SequenceReduction reduction_from_name(std::string_view name) {
  if (name == "final_state") return SequenceReduction::final_state;
  if (name == "flatten") return SequenceReduction::flatten;
  throw FormatError("unknown sequence reduction '" + std::string(name) + "'");
}

ModelKind kind_of(const ModelParams& params) {
  return std::holds_alternative<CnnParams>(params) ? ModelKind::cnn : ModelKind::rnn;
}

std::size_t num_classes(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.config.classes; }, params);
}

std::size_t max_len(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.config.max_len; }, params);
}

std::size_t embed_dim(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.config.embed_dim; }, params);
}

namespace {

constexpr const char* kGateSuffix[4] = {"f", "i", "o", "g"};

template <class Params, class F>
void visit_cnn(Params& p, F&& f) {
  for (auto& ch : p.channels) {
    const std::string prefix = "conv" + std::to_string(ch.height);
    f(prefix + ".weight", ch.weights);
    f(prefix + ".bias", ch.bias);
  }
  f("dense1.weight", p.dense1.weight);
  f("dense1.bias", p.dense1.bias);
  f("dense2.weight", p.dense2.weight);
  f("dense2.bias", p.dense2.bias);
}

template <class Lstm, class F>
void visit_lstm(const std::string& prefix, Lstm& l, F&& f) {
  for (std::size_t g = 0; g < 4; ++g) f(prefix + ".U_" + kGateSuffix[g], l.input_weights[g]);
  for (std::size_t g = 0; g < 4; ++g) f(prefix + ".W_" + kGateSuffix[g], l.recurrent_weights[g]);
  if (l.has_bias) {
    for (std::size_t g = 0; g < 4; ++g) f(prefix + ".b_" + kGateSuffix[g], l.biases[g]);
  }
}

template <class Params, class F>
void visit_rnn(Params& p, F&& f) {
  visit_lstm("lstm1", p.layer1, f);
  visit_lstm("lstm2", p.layer2, f);
  f("dense1.weight", p.dense1.weight);
  f("dense1.bias", p.dense1.bias);
  f("dense2.weight", p.dense2.weight);
  f("dense2.bias", p.dense2.bias);
}

template <class Variant, class F>
void visit_any(Variant& params, F&& f) {
  std::visit(
      [&](auto& p) {
        using P = std::remove_const_t<std::remove_reference_t<decltype(p)>>;
        if constexpr (std::is_same_v<P, CnnParams>) {
          visit_cnn(p, f);
        } else {
          visit_rnn(p, f);
        }
      },
      params);
}

}  // namespace

void for_each_tensor(ModelParams& params,
                     const std::function<void(std::string_view, Tensor&)>& f) {
  visit_any(params, [&](const std::string& name, Tensor& t) { f(name, t); });
}

void for_each_tensor(const ModelParams& params,
                     const std::function<void(std::string_view, const Tensor&)>& f) {
  visit_any(params, [&](const std::string& name, const Tensor& t) { f(name, t); });
}

std::vector<Tensor*> tensors(ModelParams& params) {
  std::vector<Tensor*> out;
  for_each_tensor(params, [&](std::string_view, Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> tensors(const ModelParams& params) {
  std::vector<const Tensor*> out;
  for_each_tensor(params, [&](std::string_view, const Tensor& t) { out.push_back(&t); });
  return out;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams out = params;
  for_each_tensor(out, [](std::string_view, Tensor& t) { t.fill(0.0); });
  return out;
}

namespace {

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng(seed);
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
}

Dense make_dense(std::size_t in, std::size_t out) { return Dense{Tensor({in, out}), Tensor({out})}; }

LstmParams make_lstm(std::size_t in, std::size_t hidden, bool bias, LstmVariant variant) {
  LstmParams l;
  for (std::size_t g = 0; g < 4; ++g) {
    l.input_weights[g] = Tensor({in, hidden});
    l.recurrent_weights[g] = Tensor({hidden, hidden});
    if (bias) l.biases[g] = Tensor({hidden});
  }
  l.has_bias = bias;
  l.variant = variant;
  return l;
}

void require_positive(std::size_t v, const char* what) {
  if (v == 0) throw FormatError(std::string("model dimension '") + what + "' must be positive");
}

void require_dropout(double rate) {
  if (!(rate >= 0.0) || rate >= 1.0) throw FormatError("dropout rate must lie in [0, 1)");
}

// Every tensor of rank 2 is a weight matrix (rows = fan-in); rank 1 tensors are biases.
void init_weights(ModelParams& params, std::uint64_t seed) {
  std::uint64_t index = 0;
  for_each_tensor(params, [&](std::string_view name, Tensor& t) {
    const std::uint64_t s = derive_seed(seed, "init", index++);
    if (t.rank() == 1) {
      t.fill(0.0);
    } else if (name.starts_with("conv")) {
      // F x (h*d): fan-in is the window size, fan-out the filter count.
      glorot_fill(t, t.cols(), t.rows(), s);
    } else {
      glorot_fill(t, t.rows(), t.cols(), s);
    }
  });
}

}  // namespace

CnnParams init_cnn(const CnnConfig& config, std::uint64_t seed) {
  require_positive(config.embed_dim, "embed_dim");
  require_positive(config.filters, "filters");
  require_positive(config.dense, "dense");
  require_positive(config.classes, "classes");
  require_dropout(config.dropout);
  if (config.max_len < kFilterHeights.back()) {
    throw FormatError("max_len must be at least the tallest filter height (5)");
  }
  CnnParams p;
  p.config = config;
  for (std::size_t c = 0; c < 4; ++c) {
    p.channels[c].height = kFilterHeights[c];
    p.channels[c].activation = config.conv_activation;
    p.channels[c].weights = Tensor({config.filters, kFilterHeights[c] * config.embed_dim});
    p.channels[c].bias = Tensor({config.filters});
  }
  p.dense1 = make_dense(4 * config.filters, config.dense);
  p.dense2 = make_dense(config.dense, config.classes);
  ModelParams wrapped = std::move(p);
  init_weights(wrapped, seed);
  return std::get<CnnParams>(std::move(wrapped));
}

RnnParams init_rnn(const RnnConfig& config, std::uint64_t seed) {
  require_positive(config.embed_dim, "embed_dim");
  require_positive(config.max_len, "max_len");
  require_positive(config.hidden1, "hidden1");
  require_positive(config.hidden2, "hidden2");
  require_positive(config.dense, "dense");
  require_positive(config.classes, "classes");
  require_dropout(config.dropout);
  RnnParams p;
  p.config = config;
  p.layer1 = make_lstm(config.embed_dim, config.hidden1, config.lstm_bias, config.variant);
  p.layer2 = make_lstm(config.hidden1, config.hidden2, config.lstm_bias, config.variant);
  const std::size_t features = config.reduction == SequenceReduction::final_state
                                   ? config.hidden2
                                   : config.hidden2 * config.max_len;
  p.dense1 = make_dense(features, config.dense);
  p.dense2 = make_dense(config.dense, config.classes);
  ModelParams wrapped = std::move(p);
  init_weights(wrapped, seed);
  return std::get<RnnParams>(std::move(wrapped));
}

std::uint64_t sample_dropout_seed(std::uint64_t batch_seed, std::size_t j) {
  return derive_seed(batch_seed, "dropout", j);
}

namespace {

// ---------------------------------------------------------------------------
// Shared dense head: features -> dense1 (relu) -> dropout -> dense2 -> softmax

struct HeadTrace {
  std::vector<double> z1;
  std::vector<double> mask;
  std::vector<double> dropped;
  std::vector<double> probs;
};

HeadTrace head_forward(std::span<const double> features, const Dense& d1, const Dense& d2,
                       double rate, Mode mode, std::uint64_t seed) {
  HeadTrace t;
  t.z1 = dense_forward(features, d1, Activation::identity);
  std::vector<double> a1(t.z1.size());
  for (std::size_t i = 0; i < a1.size(); ++i) a1[i] = activate(Activation::relu, t.z1[i]);
  DropoutResult drop = dropout_forward(a1, rate, mode, seed);
  t.mask = std::move(drop.mask);
  t.dropped = std::move(drop.output);
  t.probs = softmax(dense_forward(t.dropped, d2, Activation::identity));
  return t;
}

// Accumulates into `grad` and returns dL/dx.
std::vector<double> dense_backward(std::span<const double> x, std::span<const double> dz,
                                   const Dense& layer, Dense& grad) {
  kernels::axpy(1.0, dz, grad.bias.values());
  std::vector<double> dx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    kernels::axpy(x[i], dz, grad.weight.row(i));
    dx[i] = kernels::dot(layer.weight.row(i), dz);
  }
  return dx;
}

// Returns dL/dfeatures for one sample whose loss carries weight `scale`.
std::vector<double> head_backward(std::span<const double> features, const HeadTrace& t,
                                  std::size_t label, double scale, const Dense& d1,
                                  const Dense& d2, Dense& g1, Dense& g2) {
  std::vector<double> dz2(t.probs.size(), 0.0);
  if (t.probs[label] >= kProbabilityFloor) {
    // The clamp is inactive, so d(-ln p_y)/dz = p - onehot(y).
    for (std::size_t c = 0; c < dz2.size(); ++c) {
      dz2[c] = scale * (t.probs[c] - (c == label ? 1.0 : 0.0));
    }
  }
  std::vector<double> da = dense_backward(t.dropped, dz2, d2, g2);
  for (std::size_t i = 0; i < da.size(); ++i) {
    da[i] *= t.mask[i] * activation_derivative(Activation::relu, t.z1[i], 0.0);
  }
  return dense_backward(features, da, d1, g1);
}

void check_label(std::size_t label, std::size_t classes) {
  if (label >= classes) {
    throw FormatError("label " + std::to_string(label) + " out of range for " +
                      std::to_string(classes) + " classes");
  }
}

// ---------------------------------------------------------------------------
// CNN

struct CnnTrace {
  std::array<Tensor, 4> pre;
  std::array<Tensor, 4> post;
  std::vector<std::size_t> argmax;
  std::vector<double> pooled;
  HeadTrace head;
};

void check_cnn_input(const Tensor& input, const CnnParams& p) {
  if (input.rank() != 2 || input.cols() != p.config.embed_dim) {
    throw FormatError("cnn: input " + input.shape_string() + " does not have width " +
                      std::to_string(p.config.embed_dim));
  }
  if (input.rows() < kFilterHeights.back()) {
    throw FormatError("cnn: sequence length " + std::to_string(input.rows()) +
                      " is shorter than the tallest filter");
  }
}

void cnn_features(const Tensor& input, const CnnParams& p, CnnTrace& t) {
  check_cnn_input(input, p);
  const std::size_t n = input.rows();
  const std::size_t k = input.cols();
  const std::size_t filters = p.config.filters;
  t.pooled.assign(4 * filters, 0.0);
  t.argmax.assign(4 * filters, 0);
  for (std::size_t c = 0; c < 4; ++c) {
    const ConvChannel& ch = p.channels[c];
    const std::size_t positions = n - ch.height + 1;
    t.pre[c] = Tensor({filters, positions});
    t.post[c] = Tensor({filters, positions});
    for (std::size_t f = 0; f < filters; ++f) {
      auto w = ch.weights.row(f);
      std::size_t best = 0;
      for (std::size_t i = 0; i < positions; ++i) {
        std::span<const double> window(input.data() + i * k, ch.height * k);
        const double pre = kernels::dot(w, window) + ch.bias[f];
        t.pre[c].at(f, i) = pre;
        t.post[c].at(f, i) = activate(ch.activation, pre);
        if (t.post[c].at(f, i) > t.post[c].at(f, best)) best = i;
      }
      t.argmax[c * filters + f] = best;
      t.pooled[c * filters + f] = t.post[c].at(f, best);
    }
  }
}

CnnTrace cnn_trace(const Tensor& input, const CnnParams& p, Mode mode, std::uint64_t seed) {
  CnnTrace t;
  cnn_features(input, p, t);
  t.head = head_forward(t.pooled, p.dense1, p.dense2, p.config.dropout, mode, seed);
  return t;
}

void cnn_sample_backward(const Tensor& input, const CnnParams& p, const CnnTrace& t,
                         std::size_t label, double scale, CnnParams& g) {
  std::vector<double> dpooled =
      head_backward(t.pooled, t.head, label, scale, p.dense1, p.dense2, g.dense1, g.dense2);
  const std::size_t k = input.cols();
  const std::size_t filters = p.config.filters;
  for (std::size_t c = 0; c < 4; ++c) {
    const ConvChannel& ch = p.channels[c];
    for (std::size_t f = 0; f < filters; ++f) {
      const std::size_t i = t.argmax[c * filters + f];
      const double dpre = dpooled[c * filters + f] *
                          activation_derivative(ch.activation, t.pre[c].at(f, i), t.post[c].at(f, i));
      if (dpre == 0.0) continue;
      g.channels[c].bias[f] += dpre;
      std::span<const double> window(input.data() + i * k, ch.height * k);
      kernels::axpy(dpre, window, g.channels[c].weights.row(f));
    }
  }
}

// ---------------------------------------------------------------------------
// LSTM

struct LstmTrace {
  std::array<Tensor, 4> gates;  // post-nonlinearity f, i, o, g; each T x H
  Tensor sum;                   // f*C_prev + i*g before squashing
  Tensor cell;                  // C_t
  Tensor tanh_cell;
  Tensor hidden;                // h_t
};

LstmTrace lstm_trace(const Tensor& seq, const LstmParams& p) {
  if (seq.rank() != 2 || seq.rows() == 0 || seq.cols() != p.input_dim()) {
    throw FormatError("lstm: input " + seq.shape_string() + " does not have width " +
                      std::to_string(p.input_dim()));
  }
  const std::size_t steps = seq.rows();
  const std::size_t hidden = p.hidden();
  const auto squash = detail::squash_for(p.variant);
  LstmTrace t;
  for (auto& g : t.gates) g = Tensor({steps, hidden});
  t.sum = Tensor({steps, hidden});
  t.cell = Tensor({steps, hidden});
  t.tanh_cell = Tensor({steps, hidden});
  t.hidden = Tensor({steps, hidden});
  std::vector<double> zero(hidden, 0.0);
  std::vector<double> a(hidden);
  for (std::size_t s = 0; s < steps; ++s) {
    auto x = seq.row(s);
    std::span<const double> h_prev = s ? t.hidden.row(s - 1) : std::span<const double>(zero);
    std::span<const double> c_prev = s ? t.cell.row(s - 1) : std::span<const double>(zero);
    for (std::size_t g = 0; g < 4; ++g) {
      if (p.has_bias) {
        std::copy(p.biases[g].values().begin(), p.biases[g].values().end(), a.begin());
      } else {
        std::fill(a.begin(), a.end(), 0.0);
      }
      for (std::size_t i = 0; i < x.size(); ++i) kernels::axpy(x[i], p.input_weights[g].row(i), a);
      for (std::size_t j = 0; j < hidden; ++j) {
        kernels::axpy(h_prev[j], p.recurrent_weights[g].row(j), a);
      }
      auto out = t.gates[g].row(s);
      for (std::size_t j = 0; j < hidden; ++j) {
        out[j] = g == kCandidate ? std::tanh(a[j]) : sigmoid(a[j]);
      }
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      const double sum = t.gates[kForget].at(s, j) * c_prev[j] +
                         t.gates[kInput].at(s, j) * t.gates[kCandidate].at(s, j);
      t.sum.at(s, j) = sum;
      t.cell.at(s, j) = squash.value(sum);
      t.tanh_cell.at(s, j) = std::tanh(t.cell.at(s, j));
      t.hidden.at(s, j) = t.tanh_cell.at(s, j) * t.gates[kOutput].at(s, j);
    }
  }
  return t;
}

// Backpropagation through time. `dh` holds dL/dh_t from above (T x H).
// Accumulates parameter gradients into `g`; fills `dx` (T x d) when non-null.
void lstm_backward(const Tensor& seq, const LstmParams& p, const LstmTrace& t, const Tensor& dh,
                   LstmParams& g, Tensor* dx) {
  const std::size_t steps = seq.rows();
  const std::size_t hidden = p.hidden();
  const auto squash = detail::squash_for(p.variant);
  std::vector<double> dh_next(hidden, 0.0), dc_next(hidden, 0.0), zero(hidden, 0.0);
  std::array<std::vector<double>, 4> da;
  for (auto& v : da) v.assign(hidden, 0.0);

  for (std::size_t s = steps; s-- > 0;) {
    std::span<const double> h_prev = s ? t.hidden.row(s - 1) : std::span<const double>(zero);
    std::span<const double> c_prev = s ? t.cell.row(s - 1) : std::span<const double>(zero);
    for (std::size_t j = 0; j < hidden; ++j) {
      const double f = t.gates[kForget].at(s, j);
      const double in = t.gates[kInput].at(s, j);
      const double o = t.gates[kOutput].at(s, j);
      const double cand = t.gates[kCandidate].at(s, j);
      const double tc = t.tanh_cell.at(s, j);
      const double dh_total = dh.at(s, j) + dh_next[j];
      const double d_o = dh_total * tc;
      const double dc = dh_total * o * (1.0 - tc * tc) + dc_next[j];
      const double ds = dc * squash.derivative(t.sum.at(s, j), t.cell.at(s, j));
      dc_next[j] = ds * f;
      da[kForget][j] = ds * c_prev[j] * f * (1.0 - f);
      da[kInput][j] = ds * cand * in * (1.0 - in);
      da[kOutput][j] = d_o * o * (1.0 - o);
      da[kCandidate][j] = ds * in * (1.0 - cand * cand);
    }
    auto x = seq.row(s);
    for (std::size_t gate = 0; gate < 4; ++gate) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        kernels::axpy(x[i], da[gate], g.input_weights[gate].row(i));
      }
      for (std::size_t j = 0; j < hidden; ++j) {
        kernels::axpy(h_prev[j], da[gate], g.recurrent_weights[gate].row(j));
      }
      if (p.has_bias) kernels::axpy(1.0, da[gate], g.biases[gate].values());
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      double acc = 0.0;
      for (std::size_t gate = 0; gate < 4; ++gate) {
        acc += kernels::dot(p.recurrent_weights[gate].row(j), da[gate]);
      }
      dh_next[j] = acc;
    }
    if (dx) {
      auto out = dx->row(s);
      for (std::size_t i = 0; i < x.size(); ++i) {
        double acc = 0.0;
        for (std::size_t gate = 0; gate < 4; ++gate) {
          acc += kernels::dot(p.input_weights[gate].row(i), da[gate]);
        }
        out[i] = acc;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// RNN

struct RnnTrace {
  LstmTrace layer1;
  LstmTrace layer2;
  std::vector<double> features;
  HeadTrace head;
};

void check_rnn_input(const Tensor& input, const RnnParams& p) {
  if (input.rank() != 2 || input.rows() == 0 || input.cols() != p.config.embed_dim) {
    throw FormatError("rnn: input " + input.shape_string() + " does not have width " +
                      std::to_string(p.config.embed_dim));
  }
  if (p.config.reduction == SequenceReduction::flatten && input.rows() != p.config.max_len) {
    throw FormatError("rnn: flatten reduction requires exactly " +
                      std::to_string(p.config.max_len) + " time steps");
  }
}

RnnTrace rnn_trace(const Tensor& input, const RnnParams& p, Mode mode, std::uint64_t seed) {
  check_rnn_input(input, p);
  RnnTrace t;
  t.layer1 = lstm_trace(input, p.layer1);
  t.layer2 = lstm_trace(t.layer1.hidden, p.layer2);
  const Tensor& h2 = t.layer2.hidden;
  if (p.config.reduction == SequenceReduction::final_state) {
    auto last = h2.row(h2.rows() - 1);
    t.features.assign(last.begin(), last.end());
  } else {
    t.features.assign(h2.values().begin(), h2.values().end());
  }
  t.head = head_forward(t.features, p.dense1, p.dense2, p.config.dropout, mode, seed);
  return t;
}

void rnn_sample_backward(const Tensor& input, const RnnParams& p, const RnnTrace& t,
                         std::size_t label, double scale, RnnParams& g) {
  std::vector<double> dfeat =
      head_backward(t.features, t.head, label, scale, p.dense1, p.dense2, g.dense1, g.dense2);
  const Tensor& h2 = t.layer2.hidden;
  Tensor dh2({h2.rows(), h2.cols()});
  if (p.config.reduction == SequenceReduction::final_state) {
    std::copy(dfeat.begin(), dfeat.end(), dh2.row(h2.rows() - 1).begin());
  } else {
    std::copy(dfeat.begin(), dfeat.end(), dh2.values().begin());
  }
  Tensor dh1({t.layer1.hidden.rows(), t.layer1.hidden.cols()});
  lstm_backward(t.layer1.hidden, p.layer2, t.layer2, dh2, g.layer2, &dh1);
  lstm_backward(input, p.layer1, t.layer1, dh1, g.layer1, nullptr);
}

}  // namespace

std::vector<double> cnn_pooled_features(const Tensor& input, const CnnParams& params) {
  CnnTrace t;
  cnn_features(input, params, t);
  return t.pooled;
}

std::vector<double> cnn_forward(const Tensor& input, const CnnParams& params, Mode mode,
                                std::uint64_t seed) {
  return cnn_trace(input, params, mode, seed).head.probs;
}

std::vector<double> rnn_forward(const Tensor& input, const RnnParams& params, Mode mode,
                                std::uint64_t seed) {
  return rnn_trace(input, params, mode, seed).head.probs;
}

std::vector<double> forward(const Tensor& input, const ModelParams& params, Mode mode,
                            std::uint64_t seed) {
  return std::visit(
      [&](const auto& p) -> std::vector<double> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CnnParams>) {
          return cnn_forward(input, p, mode, seed);
        } else {
          return rnn_forward(input, p, mode, seed);
        }
      },
      params);
}

GradientResult backward(const ModelParams& params, std::span<const Sample> batch, Mode mode,
                        std::uint64_t seed) {
  if (batch.empty()) throw FormatError("backward: empty batch");
  GradientResult result{zeros_like(params), 0.0};
  const double scale = 1.0 / static_cast<double>(batch.size());
  const std::size_t classes = num_classes(params);
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Sample& s = batch[j];
    if (!s.input) throw FormatError("backward: null sample input");
    check_label(s.label, classes);
    const std::uint64_t drop_seed = sample_dropout_seed(seed, j);
    if (const auto* cnn = std::get_if<CnnParams>(&params)) {
      CnnTrace t = cnn_trace(*s.input, *cnn, mode, drop_seed);
      loss += cross_entropy_loss(t.head.probs, s.label);
      cnn_sample_backward(*s.input, *cnn, t, s.label, scale,
                          std::get<CnnParams>(result.gradients));
    } else {
      const auto& rnn = std::get<RnnParams>(params);
      RnnTrace t = rnn_trace(*s.input, rnn, mode, drop_seed);
      loss += cross_entropy_loss(t.head.probs, s.label);
      rnn_sample_backward(*s.input, rnn, t, s.label, scale,
                          std::get<RnnParams>(result.gradients));
    }
  }
  result.mean_loss = loss * scale;
  return result;
}

}  // namespace xling::nn
