#include "xling/nn/adam.hpp"

#include <cmath>
#include <string>

#include "xling/error.hpp"

namespace xling::nn {

AdamState AdamState::for_params(const ModelParams& params) {
  AdamState s;
  for (const Tensor* t : tensors(params)) {
    s.first_moment.push_back(Tensor::zeros_like(*t));
    s.second_moment.push_back(Tensor::zeros_like(*t));
  }
  return s;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw FormatError("adam_step: parameter, gradient and state tensor counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(*grads[i]) || !params[i]->same_shape(state.first_moment[i]) ||
        !params[i]->same_shape(state.second_moment[i])) {
      throw FormatError("adam_step: shape mismatch at tensor " + std::to_string(i));
    }
    for (double g : grads[i]->values()) {
      if (!std::isfinite(g)) {
        throw NumericError("adam_step: non-finite gradient in tensor " + std::to_string(i));
      }
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    auto g = grads[i]->values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr) {
  if (kind_of(params) != kind_of(grads)) throw FormatError("adam_step: model kinds differ");
  adam_step(tensors(params), tensors(grads), state, lr);
}

}  // namespace xling::nn
