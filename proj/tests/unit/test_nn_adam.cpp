#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "xling/error.hpp"
#include "xling/nn/adam.hpp"
#include "xling/nn/checkpoint.hpp"

using namespace xling;
using namespace xling::nn;

namespace {

// Adam recurrence on plain doubles.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double p, double g, double lr) {
    ++t;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    return p - lr * mhat / (std::sqrt(vhat) + 1e-8);
  }
};

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "xling-unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("first Adam step on a scalar") {
  Tensor p({1}, 0.0);
  Tensor g({1}, 1.0);
  AdamState state;
  state.first_moment = {Tensor({1})};
  state.second_moment = {Tensor({1})};
  adam_step({&p}, {&g}, state, 1e-3);
  CHECK(state.step == 1);
  // m_hat = v_hat = 1, so the step is lr / (1 + eps).
  CHECK(p[0] == -1e-3 / (1.0 + 1e-8));
  CHECK(std::abs(p[0] - -9.99999995e-4) <= 1e-11);
}

TEST_CASE("zero gradient leaves parameters and moments untouched") {
  auto params = ModelParams(init_cnn({.embed_dim = 3, .max_len = 5, .filters = 2, .dense = 3, .classes = 2}, 1));
  const auto before = params;
  auto state = AdamState::for_params(params);
  adam_step(params, zeros_like(params), state, 1e-3);
  auto a = tensors(params);
  auto b = tensors(before);
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(*a[t] == *b[t]);
    for (double v : state.first_moment[t].values()) CHECK(v == 0.0);
    for (double v : state.second_moment[t].values()) CHECK(v == 0.0);
  }
}

TEST_CASE("two steps match the scalar recurrence") {
  Tensor p({3}, std::vector<double>{0.5, -1.0, 2.0});
  AdamState state;
  state.first_moment = {Tensor({3})};
  state.second_moment = {Tensor({3})};
  std::vector<ScalarAdam> oracle(3);
  std::vector<double> ref(p.values().begin(), p.values().end());
  const std::vector<std::vector<double>> grads{{0.3, -2.0, 1e-4}, {-0.1, 0.5, 3.0}};
  for (const auto& gv : grads) {
    Tensor g({3}, gv);
    adam_step({&p}, {&g}, state, 1e-3);
    for (std::size_t i = 0; i < 3; ++i) ref[i] = oracle[i].step(ref[i], gv[i], 1e-3);
  }
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(p[i] - ref[i]) <= 1e-15);
}

TEST_CASE("Adam rejects bad gradients before mutating") {
  Tensor p({2}, 1.0);
  Tensor bad({2}, std::vector<double>{0.1, NAN});
  AdamState state;
  state.first_moment = {Tensor({2})};
  state.second_moment = {Tensor({2})};
  CHECK_THROWS(adam_step({&p}, {&bad}, state, 1e-3));
  CHECK(p == Tensor({2}, 1.0));
  CHECK(state.step == 0);
  Tensor wrong({3});
  CHECK_THROWS_AS(adam_step({&p}, {&wrong}, state, 1e-3), FormatError);
}

TEST_CASE("checkpoints round-trip exactly") {
  for (const ModelParams& params :
       {ModelParams(init_cnn({.embed_dim = 4, .max_len = 6, .filters = 2, .dense = 3, .classes = 3}, 5)),
        ModelParams(init_rnn({.embed_dim = 4, .max_len = 6, .hidden1 = 3, .hidden2 = 2, .dense = 3,
                              .classes = 3, .variant = LstmVariant::paper_exact, .lstm_bias = true,
                              .reduction = SequenceReduction::flatten},
                             5))}) {
    const auto path = temp_path("model.ckpt");
    save_checkpoint({params, {"neg", "neu", "pos"}}, path);
    auto back = load_checkpoint(path);
    CHECK(back.labels == std::vector<std::string>{"neg", "neu", "pos"});
    CHECK(kind_of(back.params) == kind_of(params));
    auto a = tensors(back.params);
    auto b = tensors(params);
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) CHECK(*a[t] == *b[t]);
    Tensor x = testing::random_tensor({6, 4}, 1);
    CHECK(forward(x, back.params, Mode::eval, 0) == forward(x, params, Mode::eval, 0));
    CHECK_NOTHROW(load_checkpoint(path, params));
  }
}

TEST_CASE("checkpoint loading validates its input") {
  const auto path = temp_path("model2.ckpt");
  auto params = ModelParams(init_cnn({.embed_dim = 4, .max_len = 6, .filters = 2, .dense = 3, .classes = 2}, 5));
  save_checkpoint({params, {"a", "b"}}, path);
  auto other = ModelParams(init_cnn({.embed_dim = 4, .max_len = 6, .filters = 3, .dense = 3, .classes = 2}, 5));
  CHECK_THROWS_AS(load_checkpoint(path, other), FormatError);

  // Truncated payload.
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 8);
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "not a checkpoint\n";
  }
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  CHECK_THROWS_AS(load_checkpoint(temp_path("absent.ckpt")), IoError);
}
