#include <doctest.h>

#include "support.hpp"
#include "xling/nn/model.hpp"

using namespace xling;
using namespace xling::nn;
using xling::testing::finite_difference_check;
using xling::testing::random_tensor;

namespace {

struct Toy {
  std::vector<Tensor> inputs;
  std::vector<Sample> batch;
};

Toy toy_batch(std::size_t len, std::size_t dim, std::size_t classes, std::uint64_t seed) {
  Toy toy;
  for (std::size_t j = 0; j < 4; ++j) toy.inputs.push_back(random_tensor({len, dim}, seed + j));
  for (std::size_t j = 0; j < 4; ++j) toy.batch.push_back({&toy.inputs[j], j % classes});
  return toy;
}

}  // namespace

TEST_CASE("CNN analytic gradients match central differences") {
  CnnConfig cfg{.embed_dim = 8, .max_len = 6, .filters = 2, .dense = 5, .classes = 3};
  SUBCASE("train mode with dropout") {}
  SUBCASE("tanh convolution") { cfg.conv_activation = Activation::tanh; }
  ModelParams params = init_cnn(cfg, 11);
  Toy toy = toy_batch(6, 8, 3, 100);
  auto result = backward(params, toy.batch, Mode::train, 5);
  auto check = finite_difference_check(params, result.gradients, toy.batch, Mode::train, 5);
  MESSAGE("cnn coordinates=" << check.coordinates << " max rel err=" << check.max_relative_error << " l1=" << check.analytic_l1);
  CHECK(check.max_relative_error <= 1e-4);
  CHECK(check.analytic_l1 > 1e-3);
}

TEST_CASE("RNN analytic gradients match central differences") {
  RnnConfig cfg{.embed_dim = 8, .max_len = 6, .hidden1 = 4, .hidden2 = 4, .dense = 5,
                .classes = 3};
  SUBCASE("paper_exact") { cfg.variant = LstmVariant::paper_exact; }
  SUBCASE("standard") { cfg.variant = LstmVariant::standard; }
  SUBCASE("standard with biases") {
    cfg.variant = LstmVariant::standard;
    cfg.lstm_bias = true;
  }
  SUBCASE("paper_exact flattened") {
    cfg.reduction = SequenceReduction::flatten;
    cfg.dense = 8;
  }
  ModelParams params = init_rnn(cfg, 12);
  Toy toy = toy_batch(6, 8, 3, 200);
  auto result = backward(params, toy.batch, Mode::train, 9);
  auto check = finite_difference_check(params, result.gradients, toy.batch, Mode::train, 9);
  MESSAGE("rnn coordinates=" << check.coordinates << " max rel err=" << check.max_relative_error << " l1=" << check.analytic_l1);
  CHECK(check.max_relative_error <= 1e-4);
  CHECK(check.analytic_l1 > 1e-3);
}

TEST_CASE("a repeated sample yields the single-sample gradient") {
  ModelParams params = init_cnn({.embed_dim = 8, .max_len = 6, .filters = 2, .dense = 5,
                                 .classes = 3},
                                3);
  Tensor x = random_tensor({6, 8}, 77);
  std::vector<Sample> one{{&x, 1}};
  std::vector<Sample> two{{&x, 1}, {&x, 1}};
  auto g1 = backward(params, one, Mode::eval, 0);
  auto g2 = backward(params, two, Mode::eval, 0);
  auto a = tensors(g1.gradients);
  auto b = tensors(g2.gradients);
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t i = 0; i < a[t]->size(); ++i) {
      CHECK((*a[t])[i] == doctest::Approx((*b[t])[i]).epsilon(1e-14));
    }
  }
  CHECK(g1.mean_loss == doctest::Approx(g2.mean_loss).epsilon(1e-14));
}
