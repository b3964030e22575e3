#include "gansemble/layers.hpp"

#include <cmath>

#include "doctest.h"
#include "gansemble/errors.hpp"
#include "gansemble/model.hpp"
#include "oracles.hpp"

using namespace gansemble;

namespace {

Tensor random_batch(std::size_t b, std::size_t w, Rng& rng) {
  Tensor t({b, w});
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Scalar readout loss sum(R .* model(x)) so every output coordinate carries
// gradient; returns max FD relative error over params and over the input.
double model_fd_worst(MlpModel& model, std::size_t batch, std::size_t coords,
                      std::uint64_t seed) {
  Rng rng(seed);
  Tensor x = random_batch(batch, model.input_width(), rng);
  Tensor readout = random_batch(batch, model.output_width(), rng);

  auto loss_fn = [&]() {
    Tensor y = model.forward(x, Mode::kTraining);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += readout.data[i] * y.data[i];
    return s;
  };

  model.zero_grads();
  loss_fn();
  Tensor input_grad = model.backward(readout);
  std::vector<Tensor> analytic;
  for (ParamRef& p : model.params()) analytic.push_back(*p.grad);

  double worst =
      testutil::fd_check(model.params(), analytic, loss_fn, rng, coords);
  worst = std::max(worst, testutil::fd_check_input(x, input_grad, loss_fn, rng,
                                                   coords / 2 + 1));
  return worst;
}

}  // namespace

TEST_CASE("dense identity weights pass input through") {
  DenseLayer d(2, 2);
  d.weight.at(0, 0) = 1.0;
  d.weight.at(1, 1) = 1.0;
  Tensor y = d.forward(Tensor::row({1.0, 2.0}), Mode::kTraining);
  CHECK(y.data[0] == 1.0);
  CHECK(y.data[1] == 2.0);
}

TEST_CASE("dense adds bias") {
  DenseLayer d(2, 2);
  d.bias.data = {10.0, 20.0};
  Tensor y = d.forward(Tensor::row({0.0, 0.0}), Mode::kTraining);
  CHECK(y.data[0] == 10.0);
  CHECK(y.data[1] == 20.0);
}

TEST_CASE("dense backward on loss=sum(y) gives outer product with input") {
  DenseLayer d(2, 3);
  Rng rng(1);
  for (double& v : d.weight.data) v = rng.uniform(-1, 1);
  Tensor x = Tensor::row({1.0, 2.0});
  d.forward(x, Mode::kTraining);
  Tensor ones({1, 3}, 1.0);
  d.backward(ones, true);
  for (std::size_t o = 0; o < 3; ++o) {
    CHECK(d.grad_weight.at(0, o) == 1.0);
    CHECK(d.grad_weight.at(1, o) == 2.0);
    CHECK(d.grad_bias.data[o] == 1.0);
  }
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  MlpModel m;
  m.add_dense(3, 4).add_batchnorm(4).add_relu().add_dense(4, 2);
  Rng rng(3);
  m.init_glorot(rng);
  m.forward(random_batch(5, 3, rng), Mode::kTraining);
  m.zero_grads();
  m.backward(Tensor({5, 2}, 0.0));
  for (ParamRef& p : m.params()) {
    for (double v : p.grad->data) CHECK(v == 0.0);
  }
}

TEST_CASE("maxout pools of five") {
  MaxoutLayer mo(5);
  Tensor y = mo.forward(Tensor::row({1, 2, 3, 4, 5, -1, -2, -3, -4, -5}),
                        Mode::kTraining);
  CHECK(y.cols() == 2);
  CHECK(y.data[0] == 5.0);
  CHECK(y.data[1] == -1.0);
}

TEST_CASE("maxout tie keeps first index") {
  MaxoutLayer mo(3);
  mo.forward(Tensor::row({3.0, 3.0, 1.0}), Mode::kTraining);
  Tensor dx = mo.backward(Tensor::row({7.0}), true);
  CHECK(dx.data[0] == 7.0);
  CHECK(dx.data[1] == 0.0);
  CHECK(dx.data[2] == 0.0);
}

TEST_CASE("maxout rejects indivisible width") {
  MaxoutLayer mo(5);
  CHECK_THROWS_AS(mo.forward(Tensor::row({1, 2, 3}), Mode::kTraining),
                  NumericError);
}

TEST_CASE("batchnorm zero-variance batch maps to zeros") {
  BatchNormLayer bn(3);
  Tensor x({4, 3}, 2.5);
  Tensor y = bn.forward(x, Mode::kTraining);
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("batchnorm running statistics update") {
  BatchNormLayer bn(1);
  Tensor x({2, 1});
  x.data = {0.0, 2.0};  // mean 1, biased variance 1
  bn.forward(x, Mode::kTraining);
  CHECK(bn.running_mean.data[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(bn.running_var.data[0] == doctest::Approx(1.0).epsilon(1e-12));
  bn.forward(x, Mode::kTraining);
  CHECK(bn.running_mean.data[0] == doctest::Approx(0.19).epsilon(1e-12));
}

TEST_CASE("batchnorm inference uses running statistics per sample") {
  BatchNormLayer bn(1);
  bn.running_mean.data[0] = 1.0;
  bn.running_var.data[0] = 4.0;
  bn.gamma.data[0] = 2.0;
  bn.beta.data[0] = 3.0;
  Tensor x({3, 1});
  x.data = {1.0, 3.0, -1.0};
  Tensor y = bn.forward(x, Mode::kInference);
  const double invstd = 1.0 / std::sqrt(4.0 + 1e-5);
  CHECK(y.data[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(y.data[1] == doctest::Approx(3.0 + 2.0 * 2.0 * invstd).epsilon(1e-12));
  CHECK(y.data[2] == doctest::Approx(3.0 - 2.0 * 2.0 * invstd).epsilon(1e-12));

  // No batch coupling: the same rows evaluated alone give identical values.
  for (std::size_t r = 0; r < 3; ++r) {
    Tensor one({1, 1});
    one.data = {x.data[r]};
    Tensor yr = bn.forward(one, Mode::kInference);
    CHECK(yr.data[0] == y.data[r]);
  }
}

TEST_CASE("gradient check: dense") {
  MlpModel m;
  m.add_dense(4, 3);
  Rng rng(11);
  m.init_glorot(rng);
  CHECK(model_fd_worst(m, 6, 120, 100) < 1e-4);
}

TEST_CASE("gradient check: dense + batchnorm + relu") {
  MlpModel m;
  m.add_dense(3, 8).add_batchnorm(8).add_relu().add_dense(8, 2);
  Rng rng(12);
  m.init_glorot(rng);
  CHECK(model_fd_worst(m, 7, 150, 101) < 1e-4);
}

TEST_CASE("gradient check: dense + maxout") {
  MlpModel m;
  m.add_dense(3, 15).add_maxout(5).add_dense(3, 2);
  Rng rng(13);
  m.init_glorot(rng);
  CHECK(model_fd_worst(m, 6, 120, 102) < 1e-4);
}

TEST_CASE("backward without param accumulation still returns input grad") {
  MlpModel m;
  m.add_dense(3, 5).add_relu().add_dense(5, 2);
  Rng rng(14);
  m.init_glorot(rng);
  Tensor x = random_batch(4, 3, rng);
  Tensor readout = random_batch(4, 2, rng);

  m.zero_grads();
  m.forward(x, Mode::kTraining);
  Tensor dx_full = m.backward(readout, true);

  std::vector<Tensor> grads_after_full;
  for (ParamRef& p : m.params()) grads_after_full.push_back(*p.grad);

  m.zero_grads();
  m.forward(x, Mode::kTraining);
  Tensor dx_skip = m.backward(readout, false);

  for (std::size_t i = 0; i < dx_full.size(); ++i) {
    CHECK(dx_full.data[i] == dx_skip.data[i]);
  }
  for (ParamRef& p : m.params()) {
    for (double v : p.grad->data) CHECK(v == 0.0);
  }
}
