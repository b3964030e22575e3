#include "gansemble/adam.hpp"

#include <cmath>

#include "doctest.h"
#include "gansemble/model.hpp"
#include "oracles.hpp"

using namespace gansemble;

TEST_CASE("zero gradients leave parameters untouched") {
  MlpModel m;
  m.add_dense(2, 3);
  Rng rng(1);
  m.init_glorot(rng);
  AdamState opt(m, {});
  auto before = m.params()[0].value->data;
  m.zero_grads();
  opt.step(m);
  opt.step(m);
  CHECK(opt.step_count() == 2);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(m.params()[0].value->data[i] == before[i]);
  }
}

TEST_CASE("first step moves by learning_rate times sign of gradient") {
  MlpModel m;
  m.add_dense(1, 2);
  m.params()[0].value->fill(0.0);
  m.params()[0].grad->data = {0.5, -3.0};
  m.params()[1].grad->data = {0.0, 0.0};

  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  AdamState opt(m, cfg);
  opt.step(m);

  // m_hat = g, v_hat = g^2, so the step is lr * g/(|g| + eps) = lr * sign(g).
  CHECK(m.params()[0].value->data[0] ==
        doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(m.params()[0].value->data[1] == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("trajectory on a quadratic matches a scalar reference") {
  // Model holds a single 1x1 weight; f(w) = w^2, grad = 2w.
  MlpModel m;
  m.add_dense(1, 1);
  m.params()[0].value->data[0] = 3.0;

  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.999;
  cfg.epsilon = 1e-8;
  AdamState opt(m, cfg);

  // Independent reference loop, scalar arithmetic only.
  double w = 3.0, mm = 0.0, vv = 0.0;
  for (int t = 1; t <= 10; ++t) {
    const double g = 2.0 * w;
    mm = cfg.beta1 * mm + (1.0 - cfg.beta1) * g;
    vv = cfg.beta2 * vv + (1.0 - cfg.beta2) * g * g;
    const double mhat = mm / (1.0 - std::pow(cfg.beta1, t));
    const double vhat = vv / (1.0 - std::pow(cfg.beta2, t));
    w -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);

    double& wm = m.params()[0].value->data[0];
    m.params()[0].grad->data[0] = 2.0 * wm;
    m.params()[1].grad->data[0] = 0.0;
    opt.step(m);
    CHECK(wm == doctest::Approx(w).epsilon(1e-12));
  }
  CHECK(opt.step_count() == 10);
}

TEST_CASE("state must come from a model with the same registry") {
  MlpModel m;
  m.add_dense(2, 2);
  AdamState opt(m, {});
  MlpModel other;
  other.add_dense(2, 2).add_batchnorm(2);
  CHECK_THROWS(opt.step(other));
}
