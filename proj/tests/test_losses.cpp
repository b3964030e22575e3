#include "gansemble/losses.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "gansemble/errors.hpp"
#include "gansemble/rng.hpp"
#include "oracles.hpp"

using namespace gansemble;

namespace {

Tensor scores(std::vector<double> v) {
  Tensor t({v.size(), 1});
  t.data = std::move(v);
  return t;
}

// High-precision reference evaluated with the naive formulas in long double;
// only valid for moderate scores where exp does not overflow.
GanLosses naive_losses(const Tensor& a, const Tensor& b) {
  long double g = 0.0L, d = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    g += logl(1.0L + expl((long double)a.data[i])) +
         logl(1.0L + expl(-(long double)b.data[i]));
    d += logl(1.0L + expl(-(long double)a.data[i])) +
         logl(1.0L + expl((long double)b.data[i]));
  }
  const long double n = (long double)a.size();
  return {(double)(g / n), (double)(d / n)};
}

}  // namespace

TEST_CASE("zero scores give 2 log 2 for both losses") {
  auto [g, d] = gan_losses(scores({0, 0, 0}), scores({0, 0, 0}));
  CHECK(std::abs(g - 2.0 * std::log(2.0)) < 1e-12);
  CHECK(std::abs(d - 2.0 * std::log(2.0)) < 1e-12);
}

TEST_CASE("confident discriminator asymptotics") {
  auto [g, d] = gan_losses(scores({50.0}), scores({-50.0}));
  CHECK(d < 1e-9);
  CHECK(g == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("losses match the naive high-precision formulas") {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor a({7, 1}), b({7, 1});
    for (double& v : a.data) v = rng.uniform(-30.0, 30.0);
    for (double& v : b.data) v = rng.uniform(-30.0, 30.0);
    auto got = gan_losses(a, b);
    auto want = naive_losses(a, b);
    CHECK(got.loss_g == doctest::Approx(want.loss_g).epsilon(1e-12));
    CHECK(got.loss_d == doctest::Approx(want.loss_d).epsilon(1e-12));
  }
}

TEST_CASE("softplus is stable over |score| up to 1e3") {
  for (double s : {-1000.0, -500.0, -1.0, 0.0, 1.0, 500.0, 1000.0}) {
    CHECK(std::isfinite(softplus(s)));
    auto [g, d] = gan_losses(scores({s}), scores({-s}));
    CHECK(std::isfinite(g));
    CHECK(std::isfinite(d));
  }
  CHECK(softplus(1000.0) == doctest::Approx(1000.0).epsilon(1e-15));
  CHECK(softplus(-1000.0) == 0.0);
}

TEST_CASE("swapping real and fake scores exchanges the losses exactly") {
  Rng rng(405);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor a({9, 1}), b({9, 1});
    for (double& v : a.data) v = rng.uniform(-20.0, 20.0);
    for (double& v : b.data) v = rng.uniform(-20.0, 20.0);
    auto ab = gan_losses(a, b);
    auto ba = gan_losses(b, a);
    // Both formulas are built from the same two softplus terms, so the swap
    // is a literal identity, not an approximate one.
    CHECK(ab.loss_d == ba.loss_g);
    CHECK(ab.loss_g == ba.loss_d);
  }
}

TEST_CASE("non-finite and mismatched scores are rejected") {
  Tensor nan_scores({1, 1});
  nan_scores.data[0] = std::nan("");
  CHECK_THROWS_AS(gan_losses(nan_scores, scores({0.0})), NumericError);
  CHECK_THROWS_AS(gan_losses(scores({0.0, 1.0}), scores({0.0})), NumericError);
  CHECK_THROWS_AS(gan_losses(Tensor({0, 1}), Tensor({0, 1})), NumericError);
}

TEST_CASE("loss gradients match finite differences") {
  Rng rng(406);
  Tensor a({5, 1}), b({5, 1});
  for (double& v : a.data) v = rng.uniform(-3.0, 3.0);
  for (double& v : b.data) v = rng.uniform(-3.0, 3.0);

  Tensor gr, gf;
  gan_loss_d_grads(a, b, gr, gf);
  auto loss_d = [&]() { return gan_losses(a, b).loss_d; };
  CHECK(testutil::fd_check_input(a, gr, loss_d, rng, 10) < 1e-8);
  CHECK(testutil::fd_check_input(b, gf, loss_d, rng, 10) < 1e-8);

  Tensor gg;
  gan_loss_g_grad_fake(b, gg);
  auto loss_g = [&]() { return gan_losses(a, b).loss_g; };
  CHECK(testutil::fd_check_input(b, gg, loss_g, rng, 10) < 1e-8);
}

TEST_CASE("softmax cross entropy hand example") {
  Tensor logits({1, 2});
  Tensor grad;
  const double loss = softmax_cross_entropy(logits, {0}, &grad);
  CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(grad.data[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(grad.data[1] == doctest::Approx(0.5).epsilon(1e-12));

  Tensor uniform({3, 4});
  CHECK(softmax_cross_entropy(uniform, {0, 1, 3}, nullptr) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("softmax cross entropy gradient matches finite differences") {
  Rng rng(407);
  Tensor logits({6, 3});
  for (double& v : logits.data) v = rng.uniform(-2.0, 2.0);
  std::vector<int> labels = {0, 1, 2, 0, 1, 2};

  Tensor grad;
  softmax_cross_entropy(logits, labels, &grad);
  auto loss_fn = [&]() { return softmax_cross_entropy(logits, labels, nullptr); };
  CHECK(testutil::fd_check_input(logits, grad, loss_fn, rng, 20) < 1e-8);
}

TEST_CASE("softmax cross entropy rejects bad labels") {
  Tensor logits({2, 3});
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {0, 3}, nullptr), NumericError);
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {0}, nullptr), NumericError);
}

TEST_CASE("argmax_rows takes the lowest index on ties") {
  Tensor logits({2, 3});
  logits.data = {1.0, 5.0, 5.0, 2.0, 2.0, 2.0};
  auto idx = argmax_rows(logits);
  CHECK(idx[0] == 1);
  CHECK(idx[1] == 0);
}
