#include "gansemble/tensor.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "gansemble/errors.hpp"
#include "gansemble/rng.hpp"

using namespace gansemble;

TEST_CASE("construction and layout") {
  Tensor t({2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  for (double v : t.data) CHECK(v == 1.5);

  t.at(1, 2) = 9.0;
  CHECK(t.data[5] == 9.0);  // row-major: index = r*cols + c
  CHECK(t.at(1, 2) == 9.0);

  CHECK(Tensor::zeros({4}).size() == 4);
  CHECK(Tensor::scalar(3.0).data[0] == 3.0);
  Tensor r = Tensor::row({1, 2, 3});
  CHECK(r.rows() == 1);
  CHECK(r.cols() == 3);
  CHECK(shape_numel({2, 3, 4}) == 24);
  CHECK(shape_numel({}) == 1);
}

TEST_CASE("fill and add_scaled") {
  Tensor a({2, 2}, 1.0);
  Tensor b({2, 2}, 2.0);
  a.add_scaled(b, 0.5);
  for (double v : a.data) CHECK(v == 2.0);
  a.fill(0.0);
  for (double v : a.data) CHECK(v == 0.0);
}

TEST_CASE("all_finite and require_finite") {
  Tensor t({2}, 0.0);
  CHECK(t.all_finite());
  t.data[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK(!t.all_finite());
  CHECK_THROWS_AS(require_finite(t, "scores"), NumericError);
  t.data[1] = std::numeric_limits<double>::infinity();
  CHECK(!t.all_finite());
}

TEST_CASE("matmul identity") {
  Tensor x({1, 2});
  x.data = {1.0, 2.0};
  Tensor w({2, 2});
  w.data = {1.0, 0.0, 0.0, 1.0};
  Tensor y({1, 2});
  matmul(x, w, y);
  CHECK(y.data[0] == 1.0);
  CHECK(y.data[1] == 2.0);
}

namespace {

// Independent triple-loop references for the three kernels.
Tensor naive_matmul(const Tensor& x, const Tensor& w) {
  Tensor y({x.rows(), w.cols()});
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t k = 0; k < x.cols(); ++k)
      for (std::size_t c = 0; c < w.cols(); ++c)
        y.at(r, c) += x.at(r, k) * w.at(k, c);
  return y;
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

void check_close(const Tensor& a, const Tensor& b, double tol = 1e-12) {
  REQUIRE(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(tol));
  }
}

}  // namespace

TEST_CASE("matmul matches naive reference") {
  Rng rng(5);
  const std::vector<std::array<std::size_t, 3>> shapes = {
      {3, 4, 5}, {1, 7, 1}, {17, 23, 11}, {100, 400, 400}};
  for (auto [b, i, o] : shapes) {
    Tensor x = random_tensor({b, i}, rng);
    Tensor w = random_tensor({i, o}, rng);
    Tensor y({b, o});
    matmul(x, w, y);
    check_close(y, naive_matmul(x, w));
  }
}

TEST_CASE("matmul_at_b_acc computes x^T dy and accumulates") {
  Rng rng(6);
  Tensor x = random_tensor({5, 3}, rng);
  Tensor dy = random_tensor({5, 4}, rng);
  Tensor dw({3, 4}, 0.25);

  Tensor expect({3, 4}, 0.25);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t o = 0; o < 4; ++o)
      for (std::size_t r = 0; r < 5; ++r)
        expect.at(i, o) += x.at(r, i) * dy.at(r, o);

  matmul_at_b_acc(x, dy, dw);
  check_close(dw, expect);
}

TEST_CASE("matmul_a_bt computes dy w^T") {
  Rng rng(7);
  Tensor dy = random_tensor({5, 4}, rng);
  Tensor w = random_tensor({3, 4}, rng);
  Tensor dx({5, 3});

  Tensor expect({5, 3});
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t o = 0; o < 4; ++o)
        expect.at(r, i) += dy.at(r, o) * w.at(i, o);

  matmul_a_bt(dy, w, dx);
  check_close(dx, expect);
}

TEST_CASE("matmul rejects mismatched shapes") {
  Tensor x({2, 3});
  Tensor w({4, 5});
  Tensor y({2, 5});
  CHECK_THROWS_AS(matmul(x, w, y), NumericError);
}
