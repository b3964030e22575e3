#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gansemble {

// Dense row-major array of doubles. Rank is usually 1 or 2; everything the
// models touch (batches, weights, gradients, moments) lives in one of these.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape_, double fill = 0.0);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }

  std::size_t rows() const;
  std::size_t cols() const;

  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;

  void fill(double v);
  void add_scaled(const Tensor& other, double scale);

  std::string shape_str() const;
};

// Shape product with overflow-free semantics for the sizes used here.
std::size_t shape_numel(const std::vector<std::size_t>& shape);

// y = x * w for row-major x[b,i], w[i,o].
void matmul(const Tensor& x, const Tensor& w, Tensor& y);

// dw += x^T * dy.
void matmul_at_b_acc(const Tensor& x, const Tensor& dy, Tensor& dw);

// dx = dy * w^T.
void matmul_a_bt(const Tensor& dy, const Tensor& w, Tensor& dx);

// Throws NumericError naming `what` if any entry is NaN/Inf.
void require_finite(const Tensor& t, const std::string& what);

}  // namespace gansemble
