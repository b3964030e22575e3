#include "gansemble/tensor.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Core>

#include "gansemble/errors.hpp"

namespace gansemble {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape_, double fill)
    : shape(std::move(shape_)), data(shape_numel(shape), fill) {}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  return Tensor(std::move(shape), 0.0);
}

Tensor Tensor::scalar(double v) {
  Tensor t({1}, v);
  return t;
}

Tensor Tensor::row(std::vector<double> values) {
  Tensor t;
  t.shape = {1, values.size()};
  t.data = std::move(values);
  return t;
}

std::size_t Tensor::rows() const {
  if (shape.empty()) throw NumericError("rows() on rank-0 tensor");
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() == 1) return 1;
  if (rank() != 2) throw NumericError("cols() on tensor of rank " + std::to_string(rank()));
  return shape[1];
}

double& Tensor::at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }

double Tensor::at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

void Tensor::add_scaled(const Tensor& other, double scale) {
  if (!same_shape(other)) throw NumericError("add_scaled shape mismatch");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += scale * other.data[i];
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void require_finite(const Tensor& t, const std::string& what) {
  if (!t.all_finite()) {
    throw NumericError("non-finite values in " + what + " " + t.shape_str());
  }
}

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EMat>;
using ConstMap = Eigen::Map<const EMat>;

}  // namespace

// The three GEMM variants below are the only numeric kernels not written by
// hand; Eigen's single-threaded GEMM is deterministic for a fixed binary and
// about 6x faster than a plain loop at these shapes.

void matmul(const Tensor& x, const Tensor& w, Tensor& y) {
  const std::size_t b = x.rows(), in = x.cols(), out = w.cols();
  if (x.rank() != 2 || w.rank() != 2 || w.rows() != in) {
    throw NumericError("matmul shape mismatch: " + x.shape_str() + " vs " +
                       w.shape_str());
  }
  y.shape = {b, out};
  y.data.resize(b * out);
  Map(y.ptr(), b, out).noalias() =
      ConstMap(x.ptr(), b, in) * ConstMap(w.ptr(), in, out);
}

void matmul_at_b_acc(const Tensor& x, const Tensor& dy, Tensor& dw) {
  const std::size_t b = x.rows(), in = x.cols(), out = dy.cols();
  if (dy.rows() != b || dw.rows() != in || dw.cols() != out) {
    throw NumericError("matmul_at_b_acc shape mismatch: " + x.shape_str() +
                       ", " + dy.shape_str() + " -> " + dw.shape_str());
  }
  Map(dw.ptr(), in, out).noalias() +=
      ConstMap(x.ptr(), b, in).transpose() * ConstMap(dy.ptr(), b, out);
}

void matmul_a_bt(const Tensor& dy, const Tensor& w, Tensor& dx) {
  const std::size_t b = dy.rows(), out = dy.cols(), in = w.rows();
  if (w.cols() != out) {
    throw NumericError("matmul_a_bt shape mismatch: " + dy.shape_str() + " vs " +
                       w.shape_str());
  }
  dx.shape = {b, in};
  dx.data.resize(b * in);
  Map(dx.ptr(), b, in).noalias() =
      ConstMap(dy.ptr(), b, out) * ConstMap(w.ptr(), in, out).transpose();
}

}  // namespace gansemble
