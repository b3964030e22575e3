#include "gansemble/layers.hpp"

#include <cmath>

#include "gansemble/errors.hpp"

namespace gansemble {

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : weight({in, out}),
      bias({out}),
      grad_weight({in, out}),
      grad_bias({out}) {}

Tensor DenseLayer::forward(const Tensor& x, Mode) {
  if (x.cols() != in_width()) {
    throw NumericError("dense: input width " + x.shape_str() + " != " +
                       std::to_string(in_width()));
  }
  cached_input = x;
  Tensor y;
  matmul(x, weight, y);
  const std::size_t b = y.rows(), out = y.cols();
  for (std::size_t r = 0; r < b; ++r) {
    double* yrow = y.ptr() + r * out;
    for (std::size_t o = 0; o < out; ++o) yrow[o] += bias.data[o];
  }
  return y;
}

Tensor DenseLayer::backward(const Tensor& dy, bool accumulate_param_grads) {
  if (accumulate_param_grads) {
    matmul_at_b_acc(cached_input, dy, grad_weight);
    const std::size_t b = dy.rows(), out = dy.cols();
    for (std::size_t r = 0; r < b; ++r) {
      const double* dyrow = dy.ptr() + r * out;
      for (std::size_t o = 0; o < out; ++o) grad_bias.data[o] += dyrow[o];
    }
  }
  Tensor dx;
  matmul_a_bt(dy, weight, dx);
  return dx;
}

BatchNormLayer::BatchNormLayer(std::size_t width, double epsilon,
                               double momentum)
    : gamma({width}, 1.0),
      beta({width}),
      grad_gamma({width}),
      grad_beta({width}),
      running_mean({width}),
      running_var({width}, 1.0),
      epsilon(epsilon),
      momentum(momentum) {}

Tensor BatchNormLayer::forward(const Tensor& x, Mode mode) {
  const std::size_t b = x.rows(), w = x.cols();
  if (w != width()) {
    throw NumericError("batchnorm: input width " + x.shape_str() + " != " +
                       std::to_string(width()));
  }
  cached_mode = mode;
  cached_xhat.shape = {b, w};
  cached_xhat.data.resize(b * w);
  cached_invstd.assign(w, 0.0);
  Tensor y({b, w});

  if (mode == Mode::kTraining) {
    if (b == 0) throw NumericError("batchnorm: empty batch in training mode");
    for (std::size_t j = 0; j < w; ++j) {
      double mean = 0.0;
      for (std::size_t r = 0; r < b; ++r) mean += x.at(r, j);
      mean /= static_cast<double>(b);
      double var = 0.0;
      for (std::size_t r = 0; r < b; ++r) {
        const double d = x.at(r, j) - mean;
        var += d * d;
      }
      var /= static_cast<double>(b);
      const double invstd = 1.0 / std::sqrt(var + epsilon);
      cached_invstd[j] = invstd;
      for (std::size_t r = 0; r < b; ++r) {
        const double xh = (x.at(r, j) - mean) * invstd;
        cached_xhat.at(r, j) = xh;
        y.at(r, j) = gamma.data[j] * xh + beta.data[j];
      }
      running_mean.data[j] = momentum * running_mean.data[j] + (1.0 - momentum) * mean;
      running_var.data[j] = momentum * running_var.data[j] + (1.0 - momentum) * var;
    }
  } else {
    for (std::size_t j = 0; j < w; ++j) {
      const double invstd = 1.0 / std::sqrt(running_var.data[j] + epsilon);
      cached_invstd[j] = invstd;
      const double mean = running_mean.data[j];
      for (std::size_t r = 0; r < b; ++r) {
        const double xh = (x.at(r, j) - mean) * invstd;
        cached_xhat.at(r, j) = xh;
        y.at(r, j) = gamma.data[j] * xh + beta.data[j];
      }
    }
  }
  return y;
}

Tensor BatchNormLayer::backward(const Tensor& dy, bool accumulate_param_grads) {
  const std::size_t b = dy.rows(), w = dy.cols();
  Tensor dx({b, w});
  for (std::size_t j = 0; j < w; ++j) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t r = 0; r < b; ++r) {
      sum_dy += dy.at(r, j);
      sum_dy_xhat += dy.at(r, j) * cached_xhat.at(r, j);
    }
    if (accumulate_param_grads) {
      grad_gamma.data[j] += sum_dy_xhat;
      grad_beta.data[j] += sum_dy;
    }
    const double g = gamma.data[j] * cached_invstd[j];
    if (cached_mode == Mode::kTraining) {
      const double mean_dy = sum_dy / static_cast<double>(b);
      const double mean_dy_xhat = sum_dy_xhat / static_cast<double>(b);
      for (std::size_t r = 0; r < b; ++r) {
        dx.at(r, j) =
            g * (dy.at(r, j) - mean_dy - cached_xhat.at(r, j) * mean_dy_xhat);
      }
    } else {
      for (std::size_t r = 0; r < b; ++r) dx.at(r, j) = g * dy.at(r, j);
    }
  }
  return dx;
}

Tensor ReluLayer::forward(const Tensor& x, Mode) {
  cached_input = x;
  Tensor y = x;
  for (double& v : y.data) {
    if (v < 0.0) v = 0.0;
  }
  return y;
}

Tensor ReluLayer::backward(const Tensor& dy, bool) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.data.size(); ++i) {
    if (cached_input.data[i] <= 0.0) dx.data[i] = 0.0;
  }
  return dx;
}

MaxoutLayer::MaxoutLayer(std::size_t pool_size) : pool_size(pool_size) {
  if (pool_size == 0) throw ConfigError("maxout pool size must be positive");
}

Tensor MaxoutLayer::forward(const Tensor& x, Mode) {
  const std::size_t b = x.rows(), in = x.cols();
  if (in % pool_size != 0) {
    throw NumericError("maxout: width " + std::to_string(in) +
                       " not divisible by pool " + std::to_string(pool_size));
  }
  const std::size_t out = in / pool_size;
  cached_in_width = in;
  cached_argmax.assign(b * out, 0);
  Tensor y({b, out});
  for (std::size_t r = 0; r < b; ++r) {
    const double* xrow = x.ptr() + r * in;
    for (std::size_t j = 0; j < out; ++j) {
      const double* pool = xrow + j * pool_size;
      double best = pool[0];
      std::uint32_t best_q = 0;
      for (std::size_t q = 1; q < pool_size; ++q) {
        if (pool[q] > best) {
          best = pool[q];
          best_q = static_cast<std::uint32_t>(q);
        }
      }
      y.at(r, j) = best;
      cached_argmax[r * out + j] = best_q;
    }
  }
  return y;
}

Tensor MaxoutLayer::backward(const Tensor& dy, bool) {
  const std::size_t b = dy.rows(), out = dy.cols();
  Tensor dx({b, cached_in_width});
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < out; ++j) {
      const std::size_t q = cached_argmax[r * out + j];
      dx.at(r, j * pool_size + q) = dy.at(r, j);
    }
  }
  return dx;
}

}  // namespace gansemble
