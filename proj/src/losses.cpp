#include "gansemble/losses.hpp"

#include <algorithm>
#include <cmath>

#include "gansemble/errors.hpp"

namespace gansemble {

double softplus(double x) {
  // max(x,0) + log1p(e^-|x|) never exponentiates a positive argument.
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void check_scores(const Tensor& d_real, const Tensor& d_fake) {
  if (d_real.size() == 0 || d_fake.size() == 0) {
    throw NumericError("gan_losses: empty score batch");
  }
  if (d_real.size() != d_fake.size()) {
    throw NumericError("gan_losses: batch sizes differ, " + d_real.shape_str() +
                       " vs " + d_fake.shape_str());
  }
  require_finite(d_real, "real scores");
  require_finite(d_fake, "fake scores");
}

}  // namespace

GanLosses gan_losses(const Tensor& d_real, const Tensor& d_fake) {
  check_scores(d_real, d_fake);
  const std::size_t n = d_real.size();
  double g = 0.0, d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g += softplus(d_real.data[i]) + softplus(-d_fake.data[i]);
    d += softplus(-d_real.data[i]) + softplus(d_fake.data[i]);
  }
  const double inv = 1.0 / static_cast<double>(n);
  return {g * inv, d * inv};
}

void gan_loss_d_grads(const Tensor& d_real, const Tensor& d_fake,
                      Tensor& grad_real, Tensor& grad_fake) {
  check_scores(d_real, d_fake);
  gan_loss_d_grad_real(d_real, grad_real);
  gan_loss_d_grad_fake(d_fake, grad_fake);
}

void gan_loss_d_grad_real(const Tensor& d_real, Tensor& grad_real) {
  require_finite(d_real, "real scores");
  const std::size_t n = d_real.size();
  if (n == 0) throw NumericError("gan_loss_d_grad_real: empty score batch");
  const double inv = 1.0 / static_cast<double>(n);
  grad_real.shape = d_real.shape;
  grad_real.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // d/dx softplus(-x) = -sigmoid(-x)
    grad_real.data[i] = -sigmoid(-d_real.data[i]) * inv;
  }
}

void gan_loss_d_grad_fake(const Tensor& d_fake, Tensor& grad_fake) {
  require_finite(d_fake, "fake scores");
  const std::size_t n = d_fake.size();
  if (n == 0) throw NumericError("gan_loss_d_grad_fake: empty score batch");
  const double inv = 1.0 / static_cast<double>(n);
  grad_fake.shape = d_fake.shape;
  grad_fake.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // d/dx softplus(x) = sigmoid(x)
    grad_fake.data[i] = sigmoid(d_fake.data[i]) * inv;
  }
}

void gan_loss_g_grad_fake(const Tensor& d_fake, Tensor& grad_fake) {
  require_finite(d_fake, "fake scores");
  const std::size_t n = d_fake.size();
  if (n == 0) throw NumericError("gan_loss_g_grad_fake: empty score batch");
  const double inv = 1.0 / static_cast<double>(n);
  grad_fake.shape = d_fake.shape;
  grad_fake.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    grad_fake.data[i] = -sigmoid(-d_fake.data[i]) * inv;
  }
}

double softmax_cross_entropy(const Tensor& logits,
                             const std::vector<int>& labels, Tensor* grad) {
  const std::size_t b = logits.rows(), k = logits.cols();
  if (labels.size() != b) {
    throw NumericError("cross entropy: " + std::to_string(labels.size()) +
                       " labels for " + std::to_string(b) + " rows");
  }
  if (grad) {
    grad->shape = logits.shape;
    grad->data.assign(b * k, 0.0);
  }
  double total = 0.0;
  const double invb = 1.0 / static_cast<double>(b);
  std::vector<double> p(k);
  for (std::size_t r = 0; r < b; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw NumericError("cross entropy: label " + std::to_string(y) +
                         " out of range for " + std::to_string(k) + " classes");
    }
    const double* row = logits.ptr() + r * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      p[j] = std::exp(row[j] - mx);
      z += p[j];
    }
    total += -(row[y] - mx - std::log(z));
    if (grad) {
      double* grow = grad->ptr() + r * k;
      for (std::size_t j = 0; j < k; ++j) grow[j] = (p[j] / z) * invb;
      grow[y] -= invb;
    }
  }
  return total * invb;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const std::size_t b = logits.rows(), k = logits.cols();
  std::vector<int> out(b, 0);
  for (std::size_t r = 0; r < b; ++r) {
    const double* row = logits.ptr() + r * k;
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (row[j] > row[best]) best = j;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace gansemble
