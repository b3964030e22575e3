#include "gansemble/model.hpp"

#include <cmath>

#include "gansemble/errors.hpp"

namespace gansemble {

void MlpModel::check_width(std::size_t in, const char* what) {
  if (layers_.empty()) {
    input_width_ = in;
  } else if (output_width_ != in) {
    throw ConfigError(std::string(what) + ": expects width " +
                      std::to_string(in) + " but previous layer produces " +
                      std::to_string(output_width_));
  }
}

MlpModel& MlpModel::add_dense(std::size_t in, std::size_t out) {
  if (in == 0 || out == 0) throw ConfigError("dense widths must be positive");
  check_width(in, "dense");
  layers_.emplace_back(DenseLayer(in, out));
  output_width_ = out;
  return *this;
}

MlpModel& MlpModel::add_batchnorm(std::size_t width, double epsilon,
                                  double momentum) {
  if (width == 0) throw ConfigError("batchnorm width must be positive");
  if (epsilon <= 0.0) throw ConfigError("batchnorm epsilon must be positive");
  if (momentum <= 0.0 || momentum >= 1.0) {
    throw ConfigError("batchnorm momentum must be in (0,1)");
  }
  check_width(width, "batchnorm");
  layers_.emplace_back(BatchNormLayer(width, epsilon, momentum));
  output_width_ = width;
  return *this;
}

MlpModel& MlpModel::add_relu() {
  if (layers_.empty()) throw ConfigError("relu cannot be the first layer");
  layers_.emplace_back(ReluLayer{});
  return *this;
}

MlpModel& MlpModel::add_maxout(std::size_t pool_size) {
  if (layers_.empty()) throw ConfigError("maxout cannot be the first layer");
  if (pool_size == 0 || output_width_ % pool_size != 0) {
    throw ConfigError("maxout pool " + std::to_string(pool_size) +
                      " must divide width " + std::to_string(output_width_));
  }
  layers_.emplace_back(MaxoutLayer(pool_size));
  output_width_ /= pool_size;
  return *this;
}

Tensor MlpModel::forward(const Tensor& batch, Mode mode) {
  if (layers_.empty()) throw ConfigError("forward on empty model");
  if (batch.rank() != 2 || batch.cols() != input_width_) {
    throw NumericError("forward: batch " + batch.shape_str() +
                       " does not match input width " +
                       std::to_string(input_width_));
  }
  require_finite(batch, "forward input");
  Tensor cur = batch;
  for (Layer& layer : layers_) {
    cur = std::visit([&](auto& l) { return l.forward(cur, mode); }, layer);
  }
  has_cached_forward_ = true;
  return cur;
}

Tensor MlpModel::backward(const Tensor& loss_grad, bool accumulate_param_grads) {
  if (!has_cached_forward_) {
    throw NumericError("backward called before forward");
  }
  if (loss_grad.rank() != 2 || loss_grad.cols() != output_width_) {
    throw NumericError("backward: gradient " + loss_grad.shape_str() +
                       " does not match output width " +
                       std::to_string(output_width_));
  }
  Tensor cur = loss_grad;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    cur = std::visit(
        [&](auto& l) { return l.backward(cur, accumulate_param_grads); }, *it);
  }
  return cur;
}

void MlpModel::zero_grads() {
  for (ParamRef& p : params()) p.grad->fill(0.0);
}

std::vector<ParamRef> MlpModel::params() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string prefix = "l" + std::to_string(i);
    if (auto* d = std::get_if<DenseLayer>(&layers_[i])) {
      out.push_back({prefix + ".weight", &d->weight, &d->grad_weight});
      out.push_back({prefix + ".bias", &d->bias, &d->grad_bias});
    } else if (auto* bn = std::get_if<BatchNormLayer>(&layers_[i])) {
      out.push_back({prefix + ".gamma", &bn->gamma, &bn->grad_gamma});
      out.push_back({prefix + ".beta", &bn->beta, &bn->grad_beta});
    }
  }
  return out;
}

std::vector<BufferRef> MlpModel::buffers() {
  std::vector<BufferRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string prefix = "l" + std::to_string(i);
    if (auto* bn = std::get_if<BatchNormLayer>(&layers_[i])) {
      out.push_back({prefix + ".running_mean", &bn->running_mean});
      out.push_back({prefix + ".running_var", &bn->running_var});
    }
  }
  return out;
}

std::size_t MlpModel::param_count() {
  std::size_t n = 0;
  for (ParamRef& p : params()) n += p.value->size();
  return n;
}

void MlpModel::init_glorot(Rng& rng) {
  for (Layer& layer : layers_) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) {
      const double limit =
          std::sqrt(6.0 / static_cast<double>(d->in_width() + d->out_width()));
      for (double& v : d->weight.data) v = rng.uniform(-limit, limit);
      d->bias.fill(0.0);
    } else if (auto* bn = std::get_if<BatchNormLayer>(&layer)) {
      bn->gamma.fill(1.0);
      bn->beta.fill(0.0);
      bn->running_mean.fill(0.0);
      bn->running_var.fill(1.0);
    }
  }
}

}  // namespace gansemble
