#pragma once

#include <string>
#include <vector>

#include "gansemble/layers.hpp"
#include "gansemble/rng.hpp"
#include "gansemble/tensor.hpp"

namespace gansemble {

// Named view into a model parameter and its gradient slot.
struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

// Named view into a non-trainable state tensor (batchnorm running stats).
struct BufferRef {
  std::string name;
  Tensor* value;
};

// Fixed-vocabulary MLP: an ordered list of dense / batchnorm / relu / maxout
// layers with exact reverse-mode gradients. One cached forward pass at a
// time; backward consumes the cache.
class MlpModel {
 public:
  MlpModel& add_dense(std::size_t in, std::size_t out);
  MlpModel& add_batchnorm(std::size_t width, double epsilon = 1e-5,
                          double momentum = 0.9);
  MlpModel& add_relu();
  MlpModel& add_maxout(std::size_t pool_size);

  std::size_t input_width() const { return input_width_; }
  std::size_t output_width() const { return output_width_; }
  std::size_t layer_count() const { return layers_.size(); }

  Tensor forward(const Tensor& batch, Mode mode);

  // Fills gradient slots (unless accumulate_param_grads is false) and returns
  // the gradient with respect to the forward input.
  Tensor backward(const Tensor& loss_grad, bool accumulate_param_grads = true);

  void zero_grads();

  std::vector<ParamRef> params();
  std::vector<BufferRef> buffers();
  std::size_t param_count();

  // Glorot-uniform weights, zero biases, unit gammas; draw order is layer
  // order, row-major within each weight matrix.
  void init_glorot(Rng& rng);

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  void check_width(std::size_t in, const char* what);

  std::vector<Layer> layers_;
  std::size_t input_width_ = 0;
  std::size_t output_width_ = 0;
  bool has_cached_forward_ = false;
};

}  // namespace gansemble
