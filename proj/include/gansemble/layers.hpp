#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "gansemble/tensor.hpp"

namespace gansemble {

enum class Mode { kTraining, kInference };

// Affine layer y = x*W + b with W stored [in x out].
struct DenseLayer {
  Tensor weight;
  Tensor bias;
  Tensor grad_weight;
  Tensor grad_bias;

  Tensor cached_input;

  DenseLayer(std::size_t in, std::size_t out);

  std::size_t in_width() const { return weight.rows(); }
  std::size_t out_width() const { return weight.cols(); }

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& dy, bool accumulate_param_grads);
};

// Feature-wise normalization. Training mode normalizes with batch statistics
// and folds them into the running estimates; inference mode uses the running
// estimates only, so each row's output is independent of the rest of the
// batch.
struct BatchNormLayer {
  Tensor gamma;
  Tensor beta;
  Tensor grad_gamma;
  Tensor grad_beta;
  Tensor running_mean;
  Tensor running_var;
  double epsilon;
  double momentum;

  Tensor cached_xhat;
  std::vector<double> cached_invstd;
  Mode cached_mode = Mode::kTraining;

  explicit BatchNormLayer(std::size_t width, double epsilon = 1e-5,
                          double momentum = 0.9);

  std::size_t width() const { return gamma.size(); }

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& dy, bool accumulate_param_grads);
};

struct ReluLayer {
  Tensor cached_input;

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& dy, bool accumulate_param_grads);
};

// Max over consecutive groups of pool_size pre-activations; input width must
// be a multiple of pool_size. Ties keep the first index so backward is
// deterministic.
struct MaxoutLayer {
  std::size_t pool_size;

  std::vector<std::uint32_t> cached_argmax;
  std::size_t cached_in_width = 0;

  explicit MaxoutLayer(std::size_t pool_size);

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& dy, bool accumulate_param_grads);
};

using Layer = std::variant<DenseLayer, BatchNormLayer, ReluLayer, MaxoutLayer>;

}  // namespace gansemble
