#pragma once

#include <cstdint>
#include <vector>

#include "gansemble/model.hpp"
#include "gansemble/tensor.hpp"

namespace gansemble {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a model's parameter registry. Moment slots are
// laid out in registry order and must be created from the same model that is
// later stepped.
class AdamState {
 public:
  AdamState() = default;
  AdamState(MlpModel& model, AdamConfig config);

  // One update from the gradients currently in the registry slots.
  void step(MlpModel& model);

  std::uint64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }

  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void set_step_count(std::uint64_t t) { step_count_ = t; }

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t step_count_ = 0;
};

}  // namespace gansemble
