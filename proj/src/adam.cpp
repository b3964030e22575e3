#include "gansemble/adam.hpp"

#include <cmath>

#include "gansemble/errors.hpp"

namespace gansemble {

AdamState::AdamState(MlpModel& model, AdamConfig config) : config_(config) {
  for (ParamRef& p : model.params()) {
    m_.emplace_back(Tensor::zeros(p.value->shape));
    v_.emplace_back(Tensor::zeros(p.value->shape));
  }
}

void AdamState::step(MlpModel& model) {
  std::vector<ParamRef> params = model.params();
  if (params.size() != m_.size()) {
    throw NumericError("adam: registry has " + std::to_string(params.size()) +
                       " params, state has " + std::to_string(m_.size()));
  }
  ++step_count_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].value;
    const Tensor& g = *params[i].grad;
    if (!p.same_shape(m_[i]) || !p.same_shape(g)) {
      throw NumericError("adam: shape mismatch on " + params[i].name);
    }
    double* mp = m_[i].ptr();
    double* vp = v_[i].ptr();
    double* pp = p.ptr();
    const double* gp = g.ptr();
    for (std::size_t j = 0; j < p.size(); ++j) {
      mp[j] = b1 * mp[j] + (1.0 - b1) * gp[j];
      vp[j] = b2 * vp[j] + (1.0 - b2) * gp[j] * gp[j];
      const double mhat = mp[j] / corr1;
      const double vhat = vp[j] / corr2;
      pp[j] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

}  // namespace gansemble
