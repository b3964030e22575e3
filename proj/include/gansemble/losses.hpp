#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gansemble/tensor.hpp"

namespace gansemble {

// log(1 + e^x), overflow-free for |x| up to at least 1e3.
double softplus(double x);

// 1 / (1 + e^-x).
double sigmoid(double x);

struct GanLosses {
  double loss_g;
  double loss_d;
};

// Two-term softplus losses over raw discriminator scores, averaged over the
// batch:
//   loss_g = mean softplus(d_real) + mean softplus(-d_fake)
//   loss_d = mean softplus(-d_real) + mean softplus(d_fake)
// The generator term on real scores is constant with respect to the
// generator; only the fake term feeds gradients back through it.
GanLosses gan_losses(const Tensor& d_real, const Tensor& d_fake);

// d(loss_d)/d(scores), shapes matching the inputs. The two branches are
// independent, so they are also available separately; that lets a training
// loop backpropagate the real batch before the fake forward overwrites the
// discriminator's activation cache.
void gan_loss_d_grads(const Tensor& d_real, const Tensor& d_fake,
                      Tensor& grad_real, Tensor& grad_fake);
void gan_loss_d_grad_real(const Tensor& d_real, Tensor& grad_real);
void gan_loss_d_grad_fake(const Tensor& d_fake, Tensor& grad_fake);

// d(loss_g)/d(d_fake); the real branch never reaches the generator.
void gan_loss_g_grad_fake(const Tensor& d_fake, Tensor& grad_fake);

// Mean softmax cross-entropy over logits [B x K] with integer labels.
// Returns the loss; fills grad with d(loss)/d(logits) if non-null.
double softmax_cross_entropy(const Tensor& logits,
                             const std::vector<int>& labels, Tensor* grad);

// Row-wise argmax with lowest-index tie break.
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace gansemble
