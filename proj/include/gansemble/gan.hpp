#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gansemble/adam.hpp"
#include "gansemble/model.hpp"
#include "gansemble/rng.hpp"
#include "gansemble/tensor.hpp"

namespace gansemble {

struct GanConfig {
  std::size_t latent_dim = 2;
  std::vector<std::size_t> gen_widths = {400, 400, 400, 400};
  std::vector<std::size_t> disc_widths = {200, 200, 200};
  std::size_t maxout_pool = 5;
  std::size_t epochs = 400;
  std::size_t batch_size = 100;
  std::size_t d_steps_per_g_step = 1;
  AdamConfig adam;  // beta1 0.5 by default, the GAN-customary value
  std::uint64_t seed = 0;
};

void validate_config(const GanConfig& config);

struct EpochLoss {
  double loss_g;
  double loss_d;
};

struct GanMember {
  MlpModel generator;
  MlpModel discriminator;
  GanConfig config;
  std::vector<EpochLoss> training_log;
  std::uint64_t seed = 0;
};

// Training points with per-sample probabilities; minibatches are drawn by
// weighted resampling with replacement.
struct WeightedDataset {
  Tensor points;  // [N x 2]
  std::vector<double> weights;

  static WeightedDataset uniform(Tensor points);
};

// Throws unless weights are non-negative, match the point count, and sum to
// 1 within 1e-9.
void validate_weights(const WeightedDataset& data);

// Inverse-CDF sampler over a fixed weight vector.
class WeightedSampler {
 public:
  explicit WeightedSampler(const std::vector<double>& weights);
  std::size_t draw(Rng& rng) const;

 private:
  std::vector<double> cum_;
};

// [dense -> batchnorm -> relu] per hidden width, then dense to 2 outputs.
// Glorot-initialized from a stream derived from config.seed; a second build
// with the same seed is bit-identical.
MlpModel build_generator(const GanConfig& config);

// [dense to width*pool -> maxout] per hidden width, then dense to 1 raw
// score. No batchnorm, so scores are a pure per-point function.
MlpModel build_discriminator(const GanConfig& config);

// Alternating optimization: per minibatch, d_steps_per_g_step discriminator
// updates then one generator update. Real batches are weighted resamples;
// latents are N(0, I). The loss log has one mean entry per epoch.
GanMember train_gan(const WeightedDataset& data, const GanConfig& config);

// z ~ N(0, I_latent) through the generator in batchnorm-inference mode.
Tensor generate(GanMember& member, std::size_t n, std::uint64_t seed);

// Raw scores [n x 1] in evaluation mode.
Tensor discriminator_scores(GanMember& member, const Tensor& points);

// Checkpoints "<base>.gen.ckpt" / "<base>.disc.ckpt" plus a "<base>.json"
// sidecar holding config, seed and the loss log. Non-const because the
// parameter registry hands out mutable views.
void save_member(const std::filesystem::path& base, GanMember& member);
GanMember load_member(const std::filesystem::path& base);

}  // namespace gansemble
