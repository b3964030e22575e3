#include "gansemble/gan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "gansemble/checkpoint.hpp"
#include "gansemble/errors.hpp"
#include "gansemble/losses.hpp"

namespace gansemble {

namespace {

constexpr std::size_t kEvalChunk = 4096;

Tensor draw_latents(Rng& rng, std::size_t n, std::size_t latent_dim) {
  Tensor z({n, latent_dim});
  for (double& v : z.data) v = rng.normal();
  return z;
}

}  // namespace

void validate_config(const GanConfig& config) {
  if (config.latent_dim == 0) throw ConfigError("latent_dim must be positive");
  if (config.gen_widths.empty() || config.disc_widths.empty()) {
    throw ConfigError("generator and discriminator need at least one hidden layer");
  }
  for (std::size_t w : config.gen_widths) {
    if (w == 0) throw ConfigError("generator widths must be positive");
  }
  for (std::size_t w : config.disc_widths) {
    if (w == 0) throw ConfigError("discriminator widths must be positive");
  }
  if (config.maxout_pool == 0) throw ConfigError("maxout pool must be positive");
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (config.epochs == 0) throw ConfigError("epochs must be positive");
  if (config.d_steps_per_g_step == 0) {
    throw ConfigError("d_steps_per_g_step must be positive");
  }
}

WeightedDataset WeightedDataset::uniform(Tensor points) {
  WeightedDataset d;
  const std::size_t n = points.rows();
  if (n == 0) throw ConfigError("empty dataset");
  d.points = std::move(points);
  d.weights.assign(n, 1.0 / static_cast<double>(n));
  return d;
}

void validate_weights(const WeightedDataset& data) {
  if (data.weights.size() != data.points.rows()) {
    throw ConfigError("weight count " + std::to_string(data.weights.size()) +
                      " != point count " + std::to_string(data.points.rows()));
  }
  double sum = 0.0;
  for (double w : data.weights) {
    if (!(w >= 0.0)) throw NumericError("negative or NaN sample weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw NumericError("sample weights sum to " + std::to_string(sum));
  }
}

WeightedSampler::WeightedSampler(const std::vector<double>& weights) {
  if (weights.empty()) throw ConfigError("empty weight vector");
  cum_.resize(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cum_[i] = acc;
  }
}

std::size_t WeightedSampler::draw(Rng& rng) const {
  const double u = rng.next_double() * cum_.back();
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  const std::size_t idx = static_cast<std::size_t>(it - cum_.begin());
  return std::min(idx, cum_.size() - 1);
}

MlpModel build_generator(const GanConfig& config) {
  validate_config(config);
  MlpModel g;
  std::size_t prev = config.latent_dim;
  for (std::size_t w : config.gen_widths) {
    g.add_dense(prev, w).add_batchnorm(w).add_relu();
    prev = w;
  }
  g.add_dense(prev, 2);
  Rng rng(derive_seed(config.seed, "gen-init"));
  g.init_glorot(rng);
  return g;
}

MlpModel build_discriminator(const GanConfig& config) {
  validate_config(config);
  MlpModel d;
  std::size_t prev = 2;
  for (std::size_t w : config.disc_widths) {
    d.add_dense(prev, w * config.maxout_pool).add_maxout(config.maxout_pool);
    prev = w;
  }
  d.add_dense(prev, 1);
  Rng rng(derive_seed(config.seed, "disc-init"));
  d.init_glorot(rng);
  return d;
}

GanMember train_gan(const WeightedDataset& data, const GanConfig& config) {
  validate_config(config);
  validate_weights(data);
  const std::size_t n = data.points.rows();
  const std::size_t b = config.batch_size;
  if (n < b) {
    throw ConfigError("dataset of " + std::to_string(n) +
                      " points is smaller than batch_size " + std::to_string(b));
  }

  GanMember member;
  member.config = config;
  member.seed = config.seed;
  member.generator = build_generator(config);
  member.discriminator = build_discriminator(config);

  AdamState opt_g(member.generator, config.adam);
  AdamState opt_d(member.discriminator, config.adam);
  Rng rng(derive_seed(config.seed, "gan-train"));
  WeightedSampler sampler(data.weights);

  // Weighted draws make "epoch" a step-count convention: one epoch is
  // N/batch_size minibatches regardless of which points get drawn.
  const std::size_t steps_per_epoch = n / b;
  Tensor real({b, 2});
  member.training_log.reserve(config.epochs);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double sum_g = 0.0, sum_d = 0.0;
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      try {
        Tensor s_real;
        for (std::size_t ds = 0; ds < config.d_steps_per_g_step; ++ds) {
          for (std::size_t r = 0; r < b; ++r) {
            const std::size_t src = sampler.draw(rng);
            real.at(r, 0) = data.points.at(src, 0);
            real.at(r, 1) = data.points.at(src, 1);
          }
          Tensor z = draw_latents(rng, b, config.latent_dim);
          Tensor fake = member.generator.forward(z, Mode::kTraining);

          // The real and fake loss branches have independent gradients, so
          // each forward is followed by its backward before the cache is
          // reused.
          member.discriminator.zero_grads();
          s_real = member.discriminator.forward(real, Mode::kTraining);
          Tensor grad_real, grad_fake;
          gan_loss_d_grad_real(s_real, grad_real);
          member.discriminator.backward(grad_real);
          Tensor s_fake = member.discriminator.forward(fake, Mode::kTraining);
          gan_loss_d_grad_fake(s_fake, grad_fake);
          member.discriminator.backward(grad_fake);
          opt_d.step(member.discriminator);
        }

        Tensor z = draw_latents(rng, b, config.latent_dim);
        Tensor fake = member.generator.forward(z, Mode::kTraining);
        Tensor s_fake = member.discriminator.forward(fake, Mode::kTraining);
        Tensor grad_scores;
        gan_loss_g_grad_fake(s_fake, grad_scores);
        Tensor dx = member.discriminator.backward(grad_scores,
                                                  /*accumulate_param_grads=*/false);
        member.generator.zero_grads();
        member.generator.backward(dx);
        opt_g.step(member.generator);

        const GanLosses losses = gan_losses(s_real, s_fake);
        sum_g += losses.loss_g;
        sum_d += losses.loss_d;
      } catch (const NumericError& e) {
        throw NumericError("gan training diverged (seed " +
                           std::to_string(config.seed) + ", epoch " +
                           std::to_string(epoch) + ", step " +
                           std::to_string(step) + "): " + e.what());
      }
    }
    member.training_log.push_back({sum_g / static_cast<double>(steps_per_epoch),
                                   sum_d / static_cast<double>(steps_per_epoch)});
  }
  return member;
}

Tensor generate(GanMember& member, std::size_t n, std::uint64_t seed) {
  Tensor out({n, 2});
  if (n == 0) return out;
  Rng rng(seed);
  const std::size_t latent = member.config.latent_dim;
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t chunk = std::min(kEvalChunk, n - start);
    Tensor z = draw_latents(rng, chunk, latent);
    Tensor x = member.generator.forward(z, Mode::kInference);
    std::copy(x.data.begin(), x.data.end(), out.data.begin() + 2 * start);
  }
  return out;
}

Tensor discriminator_scores(GanMember& member, const Tensor& points) {
  if (points.rank() != 2 || points.cols() != 2) {
    throw ConfigError("discriminator_scores: points must be [N x 2], got " +
                      points.shape_str());
  }
  const std::size_t n = points.rows();
  Tensor out({n, 1});
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t chunk = std::min(kEvalChunk, n - start);
    Tensor slice({chunk, 2});
    std::copy(points.data.begin() + 2 * start,
              points.data.begin() + 2 * (start + chunk), slice.data.begin());
    Tensor s = member.discriminator.forward(slice, Mode::kInference);
    std::copy(s.data.begin(), s.data.end(), out.data.begin() + start);
  }
  return out;
}

namespace {

nlohmann::json config_to_json(const GanConfig& c) {
  return {
      {"latent_dim", c.latent_dim},
      {"gen_widths", c.gen_widths},
      {"disc_widths", c.disc_widths},
      {"maxout_pool", c.maxout_pool},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"d_steps_per_g_step", c.d_steps_per_g_step},
      {"learning_rate", c.adam.learning_rate},
      {"beta1", c.adam.beta1},
      {"beta2", c.adam.beta2},
      {"epsilon", c.adam.epsilon},
      {"seed", c.seed},
  };
}

GanConfig config_from_json(const nlohmann::json& j) {
  GanConfig c;
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.gen_widths = j.at("gen_widths").get<std::vector<std::size_t>>();
  c.disc_widths = j.at("disc_widths").get<std::vector<std::size_t>>();
  c.maxout_pool = j.at("maxout_pool").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.d_steps_per_g_step = j.at("d_steps_per_g_step").get<std::size_t>();
  c.adam.learning_rate = j.at("learning_rate").get<double>();
  c.adam.beta1 = j.at("beta1").get<double>();
  c.adam.beta2 = j.at("beta2").get<double>();
  c.adam.epsilon = j.at("epsilon").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_member(const std::filesystem::path& base, GanMember& member) {
  // Checkpoint step counts record completed epochs; the sidecar holds the
  // full per-epoch log.
  const std::uint64_t epochs_done = member.training_log.size();
  save_checkpoint(base.string() + ".gen.ckpt", member.generator, nullptr,
                  {member.seed, epochs_done});
  save_checkpoint(base.string() + ".disc.ckpt", member.discriminator, nullptr,
                  {member.seed, epochs_done});

  nlohmann::json j = {
      {"format", "gan-member-v1"},
      {"seed", member.seed},
      {"config", config_to_json(member.config)},
  };
  nlohmann::json log = nlohmann::json::array();
  for (const EpochLoss& e : member.training_log) {
    log.push_back({{"loss_g", e.loss_g}, {"loss_d", e.loss_d}});
  }
  j["training_log"] = std::move(log);
  std::ofstream out(base.string() + ".json");
  out << j.dump(2) << "\n";
  if (!out) {
    throw MissingArtifactError("write failed for " + base.string() + ".json");
  }
}

GanMember load_member(const std::filesystem::path& base) {
  std::ifstream in(base.string() + ".json");
  if (!in) {
    throw MissingArtifactError("missing member sidecar " + base.string() +
                               ".json");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw MissingArtifactError("bad member sidecar " + base.string() +
                               ".json: " + e.what());
  }
  GanMember member;
  try {
    if (j.at("format").get<std::string>() != "gan-member-v1") {
      throw MissingArtifactError("unsupported member format in " +
                                 base.string() + ".json");
    }
    member.seed = j.at("seed").get<std::uint64_t>();
    member.config = config_from_json(j.at("config"));
    for (const auto& e : j.at("training_log")) {
      member.training_log.push_back({e.at("loss_g").get<double>(),
                                     e.at("loss_d").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw MissingArtifactError("bad member sidecar " + base.string() +
                               ".json: " + e.what());
  }
  member.generator = build_generator(member.config);
  member.discriminator = build_discriminator(member.config);
  load_checkpoint(base.string() + ".gen.ckpt", member.generator, nullptr);
  load_checkpoint(base.string() + ".disc.ckpt", member.discriminator, nullptr);
  return member;
}

}  // namespace gansemble
