#include "gansemble/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "gansemble/errors.hpp"

namespace gansemble {

namespace {

using nlohmann::json;

std::uint64_t member_seed(std::uint64_t master, std::size_t t, std::size_t k) {
  return derive_seed(master, "member", t, k);
}

// Rows of `data` whose label is k, in dataset order.
std::vector<std::size_t> class_rows(const LabeledDataset& data, std::size_t k) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (data.labels[r] == static_cast<int>(k)) rows.push_back(r);
  }
  return rows;
}

Tensor gather_rows(const Tensor& points, const std::vector<std::size_t>& rows) {
  Tensor out = Tensor::zeros({rows.size(), points.cols()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < points.cols(); ++c) {
      out.at(i, c) = points.at(rows[i], c);
    }
  }
  return out;
}

void check_train_args(const LabeledDataset& data, std::size_t iterations,
                      const GanConfig& config) {
  if (iterations == 0) throw ConfigError("ensemble needs at least 1 iteration");
  validate_config(config);
  if (data.class_count < 1) throw ConfigError("dataset class_count must be >= 1");
  if (data.labels.size() != data.size()) {
    throw ConfigError("dataset labels do not match point count");
  }
}

std::vector<double> member_scores(GanMember& member, const Tensor& points,
                                  const BoostHooks& hooks) {
  if (hooks.score_fn) return hooks.score_fn(member, points);
  Tensor s = discriminator_scores(member, points);
  std::vector<double> out(s.rows());
  for (std::size_t r = 0; r < s.rows(); ++r) out[r] = s.at(r, 0);
  return out;
}

json grid_to_json(const GridSpec& spec) {
  return json{{"grid_side", spec.grid_side},
              {"spacing", spec.spacing},
              {"origin", spec.origin},
              {"sigma", spec.sigma}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec spec;
  spec.grid_side = j.at("grid_side").get<std::size_t>();
  spec.spacing = j.at("spacing").get<double>();
  spec.origin = j.at("origin").get<double>();
  spec.sigma = j.at("sigma").get<double>();
  return spec;
}

std::string member_base_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "member_%03zu", index);
  return buf;
}

std::string cache_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pool_cache_%03zu.csv", index);
  return buf;
}

}  // namespace

void validate_mixture(const EnsembleMixture& mix) {
  if (mix.iterations == 0 || mix.class_count == 0) {
    throw ConfigError("mixture needs iterations >= 1 and class_count >= 1");
  }
  if (mix.members.size() != mix.iterations * mix.class_count) {
    throw ConfigError("mixture has " + std::to_string(mix.members.size()) +
                      " members, expected T*K = " +
                      std::to_string(mix.iterations * mix.class_count));
  }
  std::vector<double> class_sum(mix.class_count, 0.0);
  for (const EnsembleMember& m : mix.members) {
    if (m.class_id >= mix.class_count) {
      throw ConfigError("member class id out of range");
    }
    if (!(m.weight >= 0.0) || !std::isfinite(m.weight)) {
      throw ConfigError("member weight must be finite and non-negative");
    }
    class_sum[m.class_id] += m.weight;
  }
  for (std::size_t k = 0; k < mix.class_count; ++k) {
    if (std::abs(class_sum[k] - 1.0) > 1e-12) {
      throw ConfigError("class " + std::to_string(k) +
                        " weights sum to " + std::to_string(class_sum[k]));
    }
  }
}

std::vector<double> density_ratio_from_scores(
    const std::vector<double>& scores) {
  std::vector<double> h(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw NumericError("non-finite discriminator score at row " +
                         std::to_string(i));
    }
    h[i] = std::exp(-std::clamp(scores[i], -500.0, 500.0));
  }
  return h;
}

std::vector<double> adagan_reweight(const std::vector<double>& ratios,
                                    double beta) {
  const std::size_t n = ratios.size();
  if (n == 0) throw ConfigError("reweight needs at least one ratio");
  if (!(beta > 0.0) || !(beta <= 1.0)) {
    throw ConfigError("beta must lie in (0, 1]");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(ratios[i]) || ratios[i] < 0.0) {
      throw NumericError("density ratio must be finite and non-negative");
    }
  }
  const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
  const double c = (1.0 - beta) / beta;
  // No spread in the ratios (or beta = 1) means no preference; return the
  // exact uniform vector rather than reconstructing it through the
  // water-filling arithmetic, so every entry is bitwise 1/n.
  if (*mn == *mx || c == 0.0) return std::vector<double>(n, 1.0 / n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ratios[a] < ratios[b];
  });
  // Water-filling: with the k smallest ratios active,
  // lambda_k = (n + c*sum_k) / k; grow k while every active ratio stays
  // below the level.
  double lambda = 0.0;
  double csum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    csum += c * ratios[order[i]];
    const double cand = (static_cast<double>(n) + csum) /
                        static_cast<double>(i + 1);
    if (cand > c * ratios[order[i]]) {
      lambda = cand;
    } else {
      break;
    }
  }
  std::vector<double> w(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::max(0.0, lambda - c * ratios[i]) / static_cast<double>(n);
    sum += w[i];
  }
  if (!(sum > 0.0)) throw NumericError("reweight produced an empty support");
  for (double& v : w) v /= sum;
  return w;
}

EnsembleMixture train_independent(const LabeledDataset& data,
                                  std::size_t iterations,
                                  const GanConfig& config,
                                  std::uint64_t master_seed,
                                  std::size_t workers) {
  check_train_args(data, iterations, config);
  const std::size_t K = static_cast<std::size_t>(data.class_count);

  struct Job {
    std::size_t t;
    std::size_t k;
    WeightedDataset points;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < K; ++k) {
    const std::vector<std::size_t> rows = class_rows(data, k);
    if (rows.size() < config.batch_size) {
      throw ConfigError("class " + std::to_string(k) + " has " +
                        std::to_string(rows.size()) +
                        " points, fewer than batch_size " +
                        std::to_string(config.batch_size));
    }
    WeightedDataset wd = WeightedDataset::uniform(gather_rows(data.points, rows));
    for (std::size_t t = 1; t <= iterations; ++t) {
      jobs.push_back({t, k, wd});
    }
  }

  std::vector<GanMember> trained(jobs.size());
  auto run_job = [&](std::size_t j) {
    GanConfig c = config;
    c.seed = member_seed(master_seed, jobs[j].t, jobs[j].k);
    trained[j] = train_gan(jobs[j].points, c);
  };
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t threads = std::min(workers, jobs.size());
    for (std::size_t i = 0; i < threads; ++i) {
      pool.emplace_back([&] {
        for (std::size_t j = next.fetch_add(1); j < jobs.size();
             j = next.fetch_add(1)) {
          run_job(j);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  EnsembleMixture mix;
  mix.iterations = iterations;
  mix.class_count = K;
  mix.master_seed = master_seed;
  mix.spec = data.spec;
  mix.scheme = data.scheme;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    mix.members.push_back({std::move(trained[j]),
                           1.0 / static_cast<double>(iterations), jobs[j].k});
  }
  validate_mixture(mix);
  return mix;
}

EnsembleMixture train_boosted(const LabeledDataset& data,
                              std::size_t iterations, const GanConfig& config,
                              const std::vector<double>& beta_schedule,
                              std::uint64_t master_seed,
                              const BoostHooks& hooks) {
  check_train_args(data, iterations, config);
  EnsembleMixture mix;
  mix.iterations = 0;
  mix.class_count = static_cast<std::size_t>(data.class_count);
  mix.master_seed = master_seed;
  mix.spec = data.spec;
  mix.scheme = data.scheme;
  continue_boosted(mix, data, iterations, config, beta_schedule, hooks);
  return mix;
}

void continue_boosted(EnsembleMixture& mix, const LabeledDataset& data,
                      std::size_t target_iterations, const GanConfig& config,
                      const std::vector<double>& beta_schedule,
                      const BoostHooks& hooks) {
  check_train_args(data, target_iterations, config);
  if (!beta_schedule.empty() && beta_schedule.size() != target_iterations) {
    throw ConfigError("beta schedule length " +
                      std::to_string(beta_schedule.size()) +
                      " does not match iterations " +
                      std::to_string(target_iterations));
  }
  const std::size_t K = static_cast<std::size_t>(data.class_count);
  const std::size_t start = mix.iterations;
  if (mix.class_count != K) {
    throw ConfigError("mixture class count does not match the dataset");
  }
  if (mix.members.size() != start * K) {
    throw ConfigError("partial mixture holds " +
                      std::to_string(mix.members.size()) +
                      " members, expected " + std::to_string(start * K));
  }
  if (start > target_iterations) {
    throw ConfigError("mixture already has " + std::to_string(start) +
                      " iterations, beyond the target " +
                      std::to_string(target_iterations));
  }
  if (start == target_iterations) return;

  // Re-stride from class-major [K x start] to [K x target]; weights become
  // the final uniform 1/target for every member, completed or pending.
  const double weight = 1.0 / static_cast<double>(target_iterations);
  std::vector<EnsembleMember> relaid(target_iterations * K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < start; ++t) {
      relaid[k * target_iterations + t] =
          std::move(mix.members[k * start + t]);
      relaid[k * target_iterations + t].weight = weight;
      relaid[k * target_iterations + t].class_id = k;
    }
  }
  mix.members = std::move(relaid);
  mix.iterations = target_iterations;

  std::vector<WeightedDataset> class_data;
  class_data.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const std::vector<std::size_t> rows = class_rows(data, k);
    if (rows.size() < config.batch_size) {
      throw ConfigError("class " + std::to_string(k) + " has " +
                        std::to_string(rows.size()) +
                        " points, fewer than batch_size " +
                        std::to_string(config.batch_size));
    }
    class_data.push_back(
        WeightedDataset::uniform(gather_rows(data.points, rows)));
  }

  for (std::size_t t = start + 1; t <= target_iterations; ++t) {
    const double beta = beta_schedule.empty() ? 1.0 / static_cast<double>(t)
                                              : beta_schedule[t - 1];
    for (std::size_t k = 0; k < K; ++k) {
      WeightedDataset& wd = class_data[k];
      if (t > 1) {
        // The last completed member scores every class point; high ratios
        // mark points the mixture already covers, which lose weight.
        GanMember& prev =
            mix.members[k * target_iterations + (t - 2)].member;
        const std::vector<double> h =
            density_ratio_from_scores(member_scores(prev, wd.points, hooks));
        wd.weights = adagan_reweight(h, beta);
        const std::size_t support = static_cast<std::size_t>(
            std::count_if(wd.weights.begin(), wd.weights.end(),
                          [](double w) { return w > 0.0; }));
        if (support < config.batch_size) {
          throw NumericError(
              "boosting degenerated at iteration " + std::to_string(t) +
              ", class " + std::to_string(k) + ": only " +
              std::to_string(support) + " points keep nonzero weight (need " +
              std::to_string(config.batch_size) + ")");
        }
      }
      if (hooks.on_weights) {
        hooks.on_weights(BoostState{t, k, beta, wd.weights});
      }
      GanConfig c = config;
      c.seed = member_seed(mix.master_seed, t, k);
      mix.members[k * target_iterations + (t - 1)] = {train_gan(wd, c),
                                                      weight, k};
    }
    if (hooks.on_iteration) hooks.on_iteration(mix, t);
  }
  validate_mixture(mix);
}

std::vector<std::size_t> quota_counts(const std::vector<double>& weights,
                                      std::size_t n_total) {
  const std::size_t m = weights.size();
  if (m == 0) throw ConfigError("quota needs at least one weight");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ConfigError("quota weights must be finite and non-negative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("quota weights sum to " + std::to_string(sum));
  }
  std::vector<std::size_t> counts(m);
  std::vector<double> remainder(m);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double share = weights[i] * static_cast<double>(n_total);
    counts[i] = static_cast<std::size_t>(std::floor(share));
    remainder[i] = share - std::floor(share);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return a < b;
  });
  std::size_t leftover = n_total - assigned;
  for (std::size_t i = 0; leftover > 0; i = (i + 1) % m, --leftover) {
    ++counts[order[i]];
  }
  return counts;
}

LabeledDataset sample_mixture(EnsembleMixture& mix, std::size_t n_total,
                              std::uint64_t seed, Allocation allocation) {
  validate_mixture(mix);
  if (n_total == 0) throw ConfigError("cannot sample 0 points");
  const std::size_t m = mix.members.size();

  // Effective member probability: uniform 1/K across classes, p_t within.
  std::vector<double> effective(m);
  for (std::size_t i = 0; i < m; ++i) {
    effective[i] = mix.members[i].weight / static_cast<double>(mix.class_count);
  }

  std::vector<std::size_t> counts(m, 0);
  if (allocation == Allocation::kExactQuota) {
    if (n_total < m) {
      throw ConfigError("exact_quota needs n_total >= member count");
    }
    counts = quota_counts(effective, n_total);
  } else {
    Rng pick(derive_seed(seed, "mixture-pick"));
    WeightedSampler sampler(effective);
    for (std::size_t i = 0; i < n_total; ++i) ++counts[sampler.draw(pick)];
  }

  LabeledDataset out;
  out.points = Tensor::zeros({n_total, 2});
  out.labels.resize(n_total);
  out.class_count = static_cast<int>(mix.class_count);
  out.spec = mix.spec;
  out.seed = seed;
  out.scheme = mix.scheme;
  std::size_t row = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (counts[i] == 0) continue;
    Tensor s = generate(mix.members[i].member, counts[i],
                        derive_seed(seed, "mixture-sample", i));
    for (std::size_t r = 0; r < s.rows(); ++r, ++row) {
      out.points.at(row, 0) = s.at(r, 0);
      out.points.at(row, 1) = s.at(r, 1);
      out.labels[row] = static_cast<int>(mix.members[i].class_id);
    }
  }
  return out;
}

SamplePool bootstrap_pool(std::vector<GanMember>& members,
                          std::size_t samples_per_member) {
  SamplePool pool;
  pool.samples_per_member = samples_per_member;
  for (std::size_t i = 0; i < members.size(); ++i) {
    SampleCache cache;
    cache.member_index = i;
    cache.member_seed = members[i].seed;
    cache.points = generate(members[i], samples_per_member,
                            derive_seed(members[i].seed, "pool-cache", i));
    pool.caches.push_back(std::move(cache));
  }
  return pool;
}

void save_pool(const std::filesystem::path& dir, const SamplePool& pool) {
  std::filesystem::create_directories(dir);
  json entries = json::array();
  for (const SampleCache& cache : pool.caches) {
    const std::string name = cache_file_name(cache.member_index);
    std::ofstream out(dir / name);
    out << "x,y\n";
    char buf[80];
    for (std::size_t r = 0; r < cache.points.rows(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", cache.points.at(r, 0),
                    cache.points.at(r, 1));
      out << buf;
    }
    if (!out.good()) {
      throw MissingArtifactError("write failed for " + (dir / name).string());
    }
    entries.push_back(json{{"member_index", cache.member_index},
                           {"member_seed", cache.member_seed},
                           {"rows", cache.points.rows()},
                           {"file", name}});
  }
  json manifest = {{"format", "sample-pool-v1"},
                   {"samples_per_member", pool.samples_per_member},
                   {"caches", entries}};
  std::ofstream out(dir / "pool.json");
  out << manifest.dump(2) << "\n";
  if (!out.good()) {
    throw MissingArtifactError("write failed for " +
                               (dir / "pool.json").string());
  }
}

SamplePool load_pool(const std::filesystem::path& dir) {
  std::ifstream in(dir / "pool.json");
  if (!in.good()) {
    throw MissingArtifactError("missing pool manifest " +
                               (dir / "pool.json").string());
  }
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw MissingArtifactError("unreadable pool manifest: " +
                               std::string(e.what()));
  }
  SamplePool pool;
  try {
    if (manifest.at("format").get<std::string>() != "sample-pool-v1") {
      throw MissingArtifactError("unsupported pool format");
    }
    pool.samples_per_member =
        manifest.at("samples_per_member").get<std::size_t>();
    for (const json& entry : manifest.at("caches")) {
      SampleCache cache;
      cache.member_index = entry.at("member_index").get<std::size_t>();
      cache.member_seed = entry.at("member_seed").get<std::uint64_t>();
      const std::size_t rows = entry.at("rows").get<std::size_t>();
      const std::filesystem::path file =
          dir / entry.at("file").get<std::string>();
      std::ifstream data(file);
      if (!data.good()) {
        throw MissingArtifactError("missing pool cache " + file.string());
      }
      std::string line;
      if (!std::getline(data, line) || line != "x,y") {
        throw MissingArtifactError("bad pool cache header in " + file.string());
      }
      cache.points = Tensor::zeros({rows, 2});
      for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(data, line)) {
          throw MissingArtifactError("truncated pool cache " + file.string());
        }
        double x = 0.0;
        double y = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &x, &y) != 2 ||
            !std::isfinite(x) || !std::isfinite(y)) {
          throw MissingArtifactError("bad pool cache row in " + file.string());
        }
        cache.points.at(r, 0) = x;
        cache.points.at(r, 1) = y;
      }
      if (std::getline(data, line) && !line.empty()) {
        throw MissingArtifactError("trailing data in " + file.string());
      }
      pool.caches.push_back(std::move(cache));
    }
  } catch (const json::exception& e) {
    throw MissingArtifactError("bad pool manifest: " + std::string(e.what()));
  }
  return pool;
}

void save_mixture(const std::filesystem::path& dir, EnsembleMixture& mix) {
  validate_mixture(mix);
  std::filesystem::create_directories(dir);
  json entries = json::array();
  for (std::size_t i = 0; i < mix.members.size(); ++i) {
    const std::string base = member_base_name(i);
    save_member(dir / base, mix.members[i].member);
    entries.push_back(json{{"base", base},
                           {"weight", mix.members[i].weight},
                           {"class_id", mix.members[i].class_id}});
  }
  json manifest = {{"format", "mixture-v1"},
                   {"iterations", mix.iterations},
                   {"class_count", mix.class_count},
                   {"master_seed", mix.master_seed},
                   {"scheme", label_scheme_name(mix.scheme)},
                   {"grid", grid_to_json(mix.spec)},
                   {"members", entries}};
  std::ofstream out(dir / "mixture.json");
  out << manifest.dump(2) << "\n";
  if (!out.good()) {
    throw MissingArtifactError("write failed for " +
                               (dir / "mixture.json").string());
  }
}

EnsembleMixture load_mixture(const std::filesystem::path& dir) {
  std::ifstream in(dir / "mixture.json");
  if (!in.good()) {
    throw MissingArtifactError("missing mixture manifest " +
                               (dir / "mixture.json").string());
  }
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw MissingArtifactError("unreadable mixture manifest: " +
                               std::string(e.what()));
  }
  EnsembleMixture mix;
  try {
    if (manifest.at("format").get<std::string>() != "mixture-v1") {
      throw MissingArtifactError("unsupported mixture format");
    }
    mix.iterations = manifest.at("iterations").get<std::size_t>();
    mix.class_count = manifest.at("class_count").get<std::size_t>();
    mix.master_seed = manifest.at("master_seed").get<std::uint64_t>();
    mix.scheme =
        label_scheme_from_name(manifest.at("scheme").get<std::string>());
    mix.spec = grid_from_json(manifest.at("grid"));
    for (const json& entry : manifest.at("members")) {
      EnsembleMember m;
      m.weight = entry.at("weight").get<double>();
      m.class_id = entry.at("class_id").get<std::size_t>();
      m.member = load_member(dir / entry.at("base").get<std::string>());
      mix.members.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw MissingArtifactError("bad mixture manifest: " +
                               std::string(e.what()));
  } catch (const ConfigError& e) {
    throw MissingArtifactError("bad mixture manifest: " +
                               std::string(e.what()));
  }
  try {
    validate_mixture(mix);
  } catch (const ConfigError& e) {
    throw MissingArtifactError("mixture manifest fails validation: " +
                               std::string(e.what()));
  }
  return mix;
}

}  // namespace gansemble
