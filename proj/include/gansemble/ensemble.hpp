#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "gansemble/gan.hpp"
#include "gansemble/grid.hpp"

namespace gansemble {

struct EnsembleMember {
  GanMember member;
  double weight = 1.0;     // p_t, sums to 1 within each class
  std::size_t class_id = 0;
};

// Mixture of trained generators. Sampling picks a class uniformly (1/K),
// then a member within the class with probability p_t. Unlabeled data is the
// K = 1 case. Members are ordered class-major: all of class 0, then class 1.
struct EnsembleMixture {
  std::vector<EnsembleMember> members;
  std::size_t iterations = 1;   // T, members per class
  std::size_t class_count = 1;  // K
  std::uint64_t master_seed = 0;
  GridSpec spec;                // grid the training data came from
  LabelScheme scheme = LabelScheme::kNone;
};

// Throws ConfigError on structural violations: member count != T*K, class id
// out of range, or any class whose weights do not sum to 1 within 1e-12.
void validate_mixture(const EnsembleMixture& mix);

// Snapshot of the boosting data weights for one class, reported to the
// on_weights hook just before the member for `iteration` trains.
struct BoostState {
  std::size_t iteration = 0;  // t, 1-based
  std::size_t class_id = 0;
  double beta = 1.0;
  std::vector<double> weights;  // over that class's points, in class order
};

// Test and orchestration hooks for train_boosted. score_fn replaces the
// freshly trained member's discriminator as the source of per-point scores;
// on_weights observes every BoostState; on_iteration fires after every class
// has trained its member for that iteration (members of later iterations in
// the passed mixture are still empty placeholders).
struct BoostHooks {
  std::function<std::vector<double>(GanMember&, const Tensor& points)> score_fn;
  std::function<void(const BoostState&)> on_weights;
  std::function<void(EnsembleMixture&, std::size_t iteration)> on_iteration;
};

// Density-ratio estimate from raw discriminator scores through the logistic
// link: score s -> sigmoid(s) as P(real), so ratio h = exp(-s). Scores are
// clamped to |s| <= 500 to keep the ratio finite.
std::vector<double> density_ratio_from_scores(const std::vector<double>& scores);

// Boosting reweight: w_i = (1/N) * max(0, lambda* - c*h_i) with
// c = (1-beta)/beta and lambda* chosen by water-filling so the weights sum
// to 1. Ratios with no spread (or beta = 1) carry no preference and return
// the exact uniform vector, each entry bitwise 1/N.
std::vector<double> adagan_reweight(const std::vector<double>& ratios,
                                    double beta);

// Trains T members per class, each on its class's points with uniform
// weights and a seed derived from (master_seed, t, k); p_t = 1/T.
// workers > 1 trains members concurrently; results are identical either way.
EnsembleMixture train_independent(const LabeledDataset& data,
                                  std::size_t iterations,
                                  const GanConfig& config,
                                  std::uint64_t master_seed,
                                  std::size_t workers = 1);

// Sequential boosting per class: member t trains on the current weights,
// its discriminator scores the class points, and the reweight above
// emphasizes points the mixture covers poorly. beta_schedule must have
// length T, or be empty for the default beta_t = 1/t. Final mixture weights
// are 1/T regardless. Aborts with NumericError if fewer than batch_size
// points keep nonzero weight.
EnsembleMixture train_boosted(const LabeledDataset& data,
                              std::size_t iterations, const GanConfig& config,
                              const std::vector<double>& beta_schedule,
                              std::uint64_t master_seed,
                              const BoostHooks& hooks = {});

// Extends a partially boosted mixture (mix.iterations completed rounds,
// class-major layout) to target_iterations in place, re-deriving the data
// weights for the next round from the last completed member per class.
// Boosting carries no other cross-iteration state, so the result is
// bit-identical to an uninterrupted run. No-op when already at the target.
void continue_boosted(EnsembleMixture& mix, const LabeledDataset& data,
                      std::size_t target_iterations, const GanConfig& config,
                      const std::vector<double>& beta_schedule,
                      const BoostHooks& hooks = {});

enum class Allocation { kExactQuota, kProportional };

// Largest-remainder apportionment of n_total by the weight vector; ties in
// the remainder go to the lowest index. Counts always sum to n_total.
std::vector<std::size_t> quota_counts(const std::vector<double>& weights,
                                      std::size_t n_total);

// Synthesizes n_total labeled points. exact_quota draws the apportioned
// count from every member; proportional draws each sample's member
// independently. Labels are the members' class ids; output order is
// member-major. Non-const because generation runs the members' networks.
LabeledDataset sample_mixture(EnsembleMixture& mix, std::size_t n_total,
                              std::uint64_t seed,
                              Allocation allocation = Allocation::kExactQuota);

// Per-member synthetic sample cache, tagged with its provenance.
struct SampleCache {
  std::size_t member_index = 0;
  std::uint64_t member_seed = 0;
  Tensor points;  // [samples_per_member x 2]
};

struct SamplePool {
  std::vector<SampleCache> caches;
  std::size_t samples_per_member = 0;
};

// Generates samples_per_member points from every member, each cache seeded
// from (member seed, index) so regeneration is bit-identical.
SamplePool bootstrap_pool(std::vector<GanMember>& members,
                          std::size_t samples_per_member);

// Pool persistence: "<dir>/pool.json" manifest plus one "x,y" CSV per cache.
void save_pool(const std::filesystem::path& dir, const SamplePool& pool);
SamplePool load_pool(const std::filesystem::path& dir);

// Mixture persistence: "<dir>/mixture.json" manifest (T, K, master seed,
// grid, scheme, member entries) plus per-member checkpoint triples.
void save_mixture(const std::filesystem::path& dir, EnsembleMixture& mix);
EnsembleMixture load_mixture(const std::filesystem::path& dir);

}  // namespace gansemble
