#include "gansemble/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>
#include <unistd.h>

#include "gansemble/errors.hpp"
#include "gansemble/grid.hpp"
#include "oracles.hpp"

using namespace gansemble;

namespace {

GanConfig tiny_config(std::uint64_t seed) {
  GanConfig c;
  c.gen_widths = {16, 16};
  c.disc_widths = {8, 8};
  c.maxout_pool = 5;
  c.epochs = 2;
  c.batch_size = 50;
  c.seed = seed;
  return c;
}

std::vector<double> flatten_params(MlpModel& m) {
  std::vector<double> out;
  for (auto& p : m.params()) {
    out.insert(out.end(), p.value->data.begin(), p.value->data.end());
  }
  return out;
}

LabeledDataset tiny_data(std::size_t n, std::uint64_t seed,
                         LabelScheme scheme = LabelScheme::kNone) {
  GridSpec spec;
  return assign_labels(sample_real(spec, n, seed), spec, scheme);
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ens_test_" + std::to_string(getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

// Two-sample Kolmogorov-Smirnov distance between 1D samples.
double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

}  // namespace

TEST_CASE("reweighting lowers weight where the ratio is high") {
  // h spread out: the highest-ratio point should lose the most mass.
  const std::vector<double> h = {0.1, 0.5, 1.0, 2.0, 10.0};
  const std::vector<double> w = adagan_reweight(h, 0.5);
  REQUIRE(w.size() == 5);
  double sum = 0.0;
  for (double v : w) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  // Monotone: higher ratio, no more weight.
  for (std::size_t i = 0; i + 1 < w.size(); ++i) CHECK(w[i] >= w[i + 1]);
  CHECK(w[0] > w[4]);
}

TEST_CASE("reweighting matches a brute-force water-filling oracle") {
  Rng rng(991);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.next_below(40);
    std::vector<double> h(n);
    for (double& v : h) v = std::exp(rng.uniform(-4.0, 4.0));
    const double beta = rng.uniform(0.05, 1.0);
    const std::vector<double> w = adagan_reweight(h, beta);

    // Oracle: scan lambda on a fine bisection until weights sum to 1.
    const double c = (1.0 - beta) / beta;
    auto sum_at = [&](double lambda) {
      double s = 0.0;
      for (double v : h) s += std::max(0.0, lambda - c * v);
      return s / static_cast<double>(n);
    };
    double lo = 0.0;
    double hi = 1.0;
    while (sum_at(hi) < 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (sum_at(mid) < 1.0 ? lo : hi) = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n; ++i) {
      const double expect =
          std::max(0.0, lambda - c * h[i]) / static_cast<double>(n);
      CHECK(w[i] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("equal ratios give the exact uniform distribution") {
  for (std::size_t n : {1u, 3u, 7u, 100u}) {
    const std::vector<double> h(n, 2.718281828);
    const std::vector<double> w = adagan_reweight(h, 0.25);
    for (double v : w) CHECK(v == 1.0 / static_cast<double>(n));
  }
  // beta = 1 ignores the ratios entirely.
  const std::vector<double> w = adagan_reweight({0.1, 5.0, 2.0}, 1.0);
  for (double v : w) CHECK(v == 1.0 / 3.0);
}

TEST_CASE("reweighting rejects bad input") {
  CHECK_THROWS_AS(adagan_reweight({}, 0.5), ConfigError);
  CHECK_THROWS_AS(adagan_reweight({1.0}, 0.0), ConfigError);
  CHECK_THROWS_AS(adagan_reweight({1.0}, 1.5), ConfigError);
  CHECK_THROWS_AS(adagan_reweight({1.0, -0.5}, 0.5), NumericError);
  CHECK_THROWS_AS(
      adagan_reweight({1.0, std::numeric_limits<double>::infinity()}, 0.5),
      NumericError);
}

TEST_CASE("density ratio applies the logistic link") {
  const std::vector<double> h = density_ratio_from_scores({0.0, 1.0, -1.0});
  CHECK(h[0] == 1.0);
  CHECK(h[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(h[2] == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  // Extreme scores stay finite.
  const std::vector<double> ext = density_ratio_from_scores({1e6, -1e6});
  CHECK(ext[0] > 0.0);
  CHECK(std::isfinite(ext[1]));
  CHECK_THROWS_AS(
      density_ratio_from_scores({std::numeric_limits<double>::quiet_NaN()}),
      NumericError);
}

TEST_CASE("quota apportionment follows largest remainder") {
  // Equal fifths of 2500: 500 each.
  const std::vector<double> fifth(5, 0.2);
  CHECK(quota_counts(fifth, 2500) ==
        std::vector<std::size_t>({500, 500, 500, 500, 500}));
  // Equal thirds of 2500: remainders tie, lowest index wins the leftover.
  const std::vector<double> third(3, 1.0 / 3.0);
  CHECK(quota_counts(third, 2500) == std::vector<std::size_t>({834, 833, 833}));
  // Distinct remainders: largest takes the spare sample.
  CHECK(quota_counts({0.55, 0.45}, 9) == std::vector<std::size_t>({5, 4}));
  CHECK(quota_counts({0.45, 0.55}, 9) == std::vector<std::size_t>({4, 5}));
}

TEST_CASE("quota counts always sum to the request") {
  Rng rng(313);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.next_below(12);
    std::vector<double> w(m);
    double sum = 0.0;
    for (double& v : w) {
      v = rng.uniform(0.0, 1.0);
      sum += v;
    }
    for (double& v : w) v /= sum;
    const std::size_t n = rng.next_below(10000);
    const std::vector<std::size_t> counts = quota_counts(w, n);
    CHECK(std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == n);
  }
  CHECK_THROWS_AS(quota_counts({0.5, 0.4}, 10), ConfigError);
  CHECK_THROWS_AS(quota_counts({}, 10), ConfigError);
}

TEST_CASE("independent ensemble trains T*K members with 1/T weights") {
  LabeledDataset data = tiny_data(400, 11, LabelScheme::kCheckerboard);
  REQUIRE(data.class_count == 2);
  EnsembleMixture mix = train_independent(data, 3, tiny_config(5), 77);
  CHECK(mix.members.size() == 6);
  CHECK(mix.iterations == 3);
  CHECK(mix.class_count == 2);
  CHECK(mix.master_seed == 77);
  CHECK(mix.scheme == LabelScheme::kCheckerboard);
  std::vector<std::size_t> per_class(2, 0);
  for (const EnsembleMember& m : mix.members) {
    CHECK(m.weight == 1.0 / 3.0);
    REQUIRE(m.class_id < 2);
    ++per_class[m.class_id];
  }
  CHECK(per_class[0] == 3);
  CHECK(per_class[1] == 3);
  validate_mixture(mix);
}

TEST_CASE("members trained with distinct seeds have distinct parameters") {
  LabeledDataset data = tiny_data(200, 12);
  EnsembleMixture mix = train_independent(data, 3, tiny_config(5), 99);
  std::vector<std::vector<double>> params;
  for (EnsembleMember& m : mix.members) {
    params.push_back(flatten_params(m.member.generator));
  }
  for (std::size_t a = 0; a < params.size(); ++a) {
    for (std::size_t b = a + 1; b < params.size(); ++b) {
      CHECK(params[a] != params[b]);
    }
  }
}

TEST_CASE("same master seed reproduces the mixture bit for bit") {
  LabeledDataset data = tiny_data(200, 13);
  EnsembleMixture a = train_independent(data, 2, tiny_config(5), 1234);
  EnsembleMixture b = train_independent(data, 2, tiny_config(5), 1234);
  REQUIRE(a.members.size() == b.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    CHECK(flatten_params(a.members[i].member.generator) ==
          flatten_params(b.members[i].member.generator));
    CHECK(flatten_params(a.members[i].member.discriminator) ==
          flatten_params(b.members[i].member.discriminator));
  }
  EnsembleMixture c = train_independent(data, 2, tiny_config(5), 1235);
  CHECK(flatten_params(a.members[0].member.generator) !=
        flatten_params(c.members[0].member.generator));
}

TEST_CASE("worker pool produces the same mixture as sequential training") {
  LabeledDataset data = tiny_data(200, 14, LabelScheme::kCheckerboard);
  EnsembleMixture seq = train_independent(data, 2, tiny_config(5), 55, 1);
  EnsembleMixture par = train_independent(data, 2, tiny_config(5), 55, 4);
  REQUIRE(seq.members.size() == par.members.size());
  for (std::size_t i = 0; i < seq.members.size(); ++i) {
    CHECK(seq.members[i].class_id == par.members[i].class_id);
    CHECK(flatten_params(seq.members[i].member.generator) ==
          flatten_params(par.members[i].member.generator));
  }
}

TEST_CASE("training rejects undersized classes and bad arguments") {
  LabeledDataset data = tiny_data(60, 15, LabelScheme::kCheckerboard);
  // ~30 points per class, below batch_size 50.
  CHECK_THROWS_AS(train_independent(data, 1, tiny_config(5), 7), ConfigError);
  LabeledDataset ok = tiny_data(200, 15);
  CHECK_THROWS_AS(train_independent(ok, 0, tiny_config(5), 7), ConfigError);
  CHECK_THROWS_AS(
      train_boosted(ok, 2, tiny_config(5), {0.5}, 7),  // schedule length 1 != 2
      ConfigError);
}

TEST_CASE("boosted T=1 equals the independent T=1 mixture") {
  LabeledDataset data = tiny_data(200, 16);
  EnsembleMixture ind = train_independent(data, 1, tiny_config(5), 400);
  EnsembleMixture boo = train_boosted(data, 1, tiny_config(5), {}, 400);
  REQUIRE(ind.members.size() == 1);
  REQUIRE(boo.members.size() == 1);
  CHECK(flatten_params(ind.members[0].member.generator) ==
        flatten_params(boo.members[0].member.generator));
  CHECK(flatten_params(ind.members[0].member.discriminator) ==
        flatten_params(boo.members[0].member.discriminator));
  CHECK(boo.members[0].weight == 1.0);
}

TEST_CASE("boosted weights stay a valid distribution every iteration") {
  LabeledDataset data = tiny_data(300, 17);
  std::vector<BoostState> states;
  BoostHooks hooks;
  hooks.on_weights = [&](const BoostState& s) { states.push_back(s); };
  train_boosted(data, 4, tiny_config(5), {}, 41, hooks);
  REQUIRE(states.size() == 4);
  for (std::size_t t = 0; t < states.size(); ++t) {
    CHECK(states[t].iteration == t + 1);
    CHECK(states[t].beta == 1.0 / static_cast<double>(t + 1));
    double sum = 0.0;
    for (double w : states[t].weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  // First iteration always starts uniform.
  for (double w : states[0].weights) {
    CHECK(w == 1.0 / static_cast<double>(data.size()));
  }
}

TEST_CASE("resumed boosting is bit-identical to an uninterrupted run") {
  LabeledDataset data = tiny_data(300, 26, LabelScheme::kCheckerboard);
  GanConfig config = tiny_config(5);
  config.batch_size = 50;
  EnsembleMixture full = train_boosted(data, 3, config, {}, 900);

  std::vector<std::size_t> boundary_iters;
  BoostHooks hooks;
  hooks.on_iteration = [&](EnsembleMixture&, std::size_t t) {
    boundary_iters.push_back(t);
  };
  EnsembleMixture partial = train_boosted(data, 1, config, {}, 900);
  continue_boosted(partial, data, 3, config, {}, hooks);

  CHECK(boundary_iters == std::vector<std::size_t>{2, 3});
  REQUIRE(partial.members.size() == full.members.size());
  CHECK(partial.iterations == 3);
  for (std::size_t i = 0; i < full.members.size(); ++i) {
    CHECK(partial.members[i].weight == full.members[i].weight);
    CHECK(partial.members[i].class_id == full.members[i].class_id);
    CHECK(flatten_params(partial.members[i].member.generator) ==
          flatten_params(full.members[i].member.generator));
  }

  // Shrinking is refused; reaching the target is a no-op.
  CHECK_THROWS_AS(continue_boosted(partial, data, 2, config, {}),
                  ConfigError);
  CHECK_NOTHROW(continue_boosted(partial, data, 3, config, {}));
}

TEST_CASE("uniform scores keep every boosting iteration exactly uniform") {
  LabeledDataset data = tiny_data(200, 18);
  std::vector<BoostState> states;
  BoostHooks hooks;
  hooks.score_fn = [](GanMember&, const Tensor& pts) {
    return std::vector<double>(pts.rows(), 0.0);
  };
  hooks.on_weights = [&](const BoostState& s) { states.push_back(s); };
  train_boosted(data, 3, tiny_config(5), {}, 42, hooks);
  REQUIRE(states.size() == 3);
  const double uniform = 1.0 / static_cast<double>(data.size());
  for (const BoostState& s : states) {
    for (double w : s.weights) CHECK(w == uniform);
  }
}

TEST_CASE("boosting shifts weight away from covered modes") {
  // The score hook stands in for an ideal discriminator: far from every
  // generated sample means confidently real (high score), so well-modeled
  // regions carry a high density ratio and lose weight. Built from the
  // member's own samples, it keeps the oracle aligned with what G_1 actually
  // produced.
  GridSpec spec;
  LabeledDataset data = tiny_data(2000, 19);
  GanConfig c = tiny_config(21);
  c.disc_widths = {16, 16};
  c.epochs = 60;
  c.adam.learning_rate = 5e-4;

  Tensor g1_samples;
  std::vector<BoostState> states;
  BoostHooks hooks;
  hooks.score_fn = [&](GanMember& member, const Tensor& pts) {
    g1_samples = generate(member, 2000, 7);
    std::vector<double> scores(pts.rows());
    for (std::size_t r = 0; r < pts.rows(); ++r) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < g1_samples.rows(); ++s) {
        const double dx = pts.at(r, 0) - g1_samples.at(s, 0);
        const double dy = pts.at(r, 1) - g1_samples.at(s, 1);
        nearest = std::min(nearest, dx * dx + dy * dy);
      }
      scores[r] = 5.0 * std::sqrt(nearest);
    }
    return scores;
  };
  hooks.on_weights = [&](const BoostState& s) { states.push_back(s); };
  EnsembleMixture mix = train_boosted(data, 2, c, {}, 23, hooks);
  REQUIRE(states.size() == 2);
  REQUIRE(g1_samples.rows() == 2000);

  // Modes covered by G_1: any generated sample within 3 sigma of the center.
  Tensor centers = mode_centers(spec);
  std::set<std::size_t> covered;
  for (std::size_t r = 0; r < g1_samples.rows(); ++r) {
    for (std::size_t m = 0; m < centers.rows(); ++m) {
      const double dx = g1_samples.at(r, 0) - centers.at(m, 0);
      const double dy = g1_samples.at(r, 1) - centers.at(m, 1);
      if (std::sqrt(dx * dx + dy * dy) <= 3.0 * spec.sigma) {
        covered.insert(m);
        break;
      }
    }
  }
  REQUIRE(!covered.empty());
  REQUIRE(covered.size() < spec.mode_count());
  INFO("covered modes: " << covered.size());

  double boosted_mass = 0.0;
  double uniform_mass = 0.0;
  const double u = 1.0 / static_cast<double>(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    bool near_covered = false;
    for (std::size_t m : covered) {
      const double dx = data.points.at(r, 0) - centers.at(m, 0);
      const double dy = data.points.at(r, 1) - centers.at(m, 1);
      if (std::sqrt(dx * dx + dy * dy) <= 3.0 * spec.sigma) {
        near_covered = true;
        break;
      }
    }
    if (near_covered) {
      boosted_mass += states[1].weights[r];
      uniform_mass += u;
    }
  }
  REQUIRE(uniform_mass > 0.0);
  CHECK(boosted_mass < uniform_mass);
}

TEST_CASE("boosting aborts when the weights degenerate") {
  LabeledDataset data = tiny_data(200, 24);
  BoostHooks hooks;
  // Scores that make all but a handful of ratios enormous: almost every
  // point is declared well covered, so the support collapses below a batch.
  hooks.score_fn = [](GanMember&, const Tensor& pts) {
    std::vector<double> s(pts.rows(), -400.0);
    for (std::size_t i = 0; i < 5 && i < s.size(); ++i) s[i] = 400.0;
    return s;
  };
  CHECK_THROWS_AS(train_boosted(data, 2, tiny_config(5), {}, 25, hooks),
                  NumericError);
}

TEST_CASE("exact quota sampling draws the apportioned counts") {
  LabeledDataset data = tiny_data(200, 26);
  EnsembleMixture mix = train_independent(data, 5, tiny_config(5), 500);
  LabeledDataset synth = sample_mixture(mix, 2500, 31);
  CHECK(synth.size() == 2500);
  CHECK(synth.class_count == 1);
  CHECK(synth.seed == 31);
  for (int label : synth.labels) CHECK(label == 0);
  // Member-major order: block i matches a direct draw from member i.
  for (std::size_t i = 0; i < 5; ++i) {
    Tensor direct = generate(mix.members[i].member, 500,
                             derive_seed(31, "mixture-sample", i));
    for (std::size_t r = 0; r < 10; ++r) {
      CHECK(synth.points.at(i * 500 + r, 0) == direct.at(r, 0));
      CHECK(synth.points.at(i * 500 + r, 1) == direct.at(r, 1));
    }
  }
}

TEST_CASE("bagged sampling inherits class labels at equal rates") {
  LabeledDataset data = tiny_data(400, 27, LabelScheme::kCheckerboard);
  EnsembleMixture mix = train_independent(data, 2, tiny_config(5), 501);
  LabeledDataset synth = sample_mixture(mix, 1000, 32);
  std::size_t zeros = 0;
  for (int label : synth.labels) {
    REQUIRE(label >= 0);
    REQUIRE(label < 2);
    if (label == 0) ++zeros;
  }
  // 4 members at weight 1/2 within class, classes at 1/2: 250 each.
  CHECK(zeros == 500);
  CHECK(synth.class_count == 2);
}

TEST_CASE("proportional sampling is close to the quota in distribution") {
  LabeledDataset data = tiny_data(200, 28);
  EnsembleMixture mix = train_independent(data, 2, tiny_config(5), 502);
  LabeledDataset synth =
      sample_mixture(mix, 4000, 33, Allocation::kProportional);
  CHECK(synth.size() == 4000);
  // Member share is binomial(4000, 1/2): 3-sigma window around 2000.
  Tensor direct = generate(mix.members[0].member, 4000,
                           derive_seed(33, "mixture-sample", 0));
  std::size_t first_block = 0;
  for (std::size_t r = 0; r < synth.size(); ++r) {
    if (synth.points.at(r, 0) == direct.at(first_block, 0) &&
        synth.points.at(r, 1) == direct.at(first_block, 1)) {
      ++first_block;
    }
  }
  CHECK(first_block > 1905);
  CHECK(first_block < 2095);
}

TEST_CASE("sampling rejects empty or infeasible requests") {
  LabeledDataset data = tiny_data(200, 29);
  EnsembleMixture mix = train_independent(data, 3, tiny_config(5), 503);
  CHECK_THROWS_AS(sample_mixture(mix, 0, 1), ConfigError);
  CHECK_THROWS_AS(sample_mixture(mix, 2, 1), ConfigError);  // below T members
  CHECK(sample_mixture(mix, 3, 1).size() == 3);
}

TEST_CASE("identical members make the mixture match a single generator") {
  LabeledDataset data = tiny_data(200, 30);
  GanConfig c = tiny_config(5);
  c.epochs = 3;
  GanMember one = train_gan(WeightedDataset::uniform(data.points), c);

  EnsembleMixture mix;
  mix.iterations = 5;
  mix.master_seed = 0;
  for (std::size_t t = 0; t < 5; ++t) {
    GanMember copy = one;
    mix.members.push_back({std::move(copy), 0.2, 0});
  }

  const std::size_t n = 100000;
  LabeledDataset from_mix = sample_mixture(mix, n, 34);
  Tensor from_one = generate(one, n, 35);

  std::vector<double> ax(n), ay(n), bx(n), by(n);
  for (std::size_t r = 0; r < n; ++r) {
    ax[r] = from_mix.points.at(r, 0);
    ay[r] = from_mix.points.at(r, 1);
    bx[r] = from_one.at(r, 0);
    by[r] = from_one.at(r, 1);
  }
  // Two-sample KS at significance 1e-3: c(alpha) = sqrt(-ln(alpha/2)/2).
  const double crit = 1.9495 * std::sqrt(2.0 / static_cast<double>(n));
  CHECK(ks_distance(ax, bx) < crit);
  CHECK(ks_distance(ay, by) < crit);
}

TEST_CASE("mixture round trips through its manifest") {
  TempDir tmp;
  LabeledDataset data = tiny_data(400, 36, LabelScheme::kHalves);
  EnsembleMixture mix = train_independent(data, 2, tiny_config(5), 600);
  save_mixture(tmp.path / "mix", mix);
  EnsembleMixture back = load_mixture(tmp.path / "mix");

  CHECK(back.iterations == mix.iterations);
  CHECK(back.class_count == mix.class_count);
  CHECK(back.master_seed == 600);
  CHECK(back.scheme == LabelScheme::kHalves);
  CHECK(back.spec.grid_side == mix.spec.grid_side);
  REQUIRE(back.members.size() == mix.members.size());
  for (std::size_t i = 0; i < mix.members.size(); ++i) {
    CHECK(back.members[i].weight == mix.members[i].weight);
    CHECK(back.members[i].class_id == mix.members[i].class_id);
    CHECK(flatten_params(back.members[i].member.generator) ==
          flatten_params(mix.members[i].member.generator));
  }
  LabeledDataset a = sample_mixture(mix, 100, 37);
  LabeledDataset b = sample_mixture(back, 100, 37);
  CHECK(a.points.data == b.points.data);
  CHECK(a.labels == b.labels);

  CHECK_THROWS_AS(load_mixture(tmp.path / "absent"), MissingArtifactError);
}

TEST_CASE("sample pool regenerates bit identically and round trips") {
  TempDir tmp;
  LabeledDataset data = tiny_data(200, 38);
  EnsembleMixture mix = train_independent(data, 3, tiny_config(5), 700);
  std::vector<GanMember> members;
  for (EnsembleMember& m : mix.members) members.push_back(m.member);

  SamplePool pool = bootstrap_pool(members, 64);
  REQUIRE(pool.caches.size() == 3);
  CHECK(pool.samples_per_member == 64);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(pool.caches[i].member_index == i);
    CHECK(pool.caches[i].member_seed == members[i].seed);
    CHECK(pool.caches[i].points.rows() == 64);
  }
  SamplePool again = bootstrap_pool(members, 64);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(pool.caches[i].points.data == again.caches[i].points.data);
  }

  save_pool(tmp.path / "pool", pool);
  SamplePool back = load_pool(tmp.path / "pool");
  REQUIRE(back.caches.size() == 3);
  CHECK(back.samples_per_member == 64);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.caches[i].member_index == i);
    CHECK(back.caches[i].member_seed == pool.caches[i].member_seed);
    CHECK(back.caches[i].points.data == pool.caches[i].points.data);
  }
  CHECK_THROWS_AS(load_pool(tmp.path / "absent"), MissingArtifactError);
}

TEST_CASE("mixture validation catches structural breakage") {
  LabeledDataset data = tiny_data(200, 39);
  EnsembleMixture mix = train_independent(data, 2, tiny_config(5), 800);
  EnsembleMixture bad = mix;
  bad.members[0].weight = 0.9;
  CHECK_THROWS_AS(validate_mixture(bad), ConfigError);
  bad = mix;
  bad.members.pop_back();
  CHECK_THROWS_AS(validate_mixture(bad), ConfigError);
  bad = mix;
  bad.members[1].class_id = 7;
  CHECK_THROWS_AS(validate_mixture(bad), ConfigError);
}
