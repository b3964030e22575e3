#include "gansemble/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <thread>
#include <unordered_set>

#include "gansemble/errors.hpp"

namespace gansemble {

namespace {

// Inclusive 3-sigma test on squared distances. The relative guard admits
// points whose decimal coordinates denote the exact boundary but round a few
// ulp past it.
bool is_hq(double dist_sq, double limit_sq) {
  return dist_sq <= limit_sq * (1.0 + 1e-12);
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double sample_mean(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

// k distinct values from [0, n) in deterministic insertion order (Floyd's
// algorithm); O(k) regardless of n.
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k,
                                         Rng& rng) {
  if (k > n) throw ConfigError("cannot draw more distinct values than exist");
  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::unordered_set<std::size_t> seen;
  for (std::size_t i = n - k; i < n; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    if (seen.insert(j).second) {
      picked.push_back(j);
    } else {
      seen.insert(i);
      picked.push_back(i);
    }
  }
  return picked;
}

}  // namespace

ModeReport mode_report(const Tensor& points, const GridSpec& spec) {
  if (points.rows() > 0 && points.cols() != 2) {
    throw NumericError("mode_report expects [N x 2] points");
  }
  ModeReport report;
  report.total_points = points.rows();
  report.hq_counts.assign(spec.mode_count(), 0);
  const double limit_sq = (3.0 * spec.sigma) * (3.0 * spec.sigma);
  std::size_t hq_total = 0;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const double x = points.at(r, 0);
    const double y = points.at(r, 1);
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw NumericError("non-finite point at row " + std::to_string(r));
    }
    const auto [i, j] = nearest_center(spec, x, y);
    const double cx = spec.origin + spec.spacing * static_cast<double>(i);
    const double cy = spec.origin + spec.spacing * static_cast<double>(j);
    const double dist_sq = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    if (is_hq(dist_sq, limit_sq)) {
      ++report.hq_counts[i * spec.grid_side + j];
      ++hq_total;
    }
  }
  for (std::size_t m = 0; m < report.hq_counts.size(); ++m) {
    if (report.hq_counts[m] > 0) ++report.modes_recovered;
  }
  report.hq_fraction =
      report.total_points == 0
          ? 0.0
          : static_cast<double>(hq_total) /
                static_cast<double>(report.total_points);
  return report;
}

BootstrapSummary bootstrap_metrics(const SamplePool& pool,
                                   std::size_t ensemble_size,
                                   const GridSpec& spec, std::size_t n_eval,
                                   std::size_t iterations, std::uint64_t seed,
                                   std::size_t workers) {
  if (ensemble_size == 0) throw ConfigError("ensemble size must be >= 1");
  if (iterations == 0) throw ConfigError("need at least 1 iteration");
  if (n_eval < ensemble_size) {
    throw ConfigError("n_eval must be at least the ensemble size");
  }
  if (pool.caches.size() < ensemble_size) {
    throw ConfigError("pool has " + std::to_string(pool.caches.size()) +
                      " members, fewer than ensemble size " +
                      std::to_string(ensemble_size));
  }
  const std::vector<std::size_t> quotas = quota_counts(
      std::vector<double>(ensemble_size, 1.0 / static_cast<double>(ensemble_size)),
      n_eval);
  const std::size_t max_quota = *std::max_element(quotas.begin(), quotas.end());
  for (const SampleCache& cache : pool.caches) {
    if (cache.points.rows() < max_quota) {
      throw ConfigError("pool cache " + std::to_string(cache.member_index) +
                        " holds " + std::to_string(cache.points.rows()) +
                        " points, fewer than the per-member draw " +
                        std::to_string(max_quota));
    }
  }

  BootstrapSummary summary;
  summary.ensemble_size = ensemble_size;
  summary.iterations = iterations;
  summary.n_eval = n_eval;
  summary.seed = seed;
  summary.modes_samples.resize(iterations);
  summary.hq_samples.resize(iterations);

  auto run_iteration = [&](std::size_t it) {
    Rng rng(derive_seed(seed, "bootstrap", it));
    const std::vector<std::size_t> members =
        sample_distinct(pool.caches.size(), ensemble_size, rng);
    Tensor combined = Tensor::zeros({n_eval, 2});
    std::size_t row = 0;
    for (std::size_t j = 0; j < ensemble_size; ++j) {
      const Tensor& cache = pool.caches[members[j]].points;
      const std::vector<std::size_t> rows =
          sample_distinct(cache.rows(), quotas[j], rng);
      for (std::size_t r : rows) {
        combined.at(row, 0) = cache.at(r, 0);
        combined.at(row, 1) = cache.at(r, 1);
        ++row;
      }
    }
    const ModeReport report = mode_report(combined, spec);
    summary.modes_samples[it] = static_cast<double>(report.modes_recovered);
    summary.hq_samples[it] = report.hq_fraction;
  };

  if (workers <= 1) {
    for (std::size_t it = 0; it < iterations; ++it) run_iteration(it);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < std::min(workers, iterations); ++w) {
      threads.emplace_back([&] {
        for (std::size_t it = next.fetch_add(1); it < iterations;
             it = next.fetch_add(1)) {
          run_iteration(it);
        }
      });
    }
    for (std::thread& t : threads) t.join();
  }

  summary.modes_mean = sample_mean(summary.modes_samples);
  summary.modes_std = sample_std(summary.modes_samples, summary.modes_mean);
  summary.hq_mean = sample_mean(summary.hq_samples);
  summary.hq_std = sample_std(summary.hq_samples, summary.hq_mean);
  return summary;
}

Moments2 fit_moments(const Tensor& points) {
  if (points.rows() < 2 || points.cols() != 2) {
    throw ConfigError("moment fit needs at least 2 points of dimension 2");
  }
  const double n = static_cast<double>(points.rows());
  Moments2 m;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    m.mean_x += points.at(r, 0);
    m.mean_y += points.at(r, 1);
  }
  m.mean_x /= n;
  m.mean_y /= n;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const double dx = points.at(r, 0) - m.mean_x;
    const double dy = points.at(r, 1) - m.mean_y;
    m.cov_xx += dx * dx;
    m.cov_xy += dx * dy;
    m.cov_yy += dy * dy;
  }
  m.cov_xx /= n - 1.0;
  m.cov_xy /= n - 1.0;
  m.cov_yy /= n - 1.0;
  if (!std::isfinite(m.mean_x) || !std::isfinite(m.mean_y) ||
      !std::isfinite(m.cov_xx) || !std::isfinite(m.cov_xy) ||
      !std::isfinite(m.cov_yy)) {
    throw NumericError("non-finite moments");
  }
  return m;
}

double frechet_from_moments(const Moments2& a, const Moments2& b) {
  // Regularize both covariances so the square-root term stays defined for
  // singular fits.
  const double reg = 1e-10;
  const double a_xx = a.cov_xx + reg;
  const double a_yy = a.cov_yy + reg;
  const double b_xx = b.cov_xx + reg;
  const double b_yy = b.cov_yy + reg;

  const double dmx = a.mean_x - b.mean_x;
  const double dmy = a.mean_y - b.mean_y;
  const double mean_term = dmx * dmx + dmy * dmy;

  // P = Sa * Sb. Tr(sqrt(P)) for a 2x2 with non-negative eigenvalues:
  // sqrt(l1) + sqrt(l2) = sqrt(Tr(P) + 2*sqrt(det(P))).
  const double tr_p = a_xx * b_xx + 2.0 * a.cov_xy * b.cov_xy + a_yy * b_yy;
  const double det_a = a_xx * a_yy - a.cov_xy * a.cov_xy;
  const double det_b = b_xx * b_yy - b.cov_xy * b.cov_xy;
  const double det_p = std::max(0.0, det_a * det_b);
  const double cross = std::sqrt(std::max(0.0, tr_p + 2.0 * std::sqrt(det_p)));

  const double value = mean_term + a_xx + a_yy + b_xx + b_yy - 2.0 * cross;
  if (!std::isfinite(value)) throw NumericError("non-finite distance");
  // Exact-zero in theory; clamp the tiny negative residue of cancellation.
  return std::max(0.0, value);
}

double frechet_2d(const Tensor& real_points, const Tensor& synth_points) {
  return frechet_from_moments(fit_moments(real_points),
                              fit_moments(synth_points));
}

std::vector<NnPair> nn_audit(const Tensor& real_points,
                             const Tensor& synth_points, std::size_t top_m) {
  if (real_points.rows() == 0 || synth_points.rows() == 0) {
    throw ConfigError("audit needs non-empty real and synthetic sets");
  }
  if (real_points.cols() != 2 || synth_points.cols() != 2) {
    throw ConfigError("audit expects [N x 2] points");
  }
  const std::size_t total = real_points.rows() * synth_points.rows();
  const std::size_t keep = std::min(top_m, total);
  if (keep == 0) return {};

  const auto closer = [](const NnPair& a, const NnPair& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.synth_index != b.synth_index) return a.synth_index < b.synth_index;
    return a.real_index < b.real_index;
  };
  // Max-heap of the best `keep` pairs seen so far, ordered by the total
  // (distance, synth, real) rank so ties break deterministically.
  std::priority_queue<NnPair, std::vector<NnPair>, decltype(closer)> heap(
      closer);
  for (std::size_t s = 0; s < synth_points.rows(); ++s) {
    const double sx = synth_points.at(s, 0);
    const double sy = synth_points.at(s, 1);
    for (std::size_t r = 0; r < real_points.rows(); ++r) {
      const double dx = sx - real_points.at(r, 0);
      const double dy = sy - real_points.at(r, 1);
      const NnPair pair{s, r, 0.5 * (dx * dx + dy * dy)};
      if (heap.size() < keep) {
        heap.push(pair);
      } else if (closer(pair, heap.top())) {
        heap.pop();
        heap.push(pair);
      }
    }
  }
  std::vector<NnPair> out(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

Heatmap score_heatmap(GanMember& member, double x_lo, double x_hi,
                      double y_lo, double y_hi, std::size_t nx,
                      std::size_t ny) {
  if (nx == 0 || ny == 0) throw ConfigError("heatmap resolution must be >= 1");
  if (!(x_lo < x_hi) || !(y_lo < y_hi)) {
    throw ConfigError("heatmap bounds must satisfy lo < hi");
  }
  Heatmap map;
  map.x_lo = x_lo;
  map.x_hi = x_hi;
  map.y_lo = y_lo;
  map.y_hi = y_hi;
  map.nx = nx;
  map.ny = ny;
  const double dx = (x_hi - x_lo) / static_cast<double>(nx);
  const double dy = (y_hi - y_lo) / static_cast<double>(ny);
  Tensor lattice = Tensor::zeros({nx * ny, 2});
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      lattice.at(iy * nx + ix, 0) =
          x_lo + (static_cast<double>(ix) + 0.5) * dx;
      lattice.at(iy * nx + ix, 1) =
          y_lo + (static_cast<double>(iy) + 0.5) * dy;
    }
  }
  Tensor scores = discriminator_scores(member, lattice);
  map.scores.resize(nx * ny);
  for (std::size_t i = 0; i < map.scores.size(); ++i) {
    map.scores[i] = scores.at(i, 0);
  }
  return map;
}

void save_heatmap_csv(const std::filesystem::path& path, const Heatmap& map) {
  std::ofstream out(path);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "# x_lo=%.17g x_hi=%.17g y_lo=%.17g y_hi=%.17g nx=%zu ny=%zu\n",
                map.x_lo, map.x_hi, map.y_lo, map.y_hi, map.nx, map.ny);
  out << buf;
  for (std::size_t iy = 0; iy < map.ny; ++iy) {
    for (std::size_t ix = 0; ix < map.nx; ++ix) {
      std::snprintf(buf, sizeof buf, "%.17g", map.scores[iy * map.nx + ix]);
      out << buf << (ix + 1 < map.nx ? "," : "\n");
    }
  }
  if (!out.good()) {
    throw MissingArtifactError("write failed for " + path.string());
  }
}

void save_bootstrap_csv(const std::filesystem::path& path,
                        const std::vector<BootstrapSummary>& summaries) {
  std::ofstream out(path);
  out << "T,modes_mean,modes_std,hq_mean,hq_std,iterations,n_eval,seed\n";
  char buf[240];
  for (const BootstrapSummary& s : summaries) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%llu\n",
                  s.ensemble_size, s.modes_mean, s.modes_std, s.hq_mean,
                  s.hq_std, s.iterations, s.n_eval,
                  static_cast<unsigned long long>(s.seed));
    out << buf;
  }
  if (!out.good()) {
    throw MissingArtifactError("write failed for " + path.string());
  }
}

void save_bootstrap_iterations_csv(const std::filesystem::path& path,
                                   const BootstrapSummary& summary) {
  std::ofstream out(path);
  out << "iteration,modes_recovered,hq_fraction\n";
  char buf[120];
  for (std::size_t it = 0; it < summary.iterations; ++it) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", it,
                  summary.modes_samples[it], summary.hq_samples[it]);
    out << buf;
  }
  if (!out.good()) {
    throw MissingArtifactError("write failed for " + path.string());
  }
}

}  // namespace gansemble
