#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gansemble/ensemble.hpp"
#include "gansemble/gan.hpp"
#include "gansemble/grid.hpp"
#include "gansemble/tensor.hpp"

namespace gansemble {

// A point is high quality iff its Euclidean distance to the nearest mode
// center is at most 3*sigma. The boundary is inclusive, with a 1e-12
// relative guard on the squared comparison so decimal coordinates that
// denote the exact boundary register as inside. A mode is recovered iff at
// least one high-quality point is attributed to it.
struct ModeReport {
  std::size_t modes_recovered = 0;
  double hq_fraction = 0.0;
  std::vector<std::size_t> hq_counts;  // per mode, row-major center order
  std::size_t total_points = 0;
};

ModeReport mode_report(const Tensor& points, const GridSpec& spec);

// Bootstrap estimate over a sample pool: each iteration picks ensemble_size
// distinct members uniformly, draws an equal quota of cached points from
// each without replacement, and evaluates mode_report on the union.
struct BootstrapSummary {
  std::size_t ensemble_size = 0;  // T
  std::size_t iterations = 0;
  std::size_t n_eval = 0;
  std::uint64_t seed = 0;
  double modes_mean = 0.0;
  double modes_std = 0.0;
  double hq_mean = 0.0;
  double hq_std = 0.0;
  std::vector<double> modes_samples;  // one entry per iteration
  std::vector<double> hq_samples;
};

BootstrapSummary bootstrap_metrics(const SamplePool& pool,
                                   std::size_t ensemble_size,
                                   const GridSpec& spec,
                                   std::size_t n_eval = 2500,
                                   std::size_t iterations = 1000,
                                   std::uint64_t seed = 0,
                                   std::size_t workers = 1);

// First and second moments of a 2D point set; covariance uses the n-1
// normalization.
struct Moments2 {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double cov_xx = 0.0;
  double cov_xy = 0.0;
  double cov_yy = 0.0;
};

Moments2 fit_moments(const Tensor& points);

// Squared Fréchet distance between the Gaussians fitted to two point sets:
// ||mu1-mu2||^2 + Tr(S1 + S2 - 2*(S1*S2)^{1/2}), with 1e-10*I added to each
// covariance so the closed-form 2x2 square root stays defined when a fit is
// singular.
double frechet_from_moments(const Moments2& a, const Moments2& b);
double frechet_2d(const Tensor& real_points, const Tensor& synth_points);

// One real-synthetic pair from the memorization audit. distance is the mean
// of squared per-coordinate differences.
struct NnPair {
  std::size_t synth_index = 0;
  std::size_t real_index = 0;
  double distance = 0.0;
};

// Exhaustive search over all real x synth pairs; returns the top_m closest,
// sorted ascending by (distance, synth index, real index). top_m beyond the
// pair count returns every pair.
std::vector<NnPair> nn_audit(const Tensor& real_points,
                             const Tensor& synth_points, std::size_t top_m);

// Discriminator score over a cell-centered lattice: cell (iy, ix) is scored
// at the center of its cell, and scores are row-major with y rows scanning
// low to high, x columns low to high: index = iy*nx + ix. A 1x1 resolution
// scores the single center of the bounds.
struct Heatmap {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> scores;
};

Heatmap score_heatmap(GanMember& member, double x_lo, double x_hi,
                      double y_lo, double y_hi, std::size_t nx,
                      std::size_t ny);

// CSV exports. The heatmap grid carries its bounds in a "#" metadata line;
// the summary CSV has one row per ensemble size, the iterations CSV one row
// per bootstrap iteration.
void save_heatmap_csv(const std::filesystem::path& path, const Heatmap& map);
void save_bootstrap_csv(const std::filesystem::path& path,
                        const std::vector<BootstrapSummary>& summaries);
void save_bootstrap_iterations_csv(const std::filesystem::path& path,
                                   const BootstrapSummary& summary);

}  // namespace gansemble
