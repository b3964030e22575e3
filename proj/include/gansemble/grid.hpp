#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gansemble/tensor.hpp"

namespace gansemble {

// Square grid of isotropic Gaussian modes: centers at
// (origin + spacing*i, origin + spacing*j) for i,j in [0, grid_side).
struct GridSpec {
  std::size_t grid_side = 5;
  double spacing = 2.0;
  double origin = 4.0;
  double sigma = 0.05;

  std::size_t mode_count() const { return grid_side * grid_side; }
};

enum class LabelScheme { kNone, kCheckerboard, kHalves };

std::string label_scheme_name(LabelScheme scheme);
LabelScheme label_scheme_from_name(const std::string& name);

struct LabeledDataset {
  Tensor points;  // [N x 2]
  std::vector<int> labels;
  int class_count = 1;
  GridSpec spec;
  std::uint64_t seed = 0;
  LabelScheme scheme = LabelScheme::kNone;

  std::size_t size() const { return points.rows(); }
};

// Centers in row-major order: index = i*grid_side + j.
Tensor mode_centers(const GridSpec& spec);

// Each point: uniform mode choice, then isotropic Gaussian noise around the
// center. Deterministic per seed.
Tensor sample_real(const GridSpec& spec, std::size_t n, std::uint64_t seed);

// Grid indices (i, j) of the center nearest to (x, y); equidistant ties go
// to the lowest (i, j) in row-major order.
std::pair<std::size_t, std::size_t> nearest_center(const GridSpec& spec,
                                                   double x, double y);

// Labels from nearest-center attribution. checkerboard: class = (i+j) mod 2;
// halves: class 0 for the low-i half of the columns (the larger half when
// grid_side is odd).
LabeledDataset assign_labels(const Tensor& points, const GridSpec& spec,
                             LabelScheme scheme, std::uint64_t seed = 0);

// CSV (x,y,label) with a JSON sidecar at "<path>.meta.json" recording spec,
// seed, scheme and row count. %.17g formatting makes the round trip
// bit-exact; the loader re-validates every invariant.
void save_dataset(const std::filesystem::path& csv_path,
                  const LabeledDataset& ds);
LabeledDataset load_dataset(const std::filesystem::path& csv_path);

}  // namespace gansemble
