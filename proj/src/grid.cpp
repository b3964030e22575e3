#include "gansemble/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gansemble/errors.hpp"
#include "gansemble/rng.hpp"

namespace gansemble {

namespace {

void check_spec(const GridSpec& spec) {
  if (spec.grid_side == 0) throw ConfigError("grid_side must be positive");
  if (spec.sigma <= 0.0) throw ConfigError("sigma must be positive");
  if (spec.spacing <= 0.0) throw ConfigError("spacing must be positive");
}

int class_of(LabelScheme scheme, std::size_t i, std::size_t j,
             std::size_t grid_side) {
  switch (scheme) {
    case LabelScheme::kNone:
      return 0;
    case LabelScheme::kCheckerboard:
      return static_cast<int>((i + j) % 2);
    case LabelScheme::kHalves:
      return i < (grid_side + 1) / 2 ? 0 : 1;
  }
  throw ConfigError("unknown label scheme");
}

}  // namespace

std::string label_scheme_name(LabelScheme scheme) {
  switch (scheme) {
    case LabelScheme::kNone: return "none";
    case LabelScheme::kCheckerboard: return "checkerboard";
    case LabelScheme::kHalves: return "halves";
  }
  throw ConfigError("unknown label scheme");
}

LabelScheme label_scheme_from_name(const std::string& name) {
  if (name == "none") return LabelScheme::kNone;
  if (name == "checkerboard") return LabelScheme::kCheckerboard;
  if (name == "halves") return LabelScheme::kHalves;
  throw ConfigError("unknown label scheme '" + name +
                    "' (expected none, checkerboard or halves)");
}

Tensor mode_centers(const GridSpec& spec) {
  check_spec(spec);
  Tensor centers({spec.mode_count(), 2});
  for (std::size_t i = 0; i < spec.grid_side; ++i) {
    for (std::size_t j = 0; j < spec.grid_side; ++j) {
      const std::size_t idx = i * spec.grid_side + j;
      centers.at(idx, 0) = spec.origin + spec.spacing * static_cast<double>(i);
      centers.at(idx, 1) = spec.origin + spec.spacing * static_cast<double>(j);
    }
  }
  return centers;
}

Tensor sample_real(const GridSpec& spec, std::size_t n, std::uint64_t seed) {
  check_spec(spec);
  if (n == 0) throw ConfigError("sample_real: n must be positive");
  const Tensor centers = mode_centers(spec);
  Rng rng(seed);
  Tensor points({n, 2});
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t m = rng.next_below(centers.rows());
    points.at(r, 0) = centers.at(m, 0) + spec.sigma * rng.normal();
    points.at(r, 1) = centers.at(m, 1) + spec.sigma * rng.normal();
  }
  return points;
}

std::pair<std::size_t, std::size_t> nearest_center(const GridSpec& spec,
                                                   double x, double y) {
  // Separable in x and y; rounding half down per axis lands exactly on the
  // lowest row-major (i, j) among equidistant centers.
  auto snap = [&](double v) {
    const double f = (v - spec.origin) / spec.spacing;
    const double r = std::ceil(f - 0.5);
    const double hi = static_cast<double>(spec.grid_side - 1);
    return static_cast<std::size_t>(std::clamp(r, 0.0, hi));
  };
  return {snap(x), snap(y)};
}

LabeledDataset assign_labels(const Tensor& points, const GridSpec& spec,
                             LabelScheme scheme, std::uint64_t seed) {
  check_spec(spec);
  if (points.rank() != 2 || points.cols() != 2) {
    throw ConfigError("assign_labels: points must be [N x 2], got " +
                      points.shape_str());
  }
  require_finite(points, "dataset points");
  LabeledDataset ds;
  ds.points = points;
  ds.spec = spec;
  ds.seed = seed;
  ds.scheme = scheme;
  ds.class_count = scheme == LabelScheme::kNone ? 1 : 2;
  ds.labels.resize(points.rows());
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const auto [i, j] = nearest_center(spec, points.at(r, 0), points.at(r, 1));
    ds.labels[r] = class_of(scheme, i, j, spec.grid_side);
  }
  return ds;
}

void save_dataset(const std::filesystem::path& csv_path,
                  const LabeledDataset& ds) {
  if (ds.labels.size() != ds.points.rows()) {
    throw ConfigError("dataset has " + std::to_string(ds.labels.size()) +
                      " labels for " + std::to_string(ds.points.rows()) +
                      " points");
  }
  std::ofstream out(csv_path);
  if (!out) {
    throw MissingArtifactError("cannot write " + csv_path.string());
  }
  out << "x,y,label\n";
  char buf[64];
  for (std::size_t r = 0; r < ds.points.rows(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", ds.points.at(r, 0),
                  ds.points.at(r, 1), ds.labels[r]);
    out << buf;
  }
  out.flush();
  if (!out) throw MissingArtifactError("write failed for " + csv_path.string());

  nlohmann::json meta = {
      {"rows", ds.points.rows()},
      {"class_count", ds.class_count},
      {"seed", ds.seed},
      {"scheme", label_scheme_name(ds.scheme)},
      {"grid_side", ds.spec.grid_side},
      {"spacing", ds.spec.spacing},
      {"origin", ds.spec.origin},
      {"sigma", ds.spec.sigma},
  };
  std::ofstream meta_out(csv_path.string() + ".meta.json");
  meta_out << meta.dump(2) << "\n";
  if (!meta_out) {
    throw MissingArtifactError("write failed for " + csv_path.string() +
                               ".meta.json");
  }
}

LabeledDataset load_dataset(const std::filesystem::path& csv_path) {
  std::ifstream meta_in(csv_path.string() + ".meta.json");
  if (!meta_in) {
    throw MissingArtifactError("missing sidecar " + csv_path.string() +
                               ".meta.json");
  }
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw MissingArtifactError("bad sidecar for " + csv_path.string() + ": " +
                               e.what());
  }

  LabeledDataset ds;
  try {
    ds.spec.grid_side = meta.at("grid_side").get<std::size_t>();
    ds.spec.spacing = meta.at("spacing").get<double>();
    ds.spec.origin = meta.at("origin").get<double>();
    ds.spec.sigma = meta.at("sigma").get<double>();
    ds.seed = meta.at("seed").get<std::uint64_t>();
    ds.scheme = label_scheme_from_name(meta.at("scheme").get<std::string>());
    ds.class_count = meta.at("class_count").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw MissingArtifactError("bad sidecar for " + csv_path.string() + ": " +
                               e.what());
  }
  const auto rows = meta.at("rows").get<std::size_t>();

  std::ifstream in(csv_path);
  if (!in) throw MissingArtifactError("missing dataset " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "x,y,label") {
    throw MissingArtifactError("bad header in " + csv_path.string());
  }
  ds.points = Tensor({rows, 2});
  ds.labels.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      throw MissingArtifactError("truncated dataset " + csv_path.string());
    }
    double x, y;
    int label;
    if (std::sscanf(line.c_str(), "%lf,%lf,%d", &x, &y, &label) != 3) {
      throw MissingArtifactError("bad row " + std::to_string(r + 1) + " in " +
                                 csv_path.string());
    }
    ds.points.at(r, 0) = x;
    ds.points.at(r, 1) = y;
    ds.labels[r] = label;
    if (label < 0 || label >= ds.class_count) {
      throw MissingArtifactError("label out of range in " + csv_path.string() +
                                 " row " + std::to_string(r + 1));
    }
  }
  if (std::getline(in, line) && !line.empty()) {
    throw MissingArtifactError("trailing data in " + csv_path.string());
  }
  require_finite(ds.points, "dataset points");
  return ds;
}

}  // namespace gansemble
