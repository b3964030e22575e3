#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gansemble/adam.hpp"
#include "gansemble/grid.hpp"

namespace gansemble {

// Train-on-synthetic evaluation: an MLP classifier fit purely on generated
// labeled points, scored against held-out real data.
struct ClassifierConfig {
  std::vector<std::size_t> hidden_widths = {64, 64};
  std::size_t epochs = 40;
  std::size_t batch_size = 100;
  AdamConfig adam{.beta1 = 0.9};
  std::size_t eval_every = 50;  // steps between test evaluations
  std::uint64_t seed = 0;
};

void validate_classifier_config(const ClassifierConfig& config);

struct CurvePoint {
  std::size_t step;
  double accuracy;
};

struct AccuracyCurve {
  std::vector<CurvePoint> points;  // steps strictly increasing
  double best_accuracy = 0.0;      // max over points
  double final_accuracy = 0.0;     // last point
  // Classes with zero training examples: a collapse symptom worth
  // surfacing, not a crash; the classifier simply never predicts them well.
  std::vector<int> missing_classes;
};

// Trains a dense/ReLU softmax classifier on the synthetic set only and
// records test accuracy every eval_every steps; a final evaluation is
// always appended, so the curve is non-empty for any epochs >= 1.
// Deterministic per config.seed.
AccuracyCurve train_classifier(const LabeledDataset& synthetic,
                               const LabeledDataset& real_test,
                               const ClassifierConfig& config);

// Statistics over the last tail_fraction of the curve's evaluation points;
// the tail holds ceil(fraction * size) points, at least one.
struct CurveStability {
  double tail_mean = 0.0;
  double tail_std = 0.0;  // sample standard deviation, 0 for a single point
  double best_minus_final = 0.0;
};

CurveStability curve_stability(const AccuracyCurve& curve,
                               double tail_fraction);

void save_curve_csv(const std::filesystem::path& path,
                    const AccuracyCurve& curve);

// One classifier run in an aggregate comparison table.
struct DownstreamRecord {
  std::string method;
  std::size_t ensemble_size = 1;
  std::uint64_t seed = 0;
  double best_accuracy = 0.0;
  double final_accuracy = 0.0;
  double tail_mean = 0.0;
  double tail_std = 0.0;
  double best_minus_final = 0.0;
};

void save_downstream_summary_csv(const std::filesystem::path& path,
                                 const std::vector<DownstreamRecord>& records);

}  // namespace gansemble
