#include "gansemble/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "gansemble/errors.hpp"
#include "gansemble/losses.hpp"
#include "gansemble/model.hpp"
#include "gansemble/rng.hpp"
#include "gansemble/tensor.hpp"

namespace gansemble {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

MlpModel build_classifier(const ClassifierConfig& config, std::size_t classes) {
  MlpModel model;
  std::size_t width = 2;
  for (std::size_t hidden : config.hidden_widths) {
    model.add_dense(width, hidden).add_relu();
    width = hidden;
  }
  model.add_dense(width, classes);
  return model;
}

void check_dataset(const LabeledDataset& ds, const char* name) {
  if (ds.points.rows() == 0) {
    throw ConfigError(std::string(name) + " dataset is empty");
  }
  if (ds.points.cols() != 2) {
    throw ConfigError(std::string(name) + " points must have 2 columns");
  }
  if (ds.labels.size() != ds.points.rows()) {
    throw ConfigError(std::string(name) + " label count does not match rows");
  }
  if (ds.class_count < 1) {
    throw ConfigError(std::string(name) + " class_count must be >= 1");
  }
  for (int label : ds.labels) {
    if (label < 0 || label >= ds.class_count) {
      throw ConfigError(std::string(name) + " has a label outside [0, K)");
    }
  }
}

double test_accuracy(MlpModel& model, const LabeledDataset& real_test) {
  Tensor logits = model.forward(real_test.points, Mode::kInference);
  std::vector<int> predicted = argmax_rows(logits);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == real_test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

}  // namespace

void validate_classifier_config(const ClassifierConfig& config) {
  for (std::size_t width : config.hidden_widths) {
    if (width == 0) throw ConfigError("hidden widths must be positive");
  }
  if (config.epochs == 0) throw ConfigError("epochs must be >= 1");
  if (config.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (config.eval_every == 0) throw ConfigError("eval_every must be >= 1");
  if (!(config.adam.learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be positive");
  }
}

AccuracyCurve train_classifier(const LabeledDataset& synthetic,
                               const LabeledDataset& real_test,
                               const ClassifierConfig& config) {
  validate_classifier_config(config);
  check_dataset(synthetic, "synthetic");
  check_dataset(real_test, "real_test");
  if (synthetic.class_count != real_test.class_count) {
    throw ConfigError("synthetic and real_test class counts differ");
  }
  const std::size_t n = synthetic.size();
  if (n < config.batch_size) {
    throw ConfigError("synthetic dataset smaller than one batch");
  }
  const int classes = synthetic.class_count;

  AccuracyCurve curve;
  std::vector<std::size_t> class_counts(static_cast<std::size_t>(classes), 0);
  for (int label : synthetic.labels) {
    ++class_counts[static_cast<std::size_t>(label)];
  }
  for (int c = 0; c < classes; ++c) {
    if (class_counts[static_cast<std::size_t>(c)] == 0) {
      curve.missing_classes.push_back(c);
    }
  }

  MlpModel model =
      build_classifier(config, static_cast<std::size_t>(classes));
  Rng init_rng(derive_seed(config.seed, "classifier-init"));
  model.init_glorot(init_rng);
  AdamState opt(model, config.adam);

  Rng batch_rng(derive_seed(config.seed, "classifier-batch"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t steps_per_epoch = n / config.batch_size;
  const std::size_t total_steps = config.epochs * steps_per_epoch;

  Tensor batch = Tensor::zeros({config.batch_size, 2});
  std::vector<int> batch_labels(config.batch_size);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates reshuffle; the tail n % batch_size rows sit out this epoch.
    for (std::size_t i = n - 1; i > 0; --i) {
      std::size_t j = batch_rng.next_below(i + 1);
      std::swap(order[i], order[j]);
    }
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      for (std::size_t r = 0; r < config.batch_size; ++r) {
        std::size_t src = order[b * config.batch_size + r];
        batch.at(r, 0) = synthetic.points.at(src, 0);
        batch.at(r, 1) = synthetic.points.at(src, 1);
        batch_labels[r] = synthetic.labels[src];
      }
      Tensor logits = model.forward(batch, Mode::kTraining);
      Tensor grad;
      softmax_cross_entropy(logits, batch_labels, &grad);
      model.zero_grads();
      model.backward(grad);
      opt.step(model);
      ++step;
      if (step % config.eval_every == 0) {
        curve.points.push_back({step, test_accuracy(model, real_test)});
      }
    }
  }
  if (curve.points.empty() || curve.points.back().step != total_steps) {
    curve.points.push_back({total_steps, test_accuracy(model, real_test)});
  }

  curve.best_accuracy = curve.points.front().accuracy;
  for (const CurvePoint& p : curve.points) {
    curve.best_accuracy = std::max(curve.best_accuracy, p.accuracy);
  }
  curve.final_accuracy = curve.points.back().accuracy;
  return curve;
}

CurveStability curve_stability(const AccuracyCurve& curve,
                               double tail_fraction) {
  if (curve.points.empty()) {
    throw ConfigError("curve_stability needs a non-empty curve");
  }
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
    throw ConfigError("tail_fraction must be in (0, 1]");
  }
  const std::size_t n = curve.points.size();
  std::size_t count = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(n)));
  count = std::clamp<std::size_t>(count, 1, n);

  double sum = 0.0;
  for (std::size_t i = n - count; i < n; ++i) {
    sum += curve.points[i].accuracy;
  }
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (std::size_t i = n - count; i < n; ++i) {
    const double d = curve.points[i].accuracy - mean;
    ss += d * d;
  }
  CurveStability out;
  out.tail_mean = mean;
  out.tail_std =
      count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
  out.best_minus_final = curve.best_accuracy - curve.final_accuracy;
  return out;
}

void save_curve_csv(const std::filesystem::path& path,
                    const AccuracyCurve& curve) {
  std::ofstream out(path);
  if (!out) {
    throw MissingArtifactError("cannot write " + path.string());
  }
  out << "step,accuracy\n";
  for (const CurvePoint& p : curve.points) {
    out << p.step << "," << fmt_double(p.accuracy) << "\n";
  }
  if (!out.good()) {
    throw MissingArtifactError("failed writing " + path.string());
  }
}

void save_downstream_summary_csv(const std::filesystem::path& path,
                                 const std::vector<DownstreamRecord>& records) {
  for (const DownstreamRecord& rec : records) {
    if (rec.method.empty() ||
        rec.method.find_first_of(",\n\r") != std::string::npos) {
      throw ConfigError("method names must be non-empty and comma-free");
    }
  }
  std::ofstream out(path);
  if (!out) {
    throw MissingArtifactError("cannot write " + path.string());
  }
  out << "method,ensemble_size,seed,best_accuracy,final_accuracy,"
         "tail_mean,tail_std,best_minus_final\n";
  for (const DownstreamRecord& rec : records) {
    out << rec.method << "," << rec.ensemble_size << "," << rec.seed << ","
        << fmt_double(rec.best_accuracy) << ","
        << fmt_double(rec.final_accuracy) << "," << fmt_double(rec.tail_mean)
        << "," << fmt_double(rec.tail_std) << ","
        << fmt_double(rec.best_minus_final) << "\n";
  }
  if (!out.good()) {
    throw MissingArtifactError("failed writing " + path.string());
  }
}

}  // namespace gansemble
