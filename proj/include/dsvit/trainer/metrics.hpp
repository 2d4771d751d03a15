#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace dsvit::train {

inline constexpr double kDefaultConfidenceThreshold = 0.7;

// Binary metrics with class 1 (AD / at-risk) as the positive class.
struct Metrics {
  std::size_t n = 0;
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  double accuracy = 0.0;
  double recall = 0.0;  // tp / (tp + fn); 0 when no positives
  double mean_loss = 0.0;
};

// Predictions whose max-class probability is at least the threshold.
struct ConfidenceBuckets {
  double threshold = kDefaultConfidenceThreshold;
  std::size_t count = 0;
  double coverage = 0.0;
  std::optional<double> accuracy;  // empty bucket has no accuracy
};

struct Evaluation {
  Metrics metrics;
  ConfidenceBuckets high_confidence;
};

struct ScoredPrediction {
  int label = 0;
  std::size_t predicted = 0;
  double confidence = 0.0;
  double loss = 0.0;
};

// Throws InvalidInput for an empty prediction list.
Evaluation summarize(std::span<const ScoredPrediction> preds,
                     double threshold = kDefaultConfidenceThreshold);

void to_json(nlohmann::json& j, const Evaluation& e);
void from_json(const nlohmann::json& j, Evaluation& e);

// First 1-based epoch whose validation accuracy is within 0.005 of the best.
std::size_t epochs_to_converge(std::span<const double> val_accuracy);

}  // namespace dsvit::train
