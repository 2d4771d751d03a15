#include "dsvit/trainer/metrics.hpp"

#include <algorithm>

#include "dsvit/errors.hpp"

namespace dsvit::train {

Evaluation summarize(std::span<const ScoredPrediction> preds, double threshold) {
  if (preds.empty()) throw InvalidInput("cannot evaluate an empty split");
  Evaluation e;
  Metrics& m = e.metrics;
  ConfidenceBuckets& hc = e.high_confidence;
  hc.threshold = threshold;
  std::size_t hc_correct = 0;
  double loss = 0.0;
  for (const ScoredPrediction& p : preds) {
    const bool positive = p.label == 1;
    const bool said_positive = p.predicted == 1;
    if (positive) (said_positive ? m.tp : m.fn)++;
    else (said_positive ? m.fp : m.tn)++;
    if (p.confidence >= threshold) {
      ++hc.count;
      if (static_cast<int>(p.predicted) == p.label) ++hc_correct;
    }
    loss += p.loss;
  }
  m.n = preds.size();
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.n);
  m.recall = m.tp + m.fn == 0 ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  m.mean_loss = loss / static_cast<double>(m.n);
  hc.coverage = static_cast<double>(hc.count) / static_cast<double>(m.n);
  if (hc.count > 0) hc.accuracy = static_cast<double>(hc_correct) / static_cast<double>(hc.count);
  return e;
}

void to_json(nlohmann::json& j, const Evaluation& e) {
  const Metrics& m = e.metrics;
  j = {{"n", m.n},
       {"tp", m.tp},
       {"fn", m.fn},
       {"tn", m.tn},
       {"fp", m.fp},
       {"accuracy", m.accuracy},
       {"recall", m.recall},
       {"mean_loss", m.mean_loss},
       {"hc_threshold", e.high_confidence.threshold},
       {"hc_count", e.high_confidence.count},
       {"hc_coverage", e.high_confidence.coverage},
       {"hc_accuracy", e.high_confidence.accuracy ? nlohmann::json(*e.high_confidence.accuracy)
                                                  : nlohmann::json(nullptr)}};
}

void from_json(const nlohmann::json& j, Evaluation& e) {
  Metrics& m = e.metrics;
  m.n = j.at("n").get<std::size_t>();
  m.tp = j.at("tp").get<std::size_t>();
  m.fn = j.at("fn").get<std::size_t>();
  m.tn = j.at("tn").get<std::size_t>();
  m.fp = j.at("fp").get<std::size_t>();
  m.accuracy = j.at("accuracy").get<double>();
  m.recall = j.at("recall").get<double>();
  m.mean_loss = j.at("mean_loss").get<double>();
  e.high_confidence.threshold = j.at("hc_threshold").get<double>();
  e.high_confidence.count = j.at("hc_count").get<std::size_t>();
  e.high_confidence.coverage = j.at("hc_coverage").get<double>();
  const auto& acc = j.at("hc_accuracy");
  e.high_confidence.accuracy = acc.is_null() ? std::nullopt : std::optional<double>(acc.get<double>());
}

std::size_t epochs_to_converge(std::span<const double> val_accuracy) {
  if (val_accuracy.empty()) return 0;
  const double best = *std::max_element(val_accuracy.begin(), val_accuracy.end());
  for (std::size_t i = 0; i < val_accuracy.size(); ++i) {
    if (val_accuracy[i] >= best - 0.005) return i + 1;
  }
  return val_accuracy.size();
}

}  // namespace dsvit::train
