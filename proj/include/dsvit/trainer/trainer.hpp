#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsvit/model/encoder.hpp"
#include "dsvit/model/rtab.hpp"
#include "dsvit/numcore/params.hpp"
#include "dsvit/synthvol/dataset.hpp"
#include "dsvit/trainer/metrics.hpp"

namespace dsvit::train {

enum class Task : std::uint8_t { kSingleTimepoint, kLongitudinal };
std::string to_string(Task t);
Task parse_task(const std::string& s);

// Longitudinal heads: RTAB over all T scans, or the same head on M_T alone.
inline constexpr const char* kArmRtab = "rtab";
inline constexpr const char* kArmSingleTimepoint = "single_timepoint";

struct TrainConfig {
  Task task = Task::kSingleTimepoint;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t patience = 0;  // 0 disables early stopping
  double confidence_threshold = kDefaultConfidenceThreshold;
  std::string ablation = "dual";
  std::string longitudinal_arm = kArmRtab;
  bool finetune = false;
  model::EncoderConfig encoder;
  model::RtabConfig rtab;

  void validate() const;
  // Takes volume shape and region count from the data and ties the RTAB width
  // to the encoder width.
  void bind_to(const synth::GeneratorSpec& spec);
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Adam with bias correction; moments are kept per parameter name.
class Adam {
 public:
  Adam(const num::ParamSet<float>& params, double lr, double beta1, double beta2, double eps);
  void step(num::ParamSet<float>& params, const num::ParamSet<float>& grads);
  std::size_t steps() const noexcept { return t_; }

 private:
  num::ParamSet<float> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct ArmResult {
  std::string arm;
  Task task = Task::kSingleTimepoint;
  std::map<std::string, Evaluation> splits;  // "train", "val", "test"
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::size_t epochs_to_converge = 0;
  std::vector<EpochLog> curve;
};

struct ExperimentReport {
  nlohmann::json config = nlohmann::json::object();
  std::string split_fingerprint;
  std::vector<ArmResult> arms;

  const ArmResult& arm(const std::string& name) const;
};

void to_json(nlohmann::json& j, const ExperimentReport& r);
void from_json(const nlohmann::json& j, ExperimentReport& r);
// Flat rows: arm, split, accuracy, recall, hc_accuracy, hc_coverage,
// epochs_to_converge. Reals are printed with 17 significant digits; an empty
// high-confidence bucket leaves hc_accuracy blank.
std::string to_csv(const ExperimentReport& r);

struct CsvRow {
  std::string arm;
  std::string split;
  double accuracy = 0.0;
  double recall = 0.0;
  std::optional<double> hc_accuracy;
  double hc_coverage = 0.0;
  std::size_t epochs_to_converge = 0;
};
std::vector<CsvRow> parse_csv(const std::string& text);

struct TrainOutcome {
  num::ParamSet<float> params;  // best-validation parameters
  ArmResult result;
};

// Single-timepoint DS-ViT training under cfg.ablation.
TrainOutcome train_single(const synth::Dataset& data, const TrainConfig& cfg);

// RTAB (or the M_T-only head) over backbone features. With cfg.finetune the
// backbone is trained too; otherwise its features are computed once.
TrainOutcome train_longitudinal(const synth::Dataset& data, const TrainConfig& cfg,
                                const num::ParamSet<float>& backbone);

// Metrics of trained parameters on one split.
Evaluation evaluate(const num::ParamSet<float>& params, const synth::Dataset& data,
                    const TrainConfig& cfg, synth::Split split);

// The four single-timepoint arms, or the two longitudinal heads when `data` is
// longitudinal, all under one seed and one split.
// When `trained` is given it receives each arm's parameters in arm order.
ExperimentReport ablation_suite(const synth::Dataset& data, const TrainConfig& cfg,
                                const num::ParamSet<float>* backbone = nullptr,
                                std::vector<num::ParamSet<float>>* trained = nullptr);

// Checkpoint config block: {"train": cfg}; parameters as given.
model::Checkpoint make_checkpoint(const TrainConfig& cfg, const num::ParamSet<float>& params);
TrainConfig checkpoint_config(const model::Checkpoint& ckpt);
// Backbone-only view of a checkpoint's parameters (drops rtab/).
num::ParamSet<float> backbone_params(const num::ParamSet<float>& params);

}  // namespace dsvit::train
