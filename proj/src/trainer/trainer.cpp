#include "dsvit/trainer/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "dsvit/errors.hpp"
#include "dsvit/json_util.hpp"
#include "dsvit/numcore/ops.hpp"

namespace dsvit::train {

using num::ParamSet;
using synth::Split;

std::string to_string(Task t) {
  return t == Task::kLongitudinal ? "longitudinal" : "single_timepoint";
}

Task parse_task(const std::string& s) {
  if (s == "single_timepoint") return Task::kSingleTimepoint;
  if (s == "longitudinal") return Task::kLongitudinal;
  throw InvalidInput("unknown task '" + s + "' (expected single_timepoint or longitudinal)");
}

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidInput("epochs must be >= 1");
  if (batch_size == 0) throw InvalidInput("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw InvalidInput("learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidInput("Adam moment decays must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw InvalidInput("adam_eps must be > 0");
  if (!(confidence_threshold >= 0.5 && confidence_threshold <= 1.0)) {
    throw InvalidInput("confidence_threshold must lie in [0.5, 1]");
  }
  if (longitudinal_arm != kArmRtab && longitudinal_arm != kArmSingleTimepoint) {
    throw InvalidInput("longitudinal_arm must be rtab or single_timepoint");
  }
  model::EncoderConfig probe = encoder;
  model::apply_ablation(probe, ablation);
  probe.validate();
  rtab.validate();
  if (rtab.dim != encoder.dim) throw InvalidInput("rtab dim must equal encoder dim");
}

void TrainConfig::bind_to(const synth::GeneratorSpec& spec) {
  encoder.dims = spec.dims;
  encoder.num_regions = spec.num_regions;
  rtab.dim = encoder.dim;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"task", to_string(c.task)},
       {"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"learning_rate", c.learning_rate},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"adam_eps", c.adam_eps},
       {"seed", c.seed},
       {"patience", c.patience},
       {"confidence_threshold", c.confidence_threshold},
       {"ablation", c.ablation},
       {"longitudinal_arm", c.longitudinal_arm},
       {"finetune", c.finetune},
       {"encoder", c.encoder},
       {"rtab", c.rtab}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  reject_unknown(j,
                 {"task", "epochs", "batch_size", "learning_rate", "beta1", "beta2", "adam_eps",
                  "seed", "patience", "confidence_threshold", "ablation", "longitudinal_arm",
                  "finetune", "encoder", "rtab"},
                 "train config");
  try {
    if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
    read_opt(j, "epochs", c.epochs);
    read_opt(j, "batch_size", c.batch_size);
    read_opt(j, "learning_rate", c.learning_rate);
    read_opt(j, "beta1", c.beta1);
    read_opt(j, "beta2", c.beta2);
    read_opt(j, "adam_eps", c.adam_eps);
    read_opt(j, "seed", c.seed);
    read_opt(j, "patience", c.patience);
    read_opt(j, "confidence_threshold", c.confidence_threshold);
    read_opt(j, "ablation", c.ablation);
    read_opt(j, "longitudinal_arm", c.longitudinal_arm);
    read_opt(j, "finetune", c.finetune);
    if (j.contains("encoder")) model::from_json(j.at("encoder"), c.encoder);
    if (j.contains("rtab")) model::from_json(j.at("rtab"), c.rtab);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("train config: ") + e.what());
  }
}

Adam::Adam(const ParamSet<float>& params, double lr, double beta1, double beta2, double eps)
    : m_(params.zeros_like()), v_(params.zeros_like()), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(ParamSet<float>& params, const ParamSet<float>& grads) {
  if (params.names() != m_.names() || grads.names() != m_.names()) {
    throw InvariantViolation("Adam: parameter layout changed between steps");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.at(i).data;
    auto& m = m_.at(i).data;
    auto& v = v_.at(i).data;
    const auto& g = grads.at(i).data;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      m[k] = static_cast<float>(beta1_ * m[k] + (1.0 - beta1_) * gk);
      v[k] = static_cast<float>(beta2_ * v[k] + (1.0 - beta2_) * gk * gk);
      const double step = lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
      p[k] = static_cast<float>(p[k] - step);
    }
    if (!num::all_finite<float>(p)) {
      throw NumericalError("non-finite parameter after update: " + params.name(i));
    }
  }
}

const ArmResult& ExperimentReport::arm(const std::string& name) const {
  for (const ArmResult& a : arms) {
    if (a.arm == name) return a;
  }
  throw InvalidInput("report has no arm '" + name + "'");
}

void to_json(nlohmann::json& j, const ExperimentReport& r) {
  nlohmann::json arms = nlohmann::json::array();
  for (const ArmResult& a : r.arms) {
    nlohmann::json curve = nlohmann::json::array();
    for (const EpochLog& e : a.curve) {
      curve.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_loss", e.val_loss},
                       {"val_accuracy", e.val_accuracy}});
    }
    nlohmann::json splits = nlohmann::json::object();
    for (const auto& [name, ev] : a.splits) splits[name] = ev;
    arms.push_back({{"arm", a.arm},
                    {"task", to_string(a.task)},
                    {"splits", splits},
                    {"epochs_run", a.epochs_run},
                    {"best_epoch", a.best_epoch},
                    {"epochs_to_converge", a.epochs_to_converge},
                    {"curve", curve}});
  }
  j = {{"config", r.config}, {"split_fingerprint", r.split_fingerprint}, {"arms", arms}};
}

void from_json(const nlohmann::json& j, ExperimentReport& r) {
  r.config = j.at("config");
  r.split_fingerprint = j.at("split_fingerprint").get<std::string>();
  r.arms.clear();
  for (const auto& a : j.at("arms")) {
    ArmResult out;
    out.arm = a.at("arm").get<std::string>();
    out.task = parse_task(a.at("task").get<std::string>());
    for (auto it = a.at("splits").begin(); it != a.at("splits").end(); ++it) {
      out.splits[it.key()] = it.value().get<Evaluation>();
    }
    out.epochs_run = a.at("epochs_run").get<std::size_t>();
    out.best_epoch = a.at("best_epoch").get<std::size_t>();
    out.epochs_to_converge = a.at("epochs_to_converge").get<std::size_t>();
    for (const auto& e : a.at("curve")) {
      out.curve.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                           e.at("val_loss").get<double>(), e.at("val_accuracy").get<double>()});
    }
    r.arms.push_back(std::move(out));
  }
}

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "arm,split,accuracy,recall,hc_accuracy,hc_coverage,epochs_to_converge\n";
  for (const ArmResult& a : r.arms) {
    for (const char* split : {"train", "val", "test"}) {
      auto it = a.splits.find(split);
      if (it == a.splits.end()) continue;
      const Evaluation& e = it->second;
      out << a.arm << ',' << split << ',' << real(e.metrics.accuracy) << ',' << real(e.metrics.recall)
          << ',' << (e.high_confidence.accuracy ? real(*e.high_confidence.accuracy) : "") << ','
          << real(e.high_confidence.coverage) << ',' << a.epochs_to_converge << '\n';
    }
  }
  return out.str();
}

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("arm,split,", 0) != 0) {
    throw FormatError("report csv is missing its header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) {
      f.push_back(line.substr(start, pos - start));
    }
    f.push_back(line.substr(start));
    if (f.size() != 7) throw FormatError("report csv row has " + std::to_string(f.size()) + " fields");
    CsvRow r;
    r.arm = f[0];
    r.split = f[1];
    r.accuracy = std::strtod(f[2].c_str(), nullptr);
    r.recall = std::strtod(f[3].c_str(), nullptr);
    if (!f[4].empty()) r.hc_accuracy = std::strtod(f[4].c_str(), nullptr);
    r.hc_coverage = std::strtod(f[5].c_str(), nullptr);
    r.epochs_to_converge = std::stoull(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

constexpr std::array<Split, 3> kSplits = {Split::kTrain, Split::kVal, Split::kTest};

std::size_t split_index(Split s) { return static_cast<std::size_t>(s); }

model::EncoderConfig encoder_for(const TrainConfig& cfg) {
  model::EncoderConfig enc = cfg.encoder;
  model::apply_ablation(enc, cfg.ablation);
  enc.validate();
  return enc;
}

struct SplitData {
  std::vector<std::vector<slicer::PatchedSample>> scans;
  std::vector<int> labels;
};

std::array<SplitData, 3> prepare(const synth::Dataset& data, const slicer::SlicerConfig& sc) {
  std::array<SplitData, 3> out;
  for (const synth::SampleRecord& s : data.samples) {
    SplitData& d = out[split_index(s.split)];
    std::vector<slicer::PatchedSample> scans;
    for (const synth::LabeledScan& scan : s.scans) scans.push_back(slicer::tokenize(scan.volume, scan.seg, sc));
    d.scans.push_back(std::move(scans));
    d.labels.push_back(s.label);
  }
  return out;
}

double ce_loss(std::span<const float> logits, int label) {
  double mx = logits[0];
  for (float z : logits) mx = std::max(mx, static_cast<double>(z));
  double total = 0.0;
  for (float z : logits) total += std::exp(z - mx);
  return std::log(total) + mx - logits[static_cast<std::size_t>(label)];
}

void accumulate(ParamSet<float>& acc, const num::Binding<float>& b) {
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const num::Tensor g = b[acc.name(i)].graph().grad(b[acc.name(i)]);
    auto& dst = acc.at(i).data;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += g.data[k];
  }
}

// Logits of sample i in split s under the current parameters.
using LogitFn = std::function<std::vector<float>(Split, std::size_t)>;
// Adds the gradient of sample i's training loss into acc; returns the loss.
using StepFn = std::function<double(std::size_t, num::Rng&, ParamSet<float>&)>;

Evaluation evaluate_split(const LogitFn& logits, Split s, const std::vector<int>& labels, double threshold) {
  std::vector<ScoredPrediction> preds;
  preds.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::vector<float> z = logits(s, i);
    const model::Prediction p = model::predict(z);
    preds.push_back({labels[i], p.cls, p.confidence, ce_loss(z, labels[i])});
  }
  return summarize(preds, threshold);
}

ArmResult run_loop(ParamSet<float>& params, const TrainConfig& cfg, const std::array<SplitData, 3>& data,
                   const StepFn& step, const LogitFn& logits, const std::string& arm) {
  const std::size_t n_train = data[0].labels.size();
  if (n_train == 0) throw InvalidInput("training split is empty");
  const bool has_val = !data[1].labels.empty();
  Adam adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps);
  num::Rng order_rng(num::mix_seed(cfg.seed, 0x0DE5));
  std::vector<std::size_t> order(n_train);
  for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

  ArmResult result;
  result.arm = arm;
  result.task = cfg.task;
  ParamSet<float> best = params;
  double best_acc = -1.0, best_loss = 0.0;
  std::vector<double> val_acc;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    const std::uint64_t epoch_seed = num::mix_seed(cfg.seed, epoch);
    double loss_total = 0.0;
    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t end = std::min(n_train, start + cfg.batch_size);
      ParamSet<float> grads = params.zeros_like();
      for (std::size_t k = start; k < end; ++k) {
        num::Rng rng(num::mix_seed(epoch_seed, order[k]));
        loss_total += step(order[k], rng, grads);
      }
      const float inv = 1.0f / static_cast<float>(end - start);
      for (std::size_t i = 0; i < grads.size(); ++i) {
        for (float& g : grads.at(i).data) g *= inv;
      }
      adam.step(params, grads);
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_total / static_cast<double>(n_train);
    if (has_val) {
      const Evaluation ev = evaluate_split(logits, Split::kVal, data[1].labels, cfg.confidence_threshold);
      log.val_loss = ev.metrics.mean_loss;
      log.val_accuracy = ev.metrics.accuracy;
    }
    result.curve.push_back(log);
    val_acc.push_back(log.val_accuracy);
    const bool better = !has_val || log.val_accuracy > best_acc ||
                        (log.val_accuracy == best_acc && log.val_loss < best_loss);
    if (better) {
      best = params;
      best_acc = log.val_accuracy;
      best_loss = log.val_loss;
      result.best_epoch = epoch;
    } else if (cfg.patience > 0 && epoch - result.best_epoch >= cfg.patience) {
      break;
    }
  }
  result.epochs_run = result.curve.size();
  result.epochs_to_converge = has_val ? epochs_to_converge(val_acc) : result.epochs_run;
  params = std::move(best);
  for (Split s : kSplits) {
    const SplitData& d = data[split_index(s)];
    if (!d.labels.empty()) {
      result.splits[synth::to_string(s)] = evaluate_split(logits, s, d.labels, cfg.confidence_threshold);
    }
  }
  return result;
}

ParamSet<float> merge(const ParamSet<float>& a, const ParamSet<float>& b) {
  ParamSet<float> out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out.add(b.name(i), b.at(i));
  return out;
}

ParamSet<float> subset(const ParamSet<float>& params, bool rtab) {
  ParamSet<float> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if ((params.name(i).rfind("rtab/", 0) == 0) == rtab) out.add(params.name(i), params.at(i));
  }
  return out;
}

void require_task(const synth::Dataset& data, Task task) {
  if (data.longitudinal != (task == Task::kLongitudinal)) {
    throw InvalidInput(std::string("dataset is ") + (data.longitudinal ? "longitudinal" : "single-timepoint") +
                       " but the config asks for the " + to_string(task) + " task");
  }
}

std::span<const slicer::PatchedSample> head_scans(const TrainConfig& cfg,
                                                  const std::vector<slicer::PatchedSample>& scans) {
  if (cfg.longitudinal_arm == kArmSingleTimepoint) return {&scans.back(), 1};
  return scans;
}

// Frozen-backbone features per split, sample and scan.
using FeatureTable = std::array<std::vector<std::vector<std::vector<float>>>, 3>;

FeatureTable extract_features(const ParamSet<float>& backbone, const model::EncoderConfig& enc,
                              const std::array<SplitData, 3>& data) {
  FeatureTable out;
  for (std::size_t s = 0; s < 3; ++s) {
    for (const auto& scans : data[s].scans) {
      std::vector<std::vector<float>> m;
      for (const auto& scan : scans) m.push_back(model::infer(backbone, enc, scan).m);
      out[s].push_back(std::move(m));
    }
  }
  return out;
}

template <typename Feats>
num::Var<float> rtab_logits_from_features(const num::Binding<float>& b, num::Graph<float>& g,
                                          const Feats& feats, const TrainConfig& cfg) {
  std::vector<num::Var<float>> vars;
  const std::size_t first = cfg.longitudinal_arm == kArmSingleTimepoint ? feats.size() - 1 : 0;
  for (std::size_t t = first; t < feats.size(); ++t) {
    vars.push_back(g.constant(num::Tensor({1, feats[t].size()}, feats[t])));
  }
  return model::rtab_forward(b, std::span<const num::Var<float>>(vars)).logits;
}

std::vector<float> values(num::Var<float> v) { return {v.value().begin(), v.value().end()}; }

}  // namespace

TrainOutcome train_single(const synth::Dataset& data, const TrainConfig& cfg_in) {
  TrainConfig cfg = cfg_in;
  cfg.task = Task::kSingleTimepoint;
  cfg.bind_to(data.spec);
  cfg.validate();
  require_task(data, cfg.task);
  const model::EncoderConfig enc = encoder_for(cfg);
  const auto prepared = prepare(data, enc.slicing);
  TrainOutcome out;
  out.params = model::init_params(enc, cfg.seed);
  ParamSet<float>& params = out.params;
  StepFn step = [&](std::size_t i, num::Rng& rng, ParamSet<float>& acc) {
    num::Graph<float> g(true);
    num::Binding<float> b(g, params, true);
    const auto r = model::forward(b, enc, prepared[0].scans[i][0], {true, &rng});
    num::Var<float> loss = num::cross_entropy(r.logits, static_cast<std::size_t>(prepared[0].labels[i]));
    g.backward(loss);
    accumulate(acc, b);
    return static_cast<double>(loss.item());
  };
  LogitFn logits = [&](Split s, std::size_t i) {
    return model::infer(params, enc, prepared[split_index(s)].scans[i][0]).logits;
  };
  out.result = run_loop(params, cfg, prepared, step, logits, ablation_name(enc));
  return out;
}

TrainOutcome train_longitudinal(const synth::Dataset& data, const TrainConfig& cfg_in,
                                const ParamSet<float>& backbone_in) {
  TrainConfig cfg = cfg_in;
  cfg.task = Task::kLongitudinal;
  cfg.bind_to(data.spec);
  cfg.validate();
  require_task(data, cfg.task);
  const model::EncoderConfig enc = encoder_for(cfg);
  const ParamSet<float> backbone = subset(backbone_in, false);
  if (backbone.names() != model::init_params(enc, 0).names()) {
    throw InvalidInput("backbone parameters do not match the encoder config");
  }
  const auto prepared = prepare(data, enc.slicing);
  const ParamSet<float> head = model::init_rtab_params(cfg.rtab, cfg.seed);
  TrainOutcome out;
  if (cfg.finetune) {
    out.params = merge(backbone, head);
    ParamSet<float>& params = out.params;
    StepFn step = [&](std::size_t i, num::Rng& rng, ParamSet<float>& acc) {
      num::Graph<float> g(true);
      num::Binding<float> b(g, params, true);
      const auto r = model::forward_sequence(b, enc, head_scans(cfg, prepared[0].scans[i]), {true, &rng});
      num::Var<float> loss = num::cross_entropy(r.logits, static_cast<std::size_t>(prepared[0].labels[i]));
      g.backward(loss);
      accumulate(acc, b);
      return static_cast<double>(loss.item());
    };
    LogitFn logits = [&](Split s, std::size_t i) {
      num::Graph<float> g(false);
      num::Binding<float> b(g, params, false);
      return values(model::forward_sequence(b, enc, head_scans(cfg, prepared[split_index(s)].scans[i])).logits);
    };
    out.result = run_loop(params, cfg, prepared, step, logits, cfg.longitudinal_arm);
    return out;
  }
  const FeatureTable feats = extract_features(backbone, enc, prepared);
  ParamSet<float> params = head;
  StepFn step = [&](std::size_t i, num::Rng&, ParamSet<float>& acc) {
    num::Graph<float> g(true);
    num::Binding<float> b(g, params, true);
    num::Var<float> loss = num::cross_entropy(rtab_logits_from_features(b, g, feats[0][i], cfg),
                                              static_cast<std::size_t>(prepared[0].labels[i]));
    g.backward(loss);
    accumulate(acc, b);
    return static_cast<double>(loss.item());
  };
  LogitFn logits = [&](Split s, std::size_t i) {
    num::Graph<float> g(false);
    num::Binding<float> b(g, params, false);
    return values(rtab_logits_from_features(b, g, feats[split_index(s)][i], cfg));
  };
  out.result = run_loop(params, cfg, prepared, step, logits, cfg.longitudinal_arm);
  out.params = merge(backbone, params);
  return out;
}

Evaluation evaluate(const ParamSet<float>& params, const synth::Dataset& data, const TrainConfig& cfg_in,
                    Split split) {
  TrainConfig cfg = cfg_in;
  cfg.bind_to(data.spec);
  cfg.validate();
  require_task(data, cfg.task);
  const model::EncoderConfig enc = encoder_for(cfg);
  std::vector<ScoredPrediction> preds;
  const ParamSet<float> backbone = subset(params, false);
  const ParamSet<float> head = subset(params, true);
  for (const synth::SampleRecord* s : data.split(split)) {
    std::vector<float> z;
    if (cfg.task == Task::kSingleTimepoint) {
      z = model::infer(backbone, enc, slicer::tokenize(s->scans[0].volume, s->scans[0].seg, enc.slicing)).logits;
    } else {
      std::vector<std::vector<float>> feats;
      for (const auto& scan : s->scans) {
        feats.push_back(model::infer(backbone, enc, slicer::tokenize(scan.volume, scan.seg, enc.slicing)).m);
      }
      num::Graph<float> g(false);
      num::Binding<float> b(g, head, false);
      z = values(rtab_logits_from_features(b, g, feats, cfg));
    }
    const model::Prediction p = model::predict(z);
    preds.push_back({s->label, p.cls, p.confidence, ce_loss(z, s->label)});
  }
  return summarize(preds, cfg.confidence_threshold);
}

ExperimentReport ablation_suite(const synth::Dataset& data, const TrainConfig& cfg_in,
                                const ParamSet<float>* backbone, std::vector<ParamSet<float>>* trained) {
  TrainConfig cfg = cfg_in;
  cfg.task = data.longitudinal ? Task::kLongitudinal : Task::kSingleTimepoint;
  cfg.bind_to(data.spec);
  ExperimentReport report;
  report.config = cfg;
  report.split_fingerprint = synth::split_fingerprint(data);
  if (!data.longitudinal) {
    for (std::string_view arm : model::kAblationArms) {
      TrainConfig arm_cfg = cfg;
      arm_cfg.ablation = std::string(arm);
      TrainOutcome out = train_single(data, arm_cfg);
      report.arms.push_back(std::move(out.result));
      if (trained != nullptr) trained->push_back(std::move(out.params));
    }
    return report;
  }
  const ParamSet<float> features =
      backbone != nullptr ? *backbone : model::init_params(encoder_for(cfg), cfg.seed);
  for (const char* arm : {kArmRtab, kArmSingleTimepoint}) {
    TrainConfig arm_cfg = cfg;
    arm_cfg.longitudinal_arm = arm;
    TrainOutcome out = train_longitudinal(data, arm_cfg, features);
    report.arms.push_back(std::move(out.result));
    if (trained != nullptr) trained->push_back(std::move(out.params));
  }
  return report;
}

model::Checkpoint make_checkpoint(const TrainConfig& cfg, const ParamSet<float>& params) {
  model::Checkpoint c;
  c.config = {{"train", cfg}};
  c.params = params;
  return c;
}

TrainConfig checkpoint_config(const model::Checkpoint& ckpt) {
  if (!ckpt.config.contains("train")) throw InvalidInput("checkpoint has no training config");
  return ckpt.config.at("train").get<TrainConfig>();
}

num::ParamSet<float> backbone_params(const ParamSet<float>& params) { return subset(params, false); }

}  // namespace dsvit::train
