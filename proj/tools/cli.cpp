#include "cli.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsvit/errors.hpp"
#include "dsvit/trainer/trainer.hpp"

namespace dsvit::cli {

namespace fs = std::filesystem;
using train::ExperimentReport;
using train::TrainConfig;

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t config_seed) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || env[0] == '-') {
      throw InvalidInput(std::string(kSeedEnv) + " is not an unsigned integer: '" + env + "'");
    }
    return v;
  }
  return config_seed;
}

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void print_table(std::ostream& out, const ExperimentReport& r) {
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %-6s %9s %9s %12s %12s %8s\n", "arm", "split", "accuracy",
                "recall", "hc_accuracy", "hc_coverage", "converge");
  out << line;
  for (const auto& arm : r.arms) {
    for (const char* split : {"train", "val", "test"}) {
      auto it = arm.splits.find(split);
      if (it == arm.splits.end()) continue;
      const auto& e = it->second;
      const std::string hc = e.high_confidence.accuracy ? fmt(*e.high_confidence.accuracy) : "-";
      std::snprintf(line, sizeof line, "%-18s %-6s %9s %9s %12s %12s %8zu\n", arm.arm.c_str(), split,
                    fmt(e.metrics.accuracy).c_str(), fmt(e.metrics.recall).c_str(), hc.c_str(),
                    fmt(e.high_confidence.coverage).c_str(), arm.epochs_to_converge);
      out << line;
    }
  }
}

void write_report(const fs::path& dir, const ExperimentReport& r) {
  make_dir(dir);
  write_text(dir / "report.json", nlohmann::json(r).dump(2) + "\n");
  write_text(dir / "report.csv", train::to_csv(r));
}

void write_checkpoint(const fs::path& path, const TrainConfig& cfg, const num::ParamSet<float>& params) {
  model::save_checkpoint(path, train::make_checkpoint(cfg, params));
}

// Options shared by the training commands.
struct RunArgs {
  std::string data;
  std::string config;
  std::string out;
  std::string ablation;
  std::string backbone;
  std::optional<std::uint64_t> seed;
  bool finetune = false;
};

void add_run_options(CLI::App* cmd, RunArgs& a, const char* ablation_help) {
  cmd->add_option("--data", a.data, "dataset directory written by gen-data")->required();
  cmd->add_option("--config", a.config, "training config JSON; missing fields take defaults");
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--seed", a.seed, "overrides DSVIT_SEED and the config seed");
  if (ablation_help != nullptr) cmd->add_option("--ablation", a.ablation, ablation_help);
}

TrainConfig load_config(const RunArgs& a) {
  TrainConfig cfg;
  if (!a.config.empty()) cfg = read_json(a.config).get<TrainConfig>();
  cfg.seed = resolve_seed(a.seed, cfg.seed);
  if (a.finetune) cfg.finetune = true;
  return cfg;
}

// Backbone parameters and the encoder settings they were trained with.
num::ParamSet<float> load_backbone(const RunArgs& a, TrainConfig& cfg, const synth::Dataset& data,
                                   std::ostream& err) {
  if (a.backbone.empty()) {
    err << "note: no --backbone given; features come from a freshly initialized encoder\n";
    TrainConfig probe = cfg;
    probe.bind_to(data.spec);
    model::EncoderConfig enc = probe.encoder;
    model::apply_ablation(enc, probe.ablation);
    return model::init_params(enc, cfg.seed);
  }
  const model::Checkpoint ck = model::load_checkpoint(a.backbone);
  const TrainConfig trained = train::checkpoint_config(ck);
  cfg.encoder = trained.encoder;
  cfg.ablation = trained.ablation;
  cfg.rtab.dim = trained.encoder.dim;
  return train::backbone_params(ck.params);
}

int cmd_gen_data(const std::string& spec_path, const std::string& out, std::optional<std::uint64_t> seed,
                 bool longitudinal, std::optional<double> horizon, std::ostream& os) {
  synth::GeneratorSpec spec = read_json(spec_path).get<synth::GeneratorSpec>();
  spec.seed = resolve_seed(seed, spec.seed);
  if (horizon) spec.horizon_months = *horizon;
  spec.validate();
  const synth::Dataset d = synth::generate_dataset(spec, longitudinal);
  const std::string hash = synth::save_dataset(d, out);
  os << "wrote " << d.samples.size() << " subjects to " << out << "\n";
  os << "manifest content_hash " << hash << "\n";
  return 0;
}

int cmd_train(const RunArgs& a, std::ostream& os, std::ostream& err) {
  TrainConfig cfg = load_config(a);
  if (!a.ablation.empty()) cfg.ablation = a.ablation;
  const synth::Dataset data = synth::load_dataset(a.data);
  train::TrainOutcome outcome;
  if (data.longitudinal) {
    cfg.task = train::Task::kLongitudinal;
    const num::ParamSet<float> backbone = load_backbone(a, cfg, data, err);
    outcome = train::train_longitudinal(data, cfg, backbone);
  } else {
    cfg.task = train::Task::kSingleTimepoint;
    outcome = train::train_single(data, cfg);
  }
  cfg.bind_to(data.spec);
  ExperimentReport report{cfg, synth::split_fingerprint(data), {outcome.result}};
  make_dir(a.out);
  write_checkpoint(fs::path(a.out) / "checkpoint.dsvckpt", cfg, outcome.params);
  write_report(a.out, report);
  print_table(os, report);
  return 0;
}

int cmd_eval(const std::string& data_dir, const std::string& ckpt_path, const std::string& out,
             std::ostream& os) {
  const model::Checkpoint ck = model::load_checkpoint(ckpt_path);
  TrainConfig cfg = train::checkpoint_config(ck);
  const synth::Dataset data = synth::load_dataset(data_dir);
  train::ArmResult arm;
  arm.arm = data.longitudinal ? cfg.longitudinal_arm : cfg.ablation;
  arm.task = cfg.task;
  for (synth::Split s : {synth::Split::kTrain, synth::Split::kVal, synth::Split::kTest}) {
    if (data.split(s).empty()) continue;
    arm.splits[synth::to_string(s)] = train::evaluate(ck.params, data, cfg, s);
  }
  if (arm.splits.empty()) throw InvalidInput("dataset " + data_dir + " has no subjects");
  ExperimentReport report{cfg, synth::split_fingerprint(data), {arm}};
  print_table(os, report);
  os << "\n" << train::to_csv(report);
  if (!out.empty()) write_report(out, report);
  return 0;
}

int cmd_suite(const RunArgs& a, const std::string& mode, bool longitudinal_cmd, std::ostream& os,
              std::ostream& err) {
  TrainConfig cfg = load_config(a);
  const synth::Dataset data = synth::load_dataset(a.data);
  if (longitudinal_cmd && !data.longitudinal) {
    throw InvalidInput("longitudinal needs a dataset generated with --longitudinal");
  }
  cfg.bind_to(data.spec);
  std::optional<num::ParamSet<float>> backbone;
  if (data.longitudinal) {
    cfg.task = train::Task::kLongitudinal;
    backbone = load_backbone(a, cfg, data, err);
  } else {
    cfg.task = train::Task::kSingleTimepoint;
  }
  make_dir(a.out);
  ExperimentReport report;
  std::vector<num::ParamSet<float>> trained;
  std::vector<TrainConfig> arm_cfgs;
  if (mode.empty()) {
    report = train::ablation_suite(data, cfg, backbone ? &*backbone : nullptr, &trained);
    for (const auto& arm : report.arms) {
      TrainConfig c = cfg;
      if (data.longitudinal) c.longitudinal_arm = arm.arm;
      else c.ablation = arm.arm;
      arm_cfgs.push_back(c);
    }
  } else {
    if (data.longitudinal) cfg.longitudinal_arm = mode;
    else cfg.ablation = mode;
    cfg.validate();
    train::TrainOutcome o = data.longitudinal ? train::train_longitudinal(data, cfg, *backbone)
                                              : train::train_single(data, cfg);
    cfg.bind_to(data.spec);
    report = {cfg, synth::split_fingerprint(data), {o.result}};
    trained.push_back(std::move(o.params));
    arm_cfgs.push_back(cfg);
  }
  for (std::size_t i = 0; i < trained.size(); ++i) {
    TrainConfig c = arm_cfgs[i];
    c.bind_to(data.spec);
    write_checkpoint(fs::path(a.out) / ("checkpoint_" + report.arms[i].arm + ".dsvckpt"), c, trained[i]);
  }
  write_report(a.out, report);
  print_table(os, report);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-stream vision transformer experiments on synthetic brain volumes", "dsvit"};
  app.require_subcommand(1);

  std::string spec_path, gen_out;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> horizon;
  bool longitudinal = false;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic cohort");
  gen->add_option("--spec", spec_path, "generator spec JSON")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "overrides DSVIT_SEED and the spec seed");
  gen->add_flag("--longitudinal", longitudinal, "T scans per subject with at-risk labels");
  gen->add_option("--horizon-months", horizon, "months between the last scan and the label horizon");

  RunArgs train_args;
  auto* tr = app.add_subcommand("train", "train one model and write checkpoint and report");
  add_run_options(tr, train_args, "dual, wo_mri, wo_seg or wo_dual_emb");
  tr->add_flag("--finetune", train_args.finetune, "longitudinal data: train the backbone too");
  tr->add_option("--backbone", train_args.backbone, "longitudinal data: backbone checkpoint");

  std::string eval_data, eval_ckpt, eval_out, eval_config;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on every split of a dataset");
  ev->add_option("--data", eval_data, "dataset directory")->required();
  ev->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  ev->add_option("--config", eval_config, "ignored; the checkpoint carries its config");
  ev->add_option("--out", eval_out, "also write report.json and report.csv here");

  RunArgs ablate_args;
  std::string ablate_mode;
  auto* ab = app.add_subcommand("ablate", "run the ablation arms on one split");
  add_run_options(ab, ablate_args, nullptr);
  ab->add_option("--mode,--ablation", ablate_mode, "run a single arm instead of all of them");
  ab->add_option("--backbone", ablate_args.backbone, "longitudinal data: backbone checkpoint");
  ab->add_flag("--finetune", ablate_args.finetune, "longitudinal data: train the backbone too");

  RunArgs long_args;
  auto* lo = app.add_subcommand("longitudinal", "RTAB against the last-scan head on a longitudinal cohort");
  add_run_options(lo, long_args, "rtab or single_timepoint; both when omitted");
  lo->add_option("--backbone", long_args.backbone, "backbone checkpoint written by train");
  lo->add_flag("--finetune", long_args.finetune, "train the backbone together with the head");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kInvalidInput);
  }

  try {
    if (*gen) return cmd_gen_data(spec_path, gen_out, gen_seed, longitudinal, horizon, out);
    if (*tr) return cmd_train(train_args, out, err);
    if (*ev) return cmd_eval(eval_data, eval_ckpt, eval_out, out);
    if (*ab) return cmd_suite(ablate_args, ablate_mode, false, out, err);
    if (*lo) return cmd_suite(long_args, long_args.ablation, true, out, err);
  } catch (const Error& e) {
    err << "dsvit: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "dsvit: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dsvit::cli
