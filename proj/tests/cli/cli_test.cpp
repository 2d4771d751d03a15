#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "dsvit/synthvol/dataset.hpp"
#include "dsvit/trainer/trainer.hpp"

namespace fs = std::filesystem;
using namespace dsvit;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result dsvit_run(std::vector<std::string> args) {
  args.insert(args.begin(), "dsvit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void write_json(const fs::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(2); }

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(std::ifstream(p)); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv(cli::kSeedEnv);
    dir_ = fs::temp_directory_path() /
           ("dsvit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_json(path("spec.json"), {{"dims", {16, 16, 16}},
                                   {"num_regions", 6},
                                   {"splits", {{"train", 8}, {"val", 4}, {"test", 4}}},
                                   {"seed", 3}});
    write_json(path("config.json"), {{"epochs", 1},
                                     {"batch_size", 4},
                                     {"seed", 5},
                                     {"encoder",
                                      {{"patch_size", 8},
                                       {"slice_stride", 8},
                                       {"dim", 8},
                                       {"heads", 2},
                                       {"n_self_layers", 1}}}});
  }
  void TearDown() override {
    unsetenv(cli::kSeedEnv);
    fs::remove_all(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void gen(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"gen-data", "--spec", path("spec.json"), "--out", path(out)};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = dsvit_run(args);
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

}  // namespace

TEST(CliSeed, FlagBeatsEnvironmentBeatsConfig) {
  unsetenv(cli::kSeedEnv);
  EXPECT_EQ(cli::resolve_seed(std::nullopt, 9), 9u);
  setenv(cli::kSeedEnv, "41", 1);
  EXPECT_EQ(cli::resolve_seed(std::nullopt, 9), 41u);
  EXPECT_EQ(cli::resolve_seed(17, 9), 17u);
  setenv(cli::kSeedEnv, "not-a-number", 1);
  EXPECT_THROW(cli::resolve_seed(std::nullopt, 9), InvalidInput);
  unsetenv(cli::kSeedEnv);
}

TEST_F(Cli, GenDataIsReproducible) {
  gen("a");
  gen("b");
  EXPECT_EQ(read_json(path("a") + "/manifest.json").at("content_hash"),
            read_json(path("b") + "/manifest.json").at("content_hash"));
  EXPECT_EQ(synth::sha256_file(path("a") + "/volumes/sub000000_t1_img.dsv"),
            synth::sha256_file(path("b") + "/volumes/sub000000_t1_img.dsv"));
}

TEST_F(Cli, SeedPrecedenceReachesTheGenerator) {
  gen("config_seed");
  setenv(cli::kSeedEnv, "99", 1);
  gen("env_seed");
  gen("flag_seed", {"--seed", "3"});
  const auto seed_of = [&](const std::string& d) {
    return read_json(path(d) + "/manifest.json").at("generator").at("seed").get<std::uint64_t>();
  };
  EXPECT_EQ(seed_of("config_seed"), 3u);
  EXPECT_EQ(seed_of("env_seed"), 99u);
  EXPECT_EQ(seed_of("flag_seed"), 3u);
  EXPECT_EQ(read_json(path("config_seed") + "/manifest.json").at("content_hash"),
            read_json(path("flag_seed") + "/manifest.json").at("content_hash"));
}

TEST_F(Cli, LongitudinalGenDataWritesTwoScansPerSubject) {
  gen("long", {"--longitudinal", "--horizon-months", "12"});
  const auto m = read_json(path("long") + "/manifest.json");
  EXPECT_EQ(m.at("task"), "longitudinal");
  EXPECT_EQ(m.at("generator").at("horizon_months").get<double>(), 12.0);
  for (const auto& s : m.at("subjects")) EXPECT_EQ(s.at("scans").size(), 2u);
}

TEST_F(Cli, BadInputExitsWithTwo) {
  EXPECT_EQ(dsvit_run({}).code, 2);
  EXPECT_EQ(dsvit_run({"frobnicate"}).code, 2);
  EXPECT_EQ(dsvit_run({"gen-data", "--out", path("x")}).code, 2);
  EXPECT_EQ(dsvit_run({"gen-data", "--spec", path("missing.json"), "--out", path("x")}).code, 2);
  write_json(path("bad_spec.json"), {{"dims", {16, 16, 16}}, {"num_regions", 1}});
  EXPECT_EQ(dsvit_run({"gen-data", "--spec", path("bad_spec.json"), "--out", path("x")}).code, 2);
  write_json(path("unknown.json"), {{"dimz", {16, 16, 16}}});
  EXPECT_EQ(dsvit_run({"gen-data", "--spec", path("unknown.json"), "--out", path("x")}).code, 2);
  EXPECT_EQ(dsvit_run({"eval", "--data", path("nowhere"), "--checkpoint", path("none.dsvckpt")}).code, 2);
}

TEST_F(Cli, TamperedDatasetExitsWithFour) {
  gen("data");
  auto m = read_json(path("data") + "/manifest.json");
  m["subjects"][0]["split"] = m["subjects"][0]["split"] == "train" ? "test" : "train";
  write_json(path("data") + "/manifest.json", m);
  const auto r = dsvit_run({"train", "--data", path("data"), "--config", path("config.json"), "--out", path("run")});
  EXPECT_EQ(r.code, 4) << r.err;

  gen("data2");
  {
    std::fstream f(path("data2") + "/volumes/sub000001_t1_seg.dsv", std::ios::in | std::ios::out | std::ios::binary);
    ASSERT_TRUE(f.is_open());
    f.seekp(-1, std::ios::end);
    f.put('\x05');
  }
  EXPECT_EQ(dsvit_run({"train", "--data", path("data2"), "--config", path("config.json"), "--out", path("run")}).code,
            4);
}

TEST_F(Cli, DivergentTrainingExitsWithThree) {
  gen("data");
  auto cfg = read_json(path("config.json"));
  cfg["learning_rate"] = 1e300;
  cfg["epochs"] = 2;
  write_json(path("config.json"), cfg);
  const auto r = dsvit_run({"train", "--data", path("data"), "--config", path("config.json"), "--out", path("run")});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(Cli, TrainThenEvalReproducesTheReport) {
  gen("data");
  const auto t = dsvit_run({"train", "--data", path("data"), "--config", path("config.json"), "--out", path("run")});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(fs::exists(path("run") + "/checkpoint.dsvckpt"));
  EXPECT_NE(t.out.find("dual"), std::string::npos);
  const auto trained = read_json(path("run") + "/report.json").get<train::ExperimentReport>();

  const auto e = dsvit_run(
      {"eval", "--data", path("data"), "--checkpoint", path("run") + "/checkpoint.dsvckpt", "--out", path("eval")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("arm,split,accuracy"), std::string::npos);
  const auto evaluated = read_json(path("eval") + "/report.json").get<train::ExperimentReport>();
  ASSERT_EQ(evaluated.arms.size(), 1u);
  for (const char* split : {"train", "val", "test"}) {
    EXPECT_EQ(evaluated.arms[0].splits.at(split).metrics.accuracy, trained.arms[0].splits.at(split).metrics.accuracy)
        << split;
  }
}

TEST_F(Cli, TrainSeedFlagOverridesEnvironment) {
  gen("data");
  setenv(cli::kSeedEnv, "1234", 1);
  ASSERT_EQ(dsvit_run({"train", "--data", path("data"), "--config", path("config.json"), "--out", path("env")}).code, 0);
  ASSERT_EQ(
      dsvit_run({"train", "--data", path("data"), "--config", path("config.json"), "--out", path("flag"), "--seed", "8"})
          .code,
      0);
  EXPECT_EQ(read_json(path("env") + "/report.json").at("config").at("seed"), 1234);
  EXPECT_EQ(read_json(path("flag") + "/report.json").at("config").at("seed"), 8);
}

TEST_F(Cli, AblateSingleArm) {
  gen("data");
  const auto r = dsvit_run(
      {"ablate", "--data", path("data"), "--config", path("config.json"), "--out", path("abl"), "--mode", "wo_mri"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("abl") + "/checkpoint_wo_mri.dsvckpt"));
  const auto report = read_json(path("abl") + "/report.json").get<train::ExperimentReport>();
  ASSERT_EQ(report.arms.size(), 1u);
  EXPECT_EQ(report.arms[0].arm, "wo_mri");
  EXPECT_EQ(dsvit_run({"ablate", "--data", path("data"), "--config", path("config.json"), "--out", path("abl"),
                       "--mode", "wo_everything"})
                .code,
            2);
}

TEST_F(Cli, LongitudinalCommand) {
  gen("single");
  EXPECT_EQ(dsvit_run({"longitudinal", "--data", path("single"), "--config", path("config.json"), "--out",
                       path("lo")})
                .code,
            2);
  gen("long", {"--longitudinal"});
  const auto r = dsvit_run({"longitudinal", "--data", path("long"), "--config", path("config.json"), "--out",
                            path("lo"), "--ablation", "single_timepoint"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = read_json(path("lo") + "/report.json").get<train::ExperimentReport>();
  ASSERT_EQ(report.arms.size(), 1u);
  EXPECT_EQ(report.arms[0].arm, "single_timepoint");
  EXPECT_EQ(report.arms[0].task, train::Task::kLongitudinal);

  const auto both = dsvit_run({"longitudinal", "--data", path("long"), "--config", path("config.json"), "--out",
                               path("lo2")});
  ASSERT_EQ(both.code, 0) << both.err;
  EXPECT_EQ(read_json(path("lo2") + "/report.json").at("arms").size(), 2u);
  EXPECT_TRUE(fs::exists(path("lo2") + "/checkpoint_rtab.dsvckpt"));
}
