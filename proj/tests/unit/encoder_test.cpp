#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dsvit/model/encoder.hpp"
#include "dsvit/numcore/grad_check.hpp"
#include "dsvit/numcore/ops.hpp"
#include "test_util.hpp"

using namespace dsvit;
using namespace dsvit::model;
using num::Graph;
using num::Tensor;

namespace {

using testutil::random_sample;

template <typename T>
num::ParamSet<T> grads_of(const num::ParamSet<T>& params, const EncoderConfig& c,
                          const slicer::PatchedSample& s, std::size_t label) {
  Graph<T> g;
  num::Binding<T> b(g, params, true);
  g.backward(num::cross_entropy(forward(b, c, s).logits, label));
  return b.grads();
}

double abs_sum(const Tensor& t) {
  double s = 0.0;
  for (float v : t.data) s += std::abs(v);
  return s;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dsvit_encoder_" + name);
}

}  // namespace

TEST(Encoder, ShapesFollowTheConfig) {
  const auto c = testutil::micro_encoder();
  EXPECT_EQ(c.token_count(), 12u);
  const auto params = init_params(c, 1);
  const auto s = random_sample(c, 2);
  Graph<float> g(false);
  num::Binding<float> b(g, params, false);
  const auto fused = embed_and_fuse(b, c, s);
  EXPECT_EQ(fused.tokens.shape(), (num::Shape{12, 4}));
  EXPECT_EQ(fused.bounds, (std::array<std::size_t, 4>{0, 4, 8, 12}));
  const auto r = encode(b, c, fused, {});
  EXPECT_EQ(r.logits.shape(), (num::Shape{1, 2}));
  EXPECT_EQ(r.feature.shape(), (num::Shape{1, 4}));
}

TEST(Encoder, DefaultConfigHas384Tokens) {
  EncoderConfig c;
  EXPECT_EQ(c.token_count(), 384u);
  EXPECT_EQ(init_params(c, 0).get("embed/pe").shape, (num::Shape{384, 32}));
}

TEST(Encoder, SelfAttentionIsPermutationEquivariant) {
  const auto c = testutil::micro_encoder();
  const auto params = init_params(c, 3);
  const Tensor x = testutil::random_tensor<float>({6, 4}, 4, 1.0);
  const std::vector<std::size_t> perm{4, 2, 0, 5, 1, 3};
  Tensor xp({6, 4});
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t d = 0; d < 4; ++d) xp(r, d) = x(perm[r], d);
  }
  Graph<float> g(false);
  num::Binding<float> b(g, params, false);
  const Tensor y = plane_self_attention(b, c, g.leaf(x), 0, {}).tensor();
  const Tensor yp = plane_self_attention(b, c, g.leaf(xp), 0, {}).tensor();
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t d = 0; d < 4; ++d) EXPECT_NEAR(yp(r, d), y(perm[r], d), 1e-5);
  }
}

TEST(Encoder, EndToEndGradientMatchesFiniteDifferences) {
  for (const char* arm : {"dual", "wo_dual_emb"}) {
    auto c = testutil::micro_encoder();
    apply_ablation(c, arm);
    auto params = init_params(c, 5).cast<double>();
    testutil::jitter(params, 77);
    const auto s = random_sample(c, 6);
    std::vector<num::Tensor64> inputs;
    for (std::size_t i = 0; i < params.size(); ++i) inputs.push_back(params.at(i));
    const auto names = params.names();
    const double err = num::grad_check(
                           [&](Graph<double>&, std::span<const Var<double>> leaves) {
                             num::Binding<double> b(names, {leaves.begin(), leaves.end()});
                             return num::cross_entropy(forward(b, c, s).logits, 1);
                           },
                           inputs, {.eps = 1e-4})
                           .max_relative_error;
    EXPECT_LT(err, 1e-3) << arm;
  }
}

TEST(Encoder, PredictUsesSoftmaxConfidence) {
  const std::vector<float> even{0.0f, 0.0f};
  EXPECT_DOUBLE_EQ(predict(even).confidence, 0.5);
  const std::vector<float> nine{static_cast<float>(std::log(9.0)), 0.0f};
  EXPECT_EQ(predict(nine).cls, 0u);
  EXPECT_NEAR(predict(nine).confidence, 0.9, 1e-6);
  const std::vector<float> shifted{static_cast<float>(std::log(9.0)) + 100.0f, 100.0f};
  EXPECT_NEAR(predict(shifted).confidence, 0.9, 1e-5);
  const std::vector<float> second{-1.0f, 2.0f};
  EXPECT_EQ(predict(second).cls, 1u);
}

TEST(Encoder, EveryParameterReceivesGradient) {
  auto c = testutil::micro_encoder();
  c.fusion_hidden = 6;
  const auto params = init_params(c, 7);
  const auto grads = grads_of(params, c, random_sample(c, 8), 0);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    EXPECT_GT(abs_sum(grads.at(i)), 0.0) << grads.name(i);
  }
}

TEST(Encoder, DisabledStreamsAreCutOff) {
  auto c = testutil::micro_encoder();
  apply_ablation(c, "wo_seg");
  EXPECT_FALSE(c.use_seg_stream);
  auto grads = grads_of(init_params(c, 9), c, random_sample(c, 10), 1);
  EXPECT_EQ(abs_sum(grads.get("embed/E")), 0.0);
  EXPECT_GT(abs_sum(grads.get("embed/w_proj")), 0.0);

  c = testutil::micro_encoder();
  apply_ablation(c, "wo_mri");
  EXPECT_FALSE(c.use_mri_stream);
  grads = grads_of(init_params(c, 9), c, random_sample(c, 10), 1);
  EXPECT_EQ(abs_sum(grads.get("embed/w_proj")), 0.0);
  EXPECT_GT(abs_sum(grads.get("embed/E")), 0.0);
}

TEST(Encoder, AblatedStreamInputDoesNotReachTheLogits) {
  for (const char* arm : {"wo_mri", "wo_seg"}) {
    auto c = testutil::micro_encoder();
    apply_ablation(c, arm);
    const auto params = init_params(c, 11);
    auto a = random_sample(c, 12);
    auto b = random_sample(c, 13);
    // Keep the live stream of `a`, take the ablated stream from `b`.
    for (std::size_t p = 0; p < 3; ++p) {
      if (std::string(arm) == "wo_mri") b.planes[p].seg = a.planes[p].seg;
      else b.planes[p].mri = a.planes[p].mri;
    }
    EXPECT_EQ(infer(params, c, a).logits, infer(params, c, b).logits) << arm;
  }
}

TEST(Encoder, LabelsAsPixelsStillSeeTheSegmentation) {
  auto c = testutil::micro_encoder();
  apply_ablation(c, "wo_dual_emb");
  EXPECT_FALSE(c.dual_stream_embedding);
  const auto params = init_params(c, 14);
  auto a = random_sample(c, 15);
  auto b = a;
  for (auto& v : b.planes[1].seg) v = (v + 1) % c.num_regions;
  EXPECT_NE(infer(params, c, a).logits, infer(params, c, b).logits);
  EXPECT_EQ(ablation_name(c), "wo_dual_emb");
}

TEST(Encoder, AblationNamesRoundTrip) {
  for (auto arm : kAblationArms) {
    EncoderConfig c;
    apply_ablation(c, arm);
    EXPECT_EQ(ablation_name(c), arm);
  }
  EncoderConfig c;
  EXPECT_THROW(apply_ablation(c, "wo_everything"), InvalidInput);
}

TEST(Encoder, ForwardIsDeterministic) {
  auto c = testutil::micro_encoder();
  c.dropout = 0.3;
  const auto params = init_params(c, 16);
  EXPECT_TRUE(num::bit_equal(params, init_params(c, 16)));
  EXPECT_FALSE(num::bit_equal(params, init_params(c, 17)));
  const auto s = random_sample(c, 17);
  auto run = [&](bool training, std::uint64_t seed) {
    Graph<float> g(false);
    num::Binding<float> b(g, params, false);
    num::Rng rng(seed);
    return forward(b, c, s, {training, &rng}).logits.tensor();
  };
  EXPECT_TRUE(num::bit_equal(run(false, 0), run(false, 1)));
  EXPECT_TRUE(num::bit_equal(run(true, 5), run(true, 5)));
  EXPECT_FALSE(num::bit_equal(run(true, 5), run(false, 5)));
  const auto m = infer(params, c, s);
  EXPECT_EQ(m.logits, run(false, 0).data);
  EXPECT_EQ(m.m.size(), 4u);
}

TEST(Encoder, ConfigValidationAndJson) {
  EncoderConfig c;
  c.dim = 30;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = EncoderConfig{};
  c.slicing.patch_size = 5;
  EXPECT_THROW(c.validate(), ShapeError);
  c = EncoderConfig{};
  c.use_mri_stream = c.use_seg_stream = false;
  EXPECT_THROW(c.validate(), InvalidInput);

  const auto m = testutil::micro_encoder();
  nlohmann::json j = m;
  const auto back = j.get<EncoderConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  j["depth"] = 3;
  EXPECT_THROW(j.get<EncoderConfig>(), InvalidInput);
  EXPECT_EQ(nlohmann::json::parse("{}").get<EncoderConfig>().dim, 32u);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto c = testutil::micro_encoder();
  Checkpoint ck{nlohmann::json{{"encoder", c}}, init_params(c, 18)};
  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(path, ck);
  const auto back = load_checkpoint(path);
  EXPECT_TRUE(num::bit_equal(back.params, ck.params));
  EXPECT_EQ(back.config, ck.config);
  EXPECT_EQ(checkpoint_bytes(back), checkpoint_bytes(ck));
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsDamagedFiles) {
  const auto c = testutil::micro_encoder();
  const Checkpoint ck{nlohmann::json{{"encoder", c}}, init_params(c, 19)};
  const std::string good = checkpoint_bytes(ck);
  auto write = [](const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream(p, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };
  const auto path = temp_path("damaged.ckpt");

  std::string bad_magic = good;
  bad_magic[7] = '2';
  write(path, bad_magic);
  EXPECT_THROW(load_checkpoint(path), FormatError);

  std::string version = good;
  const auto at = version.find("\"checkpoint_version\":1");
  ASSERT_NE(at, std::string::npos);
  version[at + 21] = '9';
  write(path, version);
  try {
    load_checkpoint(path);
    ADD_FAILURE() << "version mismatch accepted";
  } catch (const FormatError&) {
    ADD_FAILURE() << "version mismatch reported as a format error";
  } catch (const InvalidInput&) {
  }

  write(path, good + "x");
  EXPECT_THROW(load_checkpoint(path), FormatError);
  write(path, good.substr(0, good.size() - 3));
  EXPECT_THROW(load_checkpoint(path), FormatError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), IoError);
}
