#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dsvit/model/fusion.hpp"
#include "dsvit/numcore/params.hpp"
#include "dsvit/numcore/rng.hpp"
#include "dsvit/synthvol/volume.hpp"

namespace dsvit::model {

struct EncoderConfig {
  synth::Dims dims{32, 32, 32};
  int num_regions = 8;
  slicer::SlicerConfig slicing;
  std::size_t dim = 32;
  std::size_t heads = 4;
  std::size_t n_self_layers = 2;
  std::size_t n_cross_layers = 1;
  std::size_t mlp_ratio = 2;
  std::size_t fusion_hidden = 0;  // 0 selects dim / 2
  double dropout = 0.1;
  std::size_t n_classes = 2;
  bool share_plane_weights = true;
  bool use_mri_stream = true;
  bool use_seg_stream = true;
  bool dual_stream_embedding = true;

  std::size_t bottleneck_width() const { return fusion_hidden == 0 ? dim / 2 : fusion_hidden; }
  std::size_t token_count() const { return slicer::total_tokens(dims, slicing); }
  // Throws InvalidInput describing the first violated constraint.
  void validate() const;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

// Ablation arms: "dual", "wo_mri", "wo_seg", "wo_dual_emb".
inline constexpr std::array<std::string_view, 4> kAblationArms = {"dual", "wo_mri", "wo_seg",
                                                                  "wo_dual_emb"};
void apply_ablation(EncoderConfig& c, std::string_view arm);
std::string ablation_name(const EncoderConfig& c);

// Parameter layout is a pure function of the config. Label table E ~ N(0, 1);
// positional table and class token ~ N(0, 0.02); weight matrices, including
// the patch projection, ~ N(0, 1 / fan_in); biases 0, layer-norm gains 1.
num::ParamSet<float> init_params(const EncoderConfig& c, std::uint64_t seed);

struct ForwardOptions {
  bool training = false;  // enables dropout
  num::Rng* rng = nullptr;
};

template <typename T>
struct ForwardResult {
  Var<T> logits;   // [1 x n_classes]
  Var<T> feature;  // M: [1 x dim], final class-token state after the closing layer norm
};

template <typename T>
BottleneckMLP<T> bottleneck(const num::Binding<T>& b, Plane plane);

// Both streams of every plane, fused and concatenated.
template <typename T>
FusedTokenMatrix<T> embed_and_fuse(const num::Binding<T>& b, const EncoderConfig& c,
                                   const slicer::PatchedSample& sample);

// Self-attention stack for one plane segment [n x D]; `plane_index` picks the
// weights when planes do not share them.
template <typename T>
Var<T> plane_self_attention(const num::Binding<T>& b, const EncoderConfig& c, Var<T> tokens,
                            std::size_t plane_index, const ForwardOptions& opts);

template <typename T>
ForwardResult<T> encode(const num::Binding<T>& b, const EncoderConfig& c,
                        const FusedTokenMatrix<T>& fused, const ForwardOptions& opts);

template <typename T>
ForwardResult<T> forward(const num::Binding<T>& b, const EncoderConfig& c,
                         const slicer::PatchedSample& sample, const ForwardOptions& opts = {});

struct Prediction {
  std::size_t cls = 0;
  double confidence = 0.0;  // max softmax probability
};
Prediction predict(std::span<const float> logits);

// Eval-mode convenience: (logits, M) as plain vectors.
struct ScanFeature {
  std::vector<float> logits;
  std::vector<float> m;
};
ScanFeature infer(const num::ParamSet<float>& params, const EncoderConfig& c,
                  const slicer::PatchedSample& sample);

// Container: "DSVCKPT1" | u32 json length | json | u32 tensor count | per
// tensor: u32 name length, name, one .dsv record (shape padded to rank 3).
inline constexpr std::array<char, 8> kCheckpointMagic{'D', 'S', 'V', 'C', 'K', 'P', 'T', '1'};
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json config = nlohmann::json::object();
  num::ParamSet<float> params;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws FormatError on a malformed file and InvalidInput on a version mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_bytes(const Checkpoint& ckpt);

}  // namespace dsvit::model
