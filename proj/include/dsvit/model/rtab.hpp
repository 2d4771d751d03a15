#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "dsvit/model/encoder.hpp"

namespace dsvit::model {

struct RtabConfig {
  std::size_t dim = 32;
  std::size_t hidden = 0;  // fusion MLP width; 0 selects dim
  std::size_t n_classes = 2;

  std::size_t fusion_width() const { return hidden == 0 ? dim : hidden; }
  void validate() const;
};

void to_json(nlohmann::json& j, const RtabConfig& c);
void from_json(const nlohmann::json& j, RtabConfig& c);

// Names live under "rtab/": fuse/{w1,b1,w2,b2}, w_a [d x 1], w_c [n_classes x d], b_c.
num::ParamSet<float> init_rtab_params(const RtabConfig& c, std::uint64_t seed);

// R_t = M_t - M_{t-1} for t >= 2; empty for a single step.
template <typename T>
std::vector<Var<T>> residuals(std::span<const Var<T>> seq);

// M_t' = MLP([M_t ; R_t]) with a ReLU between the two layers.
template <typename T>
Var<T> fuse_residual(const num::Binding<T>& b, Var<T> m, Var<T> r);

// [M_1', ..., M_T'] where M_1' is M_1 itself.
template <typename T>
std::vector<Var<T>> residual_fusion(const num::Binding<T>& b, std::span<const Var<T>> seq);

template <typename T>
struct Pooled {
  Var<T> p;        // [1 x d]
  Var<T> weights;  // [T x 1], softmax over time of s_t = M_t' . W_a
};

template <typename T>
Pooled<T> attention_pool(Var<T> w_a, std::span<const Var<T>> x);

// logits = P . W_c^T + b_c
template <typename T>
Var<T> classify(Var<T> w_c, Var<T> b_c, Var<T> p);

template <typename T>
struct SequenceResult {
  Var<T> logits;   // [1 x n_classes]
  Var<T> weights;  // [T x 1]
};

// RTAB over precomputed per-scan features, each [1 x d].
template <typename T>
SequenceResult<T> rtab_forward(const num::Binding<T>& b, std::span<const Var<T>> features);

// Backbone forward per scan, then RTAB. `b` binds backbone and rtab/ parameters.
template <typename T>
SequenceResult<T> forward_sequence(const num::Binding<T>& b, const EncoderConfig& c,
                                   std::span<const slicer::PatchedSample> scans,
                                   const ForwardOptions& opts = {});

}  // namespace dsvit::model
