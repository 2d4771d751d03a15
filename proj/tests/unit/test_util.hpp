#pragma once

#include <cmath>

#include "dsvit/model/encoder.hpp"
#include "dsvit/numcore/graph.hpp"
#include "dsvit/numcore/params.hpp"
#include "dsvit/numcore/rng.hpp"

namespace dsvit::testutil {

template <typename T>
num::BasicTensor<T> random_tensor(num::Shape shape, std::uint64_t seed, double std = 1.0) {
  num::Rng rng(seed);
  num::BasicTensor<T> t(std::move(shape));
  for (T& v : t.data) v = static_cast<T>(rng.normal(0.0, std));
  return t;
}

template <typename T>
double norm(const num::BasicTensor<T>& t) {
  double s = 0.0;
  for (T v : t.data) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

// 12 tokens of width 4: one axial slice of 4 patches, two coronal and two
// sagittal slices of 2.
inline model::EncoderConfig micro_encoder() {
  model::EncoderConfig c;
  c.dims = {8, 8, 4};
  c.num_regions = 4;
  c.slicing = {4, 4};
  c.dim = 4;
  c.heads = 2;
  c.n_self_layers = 1;
  c.n_cross_layers = 1;
  c.fusion_hidden = 2;
  c.dropout = 0.0;
  return c;
}

// Uniform intensities and labels, tokenized for `c`.
inline slicer::PatchedSample random_sample(const model::EncoderConfig& c, std::uint64_t seed) {
  num::Rng rng(seed);
  synth::Volume vol(c.dims);
  synth::SegVolume seg(c.dims);
  for (auto& v : vol.values) v = static_cast<float>(rng.uniform());
  for (auto& v : seg.values) v = static_cast<std::uint16_t>(rng.below(static_cast<std::uint64_t>(c.num_regions)));
  return slicer::tokenize(vol, seg, c.slicing);
}

// Moves parameters off the initialization point (zero biases, unit gains,
// near-zero class token), where low-variance rows make layer norm too sharp
// for central differences.
template <typename T>
void jitter(num::ParamSet<T>& params, std::uint64_t seed, double std = 0.05) {
  num::Rng rng(seed);
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (T& v : params.at(i).data) v += static_cast<T>(std * rng.normal());
  }
}

}  // namespace dsvit::testutil
