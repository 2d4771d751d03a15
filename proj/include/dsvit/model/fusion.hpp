#pragma once

#include <array>

#include "dsvit/model/dsembed.hpp"

namespace dsvit::model {

// Per-token bottleneck: W2 . relu(W1 . [mri ; seg] + b1) + b2.
// w1: [2D x h], b1: [h], w2: [h x D], b2: [D].
template <typename T>
struct BottleneckMLP {
  Plane plane = Plane::kAxial;
  Var<T> w1, b1, w2, b2;
};

template <typename T>
TokenMatrix<T> fuse_plane(const BottleneckMLP<T>& mlp, const TokenMatrix<T>& mri,
                          const TokenMatrix<T>& seg, Plane plane);

// Axial, coronal, sagittal segments stacked row-wise.
template <typename T>
struct FusedTokenMatrix {
  Var<T> tokens;
  std::array<std::size_t, 4> bounds{};  // segment p spans rows [bounds[p], bounds[p+1])
  std::vector<PatchCoord> provenance;

  std::size_t segment_size(std::size_t p) const { return bounds[p + 1] - bounds[p]; }
  TokenMatrix<T> segment(std::size_t p) const;
};

template <typename T>
FusedTokenMatrix<T> concat_planes(const TokenMatrix<T>& axial, const TokenMatrix<T>& coronal,
                                  const TokenMatrix<T>& sagittal);

}  // namespace dsvit::model
