#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsvit/numcore/graph.hpp"
#include "dsvit/slicer/slicer.hpp"

namespace dsvit::model {

using num::Graph;
using num::Var;
using slicer::PatchCoord;
using slicer::Plane;

// N x D tokens plus where each row came from.
template <typename T>
struct TokenMatrix {
  Var<T> tokens;
  std::vector<PatchCoord> provenance;

  std::size_t count() const { return provenance.size(); }
};

// Rows [offset, offset + n) of the shared positional table.
template <typename T>
Var<T> positional_rows(Var<T> pe, std::size_t offset, std::size_t n);

// Stream 1: token_j = flatten(patch_j) . W_proj + pe_rows_j.
// patches: [n x p*p], w_proj: [p*p x D], pe_rows: [n x D].
template <typename T>
Var<T> embed_patches(Var<T> w_proj, Var<T> pe_rows, Var<T> patches);

// Stream 2: token_j = mean over the patch's pixels of E[label] + pe_rows_j.
// `labels` holds n patches of `patch_elems` labels each.
template <typename T>
Var<T> embed_labels(Var<T> table, Var<T> pe_rows, std::span<const std::int32_t> labels,
                    std::size_t patch_elems);

// Plane-level wrappers over the slicer's flattened patches.
template <typename T>
TokenMatrix<T> embed_mri(Var<T> w_proj, Var<T> pe, const slicer::PlaneTokens& plane,
                         std::size_t pe_offset);
template <typename T>
TokenMatrix<T> embed_seg(Var<T> table, Var<T> pe, const slicer::PlaneTokens& plane,
                         std::size_t pe_offset);
// Label map treated as an image: labels / (K - 1) through the pixel path.
template <typename T>
TokenMatrix<T> embed_seg_as_pixels(Var<T> w_proj, Var<T> pe, const slicer::PlaneTokens& plane,
                                   std::size_t pe_offset, int num_regions);
// Stand-in for a disabled stream.
template <typename T>
TokenMatrix<T> zero_tokens(Graph<T>& g, const slicer::PlaneTokens& plane, std::size_t dim);

}  // namespace dsvit::model
