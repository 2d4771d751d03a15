#include "dsvit/model/dsembed.hpp"

#include <algorithm>

#include "dsvit/errors.hpp"
#include "dsvit/numcore/ops.hpp"

namespace dsvit::model {

template <typename T>
Var<T> positional_rows(Var<T> pe, std::size_t offset, std::size_t n) {
  return num::slice(pe, 0, offset, n);
}

template <typename T>
Var<T> embed_patches(Var<T> w_proj, Var<T> pe_rows, Var<T> patches) {
  if (patches.shape().size() != 2 || patches.shape()[1] != w_proj.shape()[0]) {
    throw ShapeError("embed_patches: patches " + num::to_string(patches.shape()) +
                     " do not match projection " + num::to_string(w_proj.shape()));
  }
  return num::add(num::matmul(patches, w_proj), pe_rows);
}

template <typename T>
Var<T> embed_labels(Var<T> table, Var<T> pe_rows, std::span<const std::int32_t> labels,
                    std::size_t patch_elems) {
  if (patch_elems == 0 || labels.size() % patch_elems != 0) {
    throw ShapeError("embed_labels: " + std::to_string(labels.size()) +
                     " labels do not split into patches of " + std::to_string(patch_elems));
  }
  const std::size_t n = labels.size() / patch_elems;
  const std::size_t dim = table.shape()[1];
  // Summing in label order makes the result independent of pixel order.
  std::vector<std::int32_t> sorted(labels.begin(), labels.end());
  for (std::size_t j = 0; j < n; ++j) {
    std::sort(sorted.begin() + j * patch_elems, sorted.begin() + (j + 1) * patch_elems);
  }
  Var<T> pixels = num::embedding_lookup(table, std::span<const std::int32_t>(sorted));
  Var<T> grouped = num::reshape(pixels, {n, patch_elems, dim});
  return num::add(num::mean(grouped, 1), pe_rows);
}

namespace {

template <typename T>
Var<T> patch_constant(Graph<T>& g, const slicer::PlaneTokens& plane, const std::vector<float>& v) {
  std::vector<T> data(v.begin(), v.end());
  return g.constant(num::BasicTensor<T>({plane.count, plane.patch_elems}, std::move(data)));
}

}  // namespace

template <typename T>
TokenMatrix<T> embed_mri(Var<T> w_proj, Var<T> pe, const slicer::PlaneTokens& plane,
                         std::size_t pe_offset) {
  Var<T> patches = patch_constant(w_proj.graph(), plane, plane.mri);
  return {embed_patches(w_proj, positional_rows(pe, pe_offset, plane.count), patches),
          plane.provenance};
}

template <typename T>
TokenMatrix<T> embed_seg(Var<T> table, Var<T> pe, const slicer::PlaneTokens& plane,
                         std::size_t pe_offset) {
  return {embed_labels(table, positional_rows(pe, pe_offset, plane.count), plane.seg,
                       plane.patch_elems),
          plane.provenance};
}

template <typename T>
TokenMatrix<T> embed_seg_as_pixels(Var<T> w_proj, Var<T> pe, const slicer::PlaneTokens& plane,
                                   std::size_t pe_offset, int num_regions) {
  if (num_regions < 2) throw InvalidInput("label scaling needs at least 2 regions");
  std::vector<float> scaled(plane.seg.size());
  const float denom = static_cast<float>(num_regions - 1);
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = static_cast<float>(plane.seg[i]) / denom;
  Var<T> patches = patch_constant(w_proj.graph(), plane, scaled);
  return {embed_patches(w_proj, positional_rows(pe, pe_offset, plane.count), patches),
          plane.provenance};
}

template <typename T>
TokenMatrix<T> zero_tokens(Graph<T>& g, const slicer::PlaneTokens& plane, std::size_t dim) {
  return {g.constant(num::BasicTensor<T>({plane.count, dim}, std::vector<T>(plane.count * dim, T(0)))),
          plane.provenance};
}

#define DSVIT_INSTANTIATE(T)                                                                    \
  template Var<T> positional_rows(Var<T>, std::size_t, std::size_t);                           \
  template Var<T> embed_patches(Var<T>, Var<T>, Var<T>);                                       \
  template Var<T> embed_labels(Var<T>, Var<T>, std::span<const std::int32_t>, std::size_t);    \
  template TokenMatrix<T> embed_mri(Var<T>, Var<T>, const slicer::PlaneTokens&, std::size_t);  \
  template TokenMatrix<T> embed_seg(Var<T>, Var<T>, const slicer::PlaneTokens&, std::size_t);  \
  template TokenMatrix<T> embed_seg_as_pixels(Var<T>, Var<T>, const slicer::PlaneTokens&,      \
                                              std::size_t, int);                               \
  template TokenMatrix<T> zero_tokens(Graph<T>&, const slicer::PlaneTokens&, std::size_t);
DSVIT_INSTANTIATE(float)
DSVIT_INSTANTIATE(double)
#undef DSVIT_INSTANTIATE

}  // namespace dsvit::model
