#include "dsvit/model/fusion.hpp"

#include "dsvit/errors.hpp"
#include "dsvit/numcore/ops.hpp"

namespace dsvit::model {

template <typename T>
TokenMatrix<T> fuse_plane(const BottleneckMLP<T>& mlp, const TokenMatrix<T>& mri,
                          const TokenMatrix<T>& seg, Plane plane) {
  if (mlp.plane != plane) {
    throw InvariantViolation("fuse_plane: " + slicer::to_string(mlp.plane) +
                             " MLP applied to the " + slicer::to_string(plane) + " plane");
  }
  if (mri.provenance != seg.provenance) {
    throw InvariantViolation("fuse_plane: stream provenance differs");
  }
  for (const PatchCoord& c : mri.provenance) {
    if (c.plane != plane) throw InvariantViolation("fuse_plane: token from another plane");
  }
  if (mri.tokens.shape() != seg.tokens.shape()) {
    throw ShapeError("fuse_plane: stream shapes " + num::to_string(mri.tokens.shape()) + " and " +
                     num::to_string(seg.tokens.shape()) + " differ");
  }
  Var<T> x = num::concat({mri.tokens, seg.tokens}, 1);
  Var<T> h = num::relu(num::add_rowvec(num::matmul(x, mlp.w1), mlp.b1));
  return {num::add_rowvec(num::matmul(h, mlp.w2), mlp.b2), mri.provenance};
}

template <typename T>
TokenMatrix<T> FusedTokenMatrix<T>::segment(std::size_t p) const {
  TokenMatrix<T> out;
  out.tokens = num::slice(tokens, 0, bounds[p], segment_size(p));
  out.provenance.assign(provenance.begin() + bounds[p], provenance.begin() + bounds[p + 1]);
  return out;
}

template <typename T>
FusedTokenMatrix<T> concat_planes(const TokenMatrix<T>& axial, const TokenMatrix<T>& coronal,
                                  const TokenMatrix<T>& sagittal) {
  const std::array<const TokenMatrix<T>*, 3> parts = {&axial, &coronal, &sagittal};
  FusedTokenMatrix<T> out;
  std::vector<Var<T>> vars;
  const std::size_t dim = axial.tokens.shape().back();
  for (std::size_t p = 0; p < 3; ++p) {
    const TokenMatrix<T>& m = *parts[p];
    if (m.count() == 0) {
      throw InvalidInput("concat_planes: empty " + slicer::to_string(slicer::kPlanes[p]) + " segment");
    }
    if (m.tokens.shape().size() != 2 || m.tokens.shape()[1] != dim || m.tokens.shape()[0] != m.count()) {
      throw ShapeError("concat_planes: segment shape " + num::to_string(m.tokens.shape()));
    }
    out.bounds[p + 1] = out.bounds[p] + m.count();
    out.provenance.insert(out.provenance.end(), m.provenance.begin(), m.provenance.end());
    vars.push_back(m.tokens);
  }
  out.tokens = num::concat<T>(std::span<const Var<T>>(vars), 0);
  return out;
}

template struct FusedTokenMatrix<float>;
template struct FusedTokenMatrix<double>;
template TokenMatrix<float> fuse_plane(const BottleneckMLP<float>&, const TokenMatrix<float>&,
                                       const TokenMatrix<float>&, Plane);
template TokenMatrix<double> fuse_plane(const BottleneckMLP<double>&, const TokenMatrix<double>&,
                                        const TokenMatrix<double>&, Plane);
template FusedTokenMatrix<float> concat_planes(const TokenMatrix<float>&, const TokenMatrix<float>&,
                                               const TokenMatrix<float>&);
template FusedTokenMatrix<double> concat_planes(const TokenMatrix<double>&,
                                                const TokenMatrix<double>&,
                                                const TokenMatrix<double>&);

}  // namespace dsvit::model
