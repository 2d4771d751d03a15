#include "dsvit/slicer/slicer.hpp"

#include "dsvit/errors.hpp"

namespace dsvit::slicer {

std::string to_string(Plane p) {
  switch (p) {
    case Plane::kAxial: return "axial";
    case Plane::kCoronal: return "coronal";
    case Plane::kSagittal: return "sagittal";
  }
  return "?";
}

std::size_t fixed_axis(Plane p) {
  switch (p) {
    case Plane::kAxial: return 2;
    case Plane::kCoronal: return 1;
    case Plane::kSagittal: return 0;
  }
  return 0;
}

namespace {

// The two in-plane axes, in ascending order.
std::array<std::size_t, 2> plane_axes(Plane p) {
  switch (p) {
    case Plane::kAxial: return {0, 1};
    case Plane::kCoronal: return {0, 2};
    case Plane::kSagittal: return {1, 2};
  }
  return {0, 1};
}

}  // namespace

template <typename V>
PlaneStack<V> slice_volume(const synth::Grid3<V>& v, Plane plane, std::uint32_t stride) {
  const std::size_t axis = fixed_axis(plane);
  const std::uint32_t len = v.dims[axis];
  if (stride == 0) throw InvalidInput("slice stride must be >= 1");
  if (len < stride) {
    throw InvalidInput("slice stride " + std::to_string(stride) + " exceeds axis length " +
                       std::to_string(len));
  }
  const auto [ra, ca] = plane_axes(plane);
  PlaneStack<V> out;
  out.plane = plane;
  out.slice_stride = stride;
  std::array<std::size_t, 3> idx{};
  for (std::uint32_t s = 0; s < len; s += stride) {
    Slice2D<V> sl;
    sl.rows = v.dims[ra];
    sl.cols = v.dims[ca];
    sl.values.reserve(std::size_t{sl.rows} * sl.cols);
    idx[axis] = s;
    for (std::uint32_t r = 0; r < sl.rows; ++r) {
      idx[ra] = r;
      for (std::uint32_t c = 0; c < sl.cols; ++c) {
        idx[ca] = c;
        sl.values.push_back(v.at(idx[0], idx[1], idx[2]));
      }
    }
    out.indices.push_back(s);
    out.slices.push_back(std::move(sl));
  }
  return out;
}

template <typename V>
PatchGrid<V> patchify(const Slice2D<V>& slice, std::uint32_t p) {
  if (p == 0) throw InvalidInput("patch size must be >= 1");
  if (slice.rows % p != 0 || slice.cols % p != 0) {
    throw ShapeError("slice " + std::to_string(slice.rows) + "x" + std::to_string(slice.cols) +
                     " is not divisible by patch size " + std::to_string(p));
  }
  PatchGrid<V> g;
  g.patch_size = p;
  g.rows = slice.rows / p;
  g.cols = slice.cols / p;
  g.patches.reserve(std::size_t{g.rows} * g.cols);
  for (std::uint32_t pr = 0; pr < g.rows; ++pr) {
    for (std::uint32_t pc = 0; pc < g.cols; ++pc) {
      std::vector<V> patch;
      patch.reserve(std::size_t{p} * p);
      for (std::uint32_t r = 0; r < p; ++r) {
        const V* row = slice.values.data() + std::size_t{pr * p + r} * slice.cols + pc * p;
        patch.insert(patch.end(), row, row + p);
      }
      g.patches.push_back(std::move(patch));
    }
  }
  return g;
}

template <typename V>
Slice2D<V> stitch(const PatchGrid<V>& g) {
  const std::uint32_t p = g.patch_size;
  if (g.patches.size() != std::size_t{g.rows} * g.cols) throw ShapeError("patch grid is incomplete");
  Slice2D<V> sl;
  sl.rows = g.rows * p;
  sl.cols = g.cols * p;
  sl.values.resize(std::size_t{sl.rows} * sl.cols);
  for (std::uint32_t pr = 0; pr < g.rows; ++pr) {
    for (std::uint32_t pc = 0; pc < g.cols; ++pc) {
      const auto& patch = g.patches[std::size_t{pr} * g.cols + pc];
      if (patch.size() != std::size_t{p} * p) throw ShapeError("patch has wrong element count");
      for (std::uint32_t r = 0; r < p; ++r) {
        std::copy_n(patch.data() + std::size_t{r} * p, p,
                    sl.values.data() + std::size_t{pr * p + r} * sl.cols + pc * p);
      }
    }
  }
  return sl;
}

std::size_t slices_per_plane(const synth::Dims& d, Plane plane, std::uint32_t stride) {
  if (stride == 0) throw InvalidInput("slice stride must be >= 1");
  const std::uint32_t len = d[fixed_axis(plane)];
  return (len + stride - 1) / stride;
}

std::size_t patches_per_slice(const synth::Dims& d, Plane plane, std::uint32_t p) {
  if (p == 0) throw InvalidInput("patch size must be >= 1");
  const auto [ra, ca] = plane_axes(plane);
  return std::size_t{d[ra] / p} * (d[ca] / p);
}

std::size_t tokens_per_plane(const synth::Dims& d, Plane plane, const SlicerConfig& cfg) {
  return slices_per_plane(d, plane, cfg.slice_stride) * patches_per_slice(d, plane, cfg.patch_size);
}

std::size_t total_tokens(const synth::Dims& d, const SlicerConfig& cfg) {
  std::size_t n = 0;
  for (Plane p : kPlanes) n += tokens_per_plane(d, p, cfg);
  return n;
}

void check_geometry(const synth::Dims& d, const SlicerConfig& cfg) {
  if (cfg.patch_size == 0 || cfg.slice_stride == 0) {
    throw InvalidInput("patch size and slice stride must be >= 1");
  }
  for (std::size_t a = 0; a < 3; ++a) {
    if (d[a] % cfg.patch_size != 0) {
      throw ShapeError("volume " + synth::to_string(d) + " is not divisible by patch size " +
                       std::to_string(cfg.patch_size));
    }
    if (d[a] < cfg.slice_stride) {
      throw InvalidInput("slice stride exceeds volume extent " + synth::to_string(d));
    }
  }
}

PatchedSample tokenize(const synth::Volume& volume, const synth::SegVolume& seg,
                       const SlicerConfig& cfg) {
  if (!(volume.dims == seg.dims)) {
    throw ShapeError("intensity " + synth::to_string(volume.dims) + " and label " +
                     synth::to_string(seg.dims) + " volumes differ in shape");
  }
  check_geometry(volume.dims, cfg);
  PatchedSample out;
  const std::size_t pe = std::size_t{cfg.patch_size} * cfg.patch_size;
  for (std::size_t pi = 0; pi < 3; ++pi) {
    const Plane plane = kPlanes[pi];
    const auto img_stack = slice_volume(volume, plane, cfg.slice_stride);
    const auto seg_stack = slice_volume(seg, plane, cfg.slice_stride);
    PlaneTokens& t = out.planes[pi];
    t.plane = plane;
    t.patch_elems = pe;
    for (std::size_t s = 0; s < img_stack.slices.size(); ++s) {
      const auto ig = patchify(img_stack.slices[s], cfg.patch_size);
      const auto sg = patchify(seg_stack.slices[s], cfg.patch_size);
      for (std::size_t k = 0; k < ig.patches.size(); ++k) {
        t.mri.insert(t.mri.end(), ig.patches[k].begin(), ig.patches[k].end());
        for (std::uint16_t v : sg.patches[k]) t.seg.push_back(v);
        t.provenance.push_back({plane, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(k)});
      }
    }
    t.count = t.provenance.size();
  }
  return out;
}

template PlaneStack<float> slice_volume(const synth::Grid3<float>&, Plane, std::uint32_t);
template PlaneStack<std::uint16_t> slice_volume(const synth::Grid3<std::uint16_t>&, Plane,
                                                std::uint32_t);
template PatchGrid<float> patchify(const Slice2D<float>&, std::uint32_t);
template PatchGrid<std::uint16_t> patchify(const Slice2D<std::uint16_t>&, std::uint32_t);
template Slice2D<float> stitch(const PatchGrid<float>&);
template Slice2D<std::uint16_t> stitch(const PatchGrid<std::uint16_t>&);

}  // namespace dsvit::slicer
