#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dsvit/synthvol/volume.hpp"

namespace dsvit::slicer {

// Axial slices fix the last volume axis, coronal the middle one, sagittal the first.
enum class Plane : std::uint8_t { kAxial = 0, kCoronal = 1, kSagittal = 2 };
inline constexpr std::array<Plane, 3> kPlanes = {Plane::kAxial, Plane::kCoronal, Plane::kSagittal};

std::string to_string(Plane p);
std::size_t fixed_axis(Plane p);

template <typename V>
struct Slice2D {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<V> values;  // row-major

  bool operator==(const Slice2D&) const = default;
};

template <typename V>
struct PlaneStack {
  Plane plane = Plane::kAxial;
  std::uint32_t slice_stride = 1;
  std::vector<std::uint32_t> indices;  // volume index of each slice
  std::vector<Slice2D<V>> slices;
};

template <typename V>
struct PatchGrid {
  std::uint32_t patch_size = 0;
  std::uint32_t rows = 0;  // patches per column of the slice
  std::uint32_t cols = 0;  // patches per row of the slice
  std::vector<std::vector<V>> patches;  // row-major order, each p*p row-major
};

struct PatchCoord {
  Plane plane = Plane::kAxial;
  std::uint32_t slice = 0;
  std::uint32_t patch = 0;

  bool operator==(const PatchCoord&) const = default;
};

// Slices at 0, stride, 2*stride, ... along the plane's fixed axis.
template <typename V>
PlaneStack<V> slice_volume(const synth::Grid3<V>& v, Plane plane, std::uint32_t stride);

// Throws ShapeError when the slice is not divisible by p.
template <typename V>
PatchGrid<V> patchify(const Slice2D<V>& slice, std::uint32_t p);

template <typename V>
Slice2D<V> stitch(const PatchGrid<V>& grid);

struct SlicerConfig {
  std::uint32_t patch_size = 8;
  std::uint32_t slice_stride = 4;
};

std::size_t slices_per_plane(const synth::Dims& d, Plane plane, std::uint32_t stride);
std::size_t patches_per_slice(const synth::Dims& d, Plane plane, std::uint32_t p);
std::size_t tokens_per_plane(const synth::Dims& d, Plane plane, const SlicerConfig& cfg);
std::size_t total_tokens(const synth::Dims& d, const SlicerConfig& cfg);
// Validates that every plane of `d` can be patchified; throws ShapeError otherwise.
void check_geometry(const synth::Dims& d, const SlicerConfig& cfg);

// Both streams of one plane, flattened: row j of `mri` and `seg` is the j-th
// patch (p*p values) and `provenance[j]` says where it came from.
struct PlaneTokens {
  Plane plane = Plane::kAxial;
  std::size_t count = 0;
  std::size_t patch_elems = 0;
  std::vector<float> mri;
  std::vector<std::int32_t> seg;
  std::vector<PatchCoord> provenance;
};

struct PatchedSample {
  std::array<PlaneTokens, 3> planes;
  std::size_t token_count() const {
    return planes[0].count + planes[1].count + planes[2].count;
  }
};

// Slices and patchifies a paired scan with one shared grid. Throws ShapeError
// when the two volumes differ in shape.
PatchedSample tokenize(const synth::Volume& volume, const synth::SegVolume& seg,
                       const SlicerConfig& cfg);

}  // namespace dsvit::slicer
