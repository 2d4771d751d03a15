#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsvit/errors.hpp"

namespace dsvit::synth {

struct Dims {
  std::uint32_t h = 32;
  std::uint32_t w = 32;
  std::uint32_t l = 32;

  std::size_t count() const noexcept { return std::size_t{h} * w * l; }
  std::uint32_t operator[](std::size_t axis) const { return axis == 0 ? h : axis == 1 ? w : l; }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

// Row-major 3D grid; voxel (i, j, k) lives at (i * w + j) * l + k.
template <typename V>
struct Grid3 {
  Dims dims;
  std::vector<V> values;

  Grid3() = default;
  explicit Grid3(Dims d, V fill = V{}) : dims(d), values(d.count(), fill) {}

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * dims.w + j) * dims.l + k;
  }
  V& at(std::size_t i, std::size_t j, std::size_t k) { return values[index(i, j, k)]; }
  const V& at(std::size_t i, std::size_t j, std::size_t k) const { return values[index(i, j, k)]; }

  bool operator==(const Grid3&) const = default;
};

// Intensity volume, nominally in [0, 1].
using Volume = Grid3<float>;
// Region labels in [0, K).
using SegVolume = Grid3<std::uint16_t>;

}  // namespace dsvit::synth
