#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dsvit/errors.hpp"

namespace dsvit::num {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

// Dense row-major tensor. Model state uses float; double is only used while
// gradient checking.
template <typename T>
struct BasicTensor {
  Shape shape;
  std::vector<T> data;

  BasicTensor() = default;
  explicit BasicTensor(Shape s, T fill = T(0)) : shape(std::move(s)), data(numel(shape), fill) {
    check_shape();
  }
  BasicTensor(Shape s, std::vector<T> values) : shape(std::move(s)), data(std::move(values)) {
    check_shape();
    if (data.size() != numel(shape)) {
      throw ShapeError("tensor of shape " + to_string(shape) + " given " +
                       std::to_string(data.size()) + " values");
    }
  }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  std::size_t dim(std::size_t axis) const { return shape.at(axis); }

  T& operator()(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  template <typename U>
  BasicTensor<U> cast() const {
    BasicTensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }

 private:
  void check_shape() const {
    if (shape.empty()) throw ShapeError("tensor rank must be at least 1");
    for (std::size_t d : shape) {
      if (d == 0) throw ShapeError("zero-sized dimension in " + to_string(shape));
    }
  }
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

template <typename T>
bool all_finite(std::span<const T> values) {
  // A value is non-finite exactly when its exponent bits are all ones.
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  constexpr Bits kExp = static_cast<Bits>(sizeof(T) == 4 ? 0x7f800000ull : 0x7ff0000000000000ull);
  Bits bad = 0;
  for (T v : values) {
    const Bits b = std::bit_cast<Bits>(v);
    bad |= static_cast<Bits>((b & kExp) == kExp);
  }
  return bad == 0;
}

// Bitwise equality, including shape. Distinguishes -0.0 from 0.0.
template <typename T>
bool bit_equal(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return a.shape == b.shape &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(T)) == 0;
}

}  // namespace dsvit::num
