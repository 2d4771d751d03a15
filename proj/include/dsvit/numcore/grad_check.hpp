#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dsvit/numcore/graph.hpp"

namespace dsvit::num {

// Builds a scalar loss from leaves holding the checked inputs.
using ScalarFn = std::function<Var<double>(Graph<double>&, Var<double>)>;
using MultiScalarFn = std::function<Var<double>(Graph<double>&, std::span<const Var<double>>)>;

struct GradCheckOptions {
  double eps = 1e-4;
  // When non-zero, at most this many coordinates per input are checked,
  // picked with a seeded shuffle.
  std::size_t max_coords_per_input = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t coords_checked = 0;
  // Analytic gradients from one backward pass, per input.
  std::vector<Tensor64> analytic;
};

// Compares reverse-mode gradients with central differences, all in double.
// The error per coordinate is |analytic - numeric| / max(1, |numeric|).
// eps must lie in [1e-4, 1e-2].
GradCheckReport grad_check(const MultiScalarFn& f, const std::vector<Tensor64>& inputs,
                           const GradCheckOptions& options = {});

double grad_check(const ScalarFn& f, const Tensor64& x, double eps);
// Promotes a float tensor to double before checking.
double grad_check(const ScalarFn& f, const Tensor& x, double eps);

}  // namespace dsvit::num
