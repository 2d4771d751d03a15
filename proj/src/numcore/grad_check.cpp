#include "dsvit/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsvit/numcore/rng.hpp"

namespace dsvit::num {
namespace {

double evaluate(const MultiScalarFn& f, const std::vector<Tensor64>& inputs) {
  Graph<double> g(false);
  std::vector<Var<double>> leaves;
  leaves.reserve(inputs.size());
  for (const auto& x : inputs) leaves.push_back(g.leaf(x, false));
  const double v = f(g, leaves).item();
  if (!std::isfinite(v)) throw NumericalError("grad_check: non-finite loss");
  return v;
}

}  // namespace

GradCheckReport grad_check(const MultiScalarFn& f, const std::vector<Tensor64>& inputs,
                           const GradCheckOptions& options) {
  if (!(options.eps >= 1e-4 && options.eps <= 1e-2)) {
    throw InvalidInput("grad_check: eps must lie in [1e-4, 1e-2]");
  }
  GradCheckReport report;
  {
    Graph<double> g(true);
    std::vector<Var<double>> leaves;
    for (const auto& x : inputs) leaves.push_back(g.leaf(x, true));
    Var<double> loss = f(g, leaves);
    g.backward(loss);
    for (const auto& leaf : leaves) report.analytic.push_back(g.grad(leaf));
  }

  std::vector<Tensor64> probe = inputs;
  for (std::size_t t = 0; t < probe.size(); ++t) {
    std::vector<std::size_t> coords(probe[t].size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_input != 0 && coords.size() > options.max_coords_per_input) {
      Rng rng(mix_seed(options.seed, t));
      rng.shuffle(coords);
      coords.resize(options.max_coords_per_input);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t c : coords) {
      const double saved = probe[t].data[c];
      probe[t].data[c] = saved + options.eps;
      const double up = evaluate(f, probe);
      probe[t].data[c] = saved - options.eps;
      const double down = evaluate(f, probe);
      probe[t].data[c] = saved;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double err =
          std::abs(report.analytic[t].data[c] - numeric) / std::max(1.0, std::abs(numeric));
      report.max_relative_error = std::max(report.max_relative_error, err);
      ++report.coords_checked;
    }
  }
  return report;
}

double grad_check(const ScalarFn& f, const Tensor64& x, double eps) {
  MultiScalarFn wrapped = [&f](Graph<double>& g, std::span<const Var<double>> leaves) {
    return f(g, leaves[0]);
  };
  GradCheckOptions opts;
  opts.eps = eps;
  return grad_check(wrapped, {x}, opts).max_relative_error;
}

double grad_check(const ScalarFn& f, const Tensor& x, double eps) {
  return grad_check(f, x.cast<double>(), eps);
}

}  // namespace dsvit::num
