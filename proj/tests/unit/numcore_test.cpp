#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "dsvit/numcore/grad_check.hpp"
#include "dsvit/numcore/ops.hpp"
#include "dsvit/numcore/params.hpp"

using namespace dsvit;
using namespace dsvit::num;

namespace {

Tensor64 random_tensor(Shape shape, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Tensor64 t(std::move(shape));
  for (double& v : t.data) v = rng.normal() * scale;
  return t;
}

// sum(y * w) with fixed random weights, so that gradients are not trivially
// zero (e.g. the sum of a softmax is constant).
Var<double> probe_loss(Graph<double>& g, Var<double> y, std::uint64_t seed = 99) {
  return sum(mul(y, g.constant(random_tensor(y.shape(), seed))));
}

}  // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Graph<float> g;
  auto eye = g.constant(Tensor({2, 2}, {1, 0, 0, 1}));
  auto b = g.constant(Tensor({2, 2}, {1, 2, 3, 4}));
  EXPECT_EQ(matmul(eye, b).tensor().data, (std::vector<float>{1, 2, 3, 4}));
}

TEST(Matmul, SelectorPicksFirstRow) {
  Graph<float> g;
  auto a = g.constant(Tensor({2, 2}, {1, 0, 0, 0}));
  auto b = g.constant(Tensor({2, 2}, {5, 6, 7, 8}));
  EXPECT_EQ(matmul(a, b).tensor().data, (std::vector<float>{5, 6, 0, 0}));
}

TEST(Matmul, GradientOfSumIsOnesTimesBTransposed) {
  const Tensor64 b = random_tensor({3, 4}, 2);
  const Tensor64 a = random_tensor({2, 3}, 1);
  ScalarFn f = [&b](Graph<double>& g, Var<double> x) { return sum(matmul(x, g.constant(b))); };
  EXPECT_LT(grad_check(f, a, 1e-4), 1e-4);

  Graph<double> g;
  auto x = g.leaf(a, true);
  g.backward(sum(matmul(x, g.constant(b))));
  const Tensor64 grad = g.grad(x);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      double expected = 0;
      for (std::size_t j = 0; j < 4; ++j) expected += b(k, j);
      EXPECT_NEAR(grad(i, k), expected, 1e-12);
    }
  }
}

TEST(Matmul, ShapeMismatchThrows) {
  Graph<float> g;
  auto a = g.constant(Tensor({2, 3}));
  auto b = g.constant(Tensor({2, 3}));
  EXPECT_THROW(matmul(a, b), ShapeError);
  EXPECT_NO_THROW(matmul_bt(a, b));
}

TEST(Softmax, SymmetricInputGivesHalves) {
  Graph<float> g;
  auto y = softmax(g.constant(Tensor({2}, {0, 0})), 0).tensor();
  EXPECT_FLOAT_EQ(y.data[0], 0.5f);
  EXPECT_FLOAT_EQ(y.data[1], 0.5f);
}

TEST(Softmax, SingletonIsOne) {
  Graph<float> g;
  EXPECT_EQ(softmax(g.constant(Tensor({1}, {-3.5f})), 0).item(), 1.0f);
}

TEST(Softmax, LargeLogitsStayFinite) {
  Graph<float> g;
  auto y = softmax(g.constant(Tensor({2}, {1000, 0})), 0).tensor();
  // 64-bit reference: exp(-1000) underflows to 0, so the result is [1, 0].
  const double ref0 = 1.0 / (1.0 + std::exp(-1000.0));
  const double ref1 = std::exp(-1000.0) / (1.0 + std::exp(-1000.0));
  EXPECT_NEAR(y.data[0], ref0, 1e-7);
  EXPECT_NEAR(y.data[1], ref1, 1e-7);
}

TEST(Softmax, NormalizesAlongRequestedAxis) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph<double> g;
    auto x = g.constant(random_tensor({3, 4, 5}, seed, 10.0));
    for (std::size_t axis = 0; axis < 3; ++axis) {
      auto y = softmax(x, axis).tensor();
      const Shape& s = y.shape;
      std::size_t outer = 1, inner = 1;
      for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
      for (std::size_t i = axis + 1; i < 3; ++i) inner *= s[i];
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
          double total = 0;
          for (std::size_t j = 0; j < s[axis]; ++j) {
            const double v = y.data[(o * s[axis] + j) * inner + in];
            EXPECT_GE(v, 0.0);
            total += v;
          }
          EXPECT_NEAR(total, 1.0, 1e-6);
        }
      }
    }
  }
}

TEST(Elementwise, SubOfSelfIsZero) {
  Graph<float> g;
  auto x = g.constant(Tensor({2, 3}, {1, -2, 3, 4.5f, 5, -6}));
  for (float v : sub(x, x).value()) EXPECT_EQ(v, 0.0f);
}

TEST(Elementwise, EmbeddingLookupReturnsRow) {
  Graph<float> g;
  auto table = g.constant(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}));
  const std::vector<std::int32_t> ids{2};
  EXPECT_EQ(embedding_lookup(table, ids).tensor().data, (std::vector<float>{5, 6}));
}

TEST(Elementwise, EmbeddingLookupRejectsOutOfRangeIds) {
  Graph<float> g;
  auto table = g.constant(Tensor({3, 2}));
  const std::vector<std::int32_t> bad{3};
  const std::vector<std::int32_t> negative{-1};
  EXPECT_THROW(embedding_lookup(table, bad), InvalidInput);
  EXPECT_THROW(embedding_lookup(table, negative), InvalidInput);
}

TEST(Elementwise, EmbeddingBackwardScattersIntoSelectedRowsOnly) {
  Graph<double> g;
  auto table = g.leaf(random_tensor({4, 3}, 5), true);
  const std::vector<std::int32_t> ids{1, 3, 1};
  g.backward(sum(embedding_lookup(table, ids)));
  const Tensor64 grad = g.grad(table);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(grad(0, c), 0.0);
    EXPECT_EQ(grad(1, c), 2.0);
    EXPECT_EQ(grad(2, c), 0.0);
    EXPECT_EQ(grad(3, c), 1.0);
  }
}

TEST(Elementwise, CrossEntropyOfUniformLogitsIsLn2) {
  Graph<float> g;
  auto loss = cross_entropy(g.constant(Tensor({2}, {0, 0})), 0);
  EXPECT_NEAR(loss.item(), std::numbers::ln2, 1e-6);
}

TEST(Elementwise, AddShapeMismatchThrows) {
  Graph<float> g;
  EXPECT_THROW(add(g.constant(Tensor({2})), g.constant(Tensor({3}))), ShapeError);
}

TEST(GradCheck, SquaredSumHasGradientTwoX) {
  ScalarFn f = [](Graph<double>&, Var<double> x) { return sum(mul(x, x)); };
  const Tensor64 ones({5}, 1.0);
  EXPECT_LT(grad_check(f, ones, 1e-4), 1e-5);

  MultiScalarFn mf = [](Graph<double>&, std::span<const Var<double>> x) {
    return sum(mul(x[0], x[0]));
  };
  auto report = grad_check(mf, {ones});
  for (double v : report.analytic[0].data) EXPECT_DOUBLE_EQ(v, 2.0);
}

TEST(GradCheck, ConstantFunctionHasZeroGradient) {
  MultiScalarFn f = [](Graph<double>& g, std::span<const Var<double>>) {
    return g.constant(Tensor64({1}, 3.0));
  };
  auto report = grad_check(f, {random_tensor({4}, 3)});
  for (double v : report.analytic[0].data) EXPECT_EQ(v, 0.0);
  EXPECT_LT(report.max_relative_error, 1e-12);
}

TEST(GradCheck, RejectsEpsOutsideRange) {
  ScalarFn f = [](Graph<double>&, Var<double> x) { return sum(x); };
  EXPECT_THROW(grad_check(f, Tensor64({2}), 1e-6), InvalidInput);
  EXPECT_THROW(grad_check(f, Tensor64({2}), 0.1), InvalidInput);
}

TEST(GradCheck, NonFiniteIntermediateIsReported) {
  MultiScalarFn f = [](Graph<double>& g, std::span<const Var<double>> x) {
    return sum(mul(x[0], g.constant(Tensor64({2}, std::numeric_limits<double>::infinity()))));
  };
  EXPECT_THROW(grad_check(f, {Tensor64({2}, 1.0)}), NumericalError);
}

// Every op's backward rule against central differences on seeded inputs.
class OpGradient : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(OpGradient, BackwardRulesMatchFiniteDifferences) {
  const std::uint64_t s = GetParam();
  const double tol = 1e-4;
  auto check1 = [&](auto&& op, const Tensor64& x) {
    ScalarFn f = [&](Graph<double>& g, Var<double> v) { return probe_loss(g, op(g, v), s + 7); };
    return grad_check(f, x, 1e-4);
  };
  auto check = [&](auto&& op, std::vector<Tensor64> xs) {
    MultiScalarFn f = [&](Graph<double>& g, std::span<const Var<double>> v) {
      return probe_loss(g, op(g, v), s + 11);
    };
    return grad_check(f, xs).max_relative_error;
  };

  const Tensor64 a = random_tensor({3, 4}, s);
  const Tensor64 b = random_tensor({4, 5}, s + 1);
  const Tensor64 c = random_tensor({3, 4}, s + 2);
  const Tensor64 bt = random_tensor({5, 4}, s + 3);

  EXPECT_LT(check([](auto&, auto v) { return matmul(v[0], v[1]); }, {a, b}), tol);
  EXPECT_LT(check([](auto&, auto v) { return matmul_bt(v[0], v[1]); }, {a, bt}), tol);
  EXPECT_LT(check([](auto&, auto v) { return add(v[0], v[1]); }, {a, c}), tol);
  EXPECT_LT(check([](auto&, auto v) { return sub(v[0], v[1]); }, {a, c}), tol);
  EXPECT_LT(check([](auto&, auto v) { return mul(v[0], v[1]); }, {a, c}), tol);
  EXPECT_LT(check([](auto&, auto v) { return add_rowvec(v[0], v[1]); },
                  {a, random_tensor({4}, s + 4)}),
            tol);
  EXPECT_LT(check1([](auto&, auto v) { return scale(v, 0.37); }, a), tol);
  EXPECT_LT(check1([](auto&, auto v) { return relu(v); }, a), tol);
  EXPECT_LT(check1([](auto&, auto v) { return softmax(v, 1); }, a), tol);
  EXPECT_LT(check1([](auto&, auto v) { return softmax(v, 0); }, a), tol);
  EXPECT_LT(check1([](auto&, auto v) { return mean(v, 0); }, a), tol);
  EXPECT_LT(check1([](auto&, auto v) { return mean(v, 1); }, random_tensor({2, 3, 4}, s + 5)), tol);
  EXPECT_LT(check1([](auto&, auto v) { return sum(v); }, a), tol);
  EXPECT_LT(check1([](auto&, auto v) { return slice(v, 1, 1, 2); }, a), tol);
  EXPECT_LT(check1([](auto&, auto v) { return reshape(v, Shape{4, 3}); }, a), tol);
  EXPECT_LT(check([](auto&, auto v) { return concat({v[0], v[1]}, 0); }, {a, c}), tol);
  EXPECT_LT(check([](auto&, auto v) { return concat({v[0], v[1]}, 1); }, {a, c}), tol);
  EXPECT_LT(check(
                [](auto&, auto v) {
                  const std::vector<std::int32_t> ids{0, 2, 2, 1};
                  return embedding_lookup(v[0], ids);
                },
                {random_tensor({3, 4}, s + 6)}),
            tol);
  EXPECT_LT(check([](auto&, auto v) { return layer_norm(v[0], v[1], v[2]); },
                  {a, random_tensor({4}, s + 8), random_tensor({4}, s + 9)}),
            tol);

  MultiScalarFn ce = [](Graph<double>&, std::span<const Var<double>> v) {
    return cross_entropy(v[0], 1);
  };
  EXPECT_LT(grad_check(ce, {random_tensor({3}, s + 10)}).max_relative_error, tol);

  MultiScalarFn drop = [s](Graph<double>& g, std::span<const Var<double>> v) {
    Rng rng(s);  // same mask on every evaluation
    return probe_loss(g, dropout(v[0], 0.3, rng));
  };
  EXPECT_LT(grad_check(drop, {a}).max_relative_error, tol);
}

INSTANTIATE_TEST_SUITE_P(Seeds, OpGradient, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(Graph, BackwardTwiceIsAnError) {
  Graph<double> g;
  auto x = g.leaf(Tensor64({2}, 1.0), true);
  auto loss = sum(mul(x, x));
  g.backward(loss);
  EXPECT_THROW(g.backward(loss), InvariantViolation);
}

TEST(Graph, BackwardVisitsEachOpOnce) {
  Graph<double> g;
  auto x = g.leaf(Tensor64({2}, 1.0), true);
  auto y = mul(x, x);     // 1
  auto z = add(y, x);     // 2
  auto loss = sum(z);     // 3
  EXPECT_EQ(g.backward(loss), 3u);
  // d/dx sum(x^2 + x) = 2x + 1
  for (double v : g.grad(x).data) EXPECT_DOUBLE_EQ(v, 3.0);
}

TEST(Graph, NonFiniteValuesAreCheckedErrors) {
  Graph<float> g;
  EXPECT_THROW(g.leaf(Tensor({1}, std::numeric_limits<float>::quiet_NaN())), NumericalError);
  auto big = g.constant(Tensor({1}, 3e38f));
  EXPECT_THROW(scale(big, 10.0f), NumericalError);
}

TEST(Graph, ForwardBackwardIsBitDeterministic) {
  auto run = [] {
    Graph<float> g;
    auto w = g.leaf(random_tensor({6, 5}, 11).cast<float>(), true);
    auto x = g.constant(random_tensor({4, 6}, 12).cast<float>());
    auto h = softmax(relu(matmul(x, w)), 1);
    auto loss = cross_entropy(reshape(slice(h, 0, 0, 1), Shape{5}), 3);
    g.backward(loss);
    return std::make_pair(loss.item(), g.grad(w));
  };
  auto [l1, g1] = run();
  auto [l2, g2] = run();
  EXPECT_EQ(std::memcmp(&l1, &l2, sizeof(float)), 0);
  EXPECT_TRUE(bit_equal(g1, g2));
}

TEST(Params, BindingCollectsGradientsByName) {
  ParamSet<double> params;
  params.add("w", Tensor64({2}, 3.0));
  params.add("unused", Tensor64({3}, 1.0));
  EXPECT_THROW(params.add("w", Tensor64({1})), InvalidInput);
  Graph<double> g;
  Binding<double> bound(g, params, true);
  g.backward(sum(mul(bound["w"], bound["w"])));
  auto grads = bound.grads();
  EXPECT_EQ(grads.get("w").data, (std::vector<double>{6.0, 6.0}));
  EXPECT_EQ(grads.get("unused").data, (std::vector<double>{0.0, 0.0, 0.0}));
}
