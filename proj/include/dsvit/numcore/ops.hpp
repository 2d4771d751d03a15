#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsvit/numcore/graph.hpp"
#include "dsvit/numcore/rng.hpp"

// Differentiable ops. Every op records a backward rule on the graph of its
// inputs; all inputs of one op must belong to the same graph. Broadcasting is
// limited to add_rowvec.
namespace dsvit::num {

// [m x k] . [k x n] -> [m x n]
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);
// [m x k] . [n x k]^T -> [m x n]
template <typename T>
Var<T> matmul_bt(Var<T> a, Var<T> b);

template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
template <typename T>
Var<T> scale(Var<T> x, T factor);
// Adds a length-n vector to every row of x, where n is x's last dimension.
template <typename T>
Var<T> add_rowvec(Var<T> x, Var<T> bias);
template <typename T>
Var<T> relu(Var<T> x);

// Max-subtracted softmax along `axis`.
template <typename T>
Var<T> softmax(Var<T> x, std::size_t axis);
// Mean over `axis`; the axis is removed (rank-1 input yields shape [1]).
template <typename T>
Var<T> mean(Var<T> x, std::size_t axis);
// Sum of all elements, shape [1].
template <typename T>
Var<T> sum(Var<T> x);

template <typename T>
Var<T> concat(std::span<const Var<T>> parts, std::size_t axis);
template <typename T>
Var<T> concat(std::initializer_list<Var<T>> parts, std::size_t axis) {
  return concat<T>(std::span<const Var<T>>(parts.begin(), parts.size()), axis);
}
template <typename T>
Var<T> slice(Var<T> x, std::size_t axis, std::size_t start, std::size_t length);
template <typename T>
Var<T> reshape(Var<T> x, Shape shape);

// Rows of `table` [K x D] selected by `ids`; result [ids.size() x D]. The
// backward rule scatter-adds into the selected rows only.
template <typename T>
Var<T> embedding_lookup(Var<T> table, std::span<const std::int32_t> ids);

// Normalizes over the last axis, then applies per-feature gain and bias.
template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5));

// -log softmax(logits)[label]; logits holds one row of class scores.
template <typename T>
Var<T> cross_entropy(Var<T> logits, std::size_t label);

// Inverted dropout with keep probability 1 - p. Identity when p == 0.
template <typename T>
Var<T> dropout(Var<T> x, double p, Rng& rng);

}  // namespace dsvit::num
