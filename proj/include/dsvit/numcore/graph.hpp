#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "dsvit/numcore/tensor.hpp"

namespace dsvit::num {

template <typename T>
class Graph;

// Handle to a node recorded in a Graph. Cheap to copy; valid while the graph lives.
template <typename T>
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return graph_ != nullptr; }
  Graph<T>& graph() const { return *graph_; }
  std::uint32_t id() const noexcept { return id_; }

  const Shape& shape() const;
  std::span<const T> value() const;
  BasicTensor<T> tensor() const;
  std::size_t size() const { return value().size(); }
  // Value of a single-element node.
  T item() const;

 private:
  friend class Graph<T>;
  Var(Graph<T>* g, std::uint32_t id) : graph_(g), id_(id) {}

  Graph<T>* graph_ = nullptr;
  std::uint32_t id_ = 0;
};

// Tape of executed ops for one forward pass. Nodes are appended in execution
// order, so the tape is already topologically sorted; backward() walks it in
// reverse and visits each op once. A graph supports exactly one backward pass;
// the closures are released afterwards.
template <typename T>
class Graph {
 public:
  // Receives the gradient of the node's output; accumulates into its inputs.
  using BackwardFn = std::function<void(std::span<const T> out_grad)>;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool grad_enabled() const noexcept { return grad_enabled_; }

  Var<T> leaf(BasicTensor<T> value, bool requires_grad = false);
  Var<T> constant(BasicTensor<T> value) { return leaf(std::move(value), false); }

  // Records an op output. `inputs` decides whether the output needs a gradient;
  // `backward` is dropped when it does not. Non-finite values throw
  // NumericalError naming `op`.
  Var<T> record(std::string_view op, Shape shape, std::vector<T> value,
                std::initializer_list<Var<T>> inputs, BackwardFn backward);
  Var<T> record(std::string_view op, Shape shape, std::vector<T> value,
                std::span<const Var<T>> inputs, BackwardFn backward);

  // Seeds d(root)/d(root) = 1 and propagates. Returns the number of ops whose
  // backward rule ran. Throws InvariantViolation on a second call.
  std::size_t backward(Var<T> root);

  bool requires_grad(Var<T> v) const { return nodes_.at(v.id()).requires_grad; }
  // Gradient of a node after backward(); zeros for nodes the root does not reach.
  BasicTensor<T> grad(Var<T> v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

  // For op implementations.
  const Shape& shape_of(std::uint32_t id) const { return nodes_[id].shape; }
  std::span<const T> value_of(std::uint32_t id) const { return nodes_[id].value; }
  // Lazily allocated gradient buffer; only valid for nodes requiring grad.
  std::span<T> grad_buffer(std::uint32_t id);
  bool needs_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool grad_enabled_;
  bool consumed_ = false;
};

extern template class Graph<float>;
extern template class Graph<double>;
extern template class Var<float>;
extern template class Var<double>;

}  // namespace dsvit::num
