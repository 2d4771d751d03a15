#include "dsvit/numcore/graph.hpp"

#include <algorithm>
#include <string>

namespace dsvit::num {

template <typename T>
const Shape& Var<T>::shape() const {
  return graph_->shape_of(id_);
}

template <typename T>
std::span<const T> Var<T>::value() const {
  return graph_->value_of(id_);
}

template <typename T>
BasicTensor<T> Var<T>::tensor() const {
  auto v = value();
  return BasicTensor<T>(shape(), std::vector<T>(v.begin(), v.end()));
}

template <typename T>
T Var<T>::item() const {
  auto v = value();
  if (v.size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
  return v[0];
}

template <typename T>
Var<T> Graph<T>::leaf(BasicTensor<T> value, bool requires_grad) {
  if (!all_finite<T>(value.data)) throw NumericalError("non-finite leaf value");
  Node n;
  n.shape = std::move(value.shape);
  n.value = std::move(value.data);
  n.requires_grad = requires_grad && grad_enabled_;
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <typename T>
Var<T> Graph<T>::record(std::string_view op, Shape shape, std::vector<T> value,
                        std::initializer_list<Var<T>> inputs, BackwardFn backward) {
  return record(op, std::move(shape), std::move(value),
                std::span<const Var<T>>(inputs.begin(), inputs.size()), std::move(backward));
}

template <typename T>
Var<T> Graph<T>::record(std::string_view op, Shape shape, std::vector<T> value,
                        std::span<const Var<T>> inputs, BackwardFn backward) {
  if (consumed_) throw InvariantViolation("recording into a graph after backward()");
  if (value.size() != numel(shape)) {
    throw ShapeError(std::string(op) + ": value size does not match " + to_string(shape));
  }
  if (!all_finite<T>(value)) throw NumericalError(std::string(op) + " produced a non-finite value");
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  if (grad_enabled_) {
    n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                  [this](const Var<T>& v) { return nodes_[v.id()].requires_grad; });
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <typename T>
std::span<T> Graph<T>::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
  return n.grad;
}

template <typename T>
std::size_t Graph<T>::backward(Var<T> root) {
  if (consumed_) throw InvariantViolation("backward() called twice on the same graph");
  if (root.graph_ != this) throw InvalidInput("backward() root belongs to another graph");
  if (nodes_[root.id()].value.size() != 1) {
    throw ShapeError("backward() root must be a scalar, got " + to_string(nodes_[root.id()].shape));
  }
  consumed_ = true;
  if (!nodes_[root.id()].requires_grad) return 0;
  grad_buffer(root.id())[0] = T(1);
  std::size_t visited = 0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) {
      n.backward(n.grad);
      ++visited;
      if (!all_finite<T>(n.grad)) throw NumericalError("non-finite gradient");
    }
    n.backward = nullptr;
  }
  return visited;
}

template <typename T>
BasicTensor<T> Graph<T>::grad(Var<T> v) const {
  const Node& n = nodes_.at(v.id());
  if (n.grad.empty()) return BasicTensor<T>(n.shape);
  return BasicTensor<T>(n.shape, n.grad);
}

template class Graph<float>;
template class Graph<double>;
template class Var<float>;
template class Var<double>;

}  // namespace dsvit::num
