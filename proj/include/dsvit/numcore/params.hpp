#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dsvit/numcore/graph.hpp"

namespace dsvit::num {

// Named parameter tensors in insertion order. Also used for gradients and
// optimizer moments, which share the names of the parameters they track.
template <typename T>
class ParamSet {
 public:
  void add(std::string name, BasicTensor<T> value);
  bool contains(std::string_view name) const { return index_.find(name) != index_.end(); }
  const BasicTensor<T>& get(std::string_view name) const;
  BasicTensor<T>& get(std::string_view name);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const BasicTensor<T>& at(std::size_t i) const { return values_[i]; }
  BasicTensor<T>& at(std::size_t i) { return values_[i]; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t total_elements() const;

  // Same names and shapes, all zeros.
  ParamSet zeros_like() const;

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], values_[i].template cast<U>());
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<BasicTensor<T>> values_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

template <typename T>
bool bit_equal(const ParamSet<T>& a, const ParamSet<T>& b) {
  if (a.names() != b.names()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bit_equal(a.at(i), b.at(i))) return false;
  }
  return true;
}

// Parameters of a ParamSet placed as leaves of one graph.
template <typename T>
class Binding {
 public:
  Binding(Graph<T>& graph, const ParamSet<T>& params, bool requires_grad);
  // Uses caller-built leaves, one per name, in the order of `names`.
  Binding(std::vector<std::string> names, std::vector<Var<T>> leaves);

  Var<T> operator[](std::string_view name) const;
  bool contains(std::string_view name) const { return index_.find(name) != index_.end(); }

  // Gradients after Graph::backward(); zeros for parameters the loss never touched.
  ParamSet<T> grads() const;

 private:
  std::vector<std::string> names_;
  std::vector<Var<T>> vars_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

extern template class ParamSet<float>;
extern template class ParamSet<double>;
extern template class Binding<float>;
extern template class Binding<double>;

}  // namespace dsvit::num
