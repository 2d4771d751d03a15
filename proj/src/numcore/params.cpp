#include "dsvit/numcore/params.hpp"

namespace dsvit::num {

template <typename T>
void ParamSet<T>::add(std::string name, BasicTensor<T> value) {
  if (contains(name)) throw InvalidInput("duplicate parameter name '" + name + "'");
  index_.emplace(name, names_.size());
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
}

template <typename T>
const BasicTensor<T>& ParamSet<T>::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidInput("unknown parameter '" + std::string(name) + "'");
  return values_[it->second];
}

template <typename T>
BasicTensor<T>& ParamSet<T>::get(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidInput("unknown parameter '" + std::string(name) + "'");
  return values_[it->second];
}

template <typename T>
std::size_t ParamSet<T>::total_elements() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

template <typename T>
ParamSet<T> ParamSet<T>::zeros_like() const {
  ParamSet out;
  for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], BasicTensor<T>(values_[i].shape));
  return out;
}

template <typename T>
Binding<T>::Binding(Graph<T>& graph, const ParamSet<T>& params, bool requires_grad) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    index_.emplace(params.name(i), i);
    names_.push_back(params.name(i));
    vars_.push_back(graph.leaf(params.at(i), requires_grad));
  }
}

template <typename T>
Binding<T>::Binding(std::vector<std::string> names, std::vector<Var<T>> leaves)
    : names_(std::move(names)), vars_(std::move(leaves)) {
  if (names_.size() != vars_.size()) throw InvalidInput("binding names/leaves size mismatch");
  for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
}

template <typename T>
Var<T> Binding<T>::operator[](std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidInput("parameter '" + std::string(name) + "' is not bound");
  return vars_[it->second];
}

template <typename T>
ParamSet<T> Binding<T>::grads() const {
  ParamSet<T> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    out.add(names_[i], vars_[i].graph().grad(vars_[i]));
  }
  return out;
}

template class ParamSet<float>;
template class ParamSet<double>;
template class Binding<float>;
template class Binding<double>;

}  // namespace dsvit::num
