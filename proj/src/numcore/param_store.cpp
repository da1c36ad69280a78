// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/numcore/param_store.hpp"

#include "anticipate/errors.hpp"

namespace anticipate::numcore {

template <typename T>
void ParamStore<T>::add(const std::string& name, Tensor<T> value) {
  if (name.empty()) throw ParameterError("parameter name must not be empty");
  if (entries_.count(name)) throw ParameterError("duplicate parameter '" + name + "'");
  Tensor<T> grad = Tensor<T>::zeros_like(value);
  entries_.emplace(name, Entry{std::move(value), std::move(grad)});
}

template <typename T>
typename ParamStore<T>::Entry& ParamStore<T>::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw IndexError("unknown parameter '" + name + "'");
  return it->second;
}

template <typename T>
const typename ParamStore<T>::Entry& ParamStore<T>::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw IndexError("unknown parameter '" + name + "'");
  return it->second;
}

template <typename T>
Tensor<T>& ParamStore<T>::value(const std::string& name) {
  return entry(name).value;
}
template <typename T>
const Tensor<T>& ParamStore<T>::value(const std::string& name) const {
  return entry(name).value;
}
template <typename T>
Tensor<T>& ParamStore<T>::grad(const std::string& name) {
  return entry(name).grad;
}
template <typename T>
const Tensor<T>& ParamStore<T>::grad(const std::string& name) const {
  return entry(name).grad;
}

template <typename T>
Var<T> ParamStore<T>::bind(Tape<T>& tape, const std::string& name) {
  auto& e = entry(name);
  return tape.leaf(e.value, &e.grad);
}

template <typename T>
Var<T> ParamStore<T>::bind(Tape<T>& tape, const std::string& name, ParamStore& grads) const {
  return tape.leaf(entry(name).value, &grads.entry(name).grad);
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& [_, e] : entries_) e.grad.fill(T{0});
}

template <typename T>
ParamStore<T> ParamStore<T>::zeros_like() const {
  ParamStore out;
  for (const auto& [name, e] : entries_) out.add(name, Tensor<T>::zeros_like(e.value));
  return out;
}

template <typename T>
std::vector<std::string> ParamStore<T>::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

template <typename T>
std::size_t ParamStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, e] : entries_) n += e.value.size();
  return n;
}

template class ParamStore<float>;
template class ParamStore<double>;

}  // namespace anticipate::numcore
