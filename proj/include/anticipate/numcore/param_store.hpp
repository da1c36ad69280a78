// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "anticipate/numcore/tape.hpp"
#include "anticipate/numcore/tensor.hpp"

namespace anticipate::numcore {

// Named parameters with a gradient slot of identical shape. Iteration is
// lexicographic by name (std::map), which fixes the order of every reduction
// and optimizer update.
template <typename T>
class ParamStore {
 public:
  struct Entry {
    Tensor<T> value;
    Tensor<T> grad;
  };

  void add(const std::string& name, Tensor<T> value);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  Tensor<T>& value(const std::string& name);
  const Tensor<T>& value(const std::string& name) const;
  Tensor<T>& grad(const std::string& name);
  const Tensor<T>& grad(const std::string& name) const;

  // Leaf on `tape` whose gradient accumulates into this store.
  Var<T> bind(Tape<T>& tape, const std::string& name);
  // Leaf on `tape` whose gradient accumulates into `grads` instead (per-worker
  // gradient buffers). `grads` must mirror this store.
  Var<T> bind(Tape<T>& tape, const std::string& name, ParamStore& grads) const;

  void zero_grad();
  // Copy of the store with zero values, used as a gradient buffer.
  ParamStore zeros_like() const;

  std::vector<std::string> names() const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const;

  std::map<std::string, Entry>& entries() noexcept { return entries_; }
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& [name, e] : entries_) out.add(name, e.value.template cast<U>());
    return out;
  }

 private:
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  std::map<std::string, Entry> entries_;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace anticipate::numcore
