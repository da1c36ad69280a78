// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "anticipate/errors.hpp"
#include "anticipate/numcore/tensor.hpp"

namespace anticipate::numcore {

template <typename T>
class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// tape is alive.
template <typename T>
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape<T>* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }

  const Tensor<T>& value() const { return tape_->value(id_); }
  const Shape& shape() const { return value().shape(); }
  // Gradient after Tape::backward; an empty tensor if nothing flowed here.
  const Tensor<T>& grad() const { return tape_->grad_or_empty(id_); }

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode tape. One tape per forward pass; nodes are appended in
// topological order, so backward is a single reverse sweep.
template <typename T>
class Tape {
 public:
  // Called with the tape and the id of the node being differentiated.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Tensor<T> value) { return push(std::move(value), false, nullptr, {}); }

  // Differentiable input. When `sink` is non-null, the gradient is added into
  // it during backward (this is how parameters receive their gradients).
  Var<T> leaf(Tensor<T> value, Tensor<T>* sink = nullptr) { return push(std::move(value), true, sink, {}); }

  // Result of an op. `inputs` decide whether the node takes part in backward.
  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn backward) {
    bool needs = false;
    for (const auto& in : inputs) needs = needs || nodes_[in.id()].requires_grad;
    return push(std::move(value), needs, nullptr, needs ? std::move(backward) : BackwardFn{});
  }
  Var<T> record(Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn backward) {
    bool needs = false;
    for (const auto& in : inputs) needs = needs || nodes_[in.id()].requires_grad;
    return push(std::move(value), needs, nullptr, needs ? std::move(backward) : BackwardFn{});
  }

  const Tensor<T>& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(const Var<T>& v) const { return nodes_.at(v.id()).requires_grad; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

  // Gradient slot for accumulation inside backward functions; allocated lazily.
  Tensor<T>& grad(std::size_t id) {
    auto& node = nodes_.at(id);
    if (node.grad.empty()) node.grad = Tensor<T>::zeros_like(node.value);
    return node.grad;
  }
  const Tensor<T>& grad_or_empty(std::size_t id) const { return nodes_.at(id).grad; }
  bool has_grad(std::size_t id) const { return !nodes_.at(id).grad.empty(); }

  std::size_t size() const noexcept { return nodes_.size(); }

  // Seeds d(output)/d(output) = 1 for every element and sweeps the tape.
  void backward(const Var<T>& output) {
    if (output.tape() != this) throw ParameterError("backward called with a variable from another tape");
    grad(output.id()).fill(T{1});
    for (std::size_t i = output.id() + 1; i-- > 0;) {
      auto& node = nodes_[i];
      if (!node.requires_grad || node.grad.empty()) continue;
      if (node.backward) node.backward(*this, i);
      if (node.sink != nullptr) {
        if (node.sink->empty()) *node.sink = Tensor<T>::zeros_like(node.value);
        auto dst = node.sink->values();
        auto src = node.grad.values();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
    }
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    BackwardFn backward;
    Tensor<T>* sink = nullptr;
    bool requires_grad = false;
  };

  Var<T> push(Tensor<T> value, bool requires_grad, Tensor<T>* sink, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), {}, std::move(backward), sink, requires_grad});
    return Var<T>(this, nodes_.size() - 1);
  }

  std::deque<Node> nodes_;
};

}  // namespace anticipate::numcore
