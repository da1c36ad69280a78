// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anticipate/numcore/tape.hpp"
#include "anticipate/numcore/tensor.hpp"

namespace anticipate::numcore {

// Differentiable primitives. Every op treats its inputs as matrices
// (rows x last-axis) and records exactly one node on the input's tape.

// y = x W + b. x: [.., in], W: [in, out], b: [out].
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

// a + c where c carries no gradient (e.g. sinusoidal encodings).
template <typename T>
Var<T> add_constant(const Var<T>& a, const Tensor<T>& c);

// Elementwise product with a constant mask (dropout).
template <typename T>
Var<T> mul_constant(const Var<T>& a, const Tensor<T>& c);

template <typename T>
Var<T> scale(const Var<T>& a, T factor);

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps);

// Exact (erf) GELU.
template <typename T>
Var<T> gelu(const Var<T>& x);

// Stacks matrices with equal column counts.
template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts);

template <typename T>
Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t count);

// out[i] = table[index[i]]; index -1 yields a zero row.
template <typename T>
Var<T> gather_rows(const Var<T>& table, std::span<const int> index);

// Multi-head scaled dot-product attention over the rows of q, k, v ([L, D]).
// key_masked[j] != 0 removes key j for every query. When `probs` is non-null
// it receives the post-softmax weights with shape [heads, L, L].
template <typename T>
Var<T> attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, std::span<const std::uint8_t> key_masked,
                 std::size_t heads, Tensor<T>* probs = nullptr);

// Mean over rows of -log softmax(logits[r])[target[r]]. Max-subtracted.
template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, std::span<const int> targets);

template <typename T>
Var<T> sum(const Var<T>& x);

template <typename T>
Var<T> mean(const Var<T>& x);

template <typename T>
Var<T> sum_squares(const Var<T>& x);

// Non-differentiable helpers.
template <typename T>
std::vector<T> softmax(std::span<const T> logits);

// Inverted-dropout mask: entries are 0 with probability `rate`, else 1/(1-rate).
template <typename T>
Tensor<T> dropout_mask(const Shape& shape, double rate, std::uint64_t seed);

}  // namespace anticipate::numcore
