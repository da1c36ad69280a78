// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "anticipate/numcore/tensor.hpp"
#include "anticipate/pte/model.hpp"
#include "anticipate/tokens/tokens.hpp"

namespace anticipate::rollout {

enum class HeadAggregation { kMean, kMax };

struct RolloutOptions {
  double residual = 0.5;  // weight of the identity in 0.5 * A + 0.5 * I
  HeadAggregation heads = HeadAggregation::kMean;
};

// Accumulated attention over all layers, L x L, row-stochastic. Layout and
// object metadata are optional and only needed by top_objects and export.
struct RolloutMap {
  std::size_t size = 0;
  std::vector<double> weights;  // row-major
  pte::SequenceLayout layout;
  std::vector<tokens::TokenMeta> object_meta;

  double at(std::size_t i, std::size_t j) const { return weights[i * size + j]; }
  std::span<const double> row(std::size_t i) const { return {weights.data() + i * size, size}; }
};

// Each layer is [heads, L, L] with rows summing to 1 over unmasked keys
// (ValidationError beyond 1e-4). Per layer: aggregate heads, mix with the
// identity, renormalize rows over unmasked keys; the map is the product
// A_n ... A_1 of the mixed layers.
RolloutMap attention_rollout(std::span<const numcore::Tensor<double>> layers, std::span<const std::uint8_t> masked = {},
                             const RolloutOptions& options = {});

// Rollout of one encoder branch with its token layout and object metadata.
template <typename T>
RolloutMap rollout_branch(const pte::BranchOutput<T>& branch, const pte::SequenceInput<T>& input,
                          const RolloutOptions& options = {});

struct ObjectWeight {
  int segment_idx = 0;
  int frame_idx = 0;
  int object_slot = 0;
  double weight = 0.0;
  std::size_t token = 0;  // column in the rollout map
};

struct TopObjectsOptions {
  bool include_whole_frame = false;
  bool include_null = false;
};

// Object columns of prediction token z's row with positive weight, sorted by
// weight descending, ties in canonical (segment, frame, slot) order, first k.
std::vector<ObjectWeight> top_objects(const RolloutMap& map, int z, int k, const TopObjectsOptions& options = {});

// CSV "step,segment_idx,frame_idx,object_slot,weight" with one row per object
// token per step; each step's weights are renormalized to sum to 1 over the
// object columns (left at zero when the step puts no weight on objects). With
// `pgm_path` also writes a P2 image: one block of frames x n_obj pixels per step.
void export_heatmap(const RolloutMap& map, const std::vector<int>& steps, const std::filesystem::path& csv_path,
                    const std::optional<std::filesystem::path>& pgm_path = std::nullopt);

}  // namespace anticipate::rollout
