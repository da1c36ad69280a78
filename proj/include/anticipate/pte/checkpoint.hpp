// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include <json.hpp>

#include "anticipate/numcore/param_store.hpp"
#include "anticipate/pte/config.hpp"

namespace anticipate::pte {

// A checkpoint is a feature pack of dim 1 holding every parameter value in
// name order (each index key points at the parameter's first scalar) and a
// JSON sidecar next to it (same stem, ".json") with the model config and the
// parameter shapes. Values are stored as f32.
template <typename T>
struct Checkpoint {
  PTEConfig config;
  numcore::ParamStore<T> params;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

std::filesystem::path checkpoint_sidecar(const std::filesystem::path& pack_path);

template <typename T>
void save_checkpoint(const std::filesystem::path& pack_path, const PTEConfig& config,
                     const numcore::ParamStore<T>& params,
                     const nlohmann::ordered_json& extra = nlohmann::ordered_json::object());

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& pack_path);

}  // namespace anticipate::pte
