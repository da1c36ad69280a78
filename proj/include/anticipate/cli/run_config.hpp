// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "anticipate/pte/config.hpp"
#include "anticipate/rollout/rollout.hpp"
#include "anticipate/synthlab/synthlab.hpp"
#include "anticipate/tokens/tokens.hpp"
#include "anticipate/train/train.hpp"

namespace anticipate::cli {

inline constexpr int kSchemaVersion = 1;

struct PromptOptions {
  std::string strategy = "most_common";
  int n = 80;
  int k = 0;  // k-means clusters; 0 means 2 * n
  std::uint64_t seed = 0;
  std::string fixed_path;                        // for the fixed strategy
  std::string embeddings = "noun_embeddings.fpk";  // relative to the data directory
};

struct EvalOptions {
  int K = 5;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::string split = "val";
};

struct RolloutCliOptions {
  double residual = 0.5;
  std::string heads = "mean";
  std::vector<int> steps = {0};
  int top_k = 5;
  std::string example;  // empty: first example of the evaluated split
  std::string branch;   // late fusion only: "video" or "object" (default)
};

// Everything a command needs. Model n_img/n_obj double as the selection
// sizes; vocabulary sizes and input widths are resolved from the dataset.
struct RunConfig {
  int schema_version = kSchemaVersion;
  pte::PTEConfig model;
  train::TrainConfig train;
  tokens::SelectionConfig selection;
  std::uint64_t random_box_seed = 0;
  tokens::FrameGeometry geometry;
  synthlab::SynthConfig synth;
  PromptOptions prompts;
  EvalOptions eval;
  RolloutCliOptions rollout;
  std::string data_dir;
  std::string out_dir;
};

// Sections: schema_version, model, train, selection, geometry, synth,
// prompts, eval, rollout, paths. Every key is optional except
// schema_version; unknown keys throw ParameterError.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const RunConfig& cfg);
RunConfig read_run_config(const std::filesystem::path& path);
void write_run_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace anticipate::cli
