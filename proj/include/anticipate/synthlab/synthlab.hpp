// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "anticipate/datastore/annotations.hpp"
#include "anticipate/datastore/detections.hpp"
#include "anticipate/datastore/feature_pack.hpp"
#include "anticipate/prompts/prompts.hpp"
#include "anticipate/tokens/tokens.hpp"

namespace anticipate::synthlab {

// Synthetic anticipation benchmark. Verbs walk a fixed permutation chain and
// are visible only through clip features; nouns cycle through a per-video set
// of planted categories ranked by score and are visible only through
// detections.
struct SynthConfig {
  int n_videos = 500;
  int segments_per_video = 23;
  int verb_count = 10;
  int noun_count = 20;
  int clip_dim = 16;
  int obj_descriptor_dim = 16;
  double noise_std = 0.1;
  double distractor_rate = 0.15;  // per absent category per frame
  std::uint64_t seed = 0;

  int planted_per_video = 3;
  // Fraction of videos whose planted detections are weakly visible: scores
  // are mapped order-preservingly into [0.31, 0.54] instead of [0.6, 1.0].
  double dim_video_rate = 0.3;
  double val_fraction = 0.2;
  int observed_segments = 3;  // N_v the noun cycle is phased for
  int horizon = 20;           // Z
  double segment_seconds = 1.0;
  tokens::FrameGeometry geometry;

  void validate() const;
  int val_videos() const;
  int train_videos() const { return n_videos - val_videos(); }
};

nlohmann::ordered_json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {});

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> val;
};

// {"train":[video_ids],"val":[video_ids]}
void write_split(const Split& split, const std::filesystem::path& path);
Split read_split(const std::filesystem::path& path);

inline constexpr const char* kObjectPack = "objects";

// Writes annotations.jsonl, detections.jsonl, clips.fpk, objects.fpk,
// noun_embeddings.fpk, prompts.txt (+ meta), split.json and config.json into
// `dir`. Output bytes depend only on `cfg`.
Split generate(const SynthConfig& cfg, const std::filesystem::path& dir);

// A dataset directory loaded and cross-validated.
struct Dataset {
  datastore::AnnotationSet annotations;
  std::vector<datastore::DetectionRecord> detections;
  datastore::FeatureStore store;
  prompts::PromptList prompts;
  Split split;
};

Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace anticipate::synthlab
