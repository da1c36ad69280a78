// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "anticipate/datastore/annotations.hpp"
#include "anticipate/datastore/detections.hpp"
#include "anticipate/datastore/feature_pack.hpp"

namespace anticipate::datastore {

struct ExampleConfig {
  int observed_segments = 3;  // N_v
  int horizon = 20;           // Z
};

// frame index -> detections, per observed segment index.
using FrameDetections = std::map<int, std::vector<DetectionRecord>>;

struct LTAExample {
  std::string id;  // "<video_id>@<segment_idx of the stop segment>"
  std::string video_id;
  std::vector<Segment> observed;        // N_v segments, oldest first
  std::vector<std::string> clip_keys;   // one per observed segment
  std::vector<FrameDetections> objects; // one per observed segment
  std::vector<int> target_verbs;        // Z
  std::vector<int> target_nouns;        // Z
};

// Number of stop positions in a video with `segments` annotated segments.
inline int example_count(int segments, const ExampleConfig& cfg) {
  const int n = segments - cfg.observed_segments - cfg.horizon + 1;
  return n > 0 ? n : 0;
}

// Sliding window over every valid stop position j (0-based position in the
// video's segment list): observe j-N_v+1..j, predict j+1..j+Z.
// Every clip key and every detection descriptor must resolve in `store`.
std::vector<LTAExample> build_examples(const AnnotationSet& annotations, const DetectionIndex& detections,
                                       const FeatureStore& store, const ExampleConfig& cfg);

}  // namespace anticipate::datastore
