// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "anticipate/datastore/detections.hpp"
#include "anticipate/datastore/examples.hpp"
#include "anticipate/datastore/feature_pack.hpp"

namespace anticipate::tokens {

struct SelectionConfig {
  int n_img = 4;   // frames sampled per segment
  int n_obj = 11;  // tokens per frame, whole-frame token included
  double threshold = 0.3;
  bool use_location = true;
  bool use_category = true;
  // Replace detections with random boxes (baseline vocabulary-free tokens).
  bool random_boxes = false;

  void validate() const;
};

struct FrameGeometry {
  double fps = 4.0;
  double width = 640.0;
  double height = 480.0;
};

// Inclusive frame range covered by a segment at `fps`:
// first = floor(start*fps), last = max(first, ceil(end*fps) - 1).
std::pair<int, int> segment_frame_range(const datastore::Segment& segment, double fps);

// n_img indices spread uniformly over [first, last], rounded half-up.
std::vector<int> sample_frames(int first, int last, int n_img);

// One selected token before feature assembly.
struct TokenPrecursor {
  bool whole_frame = false;
  datastore::Box box;
  double score = 0.0;
  int category_idx = -1;  // -1 for the whole-frame token
  std::optional<datastore::DescriptorRef> descriptor;
};

TokenPrecursor whole_frame_token(double frame_w, double frame_h);

// Drops score < threshold, orders by score desc (then area desc, then x1 asc),
// keeps n_obj-1 and prepends the whole-frame token.
std::vector<TokenPrecursor> filter_detections(const std::vector<datastore::DetectionRecord>& dets,
                                              const SelectionConfig& cfg, double frame_w, double frame_h);

// Square of side max(w,h) (capped at min(frame_w, frame_h)) centred on the
// box, translated to lie inside the frame.
datastore::Box square_crop_box(const datastore::Box& box, double frame_w, double frame_h);

// descriptor | cx cy w h (normalised) | score | one-hot(prompt_count + 1).
std::size_t object_feature_dim(std::size_t descriptor_dim, std::size_t prompt_count);

std::vector<double> assemble_object_features(const TokenPrecursor& token, std::span<const float> descriptor,
                                             std::size_t descriptor_dim, const SelectionConfig& cfg,
                                             std::size_t prompt_count, double frame_w, double frame_h);

// n boxes with uniform corners (min side 1px), uniform score and category.
std::vector<datastore::DetectionRecord> random_detections(std::uint64_t seed, int n, double frame_w, double frame_h,
                                                          int prompt_count);

struct TokenMeta {
  int segment = 0;      // position within the observation window, 0..N_v-1
  int frame_slot = 0;   // 0..n_img-1
  int object_slot = 0;  // 0..n_obj-1; slot 0 is the whole-frame token
  int segment_idx = 0;  // annotated segment index
  int frame_idx = 0;    // video frame index
  bool whole_frame = false;
  bool null = false;  // padding; masked out of attention
};

// Fixed-size token set for one example: N_v * n_img * n_obj rows ordered by
// (segment, frame slot, object slot).
struct ObjectTokenSet {
  std::size_t feature_dim = 0;
  std::vector<double> features;  // row-major, rows x feature_dim
  std::vector<TokenMeta> meta;

  std::size_t rows() const noexcept { return meta.size(); }
  std::span<const double> row(std::size_t r) const { return {features.data() + r * feature_dim, feature_dim}; }
};

ObjectTokenSet build_object_tokens(const datastore::LTAExample& example, const datastore::FeatureStore& store,
                                   const SelectionConfig& cfg, std::size_t prompt_count, std::size_t descriptor_dim,
                                   const FrameGeometry& geometry, std::uint64_t random_seed = 0);

}  // namespace anticipate::tokens
