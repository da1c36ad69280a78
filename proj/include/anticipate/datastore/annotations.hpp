// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace anticipate::datastore {

struct Segment {
  int segment_idx = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  int verb_id = 0;
  int noun_id = 0;
  std::string verb_name;
  std::string noun_name;
};

struct VideoAnnotations {
  std::string video_id;
  std::vector<Segment> segments;  // sorted by start_s
};

struct AnnotationSet {
  std::vector<VideoAnnotations> videos;  // in order of first appearance

  const VideoAnnotations* find(const std::string& video_id) const;
  std::size_t segment_count() const;
  // Subset restricted to the given video ids (order of `ids` preserved).
  AnnotationSet subset(const std::vector<std::string>& ids) const;
};

// Optional vocabulary bounds; negative means unchecked.
struct VocabularyLimits {
  int verb_count = -1;
  int noun_count = -1;
};

// One JSON object per line:
// {"video_id","segment_idx","start_s","end_s","verb_id","noun_id","verb_name","noun_name"}
// Bad rows are rejected, never repaired.
AnnotationSet read_annotations(const std::filesystem::path& path, const VocabularyLimits& limits = {});
AnnotationSet parse_annotations(const std::string& text, const VocabularyLimits& limits = {});
void write_annotations(const AnnotationSet& set, const std::filesystem::path& path);

void validate(const AnnotationSet& set, const VocabularyLimits& limits = {});

}  // namespace anticipate::datastore
