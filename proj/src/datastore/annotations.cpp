// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/datastore/annotations.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "anticipate/datastore/jsonl.hpp"
#include "anticipate/errors.hpp"

namespace anticipate::datastore {

const VideoAnnotations* AnnotationSet::find(const std::string& video_id) const {
  for (const auto& v : videos) {
    if (v.video_id == video_id) return &v;
  }
  return nullptr;
}

std::size_t AnnotationSet::segment_count() const {
  std::size_t n = 0;
  for (const auto& v : videos) n += v.segments.size();
  return n;
}

AnnotationSet AnnotationSet::subset(const std::vector<std::string>& ids) const {
  AnnotationSet out;
  for (const auto& id : ids) {
    const auto* v = find(id);
    if (v == nullptr) throw LinkError("video '" + id + "' not present in annotations");
    out.videos.push_back(*v);
  }
  return out;
}

namespace {

std::string describe(const std::string& video, const Segment& s) {
  return "video '" + video + "' segment " + std::to_string(s.segment_idx);
}

}  // namespace

void validate(const AnnotationSet& set, const VocabularyLimits& limits) {
  for (const auto& video : set.videos) {
    const Segment* prev = nullptr;
    for (const auto& seg : video.segments) {
      if (!(seg.end_s > seg.start_s)) {
        throw ValidationError(describe(video.video_id, seg) + ": end_s (" + std::to_string(seg.end_s) +
                              ") must be greater than start_s (" + std::to_string(seg.start_s) + ")");
      }
      if (seg.verb_id < 0 || (limits.verb_count >= 0 && seg.verb_id >= limits.verb_count)) {
        throw ValidationError(describe(video.video_id, seg) + ": verb_id " + std::to_string(seg.verb_id) +
                              " outside vocabulary");
      }
      if (seg.noun_id < 0 || (limits.noun_count >= 0 && seg.noun_id >= limits.noun_count)) {
        throw ValidationError(describe(video.video_id, seg) + ": noun_id " + std::to_string(seg.noun_id) +
                              " outside vocabulary");
      }
      if (prev != nullptr && (seg.start_s < prev->start_s || seg.segment_idx <= prev->segment_idx)) {
        throw ValidationError(describe(video.video_id, seg) + ": out of order after segment " +
                              std::to_string(prev->segment_idx));
      }
      prev = &seg;
    }
  }
}

AnnotationSet parse_annotations(const std::string& text, const VocabularyLimits& limits) {
  AnnotationSet set;
  std::map<std::string, std::size_t> position;
  for_each_json_line(text, [&](const nlohmann::json& row, std::size_t line) {
    Segment seg;
    const auto video_id = require_field<std::string>(row, "video_id", line);
    seg.segment_idx = require_field<int>(row, "segment_idx", line);
    seg.start_s = require_field<double>(row, "start_s", line);
    seg.end_s = require_field<double>(row, "end_s", line);
    seg.verb_id = require_field<int>(row, "verb_id", line);
    seg.noun_id = require_field<int>(row, "noun_id", line);
    seg.verb_name = require_field<std::string>(row, "verb_name", line);
    seg.noun_name = require_field<std::string>(row, "noun_name", line);
    auto [it, inserted] = position.emplace(video_id, set.videos.size());
    if (inserted) set.videos.push_back(VideoAnnotations{video_id, {}});
    set.videos[it->second].segments.push_back(std::move(seg));
  });
  validate(set, limits);
  return set;
}

AnnotationSet read_annotations(const std::filesystem::path& path, const VocabularyLimits& limits) {
  return parse_annotations(read_text_file(path), limits);
}

void write_annotations(const AnnotationSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& video : set.videos) {
    for (const auto& s : video.segments) {
      nlohmann::ordered_json row;
      row["video_id"] = video.video_id;
      row["segment_idx"] = s.segment_idx;
      row["start_s"] = s.start_s;
      row["end_s"] = s.end_s;
      row["verb_id"] = s.verb_id;
      row["noun_id"] = s.noun_id;
      row["verb_name"] = s.verb_name;
      row["noun_name"] = s.noun_name;
      out << row.dump() << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace anticipate::datastore
