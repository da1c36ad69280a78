// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/datastore/examples.hpp"

#include "anticipate/errors.hpp"

namespace anticipate::datastore {

std::vector<LTAExample> build_examples(const AnnotationSet& annotations, const DetectionIndex& detections,
                                       const FeatureStore& store, const ExampleConfig& cfg) {
  if (cfg.observed_segments < 1 || cfg.horizon < 1) {
    throw ParameterError("observed_segments and horizon must be >= 1");
  }
  const auto nv = static_cast<std::size_t>(cfg.observed_segments);
  const auto z = static_cast<std::size_t>(cfg.horizon);
  std::vector<LTAExample> out;
  for (const auto& video : annotations.videos) {
    const auto& segs = video.segments;
    for (std::size_t j = nv - 1; j + z < segs.size(); ++j) {
      LTAExample ex;
      ex.video_id = video.video_id;
      ex.id = video.video_id + "@" + std::to_string(segs[j].segment_idx);
      for (std::size_t s = j + 1 - nv; s <= j; ++s) {
        const auto& seg = segs[s];
        auto key = clip_key(video.video_id, seg.segment_idx);
        if (!store.has_clip(key)) throw LinkError("example " + ex.id + ": clip descriptor '" + key + "' not found");
        auto frames = detections.segment(video.video_id, seg.segment_idx);
        for (const auto& [frame, dets] : frames) {
          for (const auto& d : dets) {
            if (!store.resolves(d.descriptor)) {
              throw LinkError("example " + ex.id + ": descriptor " + d.descriptor.pack_id + "#" +
                              std::to_string(d.descriptor.row) + " does not resolve");
            }
          }
        }
        ex.observed.push_back(seg);
        ex.clip_keys.push_back(std::move(key));
        ex.objects.push_back(std::move(frames));
      }
      for (std::size_t t = j + 1; t <= j + z; ++t) {
        ex.target_verbs.push_back(segs[t].verb_id);
        ex.target_nouns.push_back(segs[t].noun_id);
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace anticipate::datastore
