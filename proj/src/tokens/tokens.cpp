// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/tokens/tokens.hpp"

#include <algorithm>
#include <cmath>

#include "anticipate/errors.hpp"
#include "anticipate/numcore/random.hpp"

namespace anticipate::tokens {

using datastore::Box;
using datastore::DetectionRecord;

void SelectionConfig::validate() const {
  if (n_img < 1) throw ParameterError("n_img must be >= 1");
  if (n_obj < 1) throw ParameterError("n_obj must be >= 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ParameterError("threshold must lie in [0, 1]");
}

std::pair<int, int> segment_frame_range(const datastore::Segment& segment, double fps) {
  if (!(fps > 0.0)) throw ParameterError("fps must be positive");
  const int first = static_cast<int>(std::floor(segment.start_s * fps));
  const int last = std::max(first, static_cast<int>(std::ceil(segment.end_s * fps)) - 1);
  return {first, last};
}

std::vector<int> sample_frames(int first, int last, int n_img) {
  if (n_img < 1) throw ParameterError("n_img must be >= 1");
  if (last < first) throw ParameterError("segment has no frames");
  std::vector<int> out(n_img, first);
  if (n_img == 1) return out;
  const long long span = last - first;
  const long long den = n_img - 1;
  // floor(first + i*span/den + 1/2) in integers
  for (int i = 0; i < n_img; ++i) out[i] = first + static_cast<int>((2 * i * span + den) / (2 * den));
  return out;
}

TokenPrecursor whole_frame_token(double frame_w, double frame_h) {
  TokenPrecursor t;
  t.whole_frame = true;
  t.box = Box{0.0, 0.0, frame_w, frame_h};
  t.score = 1.0;
  t.category_idx = -1;
  return t;
}

std::vector<TokenPrecursor> filter_detections(const std::vector<DetectionRecord>& dets, const SelectionConfig& cfg,
                                              double frame_w, double frame_h) {
  std::vector<const DetectionRecord*> kept;
  for (const auto& d : dets) {
    if (d.score >= cfg.threshold) kept.push_back(&d);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const DetectionRecord* a, const DetectionRecord* b) {
    if (a->score != b->score) return a->score > b->score;
    if (a->box.area() != b->box.area()) return a->box.area() > b->box.area();
    return a->box.x1 < b->box.x1;
  });
  const std::size_t take = std::min<std::size_t>(kept.size(), static_cast<std::size_t>(std::max(0, cfg.n_obj - 1)));
  std::vector<TokenPrecursor> out;
  out.reserve(take + 1);
  out.push_back(whole_frame_token(frame_w, frame_h));
  for (std::size_t i = 0; i < take; ++i) {
    TokenPrecursor t;
    t.box = kept[i]->box;
    t.score = kept[i]->score;
    t.category_idx = kept[i]->category_idx;
    if (!kept[i]->descriptor.pack_id.empty()) t.descriptor = kept[i]->descriptor;
    out.push_back(std::move(t));
  }
  return out;
}

Box square_crop_box(const Box& box, double frame_w, double frame_h) {
  if (!(box.width() > 0.0) || !(box.height() > 0.0)) {
    throw GeometryError("cannot square-crop a degenerate box");
  }
  if (!(frame_w > 0.0) || !(frame_h > 0.0)) throw GeometryError("frame dimensions must be positive");
  const double side = std::min(std::max(box.width(), box.height()), std::min(frame_w, frame_h));
  const double cx = (box.x1 + box.x2) / 2.0;
  const double cy = (box.y1 + box.y2) / 2.0;
  double x1 = cx - side / 2.0;
  double y1 = cy - side / 2.0;
  x1 = std::clamp(x1, 0.0, frame_w - side);
  y1 = std::clamp(y1, 0.0, frame_h - side);
  return Box{x1, y1, x1 + side, y1 + side};
}

std::size_t object_feature_dim(std::size_t descriptor_dim, std::size_t prompt_count) {
  return descriptor_dim + 4 + 1 + prompt_count + 1;
}

std::vector<double> assemble_object_features(const TokenPrecursor& token, std::span<const float> descriptor,
                                             std::size_t descriptor_dim, const SelectionConfig& cfg,
                                             std::size_t prompt_count, double frame_w, double frame_h) {
  if (!descriptor.empty() && descriptor.size() != descriptor_dim) {
    throw DimensionError("descriptor has dim " + std::to_string(descriptor.size()) + ", expected " +
                         std::to_string(descriptor_dim));
  }
  std::vector<double> f(object_feature_dim(descriptor_dim, prompt_count), 0.0);
  std::copy(descriptor.begin(), descriptor.end(), f.begin());
  std::size_t o = descriptor_dim;
  if (cfg.use_location) {
    f[o + 0] = (token.box.x1 + token.box.x2) / 2.0 / frame_w;
    f[o + 1] = (token.box.y1 + token.box.y2) / 2.0 / frame_h;
    f[o + 2] = token.box.width() / frame_w;
    f[o + 3] = token.box.height() / frame_h;
  }
  o += 4;
  if (cfg.use_category) {
    f[o] = token.score;
    const std::size_t cat = token.whole_frame ? prompt_count : static_cast<std::size_t>(token.category_idx);
    if (token.category_idx < -1 || cat > prompt_count || (!token.whole_frame && cat == prompt_count)) {
      throw IndexError("category_idx " + std::to_string(token.category_idx) + " outside prompt list of size " +
                       std::to_string(prompt_count));
    }
    f[o + 1 + cat] = 1.0;
  }
  return f;
}

std::vector<DetectionRecord> random_detections(std::uint64_t seed, int n, double frame_w, double frame_h,
                                               int prompt_count) {
  if (n < 1) throw ParameterError("random_detections needs n >= 1");
  if (frame_w < 1.0 || frame_h < 1.0) throw GeometryError("frame must be at least 1px on each side");
  numcore::Rng rng(seed);
  auto span = [&](double limit) {
    double a = rng.uniform(0.0, limit);
    double b = rng.uniform(0.0, limit);
    if (a > b) std::swap(a, b);
    if (b - a < 1.0) {
      if (a + 1.0 <= limit) {
        b = a + 1.0;
      } else {
        a = limit - 1.0;
        b = limit;
      }
    }
    return std::pair{a, b};
  };
  std::vector<DetectionRecord> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    DetectionRecord d;
    auto [x1, x2] = span(frame_w);
    auto [y1, y2] = span(frame_h);
    d.box = Box{x1, y1, x2, y2};
    d.score = rng.uniform();
    d.category_idx = prompt_count > 0 ? static_cast<int>(rng.below(prompt_count)) : 0;
    out.push_back(std::move(d));
  }
  return out;
}

ObjectTokenSet build_object_tokens(const datastore::LTAExample& example, const datastore::FeatureStore& store,
                                   const SelectionConfig& cfg, std::size_t prompt_count, std::size_t descriptor_dim,
                                   const FrameGeometry& geometry, std::uint64_t random_seed) {
  cfg.validate();
  ObjectTokenSet set;
  set.feature_dim = object_feature_dim(descriptor_dim, prompt_count);
  const std::size_t total = example.observed.size() * cfg.n_img * cfg.n_obj;
  set.features.reserve(total * set.feature_dim);
  set.meta.reserve(total);
  static const std::vector<DetectionRecord> kNone;
  for (std::size_t k = 0; k < example.observed.size(); ++k) {
    const auto& seg = example.observed[k];
    auto [first, last] = segment_frame_range(seg, geometry.fps);
    const auto frames = sample_frames(first, last, cfg.n_img);
    for (int slot = 0; slot < cfg.n_img; ++slot) {
      const int frame = frames[slot];
      std::vector<TokenPrecursor> picked;
      if (cfg.random_boxes) {
        auto boxes = random_detections(
            numcore::derive_seed(random_seed, {numcore::hash_string(example.video_id),
                                               static_cast<std::uint64_t>(seg.segment_idx),
                                               static_cast<std::uint64_t>(frame)}),
            std::max(1, cfg.n_obj - 1), geometry.width, geometry.height, static_cast<int>(prompt_count));
        auto any = cfg;
        any.threshold = 0.0;
        picked = filter_detections(boxes, any, geometry.width, geometry.height);
        if (cfg.n_obj == 1) picked.resize(1);
      } else {
        const auto& by_frame = example.objects.at(k);
        auto it = by_frame.find(frame);
        picked = filter_detections(it == by_frame.end() ? kNone : it->second, cfg, geometry.width, geometry.height);
      }
      for (int o = 0; o < cfg.n_obj; ++o) {
        TokenMeta m{static_cast<int>(k), slot, o, seg.segment_idx, frame, false, false};
        if (o < static_cast<int>(picked.size())) {
          const auto& t = picked[o];
          std::span<const float> desc;
          if (t.descriptor) desc = store.descriptor(*t.descriptor);
          auto f = assemble_object_features(t, desc, descriptor_dim, cfg, prompt_count, geometry.width,
                                            geometry.height);
          set.features.insert(set.features.end(), f.begin(), f.end());
          m.whole_frame = t.whole_frame;
        } else {
          set.features.insert(set.features.end(), set.feature_dim, 0.0);
          m.null = true;
        }
        set.meta.push_back(m);
      }
    }
  }
  return set;
}

}  // namespace anticipate::tokens
