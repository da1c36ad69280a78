// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "anticipate/datastore/detections.hpp"

namespace anticipate::datastore {

// FPK1 container, all integers little-endian:
//
//   "FPK1" | u32 row_count | u32 dim | u32 dtype (1 = f32)
//   row_count * dim IEEE-754 f32 values
//   u32 entry_count | entry_count * (u16 key_len, key bytes (UTF-8), u32 row)
//
// The file length must equal exactly what the header implies.
class FeaturePack {
 public:
  static constexpr std::uint32_t kDtypeF32 = 1;

  struct IndexEntry {
    std::string key;
    std::uint32_t row = 0;
    friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
  };

  FeaturePack() = default;
  FeaturePack(std::uint32_t dim, std::vector<float> values, std::vector<IndexEntry> index);
  // One key per row, in order.
  static FeaturePack from_rows(const std::vector<std::vector<float>>& rows, const std::vector<std::string>& keys);

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t row_count() const noexcept { return dim_ == 0 ? 0 : static_cast<std::uint32_t>(values_.size() / dim_); }
  std::span<const float> row(std::uint32_t r) const;
  std::span<const float> values() const noexcept { return values_; }
  const std::vector<IndexEntry>& index() const noexcept { return index_; }
  std::optional<std::uint32_t> find(const std::string& key) const;
  std::span<const float> row(const std::string& key) const;

  friend bool operator==(const FeaturePack& a, const FeaturePack& b) {
    return a.dim_ == b.dim_ && a.values_ == b.values_ && a.index_ == b.index_;
  }

 private:
  std::uint32_t dim_ = 0;
  std::vector<float> values_;
  std::vector<IndexEntry> index_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

std::vector<std::uint8_t> encode_feature_pack(const FeaturePack& pack);
FeaturePack decode_feature_pack(std::span<const std::uint8_t> bytes);

void write_feature_pack(const FeaturePack& pack, const std::filesystem::path& path);
void write_feature_pack(const std::vector<std::vector<float>>& rows, const std::vector<std::string>& keys,
                        const std::filesystem::path& path);
FeaturePack read_feature_pack(const std::filesystem::path& path);

// Clip descriptors plus object-descriptor packs addressed by pack id.
class FeatureStore {
 public:
  FeatureStore() = default;
  FeatureStore(FeaturePack clips, std::map<std::string, FeaturePack> object_packs);

  // Loads `<dir>/<clip_pack>.fpk` and `<dir>/<id>.fpk` for every pack id
  // referenced by `detections`.
  static FeatureStore load(const std::filesystem::path& dir, const std::vector<DetectionRecord>& detections,
                           const std::string& clip_pack = "clips");

  const FeaturePack& clips() const noexcept { return clips_; }
  bool has_clip(const std::string& key) const { return clips_.find(key).has_value(); }
  std::span<const float> clip(const std::string& key) const;

  bool resolves(const DescriptorRef& ref) const;
  std::span<const float> descriptor(const DescriptorRef& ref) const;
  // Common descriptor dimension across object packs (0 when there are none).
  std::uint32_t descriptor_dim() const;

 private:
  FeaturePack clips_;
  std::map<std::string, FeaturePack> objects_;
};

std::string clip_key(const std::string& video_id, int segment_idx);

}  // namespace anticipate::datastore
