// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace anticipate::datastore {

// Pixel box in xyxy order.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }
  friend bool operator==(const Box&, const Box&) = default;
};

struct DescriptorRef {
  std::string pack_id;
  std::uint32_t row = 0;
  friend bool operator==(const DescriptorRef&, const DescriptorRef&) = default;
};

struct DetectionRecord {
  std::string video_id;
  int segment_idx = 0;
  int frame_idx = 0;
  Box box;
  int category_idx = 0;
  double score = 0.0;
  DescriptorRef descriptor;
  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

// Line format:
// {"video_id","segment_idx","frame_idx","box":[x1,y1,x2,y2],"category_idx","score","pack_id","row"}
std::vector<DetectionRecord> read_detections(const std::filesystem::path& path);
std::vector<DetectionRecord> parse_detections(const std::string& text);
void write_detections(const std::vector<DetectionRecord>& records, const std::filesystem::path& path);

void validate(const DetectionRecord& record);

// Detections grouped by (video, segment, frame), file order preserved.
class DetectionIndex {
 public:
  using Key = std::tuple<std::string, int, int>;

  DetectionIndex() = default;
  explicit DetectionIndex(const std::vector<DetectionRecord>& records);

  const std::vector<DetectionRecord>& frame(const std::string& video, int segment, int frame) const;
  // All frames with detections for one segment, keyed by frame index.
  std::map<int, std::vector<DetectionRecord>> segment(const std::string& video, int segment) const;
  std::size_t size() const noexcept { return count_; }

 private:
  std::map<Key, std::vector<DetectionRecord>> frames_;
  std::size_t count_ = 0;
};

}  // namespace anticipate::datastore
