// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/datastore/detections.hpp"

#include <climits>
#include <fstream>

#include "anticipate/datastore/jsonl.hpp"
#include "anticipate/errors.hpp"

namespace anticipate::datastore {

void validate(const DetectionRecord& r) {
  const std::string where = "detection in video '" + r.video_id + "' segment " + std::to_string(r.segment_idx) +
                            " frame " + std::to_string(r.frame_idx);
  if (!(r.box.x2 > r.box.x1) || !(r.box.y2 > r.box.y1)) throw ValidationError(where + ": box must have x2>x1, y2>y1");
  if (!(r.score >= 0.0 && r.score <= 1.0)) throw ValidationError(where + ": score outside [0, 1]");
  if (r.category_idx < 0) throw ValidationError(where + ": negative category_idx");
  if (r.frame_idx < 0) throw ValidationError(where + ": negative frame_idx");
  if (r.descriptor.pack_id.empty()) throw ValidationError(where + ": empty pack_id");
}

std::vector<DetectionRecord> parse_detections(const std::string& text) {
  std::vector<DetectionRecord> out;
  for_each_json_line(text, [&](const nlohmann::json& row, std::size_t line) {
    DetectionRecord r;
    r.video_id = require_field<std::string>(row, "video_id", line);
    r.segment_idx = require_field<int>(row, "segment_idx", line);
    r.frame_idx = require_field<int>(row, "frame_idx", line);
    auto box = row.find("box");
    if (box == row.end() || !box->is_array() || box->size() != 4) {
      throw ParseError("line " + std::to_string(line) + ": field 'box' must be [x1,y1,x2,y2]");
    }
    for (const auto& v : *box) {
      if (!v.is_number()) throw ParseError("line " + std::to_string(line) + ": box coordinates must be numbers");
    }
    r.box = Box{(*box)[0].get<double>(), (*box)[1].get<double>(), (*box)[2].get<double>(), (*box)[3].get<double>()};
    r.category_idx = require_field<int>(row, "category_idx", line);
    r.score = require_field<double>(row, "score", line);
    r.descriptor.pack_id = require_field<std::string>(row, "pack_id", line);
    const auto pack_row = require_field<long long>(row, "row", line);
    if (pack_row < 0 || pack_row > UINT32_MAX) {
      throw ParseError("line " + std::to_string(line) + ": field 'row' out of range");
    }
    r.descriptor.row = static_cast<std::uint32_t>(pack_row);
    try {
      validate(r);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<DetectionRecord> read_detections(const std::filesystem::path& path) {
  return parse_detections(read_text_file(path));
}

void write_detections(const std::vector<DetectionRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& r : records) {
    nlohmann::ordered_json row;
    row["video_id"] = r.video_id;
    row["segment_idx"] = r.segment_idx;
    row["frame_idx"] = r.frame_idx;
    row["box"] = {r.box.x1, r.box.y1, r.box.x2, r.box.y2};
    row["category_idx"] = r.category_idx;
    row["score"] = r.score;
    row["pack_id"] = r.descriptor.pack_id;
    row["row"] = r.descriptor.row;
    out << row.dump() << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DetectionIndex::DetectionIndex(const std::vector<DetectionRecord>& records) {
  for (const auto& r : records) {
    frames_[Key{r.video_id, r.segment_idx, r.frame_idx}].push_back(r);
    ++count_;
  }
}

const std::vector<DetectionRecord>& DetectionIndex::frame(const std::string& video, int segment, int frame) const {
  static const std::vector<DetectionRecord> kEmpty;
  auto it = frames_.find(Key{video, segment, frame});
  return it == frames_.end() ? kEmpty : it->second;
}

std::map<int, std::vector<DetectionRecord>> DetectionIndex::segment(const std::string& video, int segment) const {
  std::map<int, std::vector<DetectionRecord>> out;
  for (auto it = frames_.lower_bound(Key{video, segment, INT_MIN});
       it != frames_.end() && std::get<0>(it->first) == video && std::get<1>(it->first) == segment; ++it) {
    out.emplace(std::get<2>(it->first), it->second);
  }
  return out;
}

}  // namespace anticipate::datastore
