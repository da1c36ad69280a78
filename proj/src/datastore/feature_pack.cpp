// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/datastore/feature_pack.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "anticipate/errors.hpp"

namespace anticipate::datastore {

namespace {

constexpr char kMagic[4] = {'F', 'P', 'K', '1'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw LengthError("feature pack truncated while reading " + std::string(what) + " at byte " +
                        std::to_string(pos_));
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

FeaturePack::FeaturePack(std::uint32_t dim, std::vector<float> values, std::vector<IndexEntry> index)
    : dim_(dim), values_(std::move(values)), index_(std::move(index)) {
  if (dim_ == 0 && !values_.empty()) throw DimensionError("feature pack with dim 0 cannot hold values");
  if (dim_ != 0 && values_.size() % dim_ != 0) {
    throw DimensionError("feature pack value count " + std::to_string(values_.size()) + " not divisible by dim " +
                         std::to_string(dim_));
  }
  for (const auto& e : index_) {
    if (e.row >= row_count()) {
      throw IndexError("index key '" + e.key + "' points at row " + std::to_string(e.row) + " of " +
                       std::to_string(row_count()));
    }
    if (e.key.size() > UINT16_MAX) throw ParameterError("index key longer than 65535 bytes");
    if (!lookup_.emplace(e.key, e.row).second) throw ValidationError("duplicate feature pack key '" + e.key + "'");
  }
}

FeaturePack FeaturePack::from_rows(const std::vector<std::vector<float>>& rows, const std::vector<std::string>& keys) {
  if (rows.size() != keys.size()) {
    throw DimensionError("feature pack has " + std::to_string(rows.size()) + " rows but " +
                         std::to_string(keys.size()) + " keys");
  }
  const std::uint32_t dim = rows.empty() ? 0 : static_cast<std::uint32_t>(rows.front().size());
  std::vector<float> values;
  values.reserve(rows.size() * dim);
  std::vector<IndexEntry> index;
  index.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != dim) {
      throw DimensionError("row " + std::to_string(r) + " has dim " + std::to_string(rows[r].size()) +
                           ", expected " + std::to_string(dim));
    }
    values.insert(values.end(), rows[r].begin(), rows[r].end());
    index.push_back({keys[r], static_cast<std::uint32_t>(r)});
  }
  return FeaturePack(dim, std::move(values), std::move(index));
}

std::span<const float> FeaturePack::row(std::uint32_t r) const {
  if (r >= row_count()) {
    throw IndexError("row " + std::to_string(r) + " out of range for pack with " + std::to_string(row_count()) +
                     " rows");
  }
  return {values_.data() + static_cast<std::size_t>(r) * dim_, dim_};
}

std::optional<std::uint32_t> FeaturePack::find(const std::string& key) const {
  auto it = lookup_.find(key);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> FeaturePack::row(const std::string& key) const {
  auto r = find(key);
  if (!r) throw LinkError("key '" + key + "' not found in feature pack");
  return row(*r);
}

std::vector<std::uint8_t> encode_feature_pack(const FeaturePack& pack) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + pack.values().size() * 4 + 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, pack.row_count());
  put_u32(out, pack.dim());
  put_u32(out, FeaturePack::kDtypeF32);
  for (float v : pack.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(pack.index().size()));
  for (const auto& e : pack.index()) {
    put_u16(out, static_cast<std::uint16_t>(e.key.size()));
    out.insert(out.end(), e.key.begin(), e.key.end());
    put_u32(out, e.row);
  }
  return out;
}

FeaturePack decode_feature_pack(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a feature pack (bad magic)");
  }
  Reader in(bytes.subspan(4));
  const auto rows = in.u32("row_count");
  const auto dim = in.u32("dim");
  const auto dtype = in.u32("dtype");
  if (dtype != FeaturePack::kDtypeF32) throw FormatError("unsupported feature pack dtype " + std::to_string(dtype));
  if (rows != 0 && dim == 0) throw FormatError("feature pack has rows but dim 0");
  const std::size_t count = static_cast<std::size_t>(rows) * dim;
  if (count > in.remaining() / 4) {
    throw LengthError("feature pack truncated: header declares " + std::to_string(rows) + "x" + std::to_string(dim) +
                      " values");
  }
  auto raw = in.take(count * 4, "values");
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[i * 4 + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  const auto entries = in.u32("index entry count");
  std::vector<FeaturePack::IndexEntry> index;
  for (std::uint32_t e = 0; e < entries; ++e) {
    const auto len = in.u16("index key length");
    auto key = in.take(len, "index key");
    const auto row = in.u32("index row");
    index.push_back({std::string(key.begin(), key.end()), row});
  }
  if (in.remaining() != 0) {
    throw LengthError("feature pack has " + std::to_string(in.remaining()) + " trailing bytes");
  }
  try {
    return FeaturePack(dim, std::move(values), std::move(index));
  } catch (const IndexError& e) {
    throw FormatError(e.what());
  }
}

void write_feature_pack(const FeaturePack& pack, const std::filesystem::path& path) {
  const auto bytes = encode_feature_pack(pack);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_feature_pack(const std::vector<std::vector<float>>& rows, const std::vector<std::string>& keys,
                        const std::filesystem::path& path) {
  write_feature_pack(FeaturePack::from_rows(rows, keys), path);
}

FeaturePack read_feature_pack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_feature_pack(bytes);
  } catch (const DataError& e) {
    // Re-throw with the path for context, keeping the error family.
    const std::string msg = path.string() + ": " + e.what();
    if (dynamic_cast<const LengthError*>(&e)) throw LengthError(msg);
    if (dynamic_cast<const FormatError*>(&e)) throw FormatError(msg);
    if (dynamic_cast<const ValidationError*>(&e)) throw ValidationError(msg);
    throw;
  }
}

std::string clip_key(const std::string& video_id, int segment_idx) {
  return video_id + "/" + std::to_string(segment_idx);
}

FeatureStore::FeatureStore(FeaturePack clips, std::map<std::string, FeaturePack> object_packs)
    : clips_(std::move(clips)), objects_(std::move(object_packs)) {}

FeatureStore FeatureStore::load(const std::filesystem::path& dir, const std::vector<DetectionRecord>& detections,
                                const std::string& clip_pack) {
  std::set<std::string> ids;
  for (const auto& d : detections) ids.insert(d.descriptor.pack_id);
  std::map<std::string, FeaturePack> packs;
  for (const auto& id : ids) {
    const auto path = dir / (id + ".fpk");
    if (!std::filesystem::exists(path)) throw LinkError("descriptor pack '" + path.string() + "' does not exist");
    packs.emplace(id, read_feature_pack(path));
  }
  return FeatureStore(read_feature_pack(dir / (clip_pack + ".fpk")), std::move(packs));
}

std::span<const float> FeatureStore::clip(const std::string& key) const {
  auto r = clips_.find(key);
  if (!r) throw LinkError("clip descriptor '" + key + "' not found");
  return clips_.row(*r);
}

bool FeatureStore::resolves(const DescriptorRef& ref) const {
  auto it = objects_.find(ref.pack_id);
  return it != objects_.end() && ref.row < it->second.row_count();
}

std::span<const float> FeatureStore::descriptor(const DescriptorRef& ref) const {
  auto it = objects_.find(ref.pack_id);
  if (it == objects_.end()) throw LinkError("descriptor pack '" + ref.pack_id + "' not loaded");
  if (ref.row >= it->second.row_count()) {
    throw LinkError("descriptor row " + std::to_string(ref.row) + " out of range in pack '" + ref.pack_id + "'");
  }
  return it->second.row(ref.row);
}

std::uint32_t FeatureStore::descriptor_dim() const {
  std::uint32_t dim = 0;
  for (const auto& [id, pack] : objects_) {
    if (pack.row_count() == 0) continue;
    if (dim != 0 && pack.dim() != dim) {
      throw DimensionError("descriptor pack '" + id + "' has dim " + std::to_string(pack.dim()) + ", others have " +
                           std::to_string(dim));
    }
    dim = pack.dim();
  }
  return dim;
}

}  // namespace anticipate::datastore
