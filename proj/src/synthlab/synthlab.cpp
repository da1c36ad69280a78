// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/synthlab/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "anticipate/datastore/examples.hpp"
#include "anticipate/errors.hpp"
#include "anticipate/numcore/random.hpp"

namespace anticipate::synthlab {

namespace fs = std::filesystem;
using numcore::derive_seed;
using numcore::Rng;

void SynthConfig::validate() const {
  if (n_videos < 2) throw ParameterError("n_videos must be at least 2");
  if (verb_count < 2 || noun_count < 2) throw ParameterError("verb_count and noun_count must be at least 2");
  if (clip_dim < 2 || obj_descriptor_dim < 2) throw ParameterError("clip_dim and obj_descriptor_dim must be at least 2");
  if (observed_segments < 1 || horizon < 1) throw ParameterError("observed_segments and horizon must be positive");
  if (segments_per_video < observed_segments + horizon) {
    throw ParameterError("segments_per_video must be at least observed_segments + horizon");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ParameterError("noise_std must be finite and >= 0");
  if (!(distractor_rate >= 0.0 && distractor_rate <= 1.0)) throw ParameterError("distractor_rate must lie in [0, 1]");
  if (!(dim_video_rate >= 0.0 && dim_video_rate <= 1.0)) throw ParameterError("dim_video_rate must lie in [0, 1]");
  if (planted_per_video < 1 || planted_per_video > noun_count) {
    throw ParameterError("planted_per_video must lie in [1, noun_count]");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ParameterError("val_fraction must lie in (0, 1)");
  if (val_videos() < 1 || train_videos() < 1) throw ParameterError("split leaves an empty train or val set");
  if (!(segment_seconds > 0.0)) throw ParameterError("segment_seconds must be positive");
  if (!(geometry.fps > 0.0) || geometry.width < 16.0 || geometry.height < 16.0) {
    throw ParameterError("geometry needs fps > 0 and frames of at least 16x16 pixels");
  }
}

int SynthConfig::val_videos() const {
  return static_cast<int>(std::lround(val_fraction * static_cast<double>(n_videos)));
}

nlohmann::ordered_json to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["n_videos"] = c.n_videos;
  j["segments_per_video"] = c.segments_per_video;
  j["verb_count"] = c.verb_count;
  j["noun_count"] = c.noun_count;
  j["clip_dim"] = c.clip_dim;
  j["obj_descriptor_dim"] = c.obj_descriptor_dim;
  j["noise_std"] = c.noise_std;
  j["distractor_rate"] = c.distractor_rate;
  j["seed"] = c.seed;
  j["planted_per_video"] = c.planted_per_video;
  j["dim_video_rate"] = c.dim_video_rate;
  j["val_fraction"] = c.val_fraction;
  j["observed_segments"] = c.observed_segments;
  j["horizon"] = c.horizon;
  j["segment_seconds"] = c.segment_seconds;
  j["fps"] = c.geometry.fps;
  j["width"] = c.geometry.width;
  j["height"] = c.geometry.height;
  return j;
}

SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig c) {
  if (!j.is_object()) throw ParameterError("synth config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n_videos") c.n_videos = value.get<int>();
      else if (key == "segments_per_video") c.segments_per_video = value.get<int>();
      else if (key == "verb_count") c.verb_count = value.get<int>();
      else if (key == "noun_count") c.noun_count = value.get<int>();
      else if (key == "clip_dim") c.clip_dim = value.get<int>();
      else if (key == "obj_descriptor_dim") c.obj_descriptor_dim = value.get<int>();
      else if (key == "noise_std") c.noise_std = value.get<double>();
      else if (key == "distractor_rate") c.distractor_rate = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "planted_per_video") c.planted_per_video = value.get<int>();
      else if (key == "dim_video_rate") c.dim_video_rate = value.get<double>();
      else if (key == "val_fraction") c.val_fraction = value.get<double>();
      else if (key == "observed_segments") c.observed_segments = value.get<int>();
      else if (key == "horizon") c.horizon = value.get<int>();
      else if (key == "segment_seconds") c.segment_seconds = value.get<double>();
      else if (key == "fps") c.geometry.fps = value.get<double>();
      else if (key == "width") c.geometry.width = value.get<double>();
      else if (key == "height") c.geometry.height = value.get<double>();
      else throw ParameterError("unknown synth config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("synth config key '" + key + "': " + e.what());
    }
  }
  return c;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string indexed_name(const char* prefix, int i, int width) {
  auto digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return std::string(prefix) + "_" + digits;
}

int digits(int n) { return n <= 1 ? 1 : static_cast<int>(std::to_string(n - 1).size()); }

std::vector<std::vector<double>> embeddings(std::uint64_t seed, int count, int dim) {
  Rng rng(seed);
  std::vector<std::vector<double>> table(static_cast<std::size_t>(count), std::vector<double>(dim));
  for (auto& row : table) {
    for (auto& x : row) x = rng.normal();
  }
  return table;
}

std::vector<float> noisy(const std::vector<double>& base, double sd, Rng& rng) {
  std::vector<float> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    out[i] = static_cast<float>(sd > 0.0 ? base[i] + rng.normal(0.0, sd) : base[i]);
  }
  return out;
}

datastore::Box random_box(Rng& rng, double W, double H) {
  constexpr double kMinSide = 8.0;
  datastore::Box b;
  b.x1 = std::floor(rng.uniform(0.0, W - kMinSide));
  b.x2 = std::floor(rng.uniform(b.x1 + kMinSide, W));
  b.y1 = std::floor(rng.uniform(0.0, H - kMinSide));
  b.y2 = std::floor(rng.uniform(b.y1 + kMinSide, H));
  return b;
}

}  // namespace

void write_split(const Split& split, const fs::path& path) {
  nlohmann::ordered_json j;
  j["train"] = split.train;
  j["val"] = split.val;
  write_text(path, j.dump() + "\n");
}

Split read_split(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("train") || !j.contains("val") || j.size() != 2) {
    throw ValidationError(path.string() + ": split must be {\"train\":[...],\"val\":[...]}");
  }
  Split s;
  try {
    s.train = j["train"].get<std::vector<std::string>>();
    s.val = j["val"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  std::vector<std::string> all = s.train;
  all.insert(all.end(), s.val.begin(), s.val.end());
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw ValidationError(path.string() + ": a video id appears twice in the split");
  }
  return s;
}

Split generate(const SynthConfig& cfg, const fs::path& dir) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  const int V = cfg.verb_count;
  const int N = cfg.noun_count;
  const auto verb_emb = embeddings(derive_seed(cfg.seed, {1}), V, cfg.clip_dim);
  const auto noun_emb = embeddings(derive_seed(cfg.seed, {2}), N, cfg.obj_descriptor_dim);

  // Successor permutation: a single cycle so no verb is a fixed point.
  std::vector<int> order(static_cast<std::size_t>(V));
  std::iota(order.begin(), order.end(), 0);
  {
    Rng rng(derive_seed(cfg.seed, {3}));
    std::shuffle(order.begin(), order.end(), rng.engine());
  }
  std::vector<int> successor(static_cast<std::size_t>(V));
  for (int i = 0; i < V; ++i) successor[order[i]] = order[(i + 1) % V];

  std::vector<std::string> verb_names, noun_names;
  for (int v = 0; v < V; ++v) verb_names.push_back(indexed_name("verb", v, digits(V)));
  for (int n = 0; n < N; ++n) noun_names.push_back(indexed_name("noun", n, digits(N)));

  const double W = cfg.geometry.width;
  const double H = cfg.geometry.height;
  // Segments some example can observe; later ones only ever serve as targets.
  const int observable = cfg.segments_per_video - cfg.horizon;

  datastore::AnnotationSet annotations;
  std::vector<datastore::DetectionRecord> detections;
  std::vector<std::vector<float>> clip_rows, object_rows;
  std::vector<std::string> clip_keys, object_keys;
  Split split;

  for (int vid = 0; vid < cfg.n_videos; ++vid) {
    const std::string video_id = indexed_name("vid", vid, std::max(4, digits(cfg.n_videos)));
    (vid < cfg.train_videos() ? split.train : split.val).push_back(video_id);
    Rng rng(derive_seed(cfg.seed, {4, static_cast<std::uint64_t>(vid)}));

    std::vector<int> nouns(static_cast<std::size_t>(N));
    std::iota(nouns.begin(), nouns.end(), 0);
    std::shuffle(nouns.begin(), nouns.end(), rng.engine());
    std::vector<std::pair<double, int>> planted;  // (base score, category)
    for (int i = 0; i < cfg.planted_per_video; ++i) planted.push_back({rng.uniform(0.6, 1.0), nouns[i]});
    std::sort(planted.begin(), planted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const bool dim = rng.bernoulli(cfg.dim_video_rate);
    std::vector<bool> is_planted(static_cast<std::size_t>(N), false);
    for (const auto& p : planted) is_planted[p.second] = true;

    const int m = cfg.planted_per_video;
    int verb = static_cast<int>(rng.below(static_cast<std::uint64_t>(V)));
    datastore::VideoAnnotations va;
    va.video_id = video_id;
    for (int t = 0; t < cfg.segments_per_video; ++t) {
      // The first predicted segment after the canonical stop carries rank 0.
      const int rank = (((t - cfg.observed_segments) % m) + m) % m;
      datastore::Segment seg;
      seg.segment_idx = t;
      seg.start_s = t * cfg.segment_seconds;
      seg.end_s = (t + 1) * cfg.segment_seconds;
      seg.verb_id = verb;
      seg.noun_id = planted[rank].second;
      seg.verb_name = verb_names[verb];
      seg.noun_name = noun_names[seg.noun_id];
      va.segments.push_back(seg);

      clip_keys.push_back(datastore::clip_key(video_id, t));
      clip_rows.push_back(noisy(verb_emb[verb], cfg.noise_std, rng));

      if (t < observable) {
        const auto [first, last] = tokens::segment_frame_range(seg, cfg.geometry.fps);
        for (int f = first; f <= last; ++f) {
          std::vector<datastore::DetectionRecord> frame;
          auto emit = [&](int category, double score) {
            datastore::DetectionRecord d;
            d.video_id = video_id;
            d.segment_idx = t;
            d.frame_idx = f;
            d.box = random_box(rng, W, H);
            d.category_idx = category;
            d.score = score;
            d.descriptor.pack_id = kObjectPack;
            object_rows.push_back(noisy(noun_emb[category], cfg.noise_std, rng));
            d.descriptor.row = static_cast<std::uint32_t>(object_rows.size() - 1);
            object_keys.push_back(video_id + "/" + std::to_string(f) + "/" + std::to_string(frame.size()));
            frame.push_back(std::move(d));
          };
          for (const auto& [base, category] : planted) {
            emit(category, dim ? 0.31 + (base - 0.6) / 0.4 * 0.23 : base);
          }
          for (int c = 0; c < N; ++c) {
            if (!is_planted[c] && rng.bernoulli(cfg.distractor_rate)) emit(c, rng.uniform(0.0, 0.4));
          }
          std::stable_sort(frame.begin(), frame.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
          for (auto& d : frame) detections.push_back(std::move(d));
        }
      }
      verb = successor[verb];
    }
    annotations.videos.push_back(std::move(va));
  }

  datastore::write_annotations(annotations, dir / "annotations.jsonl");
  datastore::write_detections(detections, dir / "detections.jsonl");
  datastore::write_feature_pack(clip_rows, clip_keys, dir / "clips.fpk");
  datastore::write_feature_pack(object_rows, object_keys, dir / (std::string(kObjectPack) + ".fpk"));
  std::vector<std::vector<float>> emb_rows;
  for (const auto& e : noun_emb) emb_rows.emplace_back(e.begin(), e.end());
  datastore::write_feature_pack(emb_rows, noun_names, dir / "noun_embeddings.fpk");
  auto prompts = prompts::make_prompt_list(noun_names, prompts::Strategy::kFixed);
  prompts.provenance["source"] = "synthlab";
  prompts::write_prompt_list(prompts, dir / "prompts.txt");
  write_split(split, dir / "split.json");
  write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
  return split;
}

Dataset load_dataset(const fs::path& dir) {
  for (const char* name : {"annotations.jsonl", "detections.jsonl", "clips.fpk", "prompts.txt", "split.json"}) {
    if (!fs::exists(dir / name)) throw IoError("missing '" + (dir / name).string() + "'");
  }
  Dataset ds;
  ds.prompts = prompts::read_prompt_list(dir / "prompts.txt");
  datastore::VocabularyLimits limits;
  ds.annotations = datastore::read_annotations(dir / "annotations.jsonl", limits);
  ds.detections = datastore::read_detections(dir / "detections.jsonl");
  ds.store = datastore::FeatureStore::load(dir, ds.detections);
  ds.split = read_split(dir / "split.json");

  for (const auto& d : ds.detections) {
    if (d.category_idx >= static_cast<int>(ds.prompts.size())) {
      throw ValidationError("detection category " + std::to_string(d.category_idx) + " outside the " +
                            std::to_string(ds.prompts.size()) + "-entry prompt list");
    }
    if (!ds.store.resolves(d.descriptor)) {
      throw LinkError("descriptor " + d.descriptor.pack_id + ":" + std::to_string(d.descriptor.row) + " of " +
                      d.video_id + " does not resolve");
    }
    if (!ds.annotations.find(d.video_id)) throw LinkError("detection for unknown video '" + d.video_id + "'");
  }
  for (const auto& list : {ds.split.train, ds.split.val}) {
    for (const auto& id : list) {
      if (!ds.annotations.find(id)) throw LinkError("split names unknown video '" + id + "'");
    }
  }
  return ds;
}

}  // namespace anticipate::synthlab
