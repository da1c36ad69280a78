// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/rollout/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "anticipate/errors.hpp"

namespace anticipate::rollout {

namespace {

using Matrix = std::vector<double>;

Matrix mixed_layer(const numcore::Tensor<double>& attn, std::size_t layer, std::span<const std::uint8_t> masked,
                   const RolloutOptions& options) {
  const auto& shape = attn.shape();
  const std::size_t heads = shape[0];
  const std::size_t L = shape[1];
  Matrix a(L * L, 0.0);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < L; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < L; ++j) {
        const double v = attn.data()[(h * L + i) * L + j];
        if (!std::isfinite(v) || v < -1e-12) {
          throw ValidationError("layer " + std::to_string(layer) + " head " + std::to_string(h) +
                                ": negative or non-finite attention");
        }
        if (!masked.empty() && masked[j] != 0) {
          if (v > 1e-4) {
            throw ValidationError("layer " + std::to_string(layer) + " head " + std::to_string(h) +
                                  ": attention on masked key " + std::to_string(j));
          }
          continue;
        }
        sum += v;
        auto& cell = a[i * L + j];
        if (options.heads == HeadAggregation::kMean) {
          cell += v / static_cast<double>(heads);
        } else {
          cell = h == 0 ? v : std::max(cell, v);
        }
      }
      if (std::abs(sum - 1.0) > 1e-4) {
        throw ValidationError("layer " + std::to_string(layer) + " head " + std::to_string(h) + " row " +
                              std::to_string(i) + " sums to " + std::to_string(sum));
      }
    }
  }
  const double r = options.residual;
  for (std::size_t i = 0; i < L; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      auto& cell = a[i * L + j];
      cell *= 1.0 - r;
      if (i == j) cell += r;
      if (!masked.empty() && masked[j] != 0) cell = 0.0;
      sum += cell;
    }
    if (!(sum > 0.0)) throw ValidationError("row " + std::to_string(i) + " has no unmasked weight");
    for (std::size_t j = 0; j < L; ++j) a[i * L + j] /= sum;
  }
  return a;
}

Matrix multiply(const Matrix& a, const Matrix& b, std::size_t L) {
  Matrix c(L * L, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t k = 0; k < L; ++k) {
      const double aik = a[i * L + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < L; ++j) c[i * L + j] += aik * b[k * L + j];
    }
  }
  return c;
}

}  // namespace

RolloutMap attention_rollout(std::span<const numcore::Tensor<double>> layers, std::span<const std::uint8_t> masked,
                             const RolloutOptions& options) {
  if (layers.empty()) throw ParameterError("attention_rollout needs at least one layer");
  if (!(options.residual >= 0.0 && options.residual <= 1.0)) throw ParameterError("residual must lie in [0, 1]");
  const auto& first = layers.front().shape();
  if (first.size() != 3 || first[1] != first[2] || first[0] == 0) {
    throw DimensionError("attention maps must be [heads, L, L], got " + numcore::shape_to_string(first));
  }
  const std::size_t L = first[1];
  if (!masked.empty() && masked.size() != L) {
    throw DimensionError("mask has " + std::to_string(masked.size()) + " entries for " + std::to_string(L) + " tokens");
  }
  RolloutMap map;
  map.size = L;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& s = layers[l].shape();
    if (s.size() != 3 || s[1] != L || s[2] != L) {
      throw DimensionError("layer " + std::to_string(l) + " has shape " + numcore::shape_to_string(s));
    }
    auto a = mixed_layer(layers[l], l, masked, options);
    map.weights = l == 0 ? std::move(a) : multiply(a, map.weights, L);
  }
  return map;
}

template <typename T>
RolloutMap rollout_branch(const pte::BranchOutput<T>& branch, const pte::SequenceInput<T>& input,
                          const RolloutOptions& options) {
  if (branch.attentions.empty()) throw ParameterError("branch carries no attention maps (keep_attention was off)");
  std::vector<numcore::Tensor<double>> layers;
  for (const auto& a : branch.attentions) layers.push_back(a.template cast<double>());
  auto map = attention_rollout(layers, branch.layout.masked, options);
  map.layout = branch.layout;
  map.object_meta = input.object_meta;
  return map;
}

template RolloutMap rollout_branch<float>(const pte::BranchOutput<float>&, const pte::SequenceInput<float>&,
                                          const RolloutOptions&);
template RolloutMap rollout_branch<double>(const pte::BranchOutput<double>&, const pte::SequenceInput<double>&,
                                           const RolloutOptions&);

namespace {

std::size_t prediction_row(const RolloutMap& map, int z) {
  if (map.layout.size() != map.size) throw ParameterError("rollout map has no token layout");
  int seen = 0;
  for (std::size_t t = 0; t < map.layout.size(); ++t) {
    if (map.layout.tokens[t].kind != pte::TokenKind::kPrediction) continue;
    if (seen == z) return t;
    ++seen;
  }
  throw ParameterError("prediction step " + std::to_string(z) + " outside [0, " + std::to_string(seen) + ")");
}

const tokens::TokenMeta& meta_of(const RolloutMap& map, std::size_t t) {
  const auto idx = map.layout.tokens[t].object;
  if (idx < 0 || static_cast<std::size_t>(idx) >= map.object_meta.size()) {
    throw IndexError("object token " + std::to_string(t) + " has no metadata");
  }
  return map.object_meta[static_cast<std::size_t>(idx)];
}

}  // namespace

std::vector<ObjectWeight> top_objects(const RolloutMap& map, int z, int k, const TopObjectsOptions& options) {
  if (k < 1) throw ParameterError("k must be at least 1");
  if (z < 0) throw ParameterError("prediction step must be non-negative");
  const auto row = map.row(prediction_row(map, z));
  std::vector<std::pair<ObjectWeight, std::tuple<int, int, int>>> found;
  for (std::size_t t = 0; t < map.size; ++t) {
    if (map.layout.tokens[t].kind != pte::TokenKind::kObject) continue;
    const auto& m = meta_of(map, t);
    if (m.whole_frame && !options.include_whole_frame) continue;
    if ((m.null || map.layout.masked[t] != 0) && !options.include_null) continue;
    if (!(row[t] > 0.0)) continue;
    found.push_back({{m.segment_idx, m.frame_idx, m.object_slot, row[t], t}, {m.segment, m.frame_slot, m.object_slot}});
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.first.weight != b.first.weight) return a.first.weight > b.first.weight;
    return a.second < b.second;
  });
  std::vector<ObjectWeight> out;
  for (std::size_t i = 0; i < found.size() && i < static_cast<std::size_t>(k); ++i) out.push_back(found[i].first);
  return out;
}

void export_heatmap(const RolloutMap& map, const std::vector<int>& steps, const std::filesystem::path& csv_path,
                    const std::optional<std::filesystem::path>& pgm_path) {
  std::vector<std::size_t> objects;
  for (std::size_t t = 0; t < map.layout.size(); ++t) {
    if (map.layout.tokens[t].kind == pte::TokenKind::kObject) objects.push_back(t);
  }
  std::vector<std::vector<double>> blocks;
  std::string text = "step,segment_idx,frame_idx,object_slot,weight\n";
  char buf[160];
  for (int z : steps) {
    const auto row = map.row(prediction_row(map, z));
    double total = 0.0;
    for (auto t : objects) total += row[t];
    std::vector<double> w;
    for (auto t : objects) {
      const auto& m = meta_of(map, t);
      const double v = total > 0.0 ? row[t] / total : 0.0;
      w.push_back(v);
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.17g\n", z, m.segment_idx, m.frame_idx, m.object_slot, v);
      text += buf;
    }
    blocks.push_back(std::move(w));
  }
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + csv_path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + csv_path.string() + "'");
  }
  if (!pgm_path) return;

  int n_obj = 1;
  for (auto t : objects) n_obj = std::max(n_obj, meta_of(map, t).object_slot + 1);
  const std::size_t frames = objects.empty() ? 0 : (objects.size() + static_cast<std::size_t>(n_obj) - 1) / n_obj;
  double peak = 0.0;
  for (const auto& b : blocks) {
    for (double v : b) peak = std::max(peak, v);
  }
  std::string img = "P2\n" + std::to_string(n_obj) + " " + std::to_string(frames * blocks.size()) + "\n255\n";
  for (const auto& b : blocks) {
    for (std::size_t f = 0; f < frames; ++f) {
      for (int o = 0; o < n_obj; ++o) {
        const std::size_t i = f * static_cast<std::size_t>(n_obj) + static_cast<std::size_t>(o);
        const double v = i < b.size() && peak > 0.0 ? b[i] / peak : 0.0;
        img += std::to_string(static_cast<int>(std::lround(v * 255.0)));
        img += o + 1 == n_obj ? '\n' : ' ';
      }
    }
  }
  std::ofstream out(*pgm_path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + pgm_path->string() + "' for writing");
  out << img;
  if (!out) throw IoError("failed writing '" + pgm_path->string() + "'");
}

}  // namespace anticipate::rollout
