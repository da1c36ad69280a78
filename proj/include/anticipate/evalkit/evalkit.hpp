// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "anticipate/datastore/examples.hpp"

namespace anticipate::evalkit {

enum class Field { kVerb, kNoun, kAction };

Field parse_field(std::string_view name);
std::string field_name(Field field);

struct Action {
  int verb = 0;
  int noun = 0;
  friend bool operator==(const Action&, const Action&) = default;
};

using ActionSequence = std::vector<Action>;

// K candidate sequences of Z actions for one example.
struct PredictionSet {
  std::string example_id;
  std::vector<ActionSequence> candidates;
  bool sampled = false;
  double temperature = 1.0;
  std::uint64_t seed = 0;

  std::size_t k() const noexcept { return candidates.size(); }
  std::size_t z() const noexcept { return candidates.empty() ? 0 : candidates.front().size(); }
};

// Throws ValidationError unless K >= 1, every candidate has the same length
// and every id is inside its vocabulary. A negative count skips that check.
void validate(const PredictionSet& preds, int verb_count = -1, int noun_count = -1);

// Candidate 0 is the per-step argmax (lowest index on ties) of verb and noun
// independently. Candidates 1..K-1 draw every step from p^(1/temperature),
// renormalized, using one stream seeded by `seed`.
PredictionSet generate_candidates(const std::vector<std::vector<double>>& verb_probs,
                                  const std::vector<std::vector<double>>& noun_probs, int K, std::uint64_t seed,
                                  double temperature = 1.0);

// Restricted Damerau-Levenshtein (optimal string alignment): insertions,
// deletions, substitutions and transpositions of adjacent symbols, where no
// substring is edited twice. "ca" vs "abc" is 3 here, not 2.
template <typename T>
int damerau_levenshtein(std::span<const T> a, std::span<const T> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      int best = std::min({at(i - 1, j) + 1, at(i, j - 1) + 1, at(i - 1, j - 1) + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) best = std::min(best, at(i - 2, j - 2) + 1);
      at(i, j) = best;
    }
  }
  return at(n, m);
}

template <typename T>
int damerau_levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  return damerau_levenshtein(std::span<const T>(a), std::span<const T>(b));
}

// min over candidates of DL(candidate[:z], gt[:z]) / z. Action steps match
// only when verb and noun both match.
double edit_distance_at_z(const PredictionSet& preds, const ActionSequence& gt, int z, Field field);

// Mean of edit_distance_at_z over z = 1..Z.
double aued(const PredictionSet& preds, const ActionSequence& gt, int Z, Field field);

// Mean over classes present in `gt` of the fraction of that class's frames
// predicted correctly.
double moc(std::span<const int> pred, std::span<const int> gt);

struct Accuracy {
  double top1 = 0.0;
  double class_mean = 0.0;
};

// Classes without ground-truth instances are left out of class_mean.
Accuracy class_mean_accuracy(std::span<const int> pred, std::span<const int> gt, int n_classes);

struct MetricsReport {
  std::size_t examples = 0;
  int K = 0;
  int Z = 0;
  double verb_ed = 0.0;
  double noun_ed = 0.0;
  double action_ed = 0.0;
  double aued_verb = 0.0;
  double aued_noun = 0.0;
  double aued_action = 0.0;
  // Mean ED@z over examples for z = 1..Z.
  std::vector<double> verb_curve;
  std::vector<double> noun_curve;
  std::vector<double> action_curve;
  std::optional<double> moc;
  std::optional<double> top1;
  std::optional<double> class_mean;
};

using GroundTruth = std::map<std::string, ActionSequence>;

GroundTruth ground_truth(const std::vector<datastore::LTAExample>& examples);

// Every prediction set needs a ground-truth entry (LinkError otherwise) of at
// least Z steps. Candidates longer than Z are cut to Z.
MetricsReport evaluate(const std::vector<PredictionSet>& predictions, const GroundTruth& gt, int Z);

nlohmann::ordered_json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

// predictions.jsonl: {"example_id": ..., "candidates": [[[verb, noun], ...], ...]}
void write_predictions(const std::filesystem::path& path, const std::vector<PredictionSet>& predictions);
std::vector<PredictionSet> parse_predictions(const std::string& text);
std::vector<PredictionSet> read_predictions(const std::filesystem::path& path);

void write_report(const std::filesystem::path& path, const MetricsReport& report);
MetricsReport read_report(const std::filesystem::path& path);

// One row per step: z,verb_ed,noun_ed,action_ed with 17 significant digits.
void write_step_curve(const std::filesystem::path& path, const MetricsReport& report);

struct StepRow {
  int z = 0;
  double verb_ed = 0.0;
  double noun_ed = 0.0;
  double action_ed = 0.0;
};
std::vector<StepRow> read_step_curve(const std::filesystem::path& path);

}  // namespace anticipate::evalkit
