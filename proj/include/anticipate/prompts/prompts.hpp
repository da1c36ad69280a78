// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "anticipate/datastore/annotations.hpp"

namespace anticipate::prompts {

enum class Strategy { kMostCommon, kKMeans, kFixed, kRandom };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

struct PromptEntry {
  std::string name;
  int category_idx = 0;
};

// Object-category vocabulary. category_idx always equals the position.
struct PromptList {
  std::vector<PromptEntry> entries;
  Strategy strategy = Strategy::kFixed;
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();

  std::size_t size() const noexcept { return entries.size(); }
  std::vector<std::string> names() const;
  // Index of `name` or -1.
  int index_of(const std::string& name) const;
};

// Builds a list from names; duplicate names are a ValidationError.
PromptList make_prompt_list(const std::vector<std::string>& names, Strategy strategy);

using NounCounts = std::map<std::string, long long>;
using EmbeddingTable = std::map<std::string, std::vector<double>>;

NounCounts count_noun_frequencies(const datastore::AnnotationSet& annotations);

// Top-n by count; ties lexicographically ascending.
PromptList build_most_common(const NounCounts& counts, int n);

struct KMeansOptions {
  int max_iters = 100;
  // Independent k-means++ restarts; the lowest final inertia wins.
  int n_init = 4;
};

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  // Inertia after every Lloyd iteration of the winning restart.
  std::vector<double> inertia_history;
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding, Euclidean distance.
KMeansResult kmeans_cluster(const std::vector<std::vector<double>>& vectors, int k, std::uint64_t seed,
                            const KMeansOptions& options = {});

double inertia(const std::vector<std::vector<double>>& vectors, const std::vector<int>& assignments,
               const std::vector<std::vector<double>>& centroids);

// Clusters every counted noun that has an embedding into k groups (k is
// clamped to the number of such nouns), represents each cluster by its most
// frequent member, ranks clusters by summed frequency and keeps the top n.
PromptList build_kmeans_prompts(const NounCounts& counts, const EmbeddingTable& table, int k, int n,
                                std::uint64_t seed, const KMeansOptions& options = {});

// n nouns drawn uniformly without replacement from the counted vocabulary.
PromptList build_random_prompts(const NounCounts& counts, int n, std::uint64_t seed);

// Newline-separated names; blank lines ignored.
PromptList load_fixed_prompts(const std::filesystem::path& path);
PromptList parse_prompt_lines(const std::string& text, Strategy strategy);

void write_prompt_list(const PromptList& list, const std::filesystem::path& path);
PromptList read_prompt_list(const std::filesystem::path& path);

EmbeddingTable read_embedding_table(const std::filesystem::path& path);

}  // namespace anticipate::prompts
