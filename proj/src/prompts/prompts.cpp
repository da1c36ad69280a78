// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/prompts/prompts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "anticipate/datastore/feature_pack.hpp"
#include "anticipate/datastore/jsonl.hpp"
#include "anticipate/errors.hpp"
#include "anticipate/numcore/random.hpp"

namespace anticipate::prompts {

Strategy parse_strategy(const std::string& name) {
  if (name == "most_common") return Strategy::kMostCommon;
  if (name == "kmeans") return Strategy::kKMeans;
  if (name == "fixed") return Strategy::kFixed;
  if (name == "random") return Strategy::kRandom;
  throw ParameterError("unknown prompt strategy '" + name + "' (expected most_common|kmeans|fixed|random)");
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kMostCommon: return "most_common";
    case Strategy::kKMeans: return "kmeans";
    case Strategy::kFixed: return "fixed";
    case Strategy::kRandom: return "random";
  }
  return "fixed";
}

std::vector<std::string> PromptList::names() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.name);
  return out;
}

int PromptList::index_of(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e.category_idx;
  }
  return -1;
}

PromptList make_prompt_list(const std::vector<std::string>& names, Strategy strategy) {
  PromptList list;
  list.strategy = strategy;
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) throw ValidationError("duplicate prompt name '" + name + "'");
    list.entries.push_back({name, static_cast<int>(list.entries.size())});
  }
  return list;
}

NounCounts count_noun_frequencies(const datastore::AnnotationSet& annotations) {
  NounCounts counts;
  for (const auto& v : annotations.videos) {
    for (const auto& s : v.segments) ++counts[s.noun_name];
  }
  return counts;
}

namespace {

// Count descending, then name ascending.
std::vector<std::pair<std::string, long long>> ranked(const NounCounts& counts) {
  std::vector<std::pair<std::string, long long>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return items;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// k-means++ seeding: first centre uniform, the rest proportional to squared
// distance from the nearest chosen centre.
std::vector<std::vector<double>> seed_centroids(const std::vector<std::vector<double>>& x, int k,
                                                numcore::Rng& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.push_back(x[rng.below(x.size())]);
  std::vector<double> d2(x.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(x[i], centroids.back()));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = x.size() - 1;
      for (std::size_t i = 0; i < x.size(); ++i) {
        acc += d2[i];
        if (r < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(x.size());
    }
    centroids.push_back(x[pick]);
  }
  return centroids;
}

int nearest(const std::vector<double>& p, const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_d = squared_distance(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KMeansResult lloyd(const std::vector<std::vector<double>>& x, std::vector<std::vector<double>> centroids,
                   int max_iters) {
  KMeansResult res;
  const std::size_t dim = x.front().size();
  res.assignments.assign(x.size(), -1);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int c = nearest(x[i], centroids);
      if (c != res.assignments[i]) {
        res.assignments[i] = c;
        changed = true;
      }
    }
    // Empty clusters keep their previous centre.
    std::vector<std::vector<double>> sums(centroids.size(), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(centroids.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto& s = sums[res.assignments[i]];
      for (std::size_t d = 0; d < dim; ++d) s[d] += x[i][d];
      ++sizes[res.assignments[i]];
    }
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (sizes[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
    }
    res.iterations = it + 1;
    res.inertia_history.push_back(inertia(x, res.assignments, centroids));
    const auto n = res.inertia_history.size();
    if (n >= 2 && res.inertia_history[n - 1] > res.inertia_history[n - 2] * (1 + 1e-12) + 1e-300) {
      throw NumericError("k-means inertia increased between iterations");
    }
    if (!changed) break;
  }
  res.centroids = std::move(centroids);
  res.inertia = res.inertia_history.back();
  return res;
}

}  // namespace

double inertia(const std::vector<std::vector<double>>& vectors, const std::vector<int>& assignments,
               const std::vector<std::vector<double>>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) total += squared_distance(vectors[i], centroids[assignments[i]]);
  return total;
}

PromptList build_most_common(const NounCounts& counts, int n) {
  if (n < 1) throw ParameterError("prompt count n must be >= 1");
  auto items = ranked(counts);
  std::vector<std::string> names;
  nlohmann::ordered_json kept = nlohmann::ordered_json::object();
  for (const auto& [name, count] : items) {
    if (static_cast<int>(names.size()) == n) break;
    names.push_back(name);
    kept[name] = count;
  }
  auto list = make_prompt_list(names, Strategy::kMostCommon);
  list.provenance["n"] = n;
  list.provenance["vocabulary_size"] = counts.size();
  list.provenance["counts"] = kept;
  return list;
}

KMeansResult kmeans_cluster(const std::vector<std::vector<double>>& vectors, int k, std::uint64_t seed,
                            const KMeansOptions& options) {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (static_cast<std::size_t>(k) > vectors.size()) {
    throw ParameterError("k=" + std::to_string(k) + " exceeds the number of vectors (" +
                         std::to_string(vectors.size()) + ")");
  }
  if (options.max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (options.n_init < 1) throw ParameterError("n_init must be >= 1");
  const auto dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw DimensionError("k-means vectors must share one dimension");
  }
  KMeansResult best;
  for (int r = 0; r < options.n_init; ++r) {
    numcore::Rng rng(numcore::derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    auto res = lloyd(vectors, seed_centroids(vectors, k, rng), options.max_iters);
    if (r == 0 || res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

PromptList build_kmeans_prompts(const NounCounts& counts, const EmbeddingTable& table, int k, int n,
                                std::uint64_t seed, const KMeansOptions& options) {
  if (counts.empty()) throw ParameterError("k-means prompts need at least one counted noun");
  if (n < 1) throw ParameterError("prompt count n must be >= 1");
  std::vector<std::string> nouns;
  std::vector<std::vector<double>> vectors;
  std::vector<std::string> missing;
  for (const auto& [name, count] : counts) {
    auto it = table.find(name);
    if (it == table.end()) {
      missing.push_back(name);
      continue;
    }
    nouns.push_back(name);
    vectors.push_back(it->second);
  }
  if (nouns.empty()) throw ParameterError("no counted noun has an embedding");
  const int k_used = std::clamp(k, 1, static_cast<int>(nouns.size()));
  auto km = kmeans_cluster(vectors, k_used, seed, options);

  struct Cluster {
    std::string representative;
    long long rep_count = -1;
    long long total = 0;
    std::vector<std::string> members;
  };
  std::vector<Cluster> clusters(k_used);
  for (std::size_t i = 0; i < nouns.size(); ++i) {
    auto& c = clusters[km.assignments[i]];
    const long long cnt = counts.at(nouns[i]);
    c.members.push_back(nouns[i]);
    c.total += cnt;
    // nouns are visited in ascending order, so strict > keeps the smaller name on ties
    if (cnt > c.rep_count) {
      c.rep_count = cnt;
      c.representative = nouns[i];
    }
  }
  std::erase_if(clusters, [](const Cluster& c) { return c.members.empty(); });
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.total != b.total) return a.total > b.total;
    return a.representative < b.representative;
  });
  std::vector<std::string> names;
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (const auto& c : clusters) {
    if (static_cast<int>(names.size()) < n) names.push_back(c.representative);
    summary.push_back({{"representative", c.representative}, {"total", c.total}, {"members", c.members}});
  }
  auto list = make_prompt_list(names, Strategy::kKMeans);
  list.provenance["n"] = n;
  list.provenance["k_requested"] = k;
  list.provenance["k"] = k_used;
  list.provenance["seed"] = seed;
  list.provenance["inertia"] = km.inertia;
  list.provenance["missing_embeddings"] = missing;
  list.provenance["clusters"] = summary;
  return list;
}

PromptList build_random_prompts(const NounCounts& counts, int n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("prompt count n must be >= 1");
  std::vector<std::string> pool;
  for (const auto& [name, count] : counts) pool.push_back(name);
  numcore::Rng rng(seed);
  // Partial Fisher-Yates.
  const std::size_t take = std::min<std::size_t>(n, pool.size());
  for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(take);
  auto list = make_prompt_list(pool, Strategy::kRandom);
  list.provenance["n"] = n;
  list.provenance["seed"] = seed;
  return list;
}

PromptList parse_prompt_lines(const std::string& text, Strategy strategy) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    names.push_back(line.substr(first, last - first + 1));
  }
  return make_prompt_list(names, strategy);
}

PromptList load_fixed_prompts(const std::filesystem::path& path) {
  auto list = parse_prompt_lines(datastore::read_text_file(path), Strategy::kFixed);
  list.provenance["source"] = path.filename().string();
  return list;
}

namespace {

std::filesystem::path meta_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".meta.json";
  return p;
}

}  // namespace

void write_prompt_list(const PromptList& list, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const auto& e : list.entries) out << e.name << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }
  nlohmann::ordered_json meta;
  meta["strategy"] = strategy_name(list.strategy);
  meta["size"] = list.size();
  meta["provenance"] = list.provenance;
  std::ofstream out(meta_path(path), std::ios::binary);
  if (!out) throw IoError("cannot open '" + meta_path(path).string() + "' for writing");
  out << meta.dump(2) << '\n';
}

PromptList read_prompt_list(const std::filesystem::path& path) {
  auto list = parse_prompt_lines(datastore::read_text_file(path), Strategy::kFixed);
  const auto meta = meta_path(path);
  if (std::filesystem::exists(meta)) {
    try {
      auto j = nlohmann::ordered_json::parse(datastore::read_text_file(meta));
      list.strategy = parse_strategy(j.at("strategy").get<std::string>());
      if (j.contains("provenance")) list.provenance = j["provenance"];
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(meta.string() + ": " + e.what());
    }
  }
  return list;
}

EmbeddingTable read_embedding_table(const std::filesystem::path& path) {
  auto pack = datastore::read_feature_pack(path);
  EmbeddingTable table;
  for (const auto& e : pack.index()) {
    auto row = pack.row(e.row);
    std::vector<double> v(row.begin(), row.end());
    for (double x : v) {
      if (!std::isfinite(x)) throw ValidationError("embedding for '" + e.key + "' is not finite");
    }
    table.emplace(e.key, std::move(v));
  }
  return table;
}

}  // namespace anticipate::prompts
