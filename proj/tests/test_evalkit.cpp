// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "anticipate/errors.hpp"
#include "anticipate/evalkit/evalkit.hpp"
#include "anticipate/numcore/random.hpp"
#include "test_util.hpp"

namespace {

using namespace anticipate;
using namespace anticipate::evalkit;

// Recursive definition of the optimal-string-alignment distance, no table.
int osa_recursive(const std::vector<int>& a, const std::vector<int>& b, std::size_t i, std::size_t j) {
  if (i == 0) return static_cast<int>(j);
  if (j == 0) return static_cast<int>(i);
  int best = std::min(osa_recursive(a, b, i - 1, j) + 1, osa_recursive(a, b, i, j - 1) + 1);
  best = std::min(best, osa_recursive(a, b, i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1));
  if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
    best = std::min(best, osa_recursive(a, b, i - 2, j - 2) + 1);
  }
  return best;
}

int osa_oracle(const std::vector<int>& a, const std::vector<int>& b) { return osa_recursive(a, b, a.size(), b.size()); }

std::vector<std::vector<int>> all_sequences(int max_len, int alphabet) {
  std::vector<std::vector<int>> out{{}};
  std::vector<std::vector<int>> frontier{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& s : frontier) {
      for (int c = 0; c < alphabet; ++c) {
        auto t = s;
        t.push_back(c);
        next.push_back(t);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

ActionSequence seq(std::initializer_list<Action> a) { return ActionSequence(a); }

ActionSequence random_sequence(numcore::Rng& rng, int Z, int vocab) {
  ActionSequence s(static_cast<std::size_t>(Z));
  for (auto& a : s) a = {static_cast<int>(rng.below(vocab)), static_cast<int>(rng.below(vocab))};
  return s;
}

TEST(DamerauLevenshtein, Examples) {
  EXPECT_EQ(damerau_levenshtein<int>({1, 2, 3}, {1, 2, 3}), 0);
  EXPECT_EQ(damerau_levenshtein<int>({0, 1, 2}, {0, 2, 1}), 1);
  EXPECT_EQ(damerau_levenshtein<int>({0, 1}, {2, 3, 4}), 3);
  EXPECT_EQ(damerau_levenshtein<int>({}, {1, 2}), 2);
  // Restricted variant: "ca" -> "abc" needs 3, the unrestricted distance is 2.
  EXPECT_EQ(damerau_levenshtein<int>({2, 0}, {0, 1, 2}), 3);
}

TEST(DamerauLevenshtein, ExhaustiveRecursiveOracle) {
  const auto all = all_sequences(4, 3);
  ASSERT_EQ(all.size(), 121u);
  std::size_t pairs = 0;
  for (const auto& a : all) {
    for (const auto& b : all) {
      const int d = damerau_levenshtein(a, b);
      ASSERT_EQ(d, osa_oracle(a, b));
      ASSERT_EQ(d, damerau_levenshtein(b, a));
      ASSERT_EQ(d == 0, a == b);
      ASSERT_LE(d, static_cast<int>(std::max(a.size(), b.size())));
      ++pairs;
    }
  }
  EXPECT_EQ(pairs, 121u * 121u);
}

TEST(EditDistance, Examples) {
  const auto gt = seq({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  PredictionSet exact{"e", {seq({{9, 9}, {9, 9}, {9, 9}, {9, 9}}), gt}};
  EXPECT_EQ(edit_distance_at_z(exact, gt, 4, Field::kAction), 0.0);

  PredictionSet wrong{"w", {seq({{5, 5}, {6, 6}, {7, 7}, {8, 8}})}};
  EXPECT_EQ(edit_distance_at_z(wrong, gt, 4, Field::kVerb), 1.0);

  // Distances 2 and 1 at z = 4.
  PredictionSet two{"t", {seq({{5, 0}, {6, 0}, {2, 0}, {3, 0}}), seq({{0, 0}, {1, 0}, {2, 0}, {7, 0}})}};
  EXPECT_EQ(edit_distance_at_z(two, gt, 4, Field::kVerb), 0.25);

  EXPECT_THROW(edit_distance_at_z(two, gt, 0, Field::kVerb), ParameterError);
  EXPECT_THROW(edit_distance_at_z(two, gt, 5, Field::kVerb), ParameterError);
}

TEST(EditDistance, AddingCandidatesNeverRaisesMin) {
  numcore::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gt = random_sequence(rng, 8, 3);
    PredictionSet p{"x", {random_sequence(rng, 8, 3)}};
    double prev = edit_distance_at_z(p, gt, 8, Field::kNoun);
    for (int k = 0; k < 4; ++k) {
      p.candidates.push_back(random_sequence(rng, 8, 3));
      const double now = edit_distance_at_z(p, gt, 8, Field::kNoun);
      ASSERT_LE(now, prev);
      prev = now;
    }
  }
}

TEST(EditDistance, ActionAtLeastEachField) {
  numcore::Rng rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const auto gt = random_sequence(rng, 6, 3);
    PredictionSet p{"x", {random_sequence(rng, 6, 3)}};
    const double action = edit_distance_at_z(p, gt, 6, Field::kAction);
    ASSERT_GE(action, edit_distance_at_z(p, gt, 6, Field::kVerb));
    ASSERT_GE(action, edit_distance_at_z(p, gt, 6, Field::kNoun));
  }
}

// Independent recomputation: explicit prefixes, recursive distance, min, divide.
double recompute_ed(const PredictionSet& p, const ActionSequence& gt, int z, Field field) {
  auto key = [&](const Action& a) {
    switch (field) {
      case Field::kVerb: return a.verb;
      case Field::kNoun: return a.noun;
      case Field::kAction: return a.verb * 1000 + a.noun;
    }
    return 0;
  };
  std::vector<int> g;
  for (int i = 0; i < z; ++i) g.push_back(key(gt[i]));
  int best = 1 << 30;
  for (const auto& c : p.candidates) {
    std::vector<int> s;
    for (int i = 0; i < z; ++i) s.push_back(key(c[i]));
    best = std::min(best, osa_oracle(s, g));
  }
  return static_cast<double>(best) / z;
}

TEST(EditDistance, RandomPredictionSetsMatchRecompute) {
  numcore::Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const int Z = 1 + static_cast<int>(rng.below(6));
    const int K = 1 + static_cast<int>(rng.below(5));
    const auto gt = random_sequence(rng, Z, 3);
    PredictionSet p{"x", {}};
    for (int k = 0; k < K; ++k) p.candidates.push_back(random_sequence(rng, Z, 3));
    for (Field f : {Field::kVerb, Field::kNoun, Field::kAction}) {
      double sum = 0.0;
      for (int z = 1; z <= Z; ++z) {
        const double expect = recompute_ed(p, gt, z, f);
        ASSERT_EQ(edit_distance_at_z(p, gt, z, f), expect);
        sum += expect;
      }
      ASSERT_NEAR(aued(p, gt, Z, f), sum / Z, 1e-15);
    }
  }
}

TEST(Aued, Examples) {
  const auto gt = seq({{0, 0}, {1, 1}, {2, 2}});
  PredictionSet perfect{"p", {gt}};
  EXPECT_EQ(aued(perfect, gt, 3, Field::kAction), 0.0);
  PredictionSet other{"o", {seq({{1, 0}, {1, 1}, {0, 2}})}};
  EXPECT_EQ(aued(other, gt, 1, Field::kVerb), edit_distance_at_z(other, gt, 1, Field::kVerb));
}

TEST(Moc, Examples) {
  const std::vector<int> a{0, 0, 1, 1};
  EXPECT_EQ(moc(a, a), 1.0);
  const std::vector<int> pred{0, 0, 7, 7};
  EXPECT_EQ(moc(pred, a), 0.5);
  const std::vector<int> one{3, 3, 3, 3};
  const std::vector<int> half{3, 0, 3, 0};
  EXPECT_EQ(moc(half, one), 0.5);
  EXPECT_THROW(moc(std::vector<int>{}, std::vector<int>{}), ParameterError);
  EXPECT_THROW(moc(std::vector<int>{1}, a), DimensionError);
}

TEST(ClassMeanAccuracy, Examples) {
  const std::vector<int> gt{0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
  auto all = class_mean_accuracy(gt, gt, 3);
  EXPECT_EQ(all.top1, 1.0);
  EXPECT_EQ(all.class_mean, 1.0);
  std::vector<int> pred(10, 0);
  auto imbalanced = class_mean_accuracy(pred, gt, 3);  // class 2 has no instances
  EXPECT_DOUBLE_EQ(imbalanced.top1, 0.9);
  EXPECT_DOUBLE_EQ(imbalanced.class_mean, 0.5);
}

TEST(GenerateCandidates, ArgmaxFirstAndDeterministic) {
  const std::vector<std::vector<double>> verb{{0.1, 0.7, 0.2}, {0.5, 0.25, 0.25}};
  const std::vector<std::vector<double>> noun{{0.3, 0.3, 0.4}, {0.0, 0.0, 1.0}};
  auto one = generate_candidates(verb, noun, 1, 3);
  ASSERT_EQ(one.k(), 1u);
  EXPECT_EQ(one.candidates[0], seq({{1, 2}, {0, 2}}));
  auto a = generate_candidates(verb, noun, 5, 9, 0.8);
  auto b = generate_candidates(verb, noun, 5, 9, 0.8);
  EXPECT_EQ(a.candidates, b.candidates);
  EXPECT_EQ(a.candidates[0], one.candidates[0]);
  for (const auto& c : a.candidates) EXPECT_EQ(c[1].noun, 2);  // zero-probability classes never drawn
}

TEST(GenerateCandidates, OneHotRowsGiveIdenticalCandidates) {
  const std::vector<std::vector<double>> verb{{0, 1, 0}, {1, 0, 0}};
  const std::vector<std::vector<double>> noun{{0, 0, 1}, {0, 1, 0}};
  auto p = generate_candidates(verb, noun, 5, 1, 2.0);
  for (const auto& c : p.candidates) EXPECT_EQ(c, p.candidates[0]);
}

TEST(GenerateCandidates, SamplingFollowsTemperedDistribution) {
  const std::vector<std::vector<double>> verb{{0.2, 0.8}};
  const std::vector<std::vector<double>> noun{{0.5, 0.5}};
  const int K = 20001;
  auto p = generate_candidates(verb, noun, K, 4, 1.0);
  int ones = 0;
  for (int k = 1; k < K; ++k) ones += p.candidates[k][0].verb;
  EXPECT_NEAR(ones / 20000.0, 0.8, 0.015);
  // Temperature 0.5 squares the odds: 0.04 vs 0.64.
  auto cold = generate_candidates(verb, noun, K, 4, 0.5);
  ones = 0;
  for (int k = 1; k < K; ++k) ones += cold.candidates[k][0].verb;
  EXPECT_NEAR(ones / 20000.0, 0.64 / 0.68, 0.015);
}

TEST(GenerateCandidates, RejectsBadRows) {
  const std::vector<std::vector<double>> good{{0.5, 0.5}};
  EXPECT_THROW(generate_candidates({{0.5, 0.6}}, good, 2, 0), ValidationError);
  EXPECT_THROW(generate_candidates({{-0.1, 1.1}}, good, 2, 0), ValidationError);
  EXPECT_NO_THROW(generate_candidates({{0.5, 0.50005}}, good, 2, 0));
  EXPECT_THROW(generate_candidates(good, good, 0, 0), ParameterError);
  EXPECT_THROW(generate_candidates(good, good, 2, 0, 0.0), ParameterError);
  EXPECT_THROW(generate_candidates(good, {}, 2, 0), DimensionError);
}

TEST(Evaluate, PerfectPredictionsScoreZero) {
  GroundTruth gt{{"a", seq({{0, 1}, {1, 2}, {2, 0}})}, {"b", seq({{2, 2}, {0, 0}, {1, 1}})}};
  std::vector<PredictionSet> preds{{"a", {gt["a"]}}, {"b", {gt["b"]}}};
  auto r = evaluate(preds, gt, 3);
  EXPECT_EQ(r.verb_ed, 0.0);
  EXPECT_EQ(r.noun_ed, 0.0);
  EXPECT_EQ(r.action_ed, 0.0);
  EXPECT_EQ(r.verb_curve.size(), 3u);
  preds.push_back({"missing", {gt["a"]}});
  EXPECT_THROW(evaluate(preds, gt, 3), LinkError);
}

TEST(Evaluate, CurvesAreMeansOfPerExampleValues) {
  numcore::Rng rng(8);
  GroundTruth gt;
  std::vector<PredictionSet> preds;
  for (int i = 0; i < 30; ++i) {
    const auto id = "ex" + std::to_string(i);
    gt[id] = random_sequence(rng, 5, 4);
    preds.push_back({id, {random_sequence(rng, 5, 4), random_sequence(rng, 5, 4)}});
  }
  auto r = evaluate(preds, gt, 5);
  for (int z = 1; z <= 5; ++z) {
    double sum = 0.0;
    for (const auto& p : preds) sum += recompute_ed(p, gt[p.example_id], z, Field::kNoun);
    EXPECT_NEAR(r.noun_curve[z - 1], sum / 30.0, 1e-12);
  }
  EXPECT_EQ(r.noun_ed, r.noun_curve.back());
  double area = 0.0;
  for (double v : r.verb_curve) area += v;
  EXPECT_NEAR(r.aued_verb, area / 5.0, 1e-15);
}

TEST(Io, PredictionsRoundTrip) {
  anticipate::testing::TempDir dir;
  std::vector<PredictionSet> preds{{"v1@3", {seq({{1, 2}, {3, 4}}), seq({{0, 0}, {5, 6}})}}, {"v2@4", {seq({{7, 8}, {9, 1}})}}};
  write_predictions(dir / "p.jsonl", preds);
  auto back = read_predictions(dir / "p.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].example_id, "v1@3");
  EXPECT_EQ(back[0].candidates, preds[0].candidates);
  EXPECT_EQ(back[1].candidates, preds[1].candidates);
  const auto text = anticipate::testing::slurp(dir / "p.jsonl");
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "{\"example_id\":\"v1@3\",\"candidates\":[[[1,2],[3,4]],[[0,0],[5,6]]]}");

  anticipate::testing::write_text(dir / "bad.jsonl", "{\"example_id\":\"x\",\"candidates\":[[[1]]]}\n");
  EXPECT_THROW(read_predictions(dir / "bad.jsonl"), ParseError);
  anticipate::testing::write_text(dir / "ragged.jsonl", "{\"example_id\":\"x\",\"candidates\":[[[1,1]],[]]}\n");
  EXPECT_THROW(read_predictions(dir / "ragged.jsonl"), ValidationError);
  EXPECT_THROW(read_predictions(dir / "absent.jsonl"), IoError);
}

TEST(Io, ReportAndStepCurveRoundTripExactly) {
  anticipate::testing::TempDir dir;
  MetricsReport r;
  r.examples = 3;
  r.K = 5;
  r.Z = 3;
  r.verb_curve = {1.0 / 3.0, 0.1, 2.0 / 7.0};
  r.noun_curve = {0.0, 1e-300, 0.9999999999999999};
  r.action_curve = {1.0, 0.5, 0.25};
  r.verb_ed = r.verb_curve.back();
  r.top1 = 0.5;
  write_report(dir / "report.json", r);
  auto back = read_report(dir / "report.json");
  EXPECT_EQ(back.verb_curve, r.verb_curve);
  EXPECT_EQ(back.top1, r.top1);
  EXPECT_FALSE(back.moc.has_value());

  write_step_curve(dir / "steps.csv", r);
  auto rows = read_step_curve(dir / "steps.csv");
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].z, static_cast<int>(i + 1));
    EXPECT_EQ(rows[i].verb_ed, r.verb_curve[i]);
    EXPECT_EQ(rows[i].noun_ed, r.noun_curve[i]);
    EXPECT_EQ(rows[i].action_ed, r.action_curve[i]);
  }
}

}  // namespace
