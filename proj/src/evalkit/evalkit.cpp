// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/evalkit/evalkit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "anticipate/datastore/jsonl.hpp"
#include "anticipate/errors.hpp"
#include "anticipate/numcore/random.hpp"

namespace anticipate::evalkit {

Field parse_field(std::string_view name) {
  if (name == "verb") return Field::kVerb;
  if (name == "noun") return Field::kNoun;
  if (name == "action") return Field::kAction;
  throw ParameterError("unknown field '" + std::string(name) + "' (expected verb, noun or action)");
}

std::string field_name(Field field) {
  switch (field) {
    case Field::kVerb: return "verb";
    case Field::kNoun: return "noun";
    case Field::kAction: return "action";
  }
  return "?";
}

void validate(const PredictionSet& preds, int verb_count, int noun_count) {
  const std::string who = preds.example_id.empty() ? "prediction set" : "'" + preds.example_id + "'";
  if (preds.candidates.empty()) throw ValidationError(who + ": needs at least one candidate");
  const auto z = preds.candidates.front().size();
  for (std::size_t k = 0; k < preds.candidates.size(); ++k) {
    const auto& c = preds.candidates[k];
    if (c.size() != z) {
      throw ValidationError(who + ": candidate " + std::to_string(k) + " has " + std::to_string(c.size()) +
                            " steps, candidate 0 has " + std::to_string(z));
    }
    for (const auto& a : c) {
      if (a.verb < 0 || (verb_count >= 0 && a.verb >= verb_count)) {
        throw ValidationError(who + ": verb id " + std::to_string(a.verb) + " outside the vocabulary");
      }
      if (a.noun < 0 || (noun_count >= 0 && a.noun >= noun_count)) {
        throw ValidationError(who + ": noun id " + std::to_string(a.noun) + " outside the vocabulary");
      }
    }
  }
}

namespace {

void check_rows(const std::vector<std::vector<double>>& rows, const char* what) {
  for (std::size_t z = 0; z < rows.size(); ++z) {
    if (rows[z].empty()) throw ValidationError(std::string(what) + " row " + std::to_string(z) + " is empty");
    double total = 0.0;
    for (double p : rows[z]) {
      if (!std::isfinite(p) || p < 0.0) {
        throw ValidationError(std::string(what) + " row " + std::to_string(z) + " has an entry outside [0, 1]");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-4) {
      throw ValidationError(std::string(what) + " row " + std::to_string(z) + " sums to " + std::to_string(total));
    }
  }
}

int argmax(const std::vector<double>& p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

int sample(const std::vector<double>& p, double inv_temperature, numcore::Rng& rng) {
  double max_log = -INFINITY;
  for (double v : p) {
    if (v > 0.0) max_log = std::max(max_log, std::log(v));
  }
  std::vector<double> w(p.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) w[i] = std::exp((std::log(p[i]) - max_log) * inv_temperature);
    total += w[i];
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    acc += w[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

}  // namespace

PredictionSet generate_candidates(const std::vector<std::vector<double>>& verb_probs,
                                  const std::vector<std::vector<double>>& noun_probs, int K, std::uint64_t seed,
                                  double temperature) {
  if (K < 1) throw ParameterError("K must be at least 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ParameterError("temperature must be a positive finite number");
  }
  if (verb_probs.size() != noun_probs.size()) {
    throw DimensionError("verb and noun probabilities cover " + std::to_string(verb_probs.size()) + " and " +
                         std::to_string(noun_probs.size()) + " steps");
  }
  check_rows(verb_probs, "verb probability");
  check_rows(noun_probs, "noun probability");

  const std::size_t Z = verb_probs.size();
  PredictionSet out;
  out.sampled = K > 1;
  out.temperature = temperature;
  out.seed = seed;
  ActionSequence greedy(Z);
  for (std::size_t z = 0; z < Z; ++z) greedy[z] = {argmax(verb_probs[z]), argmax(noun_probs[z])};
  out.candidates.push_back(std::move(greedy));

  numcore::Rng rng(seed);
  const double inv_t = 1.0 / temperature;
  for (int k = 1; k < K; ++k) {
    ActionSequence c(Z);
    for (std::size_t z = 0; z < Z; ++z) {
      c[z].verb = sample(verb_probs[z], inv_t, rng);
      c[z].noun = sample(noun_probs[z], inv_t, rng);
    }
    out.candidates.push_back(std::move(c));
  }
  return out;
}

namespace {

std::vector<int> project(const ActionSequence& seq, std::size_t n, Field field) {
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = field == Field::kVerb ? seq[i].verb : seq[i].noun;
  }
  return out;
}

int prefix_distance(const ActionSequence& cand, const ActionSequence& gt, std::size_t z, Field field) {
  if (field == Field::kAction) {
    return damerau_levenshtein(std::span<const Action>(cand.data(), z), std::span<const Action>(gt.data(), z));
  }
  return damerau_levenshtein(project(cand, z, field), project(gt, z, field));
}

}  // namespace

double edit_distance_at_z(const PredictionSet& preds, const ActionSequence& gt, int z, Field field) {
  if (preds.candidates.empty()) throw ValidationError("prediction set has no candidates");
  if (z < 1 || static_cast<std::size_t>(z) > gt.size()) {
    throw ParameterError("z = " + std::to_string(z) + " outside [1, " + std::to_string(gt.size()) + "]");
  }
  const auto n = static_cast<std::size_t>(z);
  int best = z;
  for (const auto& cand : preds.candidates) {
    if (cand.size() < n) {
      throw DimensionError("candidate has " + std::to_string(cand.size()) + " steps, need " + std::to_string(z));
    }
    best = std::min(best, prefix_distance(cand, gt, n, field));
  }
  return static_cast<double>(best) / z;
}

double aued(const PredictionSet& preds, const ActionSequence& gt, int Z, Field field) {
  if (Z < 1) throw ParameterError("Z must be at least 1");
  double total = 0.0;
  for (int z = 1; z <= Z; ++z) total += edit_distance_at_z(preds, gt, z, field);
  return total / Z;
}

double moc(std::span<const int> pred, std::span<const int> gt) {
  if (gt.empty()) throw ParameterError("moc needs at least one frame");
  if (pred.size() != gt.size()) {
    throw DimensionError("moc: " + std::to_string(pred.size()) + " predicted frames vs " +
                         std::to_string(gt.size()) + " ground-truth frames");
  }
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // class -> (correct, total)
  for (std::size_t i = 0; i < gt.size(); ++i) {
    auto& c = per_class[gt[i]];
    c.second += 1;
    if (pred[i] == gt[i]) c.first += 1;
  }
  double sum = 0.0;
  for (const auto& [cls, c] : per_class) sum += static_cast<double>(c.first) / static_cast<double>(c.second);
  return sum / static_cast<double>(per_class.size());
}

Accuracy class_mean_accuracy(std::span<const int> pred, std::span<const int> gt, int n_classes) {
  if (pred.size() != gt.size()) {
    throw DimensionError("class_mean_accuracy: " + std::to_string(pred.size()) + " predictions vs " +
                         std::to_string(gt.size()) + " labels");
  }
  if (n_classes < 1) throw ParameterError("n_classes must be positive");
  Accuracy acc;
  if (gt.empty()) return acc;
  std::vector<std::size_t> correct(static_cast<std::size_t>(n_classes), 0);
  std::vector<std::size_t> total(static_cast<std::size_t>(n_classes), 0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] < 0 || gt[i] >= n_classes) throw IndexError("label " + std::to_string(gt[i]) + " outside the classes");
    const auto c = static_cast<std::size_t>(gt[i]);
    total[c] += 1;
    if (pred[i] == gt[i]) {
      correct[c] += 1;
      ++hits;
    }
  }
  acc.top1 = static_cast<double>(hits) / static_cast<double>(gt.size());
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < total.size(); ++c) {
    if (total[c] == 0) continue;
    sum += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    ++present;
  }
  acc.class_mean = sum / static_cast<double>(present);
  return acc;
}

GroundTruth ground_truth(const std::vector<datastore::LTAExample>& examples) {
  GroundTruth gt;
  for (const auto& ex : examples) {
    ActionSequence seq(ex.target_verbs.size());
    for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = {ex.target_verbs[i], ex.target_nouns[i]};
    gt.emplace(ex.id, std::move(seq));
  }
  return gt;
}

MetricsReport evaluate(const std::vector<PredictionSet>& predictions, const GroundTruth& gt, int Z) {
  if (Z < 1) throw ParameterError("Z must be at least 1");
  MetricsReport r;
  r.Z = Z;
  r.examples = predictions.size();
  r.verb_curve.assign(static_cast<std::size_t>(Z), 0.0);
  r.noun_curve.assign(static_cast<std::size_t>(Z), 0.0);
  r.action_curve.assign(static_cast<std::size_t>(Z), 0.0);
  if (predictions.empty()) return r;

  r.K = static_cast<int>(predictions.front().k());
  for (const auto& p : predictions) {
    validate(p);
    auto it = gt.find(p.example_id);
    if (it == gt.end()) throw LinkError("no ground truth for example '" + p.example_id + "'");
    if (it->second.size() < static_cast<std::size_t>(Z)) {
      throw LengthError("ground truth for '" + p.example_id + "' has " + std::to_string(it->second.size()) +
                        " steps, need " + std::to_string(Z));
    }
    r.K = std::max(r.K, static_cast<int>(p.k()));
    for (int z = 1; z <= Z; ++z) {
      const auto i = static_cast<std::size_t>(z - 1);
      r.verb_curve[i] += edit_distance_at_z(p, it->second, z, Field::kVerb);
      r.noun_curve[i] += edit_distance_at_z(p, it->second, z, Field::kNoun);
      r.action_curve[i] += edit_distance_at_z(p, it->second, z, Field::kAction);
    }
  }
  const auto n = static_cast<double>(predictions.size());
  auto finish = [&](std::vector<double>& curve, double& at_z, double& area) {
    double sum = 0.0;
    for (auto& v : curve) {
      v /= n;
      sum += v;
    }
    at_z = curve.back();
    area = sum / Z;
  };
  finish(r.verb_curve, r.verb_ed, r.aued_verb);
  finish(r.noun_curve, r.noun_ed, r.aued_noun);
  finish(r.action_curve, r.action_ed, r.aued_action);
  return r;
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["examples"] = r.examples;
  j["K"] = r.K;
  j["Z"] = r.Z;
  j["verb_ed"] = r.verb_ed;
  j["noun_ed"] = r.noun_ed;
  j["action_ed"] = r.action_ed;
  j["aued_verb"] = r.aued_verb;
  j["aued_noun"] = r.aued_noun;
  j["aued_action"] = r.aued_action;
  j["verb_curve"] = r.verb_curve;
  j["noun_curve"] = r.noun_curve;
  j["action_curve"] = r.action_curve;
  if (r.moc) j["moc"] = *r.moc;
  if (r.top1) j["top1"] = *r.top1;
  if (r.class_mean) j["class_mean"] = *r.class_mean;
  return j;
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    r.examples = j.at("examples").get<std::size_t>();
    r.K = j.at("K").get<int>();
    r.Z = j.at("Z").get<int>();
    r.verb_ed = j.at("verb_ed").get<double>();
    r.noun_ed = j.at("noun_ed").get<double>();
    r.action_ed = j.at("action_ed").get<double>();
    r.aued_verb = j.at("aued_verb").get<double>();
    r.aued_noun = j.at("aued_noun").get<double>();
    r.aued_action = j.at("aued_action").get<double>();
    r.verb_curve = j.at("verb_curve").get<std::vector<double>>();
    r.noun_curve = j.at("noun_curve").get<std::vector<double>>();
    r.action_curve = j.at("action_curve").get<std::vector<double>>();
    if (j.contains("moc")) r.moc = j["moc"].get<double>();
    if (j.contains("top1")) r.top1 = j["top1"].get<double>();
    if (j.contains("class_mean")) r.class_mean = j["class_mean"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics report: ") + e.what());
  }
  return r;
}

namespace {

void write_all(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionSet>& predictions) {
  std::string text;
  for (const auto& p : predictions) {
    nlohmann::ordered_json row;
    row["example_id"] = p.example_id;
    auto cands = nlohmann::ordered_json::array();
    for (const auto& c : p.candidates) {
      auto seq = nlohmann::ordered_json::array();
      for (const auto& a : c) seq.push_back({a.verb, a.noun});
      cands.push_back(std::move(seq));
    }
    row["candidates"] = std::move(cands);
    text += row.dump();
    text += '\n';
  }
  write_all(path, text);
}

std::vector<PredictionSet> parse_predictions(const std::string& text) {
  std::vector<PredictionSet> out;
  datastore::for_each_json_line(text, [&](const nlohmann::json& row, std::size_t line) {
    PredictionSet p;
    p.example_id = datastore::require_field<std::string>(row, "example_id", line);
    auto bad = [&](const std::string& why) {
      return ParseError("line " + std::to_string(line) + ": field 'candidates' " + why);
    };
    auto it = row.find("candidates");
    if (it == row.end()) throw bad("is missing");
    if (!it->is_array()) throw bad("must be an array of candidate sequences");
    for (const auto& seq : *it) {
      if (!seq.is_array()) throw bad("must hold arrays of [verb, noun] pairs");
      ActionSequence c;
      for (const auto& pair : seq) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
          throw bad("steps must be [verb, noun] integer pairs");
        }
        c.push_back({pair[0].get<int>(), pair[1].get<int>()});
      }
      p.candidates.push_back(std::move(c));
    }
    try {
      validate(p);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<PredictionSet> read_predictions(const std::filesystem::path& path) {
  const auto text = datastore::read_text_file(path);
  try {
    return parse_predictions(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_report(const std::filesystem::path& path, const MetricsReport& report) {
  write_all(path, to_json(report).dump(2) + "\n");
}

MetricsReport read_report(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(datastore::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

void write_step_curve(const std::filesystem::path& path, const MetricsReport& report) {
  std::string text = "z,verb_ed,noun_ed,action_ed\n";
  char buf[128];
  for (std::size_t i = 0; i < report.verb_curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i + 1, report.verb_curve[i], report.noun_curve[i],
                  report.action_curve[i]);
    text += buf;
  }
  write_all(path, text);
}

std::vector<StepRow> read_step_curve(const std::filesystem::path& path) {
  std::istringstream in(datastore::read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "z,verb_ed,noun_ed,action_ed") {
    throw FormatError(path.string() + ": missing step-curve header");
  }
  std::vector<StepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    StepRow r;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &r.z, &r.verb_ed, &r.noun_ed, &r.action_ed) != 4) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": expected z and three values");
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace anticipate::evalkit
