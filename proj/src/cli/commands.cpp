// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>

#include "anticipate/cli/run_config.hpp"
#include "anticipate/datastore/jsonl.hpp"
#include "anticipate/errors.hpp"
#include "anticipate/evalkit/evalkit.hpp"
#include "anticipate/pte/checkpoint.hpp"
#include "anticipate/rollout/rollout.hpp"
#include "anticipate/synthlab/synthlab.hpp"
#include "anticipate/train/train.hpp"

namespace anticipate::cli {

namespace fs = std::filesystem;

namespace {

// Bad flags or config contents; mapped to kExitUsage.
class UsageError : public Error {
 public:
  using Error::Error;
};

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  try {
    return read_run_config(path);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(std::string("config '") + path + "': " + e.what());
  }
}

fs::path require_dir(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string("missing ") + flag);
  return path;
}

fs::path make_out_dir(const std::string& path) {
  const fs::path dir = require_dir(path, "--out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

// Vocabulary sizes and input widths come from the data.
void resolve_model(RunConfig& cfg, const synthlab::Dataset& ds) {
  int max_verb = -1, max_noun = -1;
  for (const auto& v : ds.annotations.videos) {
    for (const auto& s : v.segments) {
      max_verb = std::max(max_verb, s.verb_id);
      max_noun = std::max(max_noun, s.noun_id);
    }
  }
  cfg.model.verb_count = std::max(cfg.model.verb_count, max_verb + 1);
  cfg.model.noun_count = std::max(cfg.model.noun_count, max_noun + 1);
  cfg.model.clip_input_dim = static_cast<int>(ds.store.clips().dim());
  cfg.model.object_input_dim =
      static_cast<int>(tokens::object_feature_dim(ds.store.descriptor_dim(), ds.prompts.size()));
  cfg.selection.n_img = cfg.model.n_img;
  cfg.selection.n_obj = cfg.model.n_obj;
  cfg.model.validate();
}

train::InputSpec input_spec(const RunConfig& cfg, const synthlab::Dataset& ds) {
  train::InputSpec spec;
  spec.selection = cfg.selection;
  spec.selection.n_img = cfg.model.n_img;
  spec.selection.n_obj = cfg.model.n_obj;
  spec.geometry = cfg.geometry;
  spec.prompt_count = ds.prompts.size();
  spec.descriptor_dim = ds.store.descriptor_dim();
  spec.random_box_seed = cfg.random_box_seed;
  return spec;
}

std::vector<datastore::LTAExample> split_examples(const synthlab::Dataset& ds, const pte::PTEConfig& model,
                                                  const std::string& split) {
  const std::vector<std::string>* ids = nullptr;
  if (split == "train") ids = &ds.split.train;
  else if (split == "val") ids = &ds.split.val;
  else throw UsageError("split must be 'train' or 'val', got '" + split + "'");
  const auto subset = ds.annotations.subset(*ids);
  datastore::DetectionIndex index(ds.detections);
  return datastore::build_examples(subset, index, ds.store, {model.N_v, model.Z});
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---- prompts build --------------------------------------------------------

struct PromptsArgs {
  std::string config, data, out, strategy, fixed;
  std::optional<int> n, k;
  std::optional<std::uint64_t> seed;
};

void cmd_prompts(const PromptsArgs& a, std::ostream& out) {
  auto cfg = load_config(a.config);
  auto& p = cfg.prompts;
  if (!a.strategy.empty()) p.strategy = a.strategy;
  if (a.n) p.n = *a.n;
  if (a.k) p.k = *a.k;
  if (a.seed) p.seed = *a.seed;
  if (!a.fixed.empty()) p.fixed_path = a.fixed;
  if (a.out.empty()) throw UsageError("missing --out");
  prompts::Strategy strategy;
  try {
    strategy = prompts::parse_strategy(p.strategy);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  prompts::PromptList list;
  if (strategy == prompts::Strategy::kFixed) {
    if (p.fixed_path.empty()) throw UsageError("the fixed strategy needs --fixed FILE");
    list = prompts::load_fixed_prompts(p.fixed_path);
  } else {
    const fs::path data = require_dir(a.data.empty() ? cfg.data_dir : a.data, "--data");
    const auto counts = prompts::count_noun_frequencies(datastore::read_annotations(data / "annotations.jsonl"));
    if (strategy == prompts::Strategy::kMostCommon) {
      list = prompts::build_most_common(counts, p.n);
    } else if (strategy == prompts::Strategy::kRandom) {
      list = prompts::build_random_prompts(counts, p.n, p.seed);
    } else {
      const auto table = prompts::read_embedding_table(data / p.embeddings);
      list = prompts::build_kmeans_prompts(counts, table, p.k > 0 ? p.k : 2 * p.n, p.n, p.seed);
    }
  }
  const fs::path target = a.out;
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  prompts::write_prompt_list(list, target);
  out << "wrote " << list.size() << " prompts (" << prompts::strategy_name(list.strategy) << ") to " << target.string()
      << "\n";
}

// ---- synth gen ------------------------------------------------------------

struct SynthArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> videos;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  auto cfg = load_config(a.config);
  if (a.seed) cfg.synth.seed = *a.seed;
  if (a.videos) cfg.synth.n_videos = *a.videos;
  try {
    cfg.synth.validate();
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  const auto dir = make_out_dir(a.out.empty() ? cfg.out_dir : a.out);
  cfg.out_dir = dir.string();
  const auto split = synthlab::generate(cfg.synth, dir);
  write_run_config(cfg, dir / "run_config.json");
  out << "generated " << cfg.synth.n_videos << " videos (" << split.train.size() << " train, " << split.val.size()
      << " val) in " << dir.string() << "\n";
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string config, data, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  int threads = 0;
};

template <typename T>
void train_as(const RunConfig& cfg, const synthlab::Dataset& ds, const fs::path& dir, int threads, std::ostream& out) {
  const auto spec = input_spec(cfg, ds);
  const auto train_in = train::prepare_inputs<T>(cfg.model, split_examples(ds, cfg.model, "train"), ds.store, spec);
  const auto val_in = train::prepare_inputs<T>(cfg.model, split_examples(ds, cfg.model, "val"), ds.store, spec);
  if (train_in.empty()) throw ValidationError("the train split yields no examples");
  train::FitOptions opts;
  opts.log_path = dir / "train_log.jsonl";
  opts.checkpoint_path = dir / "checkpoint.fpk";
  opts.threads = threads;
  auto result = train::fit<T>(cfg.model, pte::init_params_as<T>(cfg.model, cfg.train.seed), train_in, val_in,
                              cfg.train, opts);
  nlohmann::ordered_json extra;
  extra["status"] = "complete";
  extra["epochs"] = result.log.size();
  extra["train_examples"] = train_in.size();
  extra["val_examples"] = val_in.size();
  pte::save_checkpoint(dir / "checkpoint.fpk", cfg.model, result.params, extra);
  const auto& last = result.log.back();
  char buf[256];
  std::snprintf(buf, sizeof buf, "trained %zu epochs on %zu examples: loss %.6f, val ED verb %.4f noun %.4f action %.4f\n",
                result.log.size(), train_in.size(), last.loss, last.val_verb_ed, last.val_noun_ed, last.val_action_ed);
  out << buf;
}

void cmd_train(const TrainArgs& a, std::ostream& out) {
  auto cfg = load_config(a.config);
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  try {
    cfg.train.validate();
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  const auto data = require_dir(a.data.empty() ? cfg.data_dir : a.data, "--data");
  const auto dir = make_out_dir(a.out.empty() ? cfg.out_dir : a.out);
  const auto ds = synthlab::load_dataset(data);
  resolve_model(cfg, ds);
  cfg.data_dir = data.string();
  cfg.out_dir = dir.string();
  write_run_config(cfg, dir / "run_config.json");
  if (cfg.train.precision == train::Precision::kFloat64) {
    train_as<double>(cfg, ds, dir, a.threads, out);
  } else {
    train_as<float>(cfg, ds, dir, a.threads, out);
  }
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string config, data, out, checkpoint, predictions, split;
  int threads = 0;
};

template <typename T>
std::vector<evalkit::PredictionSet> predict_split(RunConfig& cfg, const synthlab::Dataset& ds,
                                                  const fs::path& checkpoint, int threads) {
  auto ck = pte::load_checkpoint<T>(checkpoint);
  cfg.model = ck.config;
  const auto examples = split_examples(ds, cfg.model, cfg.eval.split);
  const auto inputs = train::prepare_inputs<T>(cfg.model, examples, ds.store, input_spec(cfg, ds));
  return train::predict_candidates<T>(cfg.model, ck.params, inputs, cfg.eval.K, cfg.eval.temperature, cfg.eval.seed,
                                      threads);
}

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  auto cfg = load_config(a.config);
  if (!a.split.empty()) cfg.eval.split = a.split;
  if (a.checkpoint.empty() == a.predictions.empty()) throw UsageError("give exactly one of --checkpoint, --predictions");
  const auto data = require_dir(a.data.empty() ? cfg.data_dir : a.data, "--data");
  const auto dir = make_out_dir(a.out.empty() ? cfg.out_dir : a.out);
  const auto ds = synthlab::load_dataset(data);
  resolve_model(cfg, ds);
  cfg.data_dir = data.string();
  cfg.out_dir = dir.string();

  std::vector<evalkit::PredictionSet> preds;
  if (!a.checkpoint.empty()) {
    if (!fs::exists(a.checkpoint)) throw IoError("missing checkpoint '" + a.checkpoint + "'");
    preds = cfg.train.precision == train::Precision::kFloat64
                ? predict_split<double>(cfg, ds, a.checkpoint, a.threads)
                : predict_split<float>(cfg, ds, a.checkpoint, a.threads);
    evalkit::write_predictions(dir / "predictions.jsonl", preds);
  } else {
    preds = evalkit::read_predictions(a.predictions);
    for (const auto& p : preds) evalkit::validate(p, cfg.model.verb_count, cfg.model.noun_count);
  }
  write_run_config(cfg, dir / "run_config.json");
  const auto gt = evalkit::ground_truth(split_examples(ds, cfg.model, cfg.eval.split));
  const auto report = evalkit::evaluate(preds, gt, cfg.model.Z);
  evalkit::write_report(dir / "report.json", report);
  evalkit::write_step_curve(dir / "step_ed.csv", report);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu examples, K=%d, Z=%d: verb_ed %.4f noun_ed %.4f action_ed %.4f\n",
                report.examples, report.K, report.Z, report.verb_ed, report.noun_ed, report.action_ed);
  out << buf;
}

// ---- rollout --------------------------------------------------------------

struct RolloutArgs {
  std::string config, data, out, checkpoint, example, steps, split;
  std::optional<int> top;
};

std::vector<int> parse_steps(const std::string& text) {
  std::vector<int> steps;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      steps.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--steps expects comma-separated integers, got '" + text + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return steps;
}

template <typename T>
void rollout_as(RunConfig& cfg, const synthlab::Dataset& ds, const fs::path& checkpoint, const fs::path& dir,
                std::ostream& out) {
  auto ck = pte::load_checkpoint<T>(checkpoint);
  cfg.model = ck.config;
  const auto examples = split_examples(ds, cfg.model, cfg.eval.split);
  if (examples.empty()) throw ValidationError("split '" + cfg.eval.split + "' has no examples");
  auto it = examples.begin();
  if (!cfg.rollout.example.empty()) {
    it = std::find_if(examples.begin(), examples.end(), [&](const auto& e) { return e.id == cfg.rollout.example; });
    if (it == examples.end()) throw LinkError("no example '" + cfg.rollout.example + "' in split " + cfg.eval.split);
  }
  cfg.rollout.example = it->id;
  const auto inputs = train::prepare_inputs<T>(cfg.model, {*it}, ds.store, input_spec(cfg, ds));

  numcore::Tape<T> tape;
  pte::BoundParams<T> bound(tape, ck.params);
  pte::ForwardOptions opts;
  opts.keep_attention = true;
  const auto output = pte::model_forward(cfg.model, bound, inputs[0].input, opts);
  std::size_t branch = 0;
  if (cfg.model.fusion == pte::Fusion::kLate) {
    branch = cfg.rollout.branch == "video" ? 0 : 1;
  }
  if (cfg.model.fusion == pte::Fusion::kVideoOnly) throw UsageError("rollout needs a model with object tokens");

  rollout::RolloutOptions ro;
  ro.residual = cfg.rollout.residual;
  if (cfg.rollout.heads == "mean") ro.heads = rollout::HeadAggregation::kMean;
  else if (cfg.rollout.heads == "max") ro.heads = rollout::HeadAggregation::kMax;
  else throw UsageError("rollout.heads must be 'mean' or 'max'");
  const auto map = rollout::rollout_branch(output.branches[branch], inputs[0].input, ro);
  rollout::export_heatmap(map, cfg.rollout.steps, dir / "rollout.csv", dir / "rollout.pgm");

  nlohmann::ordered_json top;
  top["example_id"] = it->id;
  top["steps"] = nlohmann::ordered_json::array();
  for (int z : cfg.rollout.steps) {
    nlohmann::ordered_json step;
    step["z"] = z;
    step["objects"] = nlohmann::ordered_json::array();
    for (const auto& w : rollout::top_objects(map, z, cfg.rollout.top_k)) {
      step["objects"].push_back({{"segment_idx", w.segment_idx},
                                 {"frame_idx", w.frame_idx},
                                 {"object_slot", w.object_slot},
                                 {"weight", w.weight}});
    }
    top["steps"].push_back(std::move(step));
  }
  write_json(dir / "top_objects.json", top);
  out << "rollout of " << it->id << " over " << cfg.rollout.steps.size() << " steps written to " << dir.string()
      << "\n";
}

void cmd_rollout(const RolloutArgs& a, std::ostream& out) {
  auto cfg = load_config(a.config);
  if (!a.example.empty()) cfg.rollout.example = a.example;
  if (!a.steps.empty()) cfg.rollout.steps = parse_steps(a.steps);
  if (a.top) cfg.rollout.top_k = *a.top;
  if (!a.split.empty()) cfg.eval.split = a.split;
  if (a.checkpoint.empty()) throw UsageError("missing --checkpoint");
  if (!fs::exists(a.checkpoint)) throw IoError("missing checkpoint '" + a.checkpoint + "'");
  const auto data = require_dir(a.data.empty() ? cfg.data_dir : a.data, "--data");
  const auto dir = make_out_dir(a.out.empty() ? cfg.out_dir : a.out);
  const auto ds = synthlab::load_dataset(data);
  resolve_model(cfg, ds);
  cfg.data_dir = data.string();
  cfg.out_dir = dir.string();
  if (cfg.train.precision == train::Precision::kFloat64) {
    rollout_as<double>(cfg, ds, a.checkpoint, dir, out);
  } else {
    rollout_as<float>(cfg, ds, a.checkpoint, dir, out);
  }
  write_run_config(cfg, dir / "run_config.json");
}

// ---- validate -------------------------------------------------------------

enum class FileKind { kUnknown, kAnnotations, kDetections, kPredictions, kPack, kSplit, kReport, kStepCurve, kPrompts };

FileKind file_kind(const fs::path& path) {
  const auto name = path.filename().string();
  const auto ext = path.extension().string();
  auto has = [&](const char* part) { return name.find(part) != std::string::npos; };
  if (ext == ".jsonl" && has("annotations")) return FileKind::kAnnotations;
  if (ext == ".jsonl" && has("detections")) return FileKind::kDetections;
  if (ext == ".jsonl" && has("predictions")) return FileKind::kPredictions;
  if (ext == ".fpk") return FileKind::kPack;
  if (name == "split.json") return FileKind::kSplit;
  if (name == "report.json") return FileKind::kReport;
  if (ext == ".csv" && has("step")) return FileKind::kStepCurve;
  if (ext == ".txt" && has("prompt")) return FileKind::kPrompts;
  return FileKind::kUnknown;
}

// Checks one file by its kind; returns a short description.
std::string validate_file(const fs::path& path) {
  const auto kind = file_kind(path);
  if (kind == FileKind::kAnnotations) {
    return std::to_string(datastore::read_annotations(path).segment_count()) + " segments";
  }
  if (kind == FileKind::kDetections) {
    return std::to_string(datastore::read_detections(path).size()) + " detections";
  }
  if (kind == FileKind::kPredictions) {
    const auto preds = evalkit::read_predictions(path);
    for (const auto& p : preds) evalkit::validate(p);
    return std::to_string(preds.size()) + " prediction sets";
  }
  if (kind == FileKind::kPack) {
    const auto pack = datastore::read_feature_pack(path);
    return std::to_string(pack.row_count()) + " rows of dim " + std::to_string(pack.dim());
  }
  if (kind == FileKind::kSplit) {
    const auto s = synthlab::read_split(path);
    return std::to_string(s.train.size()) + " train / " + std::to_string(s.val.size()) + " val videos";
  }
  if (kind == FileKind::kReport) {
    const auto r = evalkit::read_report(path);
    return std::to_string(r.examples) + " examples";
  }
  if (kind == FileKind::kStepCurve) {
    return std::to_string(evalkit::read_step_curve(path).size()) + " steps";
  }
  if (kind == FileKind::kPrompts) {
    return std::to_string(prompts::read_prompt_list(path).size()) + " prompts";
  }
  throw UsageError("don't know how to validate '" + path.string() + "'");
}

// Cross-file links inside one directory: detection descriptors resolve in
// the packs next to them, categories fit the prompt list, split ids exist.
void validate_links(const fs::path& dir) {
  if (fs::exists(dir / "detections.jsonl")) {
    const auto dets = datastore::read_detections(dir / "detections.jsonl");
    std::set<std::string> packs;
    for (const auto& d : dets) packs.insert(d.descriptor.pack_id);
    std::map<std::string, datastore::FeaturePack> loaded;
    for (const auto& id : packs) {
      const auto p = dir / (id + ".fpk");
      if (!fs::exists(p)) throw LinkError("detections reference missing pack '" + p.string() + "'");
      loaded.emplace(id, datastore::read_feature_pack(p));
    }
    std::optional<prompts::PromptList> prompt_list;
    if (fs::exists(dir / "prompts.txt")) prompt_list = prompts::read_prompt_list(dir / "prompts.txt");
    for (const auto& d : dets) {
      if (d.descriptor.row >= loaded.at(d.descriptor.pack_id).row_count()) {
        throw LinkError("detection descriptor row " + std::to_string(d.descriptor.row) + " outside pack '" +
                        d.descriptor.pack_id + "'");
      }
      if (prompt_list && d.category_idx >= static_cast<int>(prompt_list->size())) {
        throw ValidationError("detection category " + std::to_string(d.category_idx) + " outside the prompt list");
      }
    }
  }
  if (fs::exists(dir / "split.json") && fs::exists(dir / "annotations.jsonl")) {
    const auto ann = datastore::read_annotations(dir / "annotations.jsonl");
    const auto s = synthlab::read_split(dir / "split.json");
    for (const auto* list : {&s.train, &s.val}) {
      for (const auto& id : *list) {
        if (!ann.find(id)) throw LinkError("split names unknown video '" + id + "'");
      }
    }
  }
}

int cmd_validate(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err) {
  int failures = 0;
  auto check = [&](const fs::path& p, auto&& fn) {
    try {
      out << "ok   " << p.string() << ": " << fn() << "\n";
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      err << "FAIL " << p.string() << ": " << e.what() << "\n";
      ++failures;
    }
  };
  for (const auto& arg : paths) {
    const fs::path path = arg;
    if (!fs::exists(path)) {
      err << "FAIL " << path.string() << ": no such file or directory\n";
      ++failures;
      continue;
    }
    if (!fs::is_directory(path)) {
      check(path, [&] { return validate_file(path); });
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && file_kind(entry.path()) != FileKind::kUnknown) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      err << "FAIL " << path.string() << ": no recognised files\n";
      ++failures;
      continue;
    }
    for (const auto& f : files) check(f, [&] { return validate_file(f); });
    check(path, [&] {
      validate_links(path);
      return std::string("links resolve");
    });
  }
  return failures == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Long-term action anticipation with object tokens", "anticipate"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  PromptsArgs pa;
  auto* prompts_cmd = app.add_subcommand("prompts", "Object prompt vocabularies");
  prompts_cmd->require_subcommand(1);
  auto* build = prompts_cmd->add_subcommand("build", "Build a prompt list from annotations");
  build->add_option("--config", pa.config, "Run config JSON");
  build->add_option("--data", pa.data, "Dataset directory");
  build->add_option("--out", pa.out, "Output prompt file")->required();
  build->add_option("--strategy", pa.strategy, "most_common | kmeans | fixed | random");
  build->add_option("--n", pa.n, "Number of prompts");
  build->add_option("--k", pa.k, "k-means clusters (default 2n)");
  build->add_option("--seed", pa.seed, "Seed for kmeans and random");
  build->add_option("--fixed", pa.fixed, "Prompt file for the fixed strategy");

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic benchmark");
  synth_cmd->require_subcommand(1);
  auto* gen = synth_cmd->add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--config", sa.config, "Run config JSON");
  gen->add_option("--out", sa.out, "Output directory");
  gen->add_option("--seed", sa.seed, "Override synth.seed");
  gen->add_option("--videos", sa.videos, "Override synth.n_videos");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", ta.config, "Run config JSON");
  train_cmd->add_option("--data", ta.data, "Dataset directory");
  train_cmd->add_option("--out", ta.out, "Run directory");
  train_cmd->add_option("--seed", ta.seed, "Override train.seed");
  train_cmd->add_option("--epochs", ta.epochs, "Override train.epochs");
  train_cmd->add_option("--threads", ta.threads, "Worker threads (default: ANTICIPATE_THREADS or all cores)");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint or a predictions file");
  eval_cmd->add_option("--config", ea.config, "Run config JSON");
  eval_cmd->add_option("--data", ea.data, "Dataset directory");
  eval_cmd->add_option("--out", ea.out, "Output directory");
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "Checkpoint to predict with");
  eval_cmd->add_option("--predictions", ea.predictions, "Existing predictions.jsonl");
  eval_cmd->add_option("--split", ea.split, "train | val");
  eval_cmd->add_option("--threads", ea.threads, "Worker threads");

  RolloutArgs ra;
  auto* rollout_cmd = app.add_subcommand("rollout", "Attention rollout heatmaps for one example");
  rollout_cmd->add_option("--config", ra.config, "Run config JSON");
  rollout_cmd->add_option("--data", ra.data, "Dataset directory");
  rollout_cmd->add_option("--out", ra.out, "Output directory");
  rollout_cmd->add_option("--checkpoint", ra.checkpoint, "Checkpoint");
  rollout_cmd->add_option("--example", ra.example, "Example id (default: first of the split)");
  rollout_cmd->add_option("--steps", ra.steps, "Comma-separated prediction steps");
  rollout_cmd->add_option("--top", ra.top, "Objects listed per step");
  rollout_cmd->add_option("--split", ra.split, "train | val");

  std::vector<std::string> vpaths;
  auto* validate_cmd = app.add_subcommand("validate", "Check dataset, prediction and report files");
  validate_cmd->add_option("paths", vpaths, "Files or directories")->required();

  if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
    const auto subs = app.get_subcommands([](const CLI::App*) { return true; });
    const bool known = std::any_of(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->get_name() == args[0]; });
    if (!known) {
      err << "error: unknown subcommand '" << args[0] << "'\n\n" << app.help();
      return kExitUsage;
    }
  }
  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (build->parsed()) cmd_prompts(pa, out);
    else if (gen->parsed()) cmd_synth(sa, out);
    else if (train_cmd->parsed()) cmd_train(ta, out);
    else if (eval_cmd->parsed()) cmd_eval(ea, out);
    else if (rollout_cmd->parsed()) cmd_rollout(ra, out);
    else if (validate_cmd->parsed()) return cmd_validate(vpaths, out, err);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace anticipate::cli
