// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/cli/run_config.hpp"

#include <fstream>
#include <sstream>

#include "anticipate/errors.hpp"

namespace anticipate::cli {

namespace {

template <typename Fn>
void for_keys(const nlohmann::json& j, const std::string& section, Fn&& fn) {
  if (!j.is_object()) throw ParameterError("config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (!fn(key, value)) throw ParameterError("unknown key '" + section + "." + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("config key '" + section + "." + key + "': " + e.what());
    }
  }
}

void selection_from_json(const nlohmann::json& j, RunConfig& c) {
  for_keys(j, "selection", [&](const std::string& key, const nlohmann::json& v) {
    if (key == "threshold") c.selection.threshold = v.get<double>();
    else if (key == "use_location") c.selection.use_location = v.get<bool>();
    else if (key == "use_category") c.selection.use_category = v.get<bool>();
    else if (key == "random_boxes") c.selection.random_boxes = v.get<bool>();
    else if (key == "random_box_seed") c.random_box_seed = v.get<std::uint64_t>();
    else return false;
    return true;
  });
}

void geometry_from_json(const nlohmann::json& j, RunConfig& c) {
  for_keys(j, "geometry", [&](const std::string& key, const nlohmann::json& v) {
    if (key == "fps") c.geometry.fps = v.get<double>();
    else if (key == "width") c.geometry.width = v.get<double>();
    else if (key == "height") c.geometry.height = v.get<double>();
    else return false;
    return true;
  });
}

void prompts_from_json(const nlohmann::json& j, RunConfig& c) {
  for_keys(j, "prompts", [&](const std::string& key, const nlohmann::json& v) {
    if (key == "strategy") c.prompts.strategy = v.get<std::string>();
    else if (key == "n") c.prompts.n = v.get<int>();
    else if (key == "k") c.prompts.k = v.get<int>();
    else if (key == "seed") c.prompts.seed = v.get<std::uint64_t>();
    else if (key == "fixed_path") c.prompts.fixed_path = v.get<std::string>();
    else if (key == "embeddings") c.prompts.embeddings = v.get<std::string>();
    else return false;
    return true;
  });
}

void eval_from_json(const nlohmann::json& j, RunConfig& c) {
  for_keys(j, "eval", [&](const std::string& key, const nlohmann::json& v) {
    if (key == "K") c.eval.K = v.get<int>();
    else if (key == "temperature") c.eval.temperature = v.get<double>();
    else if (key == "seed") c.eval.seed = v.get<std::uint64_t>();
    else if (key == "split") c.eval.split = v.get<std::string>();
    else return false;
    return true;
  });
}

void rollout_from_json(const nlohmann::json& j, RunConfig& c) {
  for_keys(j, "rollout", [&](const std::string& key, const nlohmann::json& v) {
    if (key == "residual") c.rollout.residual = v.get<double>();
    else if (key == "heads") c.rollout.heads = v.get<std::string>();
    else if (key == "steps") c.rollout.steps = v.get<std::vector<int>>();
    else if (key == "top_k") c.rollout.top_k = v.get<int>();
    else if (key == "example") c.rollout.example = v.get<std::string>();
    else if (key == "branch") c.rollout.branch = v.get<std::string>();
    else return false;
    return true;
  });
}

void paths_from_json(const nlohmann::json& j, RunConfig& c) {
  for_keys(j, "paths", [&](const std::string& key, const nlohmann::json& v) {
    if (key == "data") c.data_dir = v.get<std::string>();
    else if (key == "out") c.out_dir = v.get<std::string>();
    else return false;
    return true;
  });
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("run config must be a JSON object");
  if (!j.contains("schema_version")) throw ParameterError("run config lacks schema_version");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "schema_version") {
      if (!value.is_number_integer() || value.get<int>() != kSchemaVersion) {
        throw ParameterError("unsupported schema_version " + value.dump() + " (expected " +
                             std::to_string(kSchemaVersion) + ")");
      }
    } else if (key == "model") {
      c.model = pte::pte_config_from_json(value, c.model);
    } else if (key == "train") {
      c.train = train::train_config_from_json(value);
    } else if (key == "selection") {
      selection_from_json(value, c);
    } else if (key == "geometry") {
      geometry_from_json(value, c);
    } else if (key == "synth") {
      c.synth = synthlab::synth_config_from_json(value, c.synth);
    } else if (key == "prompts") {
      prompts_from_json(value, c);
    } else if (key == "eval") {
      eval_from_json(value, c);
    } else if (key == "rollout") {
      rollout_from_json(value, c);
    } else if (key == "paths") {
      paths_from_json(value, c);
    } else {
      throw ParameterError("unknown config section '" + key + "'");
    }
  }
  c.selection.n_img = c.model.n_img;
  c.selection.n_obj = c.model.n_obj;
  c.model.validate();
  c.train.validate();
  c.selection.validate();
  return c;
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = c.schema_version;
  j["model"] = pte::to_json(c.model);
  j["train"] = train::to_json(c.train);
  j["selection"] = {{"threshold", c.selection.threshold},
                    {"use_location", c.selection.use_location},
                    {"use_category", c.selection.use_category},
                    {"random_boxes", c.selection.random_boxes},
                    {"random_box_seed", c.random_box_seed}};
  j["geometry"] = {{"fps", c.geometry.fps}, {"width", c.geometry.width}, {"height", c.geometry.height}};
  j["synth"] = synthlab::to_json(c.synth);
  j["prompts"] = {{"strategy", c.prompts.strategy}, {"n", c.prompts.n},
                  {"k", c.prompts.k},               {"seed", c.prompts.seed},
                  {"fixed_path", c.prompts.fixed_path}, {"embeddings", c.prompts.embeddings}};
  j["eval"] = {{"K", c.eval.K}, {"temperature", c.eval.temperature}, {"seed", c.eval.seed}, {"split", c.eval.split}};
  j["rollout"] = {{"residual", c.rollout.residual}, {"heads", c.rollout.heads}, {"steps", c.rollout.steps},
                  {"top_k", c.rollout.top_k},       {"example", c.rollout.example}, {"branch", c.rollout.branch}};
  j["paths"] = {{"data", c.data_dir}, {"out", c.out_dir}};
  return j;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

void write_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_json(cfg).dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace anticipate::cli
