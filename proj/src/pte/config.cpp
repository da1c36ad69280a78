// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/pte/config.hpp"

#include "anticipate/errors.hpp"

namespace anticipate::pte {

Fusion parse_fusion(const std::string& name) {
  if (name == "video_only") return Fusion::kVideoOnly;
  if (name == "object_only") return Fusion::kObjectOnly;
  if (name == "early") return Fusion::kEarly;
  if (name == "late") return Fusion::kLate;
  throw ParameterError("unknown fusion '" + name + "' (expected video_only|object_only|early|late)");
}

std::string fusion_name(Fusion f) {
  switch (f) {
    case Fusion::kVideoOnly: return "video_only";
    case Fusion::kObjectOnly: return "object_only";
    case Fusion::kEarly: return "early";
    case Fusion::kLate: return "late";
  }
  return "early";
}

void PTEConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ParameterError(std::string(name) + " must be >= 1");
  };
  positive(D, "D");
  positive(n_layers, "n_layers");
  positive(n_heads, "n_heads");
  positive(Z, "Z");
  positive(N_v, "N_v");
  positive(n_img, "n_img");
  positive(n_obj, "n_obj");
  positive(verb_count, "verb_count");
  positive(noun_count, "noun_count");
  positive(clip_input_dim, "clip_input_dim");
  positive(object_input_dim, "object_input_dim");
  if (D % n_heads != 0) {
    throw ParameterError("D=" + std::to_string(D) + " is not divisible by n_heads=" + std::to_string(n_heads));
  }
  if (D % 2 != 0) throw ParameterError("D must be even for sinusoidal encodings");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("dropout must lie in [0, 1)");
  if (!(ln_eps > 0.0)) throw ParameterError("ln_eps must be positive");
}

PTEConfig PTEConfig::branch(Fusion single) const {
  PTEConfig c = *this;
  c.fusion = single;
  return c;
}

nlohmann::ordered_json to_json(const PTEConfig& c) {
  nlohmann::ordered_json j;
  j["D"] = c.D;
  j["n_layers"] = c.n_layers;
  j["n_heads"] = c.n_heads;
  j["Z"] = c.Z;
  j["N_v"] = c.N_v;
  j["n_img"] = c.n_img;
  j["n_obj"] = c.n_obj;
  j["dropout"] = c.dropout;
  j["verb_count"] = c.verb_count;
  j["noun_count"] = c.noun_count;
  j["fusion"] = fusion_name(c.fusion);
  j["clip_input_dim"] = c.clip_input_dim;
  j["object_input_dim"] = c.object_input_dim;
  j["ln_eps"] = c.ln_eps;
  return j;
}

PTEConfig pte_config_from_json(const nlohmann::json& j, PTEConfig c) {
  if (!j.is_object()) throw ParameterError("model config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "D") c.D = value.get<int>();
      else if (key == "n_layers") c.n_layers = value.get<int>();
      else if (key == "n_heads") c.n_heads = value.get<int>();
      else if (key == "Z") c.Z = value.get<int>();
      else if (key == "N_v") c.N_v = value.get<int>();
      else if (key == "n_img") c.n_img = value.get<int>();
      else if (key == "n_obj") c.n_obj = value.get<int>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "verb_count") c.verb_count = value.get<int>();
      else if (key == "noun_count") c.noun_count = value.get<int>();
      else if (key == "fusion") c.fusion = parse_fusion(value.get<std::string>());
      else if (key == "clip_input_dim") c.clip_input_dim = value.get<int>();
      else if (key == "object_input_dim") c.object_input_dim = value.get<int>();
      else if (key == "ln_eps") c.ln_eps = value.get<double>();
      else throw ParameterError("unknown model config key '" + key + "'");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw ParameterError(std::string("model config: ") + e.what());
  }
  return c;
}

}  // namespace anticipate::pte
