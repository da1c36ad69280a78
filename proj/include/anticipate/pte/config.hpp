// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <json.hpp>

namespace anticipate::pte {

enum class Fusion { kVideoOnly, kObjectOnly, kEarly, kLate };

Fusion parse_fusion(const std::string& name);
std::string fusion_name(Fusion f);

struct PTEConfig {
  int D = 64;
  int n_layers = 3;
  int n_heads = 8;
  int Z = 20;
  int N_v = 3;
  int n_img = 4;
  int n_obj = 11;
  double dropout = 0.1;        // inside each block (attention and FFN outputs)
  int verb_count = 2;
  int noun_count = 2;
  Fusion fusion = Fusion::kEarly;
  int clip_input_dim = 1;
  int object_input_dim = 1;
  double ln_eps = 1e-5;

  void validate() const;

  bool uses_clips() const { return fusion != Fusion::kObjectOnly; }
  bool uses_objects() const { return fusion != Fusion::kVideoOnly; }
  int object_tokens() const { return uses_objects() ? N_v * n_img * n_obj : 0; }
  int clip_tokens() const { return uses_clips() ? N_v : 0; }
  // Single-branch sequence length; late fusion runs two branches.
  int sequence_length() const { return clip_tokens() + object_tokens() + Z; }

  // The single-modality branch used by late fusion.
  PTEConfig branch(Fusion single) const;
};

nlohmann::ordered_json to_json(const PTEConfig& cfg);
// Missing keys keep their defaults; unknown keys are a ParameterError.
PTEConfig pte_config_from_json(const nlohmann::json& j, PTEConfig base = {});

}  // namespace anticipate::pte
