// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "anticipate/numcore/random.hpp"
#include "anticipate/pte/model.hpp"

namespace anticipate::testing {

// Random model input for `cfg`; roughly `null_rate` of object tokens are null
// padding (zero features, masked), never slot 0 of a frame.
template <typename T>
pte::SequenceInput<T> random_input(const pte::PTEConfig& cfg, std::uint64_t seed, double null_rate = 0.25) {
  numcore::Rng rng(seed);
  pte::SequenceInput<T> in;
  in.example_id = "synthetic";
  if (cfg.uses_clips()) {
    in.clips = numcore::Tensor<T>(numcore::Shape{static_cast<std::size_t>(cfg.N_v),
                                                 static_cast<std::size_t>(cfg.clip_input_dim)});
    for (auto& v : in.clips.values()) v = static_cast<T>(rng.normal());
  }
  if (cfg.uses_objects()) {
    const auto n = static_cast<std::size_t>(cfg.object_tokens());
    in.objects = numcore::Tensor<T>(numcore::Shape{n, static_cast<std::size_t>(cfg.object_input_dim)});
    std::size_t r = 0;
    for (int s = 0; s < cfg.N_v; ++s) {
      for (int f = 0; f < cfg.n_img; ++f) {
        for (int o = 0; o < cfg.n_obj; ++o, ++r) {
          tokens::TokenMeta m{s, f, o, s, f, o == 0, o > 0 && rng.bernoulli(null_rate)};
          if (!m.null) {
            for (auto& v : in.objects.row(r)) v = static_cast<T>(rng.normal());
          }
          in.object_meta.push_back(m);
          in.object_masked.push_back(m.null ? 1 : 0);
        }
      }
    }
  }
  return in;
}

// Moves every parameter off its structured initial value (unit LayerNorm
// gains, zero biases, zero frame encodings) so gradient checks run at a
// generic point.
inline void perturb(numcore::ParamStore<double>& params, std::uint64_t seed, double sd = 0.2) {
  numcore::Rng rng(seed);
  for (auto& [name, e] : params.entries()) {
    for (auto& v : e.value.values()) v += rng.normal(0.0, sd);
  }
}

}  // namespace anticipate::testing
