// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "anticipate/datastore/examples.hpp"
#include "anticipate/datastore/feature_pack.hpp"
#include "anticipate/numcore/param_store.hpp"
#include "anticipate/numcore/tape.hpp"
#include "anticipate/pte/config.hpp"
#include "anticipate/tokens/tokens.hpp"

namespace anticipate::pte {

using numcore::ParamStore;
using numcore::Tape;
using numcore::Tensor;
using numcore::Var;

// pe[2i] = sin(pos / 10000^(2i/D)), pe[2i+1] = cos(same).
std::vector<double> sinusoidal_encoding(int position, int D);

// Parameter names for one branch, e.g. "layers.0.attn.wq". Late fusion
// prefixes them with "video." and "object.".
ParamStore<double> init_params(const PTEConfig& cfg, std::uint64_t seed);

template <typename T>
ParamStore<T> init_params_as(const PTEConfig& cfg, std::uint64_t seed) {
  return init_params(cfg, seed).template cast<T>();
}

// Parameter access for one forward pass. Each parameter becomes exactly one
// node on the tape; gradients go to the store itself, to a separate gradient
// buffer, or nowhere (frozen evaluation).
template <typename T>
class BoundParams {
 public:
  BoundParams(Tape<T>& tape, ParamStore<T>& params) : tape_(tape), params_(params), mutable_(&params) {}
  BoundParams(Tape<T>& tape, const ParamStore<T>& params, ParamStore<T>& grads)
      : tape_(tape), params_(params), grads_(&grads) {}
  // Frozen: parameters enter the tape as constants.
  BoundParams(Tape<T>& tape, const ParamStore<T>& params) : tape_(tape), params_(params) {}

  Var<T> operator()(const std::string& name);
  Tape<T>& tape() { return tape_; }
  const ParamStore<T>& params() const { return params_; }

 private:
  Tape<T>& tape_;
  const ParamStore<T>& params_;
  ParamStore<T>* mutable_ = nullptr;
  ParamStore<T>* grads_ = nullptr;
  std::map<std::string, Var<T>> bound_;
};

enum class TokenKind { kClip = 0, kObject = 1, kPrediction = 2 };

struct SequenceToken {
  TokenKind kind = TokenKind::kClip;
  int segment = 0;     // sinusoidal position: 0..N_v-1 observed, N_v+z for prediction z
  int frame_slot = -1; // objects only
  int object = -1;     // row in the object token set
};

struct SequenceLayout {
  std::vector<SequenceToken> tokens;
  std::vector<std::uint8_t> masked;
  std::size_t size() const noexcept { return tokens.size(); }
};

// Model inputs for one example.
template <typename T>
struct SequenceInput {
  std::string example_id;
  Tensor<T> clips;    // [N_v, clip_input_dim], empty for object-only
  Tensor<T> objects;  // [N_o, object_input_dim], empty for video-only
  std::vector<tokens::TokenMeta> object_meta;
  std::vector<std::uint8_t> object_masked;  // null padding plus DropToken
};

template <typename T>
SequenceInput<T> make_sequence_input(const PTEConfig& cfg, const datastore::LTAExample& example,
                                     const datastore::FeatureStore& store, const tokens::ObjectTokenSet& objects);

// Token order: clips, objects, prediction tokens.
template <typename T>
SequenceLayout sequence_layout(const PTEConfig& cfg, const SequenceInput<T>& input);

struct ForwardOptions {
  bool training = false;
  std::uint64_t seed = 0;
  bool keep_attention = false;
  // Element-wise dropout on every token after the positional and modality
  // encodings are added. Training only.
  double input_dropout = 0.0;
};

// Projected tokens plus segment, frame and modality encodings: [L, D].
template <typename T>
Var<T> build_sequence(const PTEConfig& cfg, BoundParams<T>& params, const SequenceInput<T>& input,
                      const SequenceLayout& layout, const std::string& prefix = "");

// Pre-norm block: x + Drop(MHA(LN(x))), then + Drop(FFN(LN(.))).
template <typename T>
Var<T> encoder_block(const PTEConfig& cfg, BoundParams<T>& params, const Var<T>& x,
                     const std::vector<std::uint8_t>& masked, int layer, const ForwardOptions& opts,
                     Tensor<T>* attention, const std::string& prefix = "");

template <typename T>
struct BranchOutput {
  Var<T> z;            // [Z, D]
  Var<T> verb_logits;  // [Z, verb_count]
  Var<T> noun_logits;  // [Z, noun_count]
  std::vector<Tensor<T>> attentions;  // per layer, [heads, L, L]
  SequenceLayout layout;
};

// One single-modality or early-fusion encoder plus the shared heads.
template <typename T>
BranchOutput<T> pte_forward(const PTEConfig& cfg, BoundParams<T>& params, const SequenceInput<T>& input,
                            const ForwardOptions& opts, const std::string& prefix = "");

// Heads are shared across all Z steps.
template <typename T>
std::pair<Var<T>, Var<T>> decode(BoundParams<T>& params, const Var<T>& z, const std::string& prefix = "");

template <typename T>
struct ModelOutput {
  Var<T> verb_logits;  // fused for late fusion
  Var<T> noun_logits;
  std::vector<BranchOutput<T>> branches;
};

template <typename T>
ModelOutput<T> model_forward(const PTEConfig& cfg, BoundParams<T>& params, const SequenceInput<T>& input,
                             const ForwardOptions& opts);

// Elementwise mean of two logit tensors.
template <typename T>
Tensor<T> late_fuse(const Tensor<T>& a, const Tensor<T>& b);

// Softmax probabilities [Z, V] for evaluation (frozen params, no dropout).
struct Probabilities {
  std::vector<std::vector<double>> verb;
  std::vector<std::vector<double>> noun;
};

template <typename T>
Probabilities predict(const PTEConfig& cfg, const ParamStore<T>& params, const SequenceInput<T>& input);

}  // namespace anticipate::pte
