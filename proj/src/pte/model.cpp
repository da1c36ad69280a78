// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/pte/model.hpp"

#include <cmath>

#include "anticipate/errors.hpp"
#include "anticipate/numcore/ops.hpp"
#include "anticipate/numcore/random.hpp"

namespace anticipate::pte {

using numcore::Rng;
using numcore::Shape;

std::vector<double> sinusoidal_encoding(int position, int D) {
  if (D <= 0 || D % 2 != 0) throw ParameterError("sinusoidal encoding needs an even D, got " + std::to_string(D));
  std::vector<double> pe(D);
  for (int i = 0; i < D / 2; ++i) {
    const double angle = position / std::pow(10000.0, 2.0 * i / D);
    pe[2 * i] = std::sin(angle);
    pe[2 * i + 1] = std::cos(angle);
  }
  return pe;
}

namespace {

Tensor<double> uniform_weight(Rng& rng, std::size_t in, std::size_t out) {
  Tensor<double> w(Shape{in, out});
  const double a = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& v : w.values()) v = rng.uniform(-a, a);
  return w;
}

Tensor<double> normal_table(Rng& rng, std::size_t rows, std::size_t cols, double sd) {
  Tensor<double> t(Shape{rows, cols});
  for (auto& v : t.values()) v = rng.normal(0.0, sd);
  return t;
}

void add_linear(ParamStore<double>& p, const std::string& name, Rng& rng, std::size_t in, std::size_t out) {
  p.add(name + ".weight", uniform_weight(rng, in, out));
  p.add(name + ".bias", Tensor<double>(Shape{out}));
}

void add_norm(ParamStore<double>& p, const std::string& name, std::size_t d) {
  p.add(name + ".gamma", Tensor<double>(Shape{d}, 1.0));
  p.add(name + ".beta", Tensor<double>(Shape{d}));
}

void init_branch(const PTEConfig& cfg, const std::string& prefix, std::uint64_t seed, ParamStore<double>& p) {
  Rng rng(seed);
  const std::size_t D = cfg.D;
  if (cfg.uses_clips()) add_linear(p, prefix + "clip_proj", rng, cfg.clip_input_dim, D);
  if (cfg.uses_objects()) {
    add_linear(p, prefix + "obj_proj", rng, cfg.object_input_dim, D);
    p.add(prefix + "frame_pe", Tensor<double>(Shape{static_cast<std::size_t>(cfg.n_img), D}));
  }
  p.add(prefix + "pred_tokens", normal_table(rng, cfg.Z, D, 0.02));
  p.add(prefix + "modality", normal_table(rng, 3, D, 0.02));
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string L = prefix + "layers." + std::to_string(l) + ".";
    add_norm(p, L + "ln1", D);
    p.add(L + "attn.wq", uniform_weight(rng, D, D));
    p.add(L + "attn.bq", Tensor<double>(Shape{D}));
    p.add(L + "attn.wk", uniform_weight(rng, D, D));
    p.add(L + "attn.wv", uniform_weight(rng, D, D));
    p.add(L + "attn.bv", Tensor<double>(Shape{D}));
    p.add(L + "attn.wo", uniform_weight(rng, D, D));
    p.add(L + "attn.bo", Tensor<double>(Shape{D}));
    add_norm(p, L + "ln2", D);
    add_linear(p, L + "ffn.fc1", rng, D, 4 * D);
    add_linear(p, L + "ffn.fc2", rng, 4 * D, D);
  }
  add_norm(p, prefix + "final_ln", D);
  add_linear(p, prefix + "verb_head", rng, D, cfg.verb_count);
  add_linear(p, prefix + "noun_head", rng, D, cfg.noun_count);
}

template <typename T>
Var<T> dropout(const Var<T>& x, double rate, const ForwardOptions& opts, std::uint64_t salt_a, std::uint64_t salt_b,
               std::uint64_t salt_c) {
  if (!opts.training || rate <= 0.0) return x;
  return numcore::mul_constant(x, numcore::dropout_mask<T>(x.shape(), rate,
                                                           numcore::derive_seed(opts.seed, {salt_a, salt_b, salt_c})));
}

}  // namespace

ParamStore<double> init_params(const PTEConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ParamStore<double> p;
  if (cfg.fusion == Fusion::kLate) {
    init_branch(cfg.branch(Fusion::kVideoOnly), "video.", numcore::derive_seed(seed, {1}), p);
    init_branch(cfg.branch(Fusion::kObjectOnly), "object.", numcore::derive_seed(seed, {2}), p);
  } else {
    init_branch(cfg, "", seed, p);
  }
  return p;
}

template <typename T>
Var<T> BoundParams<T>::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var<T> v;
  if (mutable_ != nullptr) {
    v = mutable_->bind(tape_, name);
  } else if (grads_ != nullptr) {
    v = params_.bind(tape_, name, *grads_);
  } else {
    v = tape_.constant(params_.value(name));
  }
  bound_.emplace(name, v);
  return v;
}

template <typename T>
SequenceInput<T> make_sequence_input(const PTEConfig& cfg, const datastore::LTAExample& example,
                                     const datastore::FeatureStore& store, const tokens::ObjectTokenSet& objects) {
  SequenceInput<T> in;
  in.example_id = example.id;
  if (cfg.uses_clips()) {
    if (static_cast<int>(example.clip_keys.size()) != cfg.N_v) {
      throw DimensionError("example " + example.id + " has " + std::to_string(example.clip_keys.size()) +
                           " clips, model expects " + std::to_string(cfg.N_v));
    }
    in.clips = Tensor<T>(Shape{static_cast<std::size_t>(cfg.N_v), static_cast<std::size_t>(cfg.clip_input_dim)});
    for (int k = 0; k < cfg.N_v; ++k) {
      auto row = store.clip(example.clip_keys[k]);
      if (static_cast<int>(row.size()) != cfg.clip_input_dim) {
        throw DimensionError("clip descriptor dim " + std::to_string(row.size()) + " != clip_input_dim " +
                             std::to_string(cfg.clip_input_dim));
      }
      std::copy(row.begin(), row.end(), in.clips.row(k).begin());
    }
  }
  if (cfg.uses_objects()) {
    if (static_cast<int>(objects.rows()) != cfg.object_tokens()) {
      throw DimensionError("example " + example.id + " has " + std::to_string(objects.rows()) +
                           " object tokens, model expects " + std::to_string(cfg.object_tokens()));
    }
    if (static_cast<int>(objects.feature_dim) != cfg.object_input_dim) {
      throw DimensionError("object feature dim " + std::to_string(objects.feature_dim) + " != object_input_dim " +
                           std::to_string(cfg.object_input_dim));
    }
    in.objects = Tensor<T>(Shape{objects.rows(), objects.feature_dim});
    std::copy(objects.features.begin(), objects.features.end(), in.objects.data());
    in.object_meta = objects.meta;
    for (const auto& m : objects.meta) in.object_masked.push_back(m.null ? 1 : 0);
  }
  return in;
}

template <typename T>
SequenceLayout sequence_layout(const PTEConfig& cfg, const SequenceInput<T>& input) {
  SequenceLayout layout;
  for (int k = 0; k < cfg.clip_tokens(); ++k) {
    layout.tokens.push_back({TokenKind::kClip, k, -1, -1});
    layout.masked.push_back(0);
  }
  if (cfg.uses_objects()) {
    if (input.object_meta.size() != static_cast<std::size_t>(cfg.object_tokens()) ||
        input.object_masked.size() != input.object_meta.size()) {
      throw DimensionError("object token metadata does not match the model configuration");
    }
    for (std::size_t r = 0; r < input.object_meta.size(); ++r) {
      const auto& m = input.object_meta[r];
      layout.tokens.push_back({TokenKind::kObject, m.segment, m.frame_slot, static_cast<int>(r)});
      layout.masked.push_back(input.object_masked[r]);
    }
  }
  for (int z = 0; z < cfg.Z; ++z) {
    layout.tokens.push_back({TokenKind::kPrediction, cfg.N_v + z, -1, -1});
    layout.masked.push_back(0);
  }
  return layout;
}

template <typename T>
Var<T> build_sequence(const PTEConfig& cfg, BoundParams<T>& params, const SequenceInput<T>& input,
                      const SequenceLayout& layout, const std::string& prefix) {
  auto& tape = params.tape();
  const auto L = static_cast<std::size_t>(cfg.sequence_length());
  if (layout.size() != L) {
    throw DimensionError("sequence has " + std::to_string(layout.size()) + " tokens, expected " + std::to_string(L));
  }
  std::vector<Var<T>> parts;
  if (cfg.uses_clips()) {
    if (input.clips.empty() || input.clips.rows() != static_cast<std::size_t>(cfg.N_v) ||
        input.clips.cols() != static_cast<std::size_t>(cfg.clip_input_dim)) {
      throw DimensionError("clip tokens " + numcore::shape_to_string(input.clips.shape()) + " do not match [" +
                           std::to_string(cfg.N_v) + "," + std::to_string(cfg.clip_input_dim) + "]");
    }
    parts.push_back(numcore::linear(tape.constant(input.clips), params(prefix + "clip_proj.weight"),
                                    params(prefix + "clip_proj.bias")));
  }
  if (cfg.uses_objects()) {
    if (input.objects.empty() || input.objects.rows() != static_cast<std::size_t>(cfg.object_tokens()) ||
        input.objects.cols() != static_cast<std::size_t>(cfg.object_input_dim)) {
      throw DimensionError("object tokens " + numcore::shape_to_string(input.objects.shape()) + " do not match [" +
                           std::to_string(cfg.object_tokens()) + "," + std::to_string(cfg.object_input_dim) + "]");
    }
    parts.push_back(numcore::linear(tape.constant(input.objects), params(prefix + "obj_proj.weight"),
                                    params(prefix + "obj_proj.bias")));
  }
  parts.push_back(params(prefix + "pred_tokens"));
  Var<T> x = numcore::concat_rows(parts);

  const auto D = static_cast<std::size_t>(cfg.D);
  Tensor<T> pe(Shape{L, D});
  std::vector<int> frame_idx(L, -1);
  std::vector<int> modality(L, 0);
  for (std::size_t r = 0; r < L; ++r) {
    const auto& tok = layout.tokens[r];
    const auto enc = sinusoidal_encoding(tok.segment, cfg.D);
    std::copy(enc.begin(), enc.end(), pe.row(r).begin());
    modality[r] = static_cast<int>(tok.kind);
    if (tok.kind == TokenKind::kObject) frame_idx[r] = tok.frame_slot;
  }
  x = numcore::add_constant(x, pe);
  if (cfg.uses_objects()) x = numcore::add(x, numcore::gather_rows(params(prefix + "frame_pe"), std::span<const int>(frame_idx)));
  x = numcore::add(x, numcore::gather_rows(params(prefix + "modality"), std::span<const int>(modality)));
  return x;
}

template <typename T>
Var<T> encoder_block(const PTEConfig& cfg, BoundParams<T>& params, const Var<T>& x,
                     const std::vector<std::uint8_t>& masked, int layer, const ForwardOptions& opts,
                     Tensor<T>* probs, const std::string& prefix) {
  using namespace numcore;
  const std::string P = prefix + "layers." + std::to_string(layer) + ".";
  const T eps = static_cast<T>(cfg.ln_eps);
  const auto salt = hash_string(prefix);
  Var<T> h = layer_norm(x, params(P + "ln1.gamma"), params(P + "ln1.beta"), eps);
  Var<T> q = linear(h, params(P + "attn.wq"), params(P + "attn.bq"));
  // No key bias: it shifts every logit of a query row equally, so softmax
  // cancels it and its gradient is identically zero.
  Var<T> k = linear(h, params(P + "attn.wk"), params.tape().constant(Tensor<T>(Shape{static_cast<std::size_t>(cfg.D)})));
  Var<T> v = linear(h, params(P + "attn.wv"), params(P + "attn.bv"));
  Var<T> a = attention(q, k, v, std::span<const std::uint8_t>(masked), static_cast<std::size_t>(cfg.n_heads), probs);
  Var<T> o = linear(a, params(P + "attn.wo"), params(P + "attn.bo"));
  o = dropout(o, cfg.dropout, opts, salt, static_cast<std::uint64_t>(layer), 1);
  Var<T> y = add(x, o);
  Var<T> h2 = layer_norm(y, params(P + "ln2.gamma"), params(P + "ln2.beta"), eps);
  Var<T> f = linear(gelu(linear(h2, params(P + "ffn.fc1.weight"), params(P + "ffn.fc1.bias"))),
                    params(P + "ffn.fc2.weight"), params(P + "ffn.fc2.bias"));
  f = dropout(f, cfg.dropout, opts, salt, static_cast<std::uint64_t>(layer), 2);
  return add(y, f);
}

template <typename T>
std::pair<Var<T>, Var<T>> decode(BoundParams<T>& params, const Var<T>& z, const std::string& prefix) {
  return {numcore::linear(z, params(prefix + "verb_head.weight"), params(prefix + "verb_head.bias")),
          numcore::linear(z, params(prefix + "noun_head.weight"), params(prefix + "noun_head.bias"))};
}

template <typename T>
BranchOutput<T> pte_forward(const PTEConfig& cfg, BoundParams<T>& params, const SequenceInput<T>& input,
                            const ForwardOptions& opts, const std::string& prefix) {
  if (cfg.fusion == Fusion::kLate) throw ParameterError("pte_forward runs one branch; use model_forward for late fusion");
  BranchOutput<T> out;
  out.layout = sequence_layout(cfg, input);
  Var<T> x = build_sequence(cfg, params, input, out.layout, prefix);
  x = dropout(x, opts.input_dropout, opts, numcore::hash_string(prefix), 1000, 0);
  for (int l = 0; l < cfg.n_layers; ++l) {
    Tensor<T> probs;
    x = encoder_block(cfg, params, x, out.layout.masked, l, opts, opts.keep_attention ? &probs : nullptr, prefix);
    if (opts.keep_attention) out.attentions.push_back(std::move(probs));
  }
  x = numcore::layer_norm(x, params(prefix + "final_ln.gamma"), params(prefix + "final_ln.beta"),
                          static_cast<T>(cfg.ln_eps));
  out.z = numcore::slice_rows(x, out.layout.size() - cfg.Z, cfg.Z);
  std::tie(out.verb_logits, out.noun_logits) = decode(params, out.z, prefix);
  return out;
}

template <typename T>
ModelOutput<T> model_forward(const PTEConfig& cfg, BoundParams<T>& params, const SequenceInput<T>& input,
                             const ForwardOptions& opts) {
  ModelOutput<T> out;
  if (cfg.fusion == Fusion::kLate) {
    out.branches.push_back(pte_forward(cfg.branch(Fusion::kVideoOnly), params, input, opts, "video."));
    out.branches.push_back(pte_forward(cfg.branch(Fusion::kObjectOnly), params, input, opts, "object."));
    const T half = static_cast<T>(0.5);
    out.verb_logits = numcore::scale(numcore::add(out.branches[0].verb_logits, out.branches[1].verb_logits), half);
    out.noun_logits = numcore::scale(numcore::add(out.branches[0].noun_logits, out.branches[1].noun_logits), half);
  } else {
    out.branches.push_back(pte_forward(cfg, params, input, opts, ""));
    out.verb_logits = out.branches[0].verb_logits;
    out.noun_logits = out.branches[0].noun_logits;
  }
  return out;
}

template <typename T>
Tensor<T> late_fuse(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("late_fuse: shapes " + numcore::shape_to_string(a.shape()) + " and " +
                         numcore::shape_to_string(b.shape()) + " differ");
  }
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) / T{2};
  return out;
}

template <typename T>
Probabilities predict(const PTEConfig& cfg, const ParamStore<T>& params, const SequenceInput<T>& input) {
  Tape<T> tape;
  BoundParams<T> bound(tape, params);
  auto out = model_forward(cfg, bound, input, ForwardOptions{});
  auto rows = [](const Tensor<T>& logits) {
    std::vector<std::vector<double>> p;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      auto s = numcore::softmax<T>(logits.row(r));
      p.emplace_back(s.begin(), s.end());
    }
    return p;
  };
  return {rows(out.verb_logits.value()), rows(out.noun_logits.value())};
}

#define ANTICIPATE_PTE_INSTANTIATE(T)                                                                             \
  template class BoundParams<T>;                                                                                \
  template SequenceInput<T> make_sequence_input<T>(const PTEConfig&, const datastore::LTAExample&,              \
                                                   const datastore::FeatureStore&, const tokens::ObjectTokenSet&); \
  template SequenceLayout sequence_layout<T>(const PTEConfig&, const SequenceInput<T>&);                         \
  template Var<T> build_sequence<T>(const PTEConfig&, BoundParams<T>&, const SequenceInput<T>&,                  \
                                    const SequenceLayout&, const std::string&);                                  \
  template Var<T> encoder_block<T>(const PTEConfig&, BoundParams<T>&, const Var<T>&,                             \
                                   const std::vector<std::uint8_t>&, int, const ForwardOptions&, Tensor<T>*,     \
                                   const std::string&);                                                          \
  template std::pair<Var<T>, Var<T>> decode<T>(BoundParams<T>&, const Var<T>&, const std::string&);              \
  template BranchOutput<T> pte_forward<T>(const PTEConfig&, BoundParams<T>&, const SequenceInput<T>&,            \
                                          const ForwardOptions&, const std::string&);                            \
  template ModelOutput<T> model_forward<T>(const PTEConfig&, BoundParams<T>&, const SequenceInput<T>&,           \
                                           const ForwardOptions&);                                               \
  template Tensor<T> late_fuse<T>(const Tensor<T>&, const Tensor<T>&);                                           \
  template Probabilities predict<T>(const PTEConfig&, const ParamStore<T>&, const SequenceInput<T>&);

ANTICIPATE_PTE_INSTANTIATE(float)
ANTICIPATE_PTE_INSTANTIATE(double)

}  // namespace anticipate::pte
