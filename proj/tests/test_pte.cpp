// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "anticipate/errors.hpp"
#include "anticipate/numcore/grad_check.hpp"
#include "anticipate/numcore/ops.hpp"
#include "anticipate/pte/checkpoint.hpp"
#include "anticipate/pte/model.hpp"
#include "pte_fixtures.hpp"
#include "test_util.hpp"

using namespace anticipate;
using namespace anticipate::pte;
using anticipate::testing::random_input;
using numcore::Shape;

namespace {

PTEConfig tiny(Fusion fusion = Fusion::kEarly) {
  PTEConfig c;
  c.D = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.Z = 3;
  c.N_v = 2;
  c.n_img = 2;
  c.n_obj = 3;
  c.verb_count = 4;
  c.noun_count = 5;
  c.clip_input_dim = 6;
  c.object_input_dim = 7;
  c.dropout = 0.0;
  c.fusion = fusion;
  return c;
}

std::vector<int> targets(int Z, int classes, std::uint64_t seed) {
  numcore::Rng rng(seed);
  std::vector<int> t(Z);
  for (auto& v : t) v = static_cast<int>(rng.below(classes));
  return t;
}

void zero(ParamStore<double>& p, const std::string& name) { p.value(name).fill(0.0); }

}  // namespace

TEST(Sinusoidal, PositionZero) {
  auto pe = sinusoidal_encoding(0, 8);
  EXPECT_EQ(pe, (std::vector<double>{0, 1, 0, 1, 0, 1, 0, 1}));
}

TEST(Sinusoidal, ClosedFormLeadingTerm) {
  const int D = 16;
  auto pe = sinusoidal_encoding(10000, D);
  EXPECT_NEAR(pe[D - 2], std::sin(10000.0 / std::pow(10000.0, (D - 2.0) / D)), 1e-12);
  EXPECT_NEAR(pe[D - 1], std::cos(10000.0 / std::pow(10000.0, (D - 2.0) / D)), 1e-12);
}

TEST(Sinusoidal, AdjacentPositions) {
  EXPECT_NEAR(sinusoidal_encoding(1, 4)[0] - sinusoidal_encoding(0, 4)[0], std::sin(1.0), 1e-15);
  EXPECT_THROW(sinusoidal_encoding(3, 7), ParameterError);
}

TEST(InitParams, FramePEZeroAndDeterministic) {
  auto cfg = tiny();
  auto a = init_params(cfg, 42);
  for (double v : a.value("frame_pe").values()) EXPECT_EQ(v, 0.0);
  auto b = init_params(cfg, 42);
  for (const auto& name : a.names()) {
    const auto& x = a.value(name).values();
    const auto& y = b.value(name).values();
    ASSERT_TRUE(std::equal(x.begin(), x.end(), y.begin())) << name;
  }
  EXPECT_NE(init_params(cfg, 43).value("pred_tokens")[0], a.value("pred_tokens")[0]);
}

TEST(InitParams, ModalityStd) {
  auto cfg = tiny();
  cfg.D = 3334;
  cfg.n_heads = 2;
  auto p = init_params(cfg, 5);
  const auto& m = p.value("modality");
  ASSERT_GE(m.size(), 10000u);
  double s = 0, ss = 0;
  for (double v : m.values()) {
    s += v;
    ss += v * v;
  }
  const double mean = s / m.size();
  const double sd = std::sqrt(ss / m.size() - mean * mean);
  EXPECT_NEAR(sd, 0.02, 0.002);
}

TEST(InitParams, LateFusionPrefixes) {
  auto p = init_params(tiny(Fusion::kLate), 1);
  EXPECT_TRUE(p.contains("video.clip_proj.weight"));
  EXPECT_FALSE(p.contains("video.obj_proj.weight"));
  EXPECT_TRUE(p.contains("object.frame_pe"));
  EXPECT_FALSE(p.contains("object.clip_proj.weight"));
}

TEST(BuildSequence, PaperLength) {
  PTEConfig cfg;
  cfg.N_v = 3;
  cfg.n_img = 4;
  cfg.n_obj = 11;
  cfg.Z = 20;
  EXPECT_EQ(cfg.sequence_length(), 155);
  cfg.D = 8;
  cfg.n_heads = 2;
  cfg.clip_input_dim = 3;
  cfg.object_input_dim = 3;
  auto params = init_params(cfg, 0);
  auto in = random_input<double>(cfg, 1);
  Tape<double> tape;
  BoundParams<double> bound(tape, params);
  auto layout = sequence_layout(cfg, in);
  EXPECT_EQ(layout.size(), 155u);
  EXPECT_EQ(build_sequence(cfg, bound, in, layout).shape(), (Shape{155, 8}));
}

TEST(BuildSequence, EncodingStructure) {
  auto cfg = tiny();
  auto params = init_params(cfg, 3);
  zero(params, "clip_proj.weight");
  zero(params, "obj_proj.weight");
  numcore::Rng rng(9);
  for (auto& v : params.value("frame_pe").values()) v = rng.normal();
  auto in = random_input<double>(cfg, 4, 0.0);
  Tape<double> tape;
  BoundParams<double> bound(tape, params);
  auto layout = sequence_layout(cfg, in);
  const auto x = build_sequence(cfg, bound, in, layout).value();
  const auto& mod = params.value("modality");
  const auto& fpe = params.value("frame_pe");
  const int D = cfg.D;
  const int first_obj = cfg.N_v;
  // Objects in the same segment and frame share every encoding.
  for (int d = 0; d < D; ++d) EXPECT_EQ(x.at(first_obj + 1, d), x.at(first_obj + 2, d));
  for (std::size_t r = 0; r < layout.size(); ++r) {
    const auto& tok = layout.tokens[r];
    const auto pe = sinusoidal_encoding(tok.segment, D);
    for (int d = 0; d < D; ++d) {
      double expected = pe[d] + mod.at(static_cast<int>(tok.kind), d);
      if (tok.kind == TokenKind::kObject) expected += fpe.at(tok.frame_slot, d);
      if (tok.kind == TokenKind::kPrediction) expected += params.value("pred_tokens").at(tok.segment - cfg.N_v, d);
      EXPECT_NEAR(x.at(r, d), expected, 1e-12) << "row " << r;
    }
  }
  // Prediction tokens continue the timeline.
  EXPECT_EQ(layout.tokens.back().segment, cfg.N_v + cfg.Z - 1);
}

TEST(BuildSequence, TokenCountMismatch) {
  auto cfg = tiny();
  auto params = init_params(cfg, 0);
  auto in = random_input<double>(cfg, 1);
  in.clips = numcore::Tensor<double>(Shape{3, 6});
  Tape<double> tape;
  BoundParams<double> bound(tape, params);
  EXPECT_THROW(build_sequence(cfg, bound, in, sequence_layout(cfg, in)), DimensionError);
}

TEST(EncoderBlock, ResidualIdentity) {
  auto cfg = tiny();
  auto params = init_params(cfg, 2);
  for (const char* n : {"layers.0.attn.wv", "layers.0.attn.bv", "layers.0.ffn.fc2.weight", "layers.0.ffn.fc2.bias"}) {
    zero(params, n);
  }
  numcore::Tensor<double> x0(Shape{5, 8});
  numcore::Rng rng(1);
  for (auto& v : x0.values()) v = rng.normal();
  Tape<double> tape;
  BoundParams<double> bound(tape, params);
  auto y = encoder_block(cfg, bound, tape.constant(x0), std::vector<std::uint8_t>(5, 0), 0, ForwardOptions{}, static_cast<numcore::Tensor<double>*>(nullptr));
  for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_EQ(y.value()[i], x0[i]);
}

TEST(EncoderBlock, SingleToken) {
  auto cfg = tiny();
  auto params = init_params(cfg, 2);
  numcore::Tensor<double> x0(Shape{1, 8}, 0.3);
  Tape<double> tape;
  BoundParams<double> bound(tape, params);
  numcore::Tensor<double> probs;
  encoder_block(cfg, bound, tape.constant(x0), std::vector<std::uint8_t>(1, 0), 0, ForwardOptions{}, &probs);
  EXPECT_EQ(probs.shape(), (Shape{2, 1, 1}));
  EXPECT_EQ(probs[0], 1.0);
  EXPECT_EQ(probs[1], 1.0);
}

TEST(Forward, ShapesAndStochasticAttention) {
  auto cfg = tiny();
  cfg.n_layers = 2;
  auto params = init_params(cfg, 8);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto in = random_input<double>(cfg, seed, 0.5);
    Tape<double> tape;
    BoundParams<double> bound(tape, params);
    ForwardOptions opts;
    opts.keep_attention = true;
    auto out = pte_forward(cfg, bound, in, opts);
    EXPECT_EQ(out.z.shape(), (Shape{3, 8}));
    EXPECT_EQ(out.verb_logits.shape(), (Shape{3, 4}));
    EXPECT_EQ(out.noun_logits.shape(), (Shape{3, 5}));
    ASSERT_EQ(out.attentions.size(), 2u);
    const std::size_t L = out.layout.size();
    for (const auto& a : out.attentions) {
      ASSERT_EQ(a.shape(), (Shape{2, L, L}));
      for (std::size_t h = 0; h < 2; ++h) {
        for (std::size_t i = 0; i < L; ++i) {
          double row = 0.0;
          for (std::size_t j = 0; j < L; ++j) {
            const double w = a[(h * L + i) * L + j];
            if (out.layout.masked[j]) {
              EXPECT_LE(std::abs(w), 1e-8);
            } else {
              row += w;
            }
          }
          EXPECT_NEAR(row, 1.0, 1e-6);
        }
      }
    }
  }
}

TEST(Forward, PermutingObjectsWithinFrame) {
  auto cfg = tiny();
  cfg.n_obj = 4;
  cfg.n_layers = 2;
  auto params = init_params(cfg, 13);
  auto in = random_input<double>(cfg, 5, 0.0);
  auto permuted = in;
  // Swap slots 1 and 3 of the first frame; positional metadata is identical.
  for (std::size_t c = 0; c < in.objects.cols(); ++c) {
    std::swap(permuted.objects.at(1, c), permuted.objects.at(3, c));
  }
  auto run = [&](const SequenceInput<double>& x) {
    Tape<double> tape;
    BoundParams<double> bound(tape, params);
    return pte_forward(cfg, bound, x, ForwardOptions{}).z.value();
  };
  auto a = run(in);
  auto b = run(permuted);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-6);
}

TEST(Forward, EvalDeterministicTrainingStochastic) {
  auto cfg = tiny();
  cfg.dropout = 0.3;
  auto params = init_params(cfg, 1);
  auto in = random_input<double>(cfg, 2);
  auto run = [&](bool training, std::uint64_t seed) {
    Tape<double> tape;
    BoundParams<double> bound(tape, params);
    ForwardOptions o;
    o.training = training;
    o.seed = seed;
    return pte_forward(cfg, bound, in, o).z.value();
  };
  auto e1 = run(false, 1), e2 = run(false, 2);
  EXPECT_TRUE(std::equal(e1.values().begin(), e1.values().end(), e2.values().begin()));
  auto t1 = run(true, 1), t1b = run(true, 1), t2 = run(true, 2);
  EXPECT_TRUE(std::equal(t1.values().begin(), t1.values().end(), t1b.values().begin()));
  EXPECT_FALSE(std::equal(t1.values().begin(), t1.values().end(), t2.values().begin()));
}

TEST(Forward, MaskedTokensDoNotInfluence) {
  auto cfg = tiny();
  auto params = init_params(cfg, 21);
  auto in = random_input<double>(cfg, 6, 0.0);
  in.object_masked[1] = 1;
  in.object_masked[4] = 1;
  auto altered = in;
  numcore::Rng rng(3);
  for (int r : {1, 4}) {
    for (auto& v : altered.objects.row(r)) v = rng.normal(0, 10);
  }
  const auto tv = targets(cfg.Z, cfg.verb_count, 1);
  auto run = [&](const SequenceInput<double>& x, ParamStore<double>& grads) {
    Tape<double> tape;
    BoundParams<double> bound(tape, params, grads);
    auto out = pte_forward(cfg, bound, x, ForwardOptions{});
    auto loss = numcore::softmax_cross_entropy(out.verb_logits, std::span<const int>(tv));
    tape.backward(loss);
    return loss.value()[0];
  };
  auto ga = params.zeros_like(), gb = params.zeros_like();
  EXPECT_EQ(run(in, ga), run(altered, gb));
  for (const auto& name : params.names()) {
    const auto& a = ga.grad(name);
    const auto& b = gb.grad(name);
    if (a.empty() || b.empty()) {
      EXPECT_EQ(a.empty(), b.empty()) << name;
      continue;
    }
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]) << name << "[" << i << "]";
  }
}

TEST(Decode, ZeroAndShared) {
  auto cfg = tiny();
  auto params = init_params(cfg, 4);
  zero(params, "verb_head.weight");
  zero(params, "noun_head.weight");
  Tape<double> tape;
  BoundParams<double> bound(tape, params);
  auto [v0, n0] = decode(bound, tape.constant(numcore::Tensor<double>(Shape{3, 8})));
  for (double x : v0.value().values()) EXPECT_EQ(x, 0.0);
  for (double x : n0.value().values()) EXPECT_EQ(x, 0.0);

  auto fresh = init_params(cfg, 4);
  Tape<double> t2;
  BoundParams<double> b2(t2, fresh);
  numcore::Tensor<double> z(Shape{2, 8}, 0.7);
  auto [v, n] = decode(b2, t2.constant(z));
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(v.value().at(0, c), v.value().at(1, c));
  for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(n.value().at(0, c), n.value().at(1, c));
}

TEST(Decode, GradCheck) {
  auto cfg = tiny();
  auto params = init_params(cfg, 4);
  ParamStore<double> heads;
  for (const auto& name : params.names()) {
    if (name.find("_head") != std::string::npos) heads.add(name, params.value(name));
  }
  numcore::Tensor<double> z(Shape{3, 8});
  numcore::Rng rng(2);
  for (auto& v : z.values()) v = rng.normal();
  const auto tn = targets(3, 5, 3);
  auto res = numcore::grad_check(
      [&](numcore::Tape<double>& tape, ParamStore<double>& p) {
        BoundParams<double> bound(tape, p);
        auto [v, n] = decode(bound, tape.constant(z));
        return numcore::add(numcore::sum(v), numcore::softmax_cross_entropy(n, std::span<const int>(tn)));
      },
      heads, 1e-5);
  EXPECT_LT(res.max_rel_error, 1e-5) << res.worst_param;
}

TEST(Forward, EndToEndGradCheckTiny) {
  auto cfg = tiny();
  auto params = init_params(cfg, 17);
  auto in = random_input<double>(cfg, 18);
  const auto tv = targets(cfg.Z, cfg.verb_count, 1);
  const auto tn = targets(cfg.Z, cfg.noun_count, 2);
  auto res = numcore::grad_check(
      [&](numcore::Tape<double>& tape, ParamStore<double>& p) {
        BoundParams<double> bound(tape, p);
        auto out = pte_forward(cfg, bound, in, ForwardOptions{});
        auto lv = numcore::softmax_cross_entropy(out.verb_logits, std::span<const int>(tv));
        auto ln = numcore::softmax_cross_entropy(out.noun_logits, std::span<const int>(tn));
        return numcore::scale(numcore::add(lv, ln), 0.5);
      },
      params, 1e-5);
  EXPECT_LT(res.max_rel_error, 1e-5) << res.worst_param << "[" << res.worst_index << "] analytic " << res.analytic
                                     << " numeric " << res.numeric;
}

TEST(Forward, MeanZGradCheck) {
  // Checked at the initial parameters and at perturbed ones. The mean of a
  // LayerNorm output is mean(gamma * xhat) + mean(beta), so upstream gradients
  // are tiny (exactly zero at init) and sit close to finite-difference noise.
  auto cfg = tiny();
  for (std::uint64_t seed : {31u, 41u, 51u}) {
    for (bool perturbed : {false, true}) {
      auto params = init_params(cfg, seed);
      if (perturbed) anticipate::testing::perturb(params, seed + 2);
      auto in = random_input<double>(cfg, seed + 1);
      auto res = numcore::grad_check(
          [&](numcore::Tape<double>& tape, ParamStore<double>& p) {
            BoundParams<double> bound(tape, p);
            return numcore::mean(pte_forward(cfg, bound, in, ForwardOptions{}).z);
          },
          params, 1e-5);
      EXPECT_LT(res.max_rel_error, 1e-5) << "seed " << seed << (perturbed ? " perturbed " : " init ")
                                         << res.worst_param << "[" << res.worst_index << "] analytic "
                                         << res.analytic << " numeric " << res.numeric;
    }
  }
}

TEST(LateFuse, Arithmetic) {
  numcore::Tensor<double> a(Shape{2}, std::vector<double>{2, 0});
  numcore::Tensor<double> b(Shape{2}, std::vector<double>{0, 2});
  auto f = late_fuse(a, b);
  EXPECT_EQ(f[0], 1.0);
  EXPECT_EQ(f[1], 1.0);
  auto same = late_fuse(a, a);
  EXPECT_EQ(same[0], 2.0);
  EXPECT_THROW(late_fuse(a, numcore::Tensor<double>(Shape{3})), DimensionError);
}

TEST(LateFuse, ModelAveragesBranches) {
  auto cfg = tiny(Fusion::kLate);
  auto params = init_params(cfg, 6);
  auto in = random_input<double>(cfg, 7);
  Tape<double> tape;
  BoundParams<double> bound(tape, params);
  auto out = model_forward(cfg, bound, in, ForwardOptions{});
  ASSERT_EQ(out.branches.size(), 2u);
  auto expect = late_fuse(out.branches[0].verb_logits.value(), out.branches[1].verb_logits.value());
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_DOUBLE_EQ(out.verb_logits.value()[i], expect[i]);
}

TEST(Checkpoint, RoundTrip) {
  anticipate::testing::TempDir dir;
  auto cfg = tiny(Fusion::kLate);
  auto params = init_params_as<float>(cfg, 3);
  save_checkpoint(dir / "model.fpk", cfg, params, {{"epoch", 4}});
  EXPECT_TRUE(std::filesystem::exists(dir / "model.json"));
  auto ck = load_checkpoint<float>(dir / "model.fpk");
  EXPECT_EQ(ck.config.fusion, Fusion::kLate);
  EXPECT_EQ(ck.extra["epoch"], 4);
  ASSERT_EQ(ck.params.names(), params.names());
  for (const auto& name : params.names()) {
    const auto& a = params.value(name);
    const auto& b = ck.params.value(name);
    ASSERT_EQ(a.shape(), b.shape());
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin())) << name;
  }
}

TEST(Config, JsonRoundTripAndUnknownKey) {
  auto cfg = tiny(Fusion::kObjectOnly);
  auto back = pte_config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  EXPECT_THROW(pte_config_from_json(nlohmann::json{{"Dee", 3}}), ParameterError);
  auto bad = cfg;
  bad.n_heads = 3;
  EXPECT_THROW(bad.validate(), ParameterError);
}
