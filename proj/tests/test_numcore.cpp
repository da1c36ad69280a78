// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "anticipate/errors.hpp"
#include "anticipate/numcore/grad_check.hpp"
#include "anticipate/numcore/ops.hpp"
#include "anticipate/numcore/random.hpp"

using namespace anticipate;
using namespace anticipate::numcore;

namespace {

Tensor<double> random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = rng.normal(0.0, scale);
  return t;
}

// Independent central-difference oracle over a plain function of one tensor.
std::vector<double> finite_difference(const std::function<double(const Tensor<double>&)>& f, Tensor<double> x,
                                      double eps) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double plus = f(x);
    x[i] = orig - eps;
    const double minus = f(x);
    x[i] = orig;
    g[i] = (plus - minus) / (2 * eps);
  }
  return g;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

}  // namespace

TEST(Tensor, RejectsZeroDimensionAndLengthMismatch) {
  EXPECT_THROW(Tensor<double>(Shape{2, 0}), DimensionError);
  EXPECT_THROW(Tensor<double>(Shape{2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  Tensor<double> t(Shape{2, 3}, 1.5);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.size(), 6u);
}

TEST(Linear, IdentityLikeArithmetic) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>(Shape{1, 2}, {1, 0}));
  auto w = tape.constant(Tensor<double>(Shape{2, 2}, {2, 0, 0, 3}));
  auto b = tape.constant(Tensor<double>(Shape{2}, {0, 0}));
  auto y = linear(x, w, b);
  EXPECT_EQ(y.value()[0], 2.0);
  EXPECT_EQ(y.value()[1], 0.0);
}

TEST(Linear, ZeroInputPassesBias) {
  Tape<double> tape;
  Rng rng(3);
  auto x = tape.constant(Tensor<double>(Shape{1, 2}, {0, 0}));
  auto w = tape.constant(random_tensor({2, 2}, rng));
  auto b = tape.constant(Tensor<double>(Shape{2}, {5, 7}));
  auto y = linear(x, w, b);
  EXPECT_EQ(y.value()[0], 5.0);
  EXPECT_EQ(y.value()[1], 7.0);
}

TEST(Linear, ShapeMismatchNamesBothShapes) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>(Shape{1, 3}));
  auto w = tape.constant(Tensor<double>(Shape{2, 2}));
  auto b = tape.constant(Tensor<double>(Shape{2}));
  try {
    linear(x, w, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[1,3]"), std::string::npos);
    EXPECT_NE(msg.find("[2,2]"), std::string::npos);
  }
}

TEST(Linear, WeightGradientMatchesFiniteDifferences) {
  Rng rng(11);
  const auto x0 = random_tensor({3, 4}, rng);
  const auto w0 = random_tensor({4, 5}, rng);
  const auto b0 = random_tensor({5}, rng);

  Tape<double> tape;
  Tensor<double> gw;
  auto y = sum(linear(tape.constant(x0), tape.leaf(w0, &gw), tape.constant(b0)));
  tape.backward(y);

  auto f = [&](const Tensor<double>& w) {
    Tape<double> t;
    return sum(linear(t.constant(x0), t.constant(w), t.constant(b0))).value()[0];
  };
  const auto fd = finite_difference(f, w0, 1e-5);
  for (std::size_t i = 0; i < fd.size(); ++i) EXPECT_LT(rel_err(gw[i], fd[i]), 1e-5) << i;
}

TEST(LayerNorm, ConstantRowMapsToZero) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>(Shape{1, 3}, 4.2));
  auto g = tape.constant(Tensor<double>(Shape{3}, 1.0));
  auto b = tape.constant(Tensor<double>(Shape{3}, 0.0));
  auto y = layer_norm(x, g, b, 1e-5);
  for (auto v : y.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, SymmetricPair) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>(Shape{1, 2}, {1, -1}));
  auto g = tape.constant(Tensor<double>(Shape{2}, 1.0));
  auto b = tape.constant(Tensor<double>(Shape{2}, 0.0));
  auto y = layer_norm(x, g, b, 1e-12);
  EXPECT_NEAR(y.value()[0], 1.0, 1e-3);
  EXPECT_NEAR(y.value()[1], -1.0, 1e-3);
}

TEST(LayerNorm, RejectsNonPositiveEps) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>(Shape{1, 2}, {1, -1}));
  auto g = tape.constant(Tensor<double>(Shape{2}, 1.0));
  auto b = tape.constant(Tensor<double>(Shape{2}, 0.0));
  EXPECT_THROW(layer_norm(x, g, b, 0.0), ParameterError);
}

TEST(LayerNorm, GradientMatchesFiniteDifferences) {
  ParamStore<double> params;
  Rng rng(5);
  params.add("x", random_tensor({4, 6}, rng));
  params.add("gamma", random_tensor({6}, rng));
  params.add("beta", random_tensor({6}, rng));
  const auto weights = random_tensor({4, 6}, rng);
  auto loss = [&](Tape<double>& tape, ParamStore<double>& p) {
    auto y = layer_norm(p.bind(tape, "x"), p.bind(tape, "gamma"), p.bind(tape, "beta"), 1e-5);
    return sum(mul_constant(y, weights));
  };
  EXPECT_LT(grad_check(loss, params, 1e-5).max_rel_error, 1e-5);
}

TEST(SoftmaxCrossEntropy, UniformTwoWay) {
  Tape<double> tape;
  const int target[] = {0};
  auto loss = softmax_cross_entropy(tape.constant(Tensor<double>(Shape{1, 2}, {0, 0})), target);
  EXPECT_NEAR(loss.value()[0], std::log(2.0), 1e-12);
}

TEST(SoftmaxCrossEntropy, SaturatedCorrectClass) {
  Tape<double> tape;
  const int target[] = {0};
  auto loss = softmax_cross_entropy(tape.constant(Tensor<double>(Shape{1, 2}, {100, 0})), target);
  EXPECT_LT(loss.value()[0], 1e-6);
}

TEST(SoftmaxCrossEntropy, GradientIsSoftmaxMinusOneHot) {
  Rng rng(8);
  const auto logits = random_tensor({1, 5}, rng, 2.0);
  const int target[] = {3};
  Tape<double> tape;
  Tensor<double> g;
  tape.backward(softmax_cross_entropy(tape.leaf(logits, &g), target));
  const auto p = softmax<double>(logits.values());
  for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(g[c], p[c] - (c == 3 ? 1.0 : 0.0), 1e-8);

  auto f = [&](const Tensor<double>& z) {
    Tape<double> t;
    return softmax_cross_entropy(t.constant(z), target).value()[0];
  };
  const auto fd = finite_difference(f, logits, 1e-5);
  for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(g[c], fd[c], 1e-8);
}

TEST(SoftmaxCrossEntropy, TargetOutOfRange) {
  Tape<double> tape;
  const int target[] = {2};
  EXPECT_THROW(softmax_cross_entropy(tape.constant(Tensor<double>(Shape{1, 2})), target), IndexError);
}

TEST(DropoutMask, RateZeroIsAllOnes) {
  auto m = dropout_mask<double>({4, 4}, 0.0, 1);
  for (auto v : m.values()) EXPECT_EQ(v, 1.0);
}

TEST(DropoutMask, HalfRateKeepsHalfAndIsDeterministic) {
  auto m = dropout_mask<double>({100000}, 0.5, 42);
  std::size_t kept = 0;
  double total = 0;
  for (auto v : m.values()) {
    kept += v != 0.0;
    total += v;
    EXPECT_TRUE(v == 0.0 || v == 2.0);
  }
  EXPECT_NEAR(static_cast<double>(kept) / 1e5, 0.5, 0.01);
  EXPECT_NEAR(total / 1e5, 1.0, 0.02);
  auto again = dropout_mask<double>({100000}, 0.5, 42);
  EXPECT_EQ(m.values().size(), again.values().size());
  EXPECT_TRUE(std::equal(m.values().begin(), m.values().end(), again.values().begin()));
}

TEST(DropoutMask, RateOneRejected) { EXPECT_THROW(dropout_mask<double>({2}, 1.0, 0), ParameterError); }

TEST(GradCheck, QuadraticIsExact) {
  ParamStore<double> params;
  Rng rng(2);
  params.add("a", random_tensor({3, 3}, rng));
  params.add("b", random_tensor({4}, rng));
  auto loss = [](Tape<double>& tape, ParamStore<double>& p) {
    return add(sum_squares(p.bind(tape, "a")), sum_squares(p.bind(tape, "b")));
  };
  EXPECT_LT(grad_check(loss, params, 1e-5).max_rel_error, 1e-9);
}

TEST(GradCheck, RejectsZeroEps) {
  ParamStore<double> params;
  params.add("a", Tensor<double>(Shape{1}, 1.0));
  auto loss = [](Tape<double>& tape, ParamStore<double>& p) { return sum_squares(p.bind(tape, "a")); };
  EXPECT_THROW(grad_check(loss, params, 0.0), ParameterError);
}

TEST(GradCheck, NonFiniteLossIsNumericError) {
  ParamStore<double> params;
  params.add("a", Tensor<double>(Shape{1}, std::numeric_limits<double>::infinity()));
  auto loss = [](Tape<double>& tape, ParamStore<double>& p) { return sum_squares(p.bind(tape, "a")); };
  EXPECT_THROW(grad_check(loss, params, 1e-5), NumericError);
}

TEST(Attention, SingleTokenAttendsToItself) {
  Tape<double> tape;
  Rng rng(1);
  auto q = tape.constant(random_tensor({1, 4}, rng));
  Tensor<double> probs;
  attention(q, q, q, {}, 2, &probs);
  EXPECT_EQ(probs[0], 1.0);
  EXPECT_EQ(probs[1], 1.0);
}

TEST(Attention, AllKeysMaskedIsNumericError) {
  Tape<double> tape;
  auto q = tape.constant(Tensor<double>(Shape{2, 4}, 1.0));
  const std::uint8_t mask[] = {1, 1};
  EXPECT_THROW(attention(q, q, q, mask, 2), NumericError);
}

// Every op's gradient is checked on randomized shapes up to 16x16. Each op is
// read out through a random linear functional so gradients are generic.
class OpGradients : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    rng_ = std::make_unique<Rng>(1000 + GetParam());
    heads_ = 1 + rng_->below(2);
    rows_ = 1 + rng_->below(16);
    cols_ = heads_ * (1 + rng_->below(8));
  }

  void check(const std::function<Var<double>(Tape<double>&, ParamStore<double>&)>& op) {
    Tensor<double> readout;
    {
      Tape<double> probe;
      auto out = op(probe, params_);
      readout = random_tensor(out.shape(), *rng_);
    }
    auto loss = [&](Tape<double>& tape, ParamStore<double>& p) { return sum(mul_constant(op(tape, p), readout)); };
    const auto r = grad_check(loss, params_, 1e-5);
    EXPECT_LT(r.max_rel_error, 1e-5) << r.worst_param << "[" << r.worst_index << "] analytic " << r.analytic
                                     << " numeric " << r.numeric;
  }

  std::unique_ptr<Rng> rng_;
  ParamStore<double> params_;
  std::size_t heads_ = 1, rows_ = 1, cols_ = 1;
};

TEST_P(OpGradients, Linear) {
  const std::size_t out = 1 + rng_->below(16);
  params_.add("x", random_tensor({rows_, cols_}, *rng_));
  params_.add("w", random_tensor({cols_, out}, *rng_));
  params_.add("b", random_tensor({out}, *rng_));
  check([](Tape<double>& t, ParamStore<double>& p) { return linear(p.bind(t, "x"), p.bind(t, "w"), p.bind(t, "b")); });
}

TEST_P(OpGradients, LayerNorm) {
  params_.add("x", random_tensor({rows_, cols_ + 1}, *rng_));
  params_.add("g", random_tensor({cols_ + 1}, *rng_));
  params_.add("b", random_tensor({cols_ + 1}, *rng_));
  check([](Tape<double>& t, ParamStore<double>& p) {
    return layer_norm(p.bind(t, "x"), p.bind(t, "g"), p.bind(t, "b"), 1e-5);
  });
}

TEST_P(OpGradients, Gelu) {
  params_.add("x", random_tensor({rows_, cols_}, *rng_, 2.0));
  check([](Tape<double>& t, ParamStore<double>& p) { return gelu(p.bind(t, "x")); });
}

TEST_P(OpGradients, Attention) {
  params_.add("q", random_tensor({rows_, cols_}, *rng_));
  params_.add("k", random_tensor({rows_, cols_}, *rng_));
  params_.add("v", random_tensor({rows_, cols_}, *rng_));
  std::vector<std::uint8_t> mask(rows_);
  for (std::size_t i = 1; i < rows_; ++i) mask[i] = rng_->bernoulli(0.3);
  const auto heads = heads_;
  check([mask, heads](Tape<double>& t, ParamStore<double>& p) {
    return attention(p.bind(t, "q"), p.bind(t, "k"), p.bind(t, "v"), mask, heads);
  });
}

TEST_P(OpGradients, RowPlumbing) {
  params_.add("a", random_tensor({rows_, cols_}, *rng_));
  params_.add("b", random_tensor({rows_, cols_}, *rng_));
  params_.add("table", random_tensor({3, cols_}, *rng_));
  std::vector<int> idx(rows_);
  for (auto& g : idx) g = static_cast<int>(rng_->below(4)) - 1;
  const auto drop = dropout_mask<double>({rows_, cols_}, 0.3, 17);
  const auto offset = random_tensor({rows_, cols_}, *rng_);
  const auto rows = rows_;
  check([=](Tape<double>& t, ParamStore<double>& p) {
    auto a = add(p.bind(t, "a"), gather_rows(p.bind(t, "table"), idx));
    auto b = scale(add_constant(mul_constant(p.bind(t, "b"), drop), offset), 0.7);
    auto both = concat_rows<double>({a, b});
    return slice_rows(both, rows / 2, rows);
  });
}

TEST_P(OpGradients, CrossEntropyAndReductions) {
  const std::size_t classes = 2 + rng_->below(8);
  params_.add("z", random_tensor({rows_, classes}, *rng_, 2.0));
  std::vector<int> targets(rows_);
  for (auto& t : targets) t = static_cast<int>(rng_->below(classes));
  check([targets](Tape<double>& t, ParamStore<double>& p) {
    auto z = p.bind(t, "z");
    return add(softmax_cross_entropy(z, targets), add(scale(mean(z), 0.5), scale(sum_squares(z), 0.1)));
  });
}

INSTANTIATE_TEST_SUITE_P(Randomized, OpGradients, ::testing::Range(0, 10));
