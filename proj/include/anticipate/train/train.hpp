// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "anticipate/datastore/examples.hpp"
#include "anticipate/datastore/feature_pack.hpp"
#include "anticipate/evalkit/evalkit.hpp"
#include "anticipate/numcore/param_store.hpp"
#include "anticipate/pte/config.hpp"
#include "anticipate/pte/model.hpp"
#include "anticipate/tokens/tokens.hpp"

namespace anticipate::train {

// float32 for training runs, float64 for verification and determinism checks.
enum class Precision { kFloat32, kFloat64 };

Precision parse_precision(std::string_view name);
std::string precision_name(Precision p);

struct TrainConfig {
  double base_lr = 5e-4;
  double weight_decay = 1e-4;
  double momentum = 0.9;
  int batch_size = 32;
  int epochs = 30;
  int warmup_epochs = 3;
  double droptoken_rate = 0.5;  // object tokens masked per training pass
  double dropout_rate = 0.5;    // element-wise, on all tokens after the encodings
  std::uint64_t seed = 0;
  Precision precision = Precision::kFloat32;
  // Validation decoding.
  int K = 5;
  double temperature = 1.0;

  // warmup_epochs < epochs, rates in [0, 1), positive sizes.
  void validate() const;
};

nlohmann::ordered_json to_json(const TrainConfig& c);
// Unknown keys are a ParameterError; missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);

// Mean softmax cross-entropy over the Z steps of both heads:
// 0.5 * (CE_verb + CE_noun). Batch means are taken by the caller.
template <typename T>
numcore::Var<T> lta_loss(const numcore::Var<T>& verb_logits, const numcore::Var<T>& noun_logits,
                         std::span<const int> verb_targets, std::span<const int> noun_targets);

// Linear warmup to base_lr over `warmup_steps`, then half-cosine to zero.
double lr_at(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps, double base_lr);

template <typename T>
struct OptimizerState {
  numcore::ParamStore<T> velocity;  // values hold the buffers
  std::int64_t step = 0;

  static OptimizerState zeros_like(const numcore::ParamStore<T>& params) { return {params.zeros_like(), 0}; }
};

// g = grad + wd * theta; v = mu * v + g; theta -= lr * (g + mu * v).
// `grads` mirrors `params` with gradients stored as values. Every gradient is
// checked before anything is written; a non-finite one throws NumericError and
// leaves params and state untouched.
template <typename T>
void sgd_nesterov_step(numcore::ParamStore<T>& params, const numcore::ParamStore<T>& grads, OptimizerState<T>& state,
                       double lr, double momentum, double weight_decay);

// Training only: masks each object token independently with probability
// `rate`. Features are never changed. Clip and prediction tokens are not
// object tokens and so are never dropped.
template <typename T>
pte::SequenceInput<T> drop_token(pte::SequenceInput<T> input, double rate, std::uint64_t seed, bool training);

template <typename T>
struct LabeledInput {
  pte::SequenceInput<T> input;
  std::vector<int> target_verbs;
  std::vector<int> target_nouns;
};

struct InputSpec {
  tokens::SelectionConfig selection;
  tokens::FrameGeometry geometry;
  std::size_t prompt_count = 0;
  std::size_t descriptor_dim = 0;
  std::uint64_t random_box_seed = 0;
};

// Token selection plus feature lookup for every example. Object tokens are
// skipped for video-only models.
template <typename T>
std::vector<LabeledInput<T>> prepare_inputs(const pte::PTEConfig& cfg, const std::vector<datastore::LTAExample>& examples,
                                            const datastore::FeatureStore& store, const InputSpec& spec);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;  // at the last step of the epoch
  double loss = 0.0;
  double val_verb_ed = 0.0;
  double val_noun_ed = 0.0;
  double val_action_ed = 0.0;
  std::int64_t steps = 0;
};

nlohmann::ordered_json to_json(const EpochRecord& r);

struct FitOptions {
  // JSON-lines log, one record per epoch, flushed as epochs finish.
  std::optional<std::filesystem::path> log_path;
  // Written when training diverges, holding the parameters from before the
  // failing step.
  std::optional<std::filesystem::path> checkpoint_path;
  int threads = 0;  // 0: numcore::thread_count()
};

template <typename T>
struct FitResult {
  numcore::ParamStore<T> params;
  std::vector<EpochRecord> log;
};

// Minibatch SGD with Nesterov momentum and a per-step warmup/cosine schedule.
// Every example in a batch gets its own tape and gradient buffer; buffers are
// summed in example order, so results do not depend on the thread count.
// Late fusion trains on the sum of both branch losses. A non-finite loss or
// gradient stops training with NumericError after saving the last good
// parameters to options.checkpoint_path.
template <typename T>
FitResult<T> fit(const pte::PTEConfig& cfg, numcore::ParamStore<T> params, const std::vector<LabeledInput<T>>& train,
                 const std::vector<LabeledInput<T>>& val, const TrainConfig& tc, const FitOptions& options = {});

struct ValidationScores {
  double verb_ed = 0.0;
  double noun_ed = 0.0;
  double action_ed = 0.0;
};

// K candidate sequences per input, seeded by derive_seed(seed, {hash(example id)}).
template <typename T>
std::vector<evalkit::PredictionSet> predict_candidates(const pte::PTEConfig& cfg, const numcore::ParamStore<T>& params,
                                                       const std::vector<LabeledInput<T>>& inputs, int K,
                                                       double temperature, std::uint64_t seed, int threads = 0);

// ED@Z over `val` with the candidates of predict_candidates.
template <typename T>
ValidationScores validation_ed(const pte::PTEConfig& cfg, const numcore::ParamStore<T>& params,
                               const std::vector<LabeledInput<T>>& val, int K, double temperature, std::uint64_t seed,
                               int threads = 0);

}  // namespace anticipate::train
