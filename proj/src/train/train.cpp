// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/train/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

#include "anticipate/errors.hpp"
#include "anticipate/evalkit/evalkit.hpp"
#include "anticipate/numcore/ops.hpp"
#include "anticipate/numcore/parallel.hpp"
#include "anticipate/numcore/random.hpp"
#include "anticipate/pte/checkpoint.hpp"

namespace anticipate::train {

Precision parse_precision(std::string_view name) {
  if (name == "float32") return Precision::kFloat32;
  if (name == "float64") return Precision::kFloat64;
  throw ParameterError("unknown precision '" + std::string(name) + "' (expected float32 or float64)");
}

std::string precision_name(Precision p) { return p == Precision::kFloat32 ? "float32" : "float64"; }

void TrainConfig::validate() const {
  if (!(base_lr >= 0.0) || !std::isfinite(base_lr)) throw ParameterError("base_lr must be a finite value >= 0");
  if (!(weight_decay >= 0.0)) throw ParameterError("weight_decay must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("momentum must lie in [0, 1)");
  if (batch_size < 1) throw ParameterError("batch_size must be positive");
  if (epochs < 1) throw ParameterError("epochs must be positive");
  if (warmup_epochs < 0 || warmup_epochs >= epochs) {
    throw ParameterError("warmup_epochs=" + std::to_string(warmup_epochs) + " must lie in [0, epochs=" +
                         std::to_string(epochs) + ")");
  }
  if (!(droptoken_rate >= 0.0 && droptoken_rate < 1.0)) throw ParameterError("droptoken_rate must lie in [0, 1)");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ParameterError("dropout_rate must lie in [0, 1)");
  if (K < 1) throw ParameterError("K must be positive");
  if (!(temperature > 0.0)) throw ParameterError("temperature must be positive");
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["base_lr"] = c.base_lr;
  j["weight_decay"] = c.weight_decay;
  j["momentum"] = c.momentum;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["warmup_epochs"] = c.warmup_epochs;
  j["droptoken_rate"] = c.droptoken_rate;
  j["dropout_rate"] = c.dropout_rate;
  j["seed"] = c.seed;
  j["precision"] = precision_name(c.precision);
  j["K"] = c.K;
  j["temperature"] = c.temperature;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("train config must be a JSON object");
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "base_lr") c.base_lr = value.get<double>();
      else if (key == "weight_decay") c.weight_decay = value.get<double>();
      else if (key == "momentum") c.momentum = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "warmup_epochs") c.warmup_epochs = value.get<int>();
      else if (key == "droptoken_rate") c.droptoken_rate = value.get<double>();
      else if (key == "dropout_rate") c.dropout_rate = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "precision") c.precision = parse_precision(value.get<std::string>());
      else if (key == "K") c.K = value.get<int>();
      else if (key == "temperature") c.temperature = value.get<double>();
      else throw ParameterError("unknown train config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("train config key '" + key + "': " + e.what());
    }
  }
  return c;
}

template <typename T>
numcore::Var<T> lta_loss(const numcore::Var<T>& verb_logits, const numcore::Var<T>& noun_logits,
                         std::span<const int> verb_targets, std::span<const int> noun_targets) {
  auto verb = numcore::softmax_cross_entropy(verb_logits, verb_targets);
  auto noun = numcore::softmax_cross_entropy(noun_logits, noun_targets);
  return numcore::scale(numcore::add(verb, noun), static_cast<T>(0.5));
}

double lr_at(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps, double base_lr) {
  if (warmup_steps < 0 || warmup_steps >= total_steps) {
    throw ParameterError("warmup_steps=" + std::to_string(warmup_steps) + " must lie in [0, total_steps=" +
                         std::to_string(total_steps) + ")");
  }
  if (step < 0 || step >= total_steps) {
    throw ParameterError("step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + ")");
  }
  if (step < warmup_steps) return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  const double t = static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

template <typename T>
void sgd_nesterov_step(numcore::ParamStore<T>& params, const numcore::ParamStore<T>& grads, OptimizerState<T>& state,
                       double lr, double momentum, double weight_decay) {
  if (grads.names() != params.names() || state.velocity.names() != params.names()) {
    throw DimensionError("sgd_nesterov_step: gradient or velocity names do not mirror the parameters");
  }
  for (const auto& [name, e] : grads.entries()) {
    if (e.value.shape() != params.value(name).shape() || state.velocity.value(name).shape() != e.value.shape()) {
      throw DimensionError("sgd_nesterov_step: shape mismatch for '" + name + "'");
    }
    for (T g : e.value.values()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw NumericError("non-finite gradient for '" + name + "'; step aborted");
      }
    }
  }
  const T mu = static_cast<T>(momentum);
  const T wd = static_cast<T>(weight_decay);
  const T rate = static_cast<T>(lr);
  for (auto& [name, e] : params.entries()) {
    auto theta = e.value.values();
    auto grad = grads.value(name).values();
    auto vel = state.velocity.value(name).values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const T g = grad[i] + wd * theta[i];
      vel[i] = mu * vel[i] + g;
      theta[i] -= rate * (g + mu * vel[i]);
    }
  }
  ++state.step;
}

template <typename T>
pte::SequenceInput<T> drop_token(pte::SequenceInput<T> input, double rate, std::uint64_t seed, bool training) {
  if (!(rate >= 0.0) || rate >= 1.0) throw ParameterError("drop_token rate must lie in [0, 1)");
  if (!training || rate == 0.0) return input;
  numcore::Rng rng(seed);
  for (auto& m : input.object_masked) {
    if (rng.bernoulli(rate)) m = 1;
  }
  return input;
}

template <typename T>
std::vector<LabeledInput<T>> prepare_inputs(const pte::PTEConfig& cfg, const std::vector<datastore::LTAExample>& examples,
                                            const datastore::FeatureStore& store, const InputSpec& spec) {
  std::vector<LabeledInput<T>> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    if (static_cast<int>(ex.target_verbs.size()) != cfg.Z || static_cast<int>(ex.target_nouns.size()) != cfg.Z) {
      throw DimensionError("example " + ex.id + " has " + std::to_string(ex.target_verbs.size()) +
                           " targets, model predicts " + std::to_string(cfg.Z));
    }
    tokens::ObjectTokenSet objects;
    if (cfg.uses_objects()) {
      objects = tokens::build_object_tokens(ex, store, spec.selection, spec.prompt_count, spec.descriptor_dim,
                                            spec.geometry,
                                            numcore::derive_seed(spec.random_box_seed, {numcore::hash_string(ex.id)}));
    }
    out.push_back({pte::make_sequence_input<T>(cfg, ex, store, objects), ex.target_verbs, ex.target_nouns});
  }
  return out;
}

nlohmann::ordered_json to_json(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["lr"] = r.lr;
  j["loss"] = r.loss;
  j["val_verb_ed"] = r.val_verb_ed;
  j["val_noun_ed"] = r.val_noun_ed;
  j["val_action_ed"] = r.val_action_ed;
  j["steps"] = r.steps;
  return j;
}

template <typename T>
std::vector<evalkit::PredictionSet> predict_candidates(const pte::PTEConfig& cfg, const numcore::ParamStore<T>& params,
                                                       const std::vector<LabeledInput<T>>& inputs, int K,
                                                       double temperature, std::uint64_t seed, int threads) {
  std::vector<evalkit::PredictionSet> preds(inputs.size());
  numcore::parallel_for(inputs.size(), threads > 0 ? threads : numcore::thread_count(), [&](std::size_t i) {
    const auto probs = pte::predict(cfg, params, inputs[i].input);
    preds[i] = evalkit::generate_candidates(
        probs.verb, probs.noun, K, numcore::derive_seed(seed, {numcore::hash_string(inputs[i].input.example_id)}),
        temperature);
    preds[i].example_id = inputs[i].input.example_id;
  });
  return preds;
}

template <typename T>
ValidationScores validation_ed(const pte::PTEConfig& cfg, const numcore::ParamStore<T>& params,
                               const std::vector<LabeledInput<T>>& val, int K, double temperature, std::uint64_t seed,
                               int threads) {
  ValidationScores s;
  if (val.empty()) return s;
  const auto preds = predict_candidates(cfg, params, val, K, temperature, seed, threads);
  evalkit::GroundTruth gt;
  for (const auto& v : val) {
    evalkit::ActionSequence seq(v.target_verbs.size());
    for (std::size_t z = 0; z < seq.size(); ++z) seq[z] = {v.target_verbs[z], v.target_nouns[z]};
    gt[v.input.example_id] = std::move(seq);
  }
  const auto report = evalkit::evaluate(preds, gt, cfg.Z);
  return {report.verb_ed, report.noun_ed, report.action_ed};
}

namespace {

template <typename T>
double forward_backward(const pte::PTEConfig& cfg, const numcore::ParamStore<T>& params, const LabeledInput<T>& ex,
                        const pte::ForwardOptions& opts, double droptoken_rate, std::uint64_t droptoken_seed,
                        numcore::ParamStore<T>& grads) {
  const auto input = drop_token(ex.input, droptoken_rate, droptoken_seed, opts.training);
  numcore::Tape<T> tape;
  pte::BoundParams<T> bound(tape, params, grads);
  auto out = pte::model_forward(cfg, bound, input, opts);
  numcore::Var<T> loss;
  for (const auto& b : out.branches) {
    auto l = lta_loss(b.verb_logits, b.noun_logits, std::span<const int>(ex.target_verbs),
                      std::span<const int>(ex.target_nouns));
    loss = loss.valid() ? numcore::add(loss, l) : l;
  }
  const double value = static_cast<double>(loss.value()[0]);
  if (!std::isfinite(value)) return value;
  tape.backward(loss);
  return value;
}

// Checkpoints store f32, so parameters beyond its range count as diverged.
template <typename T>
std::optional<std::string> out_of_range_param(const numcore::ParamStore<T>& params) {
  constexpr double limit = std::numeric_limits<float>::max();
  for (const auto& [name, e] : params.entries()) {
    for (T v : e.value.values()) {
      if (!(std::abs(static_cast<double>(v)) <= limit)) return name;
    }
  }
  return std::nullopt;
}

void truncate_file(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
}

void append_line(const std::filesystem::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << line << '\n';
}

}  // namespace

template <typename T>
FitResult<T> fit(const pte::PTEConfig& cfg, numcore::ParamStore<T> params, const std::vector<LabeledInput<T>>& train,
                 const std::vector<LabeledInput<T>>& val, const TrainConfig& tc, const FitOptions& options) {
  cfg.validate();
  tc.validate();
  if (train.empty()) throw ParameterError("fit needs at least one training example");
  const int threads = options.threads > 0 ? options.threads : numcore::thread_count();

  const auto n = static_cast<std::int64_t>(train.size());
  const std::int64_t steps_per_epoch = (n + tc.batch_size - 1) / tc.batch_size;
  const std::int64_t total_steps = steps_per_epoch * tc.epochs;
  const std::int64_t warmup_steps = steps_per_epoch * tc.warmup_epochs;

  FitResult<T> result;
  auto state = OptimizerState<T>::zeros_like(params);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.log_path) truncate_file(*options.log_path);

  auto diverge = [&](const std::string& why) {
    std::string msg = "training diverged: " + why;
    if (options.checkpoint_path) {
      nlohmann::ordered_json extra;
      extra["status"] = "diverged";
      extra["step"] = state.step;
      pte::save_checkpoint(*options.checkpoint_path, cfg, params, extra);
      msg += "; last good parameters saved to '" + options.checkpoint_path->string() + "'";
    }
    throw NumericError(msg);
  };

  std::vector<numcore::ParamStore<T>> buffers;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    numcore::Rng shuffle_rng(numcore::derive_seed(tc.seed, {0x5348, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

    double loss_sum = 0.0;
    double lr = 0.0;
    for (std::int64_t s = 0; s < steps_per_epoch; ++s) {
      const auto begin = static_cast<std::size_t>(s * tc.batch_size);
      const auto end = std::min(train.size(), begin + static_cast<std::size_t>(tc.batch_size));
      const std::size_t batch = end - begin;
      while (buffers.size() < batch) buffers.push_back(params.zeros_like());
      std::vector<double> losses(batch);
      numcore::parallel_for(batch, threads, [&](std::size_t b) {
        const std::size_t idx = order[begin + b];
        buffers[b].zero_grad();
        pte::ForwardOptions opts;
        opts.training = true;
        opts.seed = numcore::derive_seed(tc.seed, {static_cast<std::uint64_t>(state.step), idx, 1});
        opts.input_dropout = tc.dropout_rate;
        losses[b] = forward_backward(cfg, params, train[idx], opts, tc.droptoken_rate,
                                     numcore::derive_seed(tc.seed, {static_cast<std::uint64_t>(state.step), idx, 2}),
                                     buffers[b]);
      });
      for (std::size_t b = 0; b < batch; ++b) {
        if (!std::isfinite(losses[b])) diverge("non-finite loss at step " + std::to_string(state.step));
        loss_sum += losses[b];
      }
      // Batch mean of the per-example gradients, reduced in example order,
      // stored as the values of buffer 0.
      auto& grads = buffers[0];
      const T inv = static_cast<T>(1.0 / static_cast<double>(batch));
      for (auto& [name, e] : grads.entries()) {
        auto dst = e.value.values();
        std::copy(e.grad.values().begin(), e.grad.values().end(), dst.begin());
        for (std::size_t b = 1; b < batch; ++b) {
          auto src = buffers[b].grad(name).values();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        }
        for (auto& v : dst) v *= inv;
      }
      auto snapshot = params;
      lr = lr_at(state.step, total_steps, warmup_steps, tc.base_lr);
      try {
        sgd_nesterov_step(params, grads, state, lr, tc.momentum, tc.weight_decay);
      } catch (const NumericError& e) {
        diverge(e.what());
      }
      if (const auto bad = out_of_range_param(params)) {
        const auto step = state.step - 1;
        params = std::move(snapshot);
        diverge("parameter '" + *bad + "' left the f32 range at step " + std::to_string(step));
      }
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = lr;
    rec.loss = loss_sum / static_cast<double>(n);
    rec.steps = state.step;
    if (!val.empty()) {
      const auto scores = validation_ed(cfg, params, val, tc.K, tc.temperature, tc.seed, threads);
      rec.val_verb_ed = scores.verb_ed;
      rec.val_noun_ed = scores.noun_ed;
      rec.val_action_ed = scores.action_ed;
    }
    result.log.push_back(rec);
    if (options.log_path) append_line(*options.log_path, to_json(rec).dump());
  }
  result.params = std::move(params);
  return result;
}

#define ANTICIPATE_TRAIN_INSTANTIATE(T)                                                                             \
  template numcore::Var<T> lta_loss<T>(const numcore::Var<T>&, const numcore::Var<T>&, std::span<const int>,        \
                                       std::span<const int>);                                                       \
  template struct OptimizerState<T>;                                                                                \
  template void sgd_nesterov_step<T>(numcore::ParamStore<T>&, const numcore::ParamStore<T>&, OptimizerState<T>&,    \
                                     double, double, double);                                                       \
  template pte::SequenceInput<T> drop_token<T>(pte::SequenceInput<T>, double, std::uint64_t, bool);                 \
  template std::vector<LabeledInput<T>> prepare_inputs<T>(const pte::PTEConfig&,                                    \
                                                          const std::vector<datastore::LTAExample>&,                \
                                                          const datastore::FeatureStore&, const InputSpec&);        \
  template std::vector<evalkit::PredictionSet> predict_candidates<T>(                                               \
      const pte::PTEConfig&, const numcore::ParamStore<T>&, const std::vector<LabeledInput<T>>&, int, double,       \
      std::uint64_t, int);                                                                                          \
  template ValidationScores validation_ed<T>(const pte::PTEConfig&, const numcore::ParamStore<T>&,                  \
                                             const std::vector<LabeledInput<T>>&, int, double, std::uint64_t, int); \
  template FitResult<T> fit<T>(const pte::PTEConfig&, numcore::ParamStore<T>, const std::vector<LabeledInput<T>>&,  \
                               const std::vector<LabeledInput<T>>&, const TrainConfig&, const FitOptions&);

ANTICIPATE_TRAIN_INSTANTIATE(float)
ANTICIPATE_TRAIN_INSTANTIATE(double)

}  // namespace anticipate::train
