// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "adapterforge/errors.hpp"
#include "adapterforge/ops.hpp"

namespace adapterforge {
namespace {

/// Pairs of one source in fixed order, packed under max_tokens.
std::vector<Batch> sequential_batches(const PairSource& source, const BatchOptions& options) {
  std::vector<Batch> out;
  Batch current{source.route(), {}, false};
  for (std::size_t i = 0; i < source.size(); ++i) {
    Batch trial = current;
    trial.pairs.push_back(source.pair(i));
    if (!current.pairs.empty() && padded_tokens(trial, options) > options.max_tokens) {
      out.push_back(std::move(current));
      current = Batch{source.route(), {source.pair(i)}, false};
    } else {
      current = std::move(trial);
    }
  }
  if (!current.pairs.empty()) out.push_back(std::move(current));
  return out;
}

Var batch_loss(Tape& tape, const TransformerModel& model, const ModelBatch& mb, double smoothing,
               const RunOptions& opts) {
  Var enc = model.encode(tape, mb.src, mb.plan, opts);
  Var logits = model.decode_train(tape, enc, mb.src, mb.tgt_in, mb.plan, opts);
  return cross_entropy_smoothed(logits, mb.tgt_out, smoothing, tok::kPad);
}

}  // namespace

double Schedule::lr_at(std::int64_t step) const {
  if (step < 1) throw UsageError("learning-rate step must be >= 1");
  if (kind == Kind::Fixed) return lr;
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(std::max(warmup, 1));
  return lr * std::min(s / w, std::sqrt(w / s));
}

void Adam::step(const std::vector<Parameter*>& params, double lr) {
  for (const Parameter* p : params) {
    if (p->trainable && p->grad.empty()) throw UsageError("trainable parameter " + p->name + " has no gradient");
  }
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    auto [it, inserted] = moments_.try_emplace(p->name);
    if (inserted) {
      it->second.m = Tensor(p->value.shape());
      it->second.v = Tensor(p->value.shape());
    }
    real* m = it->second.m.data();
    real* v = it->second.v.data();
    real* w = p->value.data();
    const real* g = p->grad.data();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<real>(mi);
      v[i] = static_cast<real>(vi);
      w[i] = static_cast<real>(w[i] - lr * (mi / c1) / (std::sqrt(vi / c2) + options_.eps));
    }
    p->zero_grad();
  }
}

const Tensor* Adam::first_moment(const std::string& name) const {
  auto it = moments_.find(name);
  return it == moments_.end() ? nullptr : &it->second.m;
}

const Tensor* Adam::second_moment(const std::string& name) const {
  auto it = moments_.find(name);
  return it == moments_.end() ? nullptr : &it->second.v;
}

double validation_nll(const TransformerModel& model, const Vocabulary& vocab,
                      const std::vector<std::shared_ptr<const PairSource>>& sources, const PlanFn& plan_for,
                      int max_tokens) {
  BatchOptions options;
  options.max_tokens = max_tokens;
  double total = 0.0;
  std::int64_t tokens = 0;
  for (const auto& source : sources) {
    const ActivationPlan plan = plan_for(source->route());
    for (const Batch& batch : sequential_batches(*source, options)) {
      const ModelBatch mb = make_model_batch(vocab, batch, plan);
      Tape tape(false);
      const double mean = tape.value(batch_loss(tape, model, mb, 0.0, RunOptions{})).item();
      const auto n = std::count_if(mb.tgt_out.begin(), mb.tgt_out.end(), [](int t) { return t != tok::kPad; });
      total += mean * static_cast<double>(n);
      tokens += n;
    }
  }
  if (tokens == 0) throw CorpusError("validation set is empty");
  return total / static_cast<double>(tokens);
}

TrainResult train(TransformerModel& model, const Vocabulary& vocab, const TrainData& data, const TrainConfig& config,
                  const std::function<double()>& validator) {
  if (config.eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (config.max_updates < 0 || config.max_epochs < 0) throw ConfigError("update and epoch caps must be >= 0");
  set_trainable(model.params(), config.trainable_groups);
  std::vector<Parameter*> trainable;
  for (Parameter* p : model.params().all()) {
    if (p->trainable) trainable.push_back(p);
  }
  if (trainable.empty() && config.schedule.lr > 0.0) {
    throw ConfigError("phase " + config.phase + " trains no parameters but has a nonzero learning rate");
  }
  if (!data.plan_for) throw ConfigError("training data has no plan function");

  BatchStream stream(data.primary, config.batching, config.seed);
  if (!data.extra.empty()) stream.mix(data.extra, config.p_extra);
  std::map<std::string, ActivationPlan> plans;
  auto plan_of = [&](const Route& r) -> const ActivationPlan& {
    auto it = plans.find(r.key());
    if (it == plans.end()) {
      it = plans.emplace(r.key(), data.plan_for(r)).first;
      model.validate_plan(it->second);
    }
    return it->second;
  };
  auto validate = [&] {
    if (validator) return validator();
    if (data.validation.empty()) return std::numeric_limits<double>::quiet_NaN();
    return validation_nll(model, vocab, data.validation, plan_of, config.batching.max_tokens);
  };

  std::ofstream log;
  if (!config.log_path.empty()) {
    if (config.log_path.has_parent_path()) std::filesystem::create_directories(config.log_path.parent_path());
    log.open(config.log_path, std::ios::trunc);
  }
  TrainResult result;
  std::vector<Tensor> best_state;
  auto snapshot = [&] {
    best_state.clear();
    for (const Parameter* p : trainable) best_state.push_back(p->value);
  };
  auto record_validation = [&](std::int64_t update) {
    const double nll = validate();
    result.val_history.push_back(nll);
    if (log.is_open()) log << nlohmann::json{{"step", update}, {"val_nll", nll}}.dump() << '\n';
    if (std::isnan(nll)) return false;
    if (result.val_history.size() == 1 || nll < result.best_val_nll) {
      result.best_val_nll = nll;
      result.best_update = update;
      snapshot();
      return true;
    }
    return false;
  };

  record_validation(0);
  const auto pair_cap = static_cast<std::uint64_t>(config.max_epochs) * stream.primary_pairs();
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const RunOptions opts{true, &rng, nullptr, config.dropout};
  Adam adam;
  int stale = 0;
  while (result.updates < config.max_updates && stream.pairs_drawn() < pair_cap) {
    const Batch batch = stream.next();
    const ModelBatch mb = make_model_batch(vocab, batch, plan_of(batch.route));
    Tape tape(true);
    Var loss = batch_loss(tape, model, mb, config.label_smoothing, opts);
    const double value = tape.value(loss).item();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss at update " + std::to_string(result.updates + 1) + " on route " +
                         batch.route.key());
    }
    tape.backward(loss);
    ++result.updates;
    const double lr = config.schedule.lr_at(result.updates);
    std::vector<Parameter*> touched;
    for (Parameter* p : trainable) {
      if (!p->grad.empty()) touched.push_back(p);
    }
    adam.step(touched, lr);
    result.last_loss = value;
    if (log.is_open()) {
      log << nlohmann::json{{"step", result.updates}, {"loss", value}, {"lr", lr}, {"route", batch.route.key()}}.dump()
          << '\n';
    }
    if (result.updates % config.eval_every == 0) {
      stale = record_validation(result.updates) ? 0 : stale + 1;
      if (config.patience > 0 && stale >= config.patience) break;
    }
  }
  if (result.updates % config.eval_every != 0) record_validation(result.updates);
  // Without any validation score the final weights are kept.
  if (!best_state.empty()) {
    for (std::size_t i = 0; i < trainable.size(); ++i) trainable[i]->value = best_state[i];
  }
  result.pairs_drawn = stream.pairs_drawn();
  return result;
}

}  // namespace adapterforge
