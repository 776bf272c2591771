// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "adapterforge/autograd.hpp"
#include "adapterforge/corpus.hpp"
#include "adapterforge/plan.hpp"
#include "adapterforge/routing.hpp"
#include "adapterforge/transformer.hpp"
#include "adapterforge/vocabulary.hpp"

namespace adapterforge {

/// Learning-rate schedule: constant, or linear warmup then inverse square
/// root decay.
struct Schedule {
  enum class Kind { Fixed, InvSqrt };
  Kind kind = Kind::Fixed;
  double lr = 5e-5;  ///< the constant, or the peak for InvSqrt
  int warmup = 400;

  static Schedule fixed(double lr) { return {Kind::Fixed, lr, 1}; }
  static Schedule inv_sqrt(double peak, int warmup) { return {Kind::InvSqrt, peak, warmup}; }
  /// Throws UsageError for step < 1.
  [[nodiscard]] double lr_at(std::int64_t step) const;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

/// Adam with bias correction. Moments exist only for parameters it has
/// updated.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  /// Updates every trainable parameter in `params` and clears its gradient.
  /// Frozen parameters are skipped untouched. A trainable parameter without
  /// a gradient is a UsageError.
  void step(const std::vector<Parameter*>& params, double lr);

  [[nodiscard]] std::int64_t steps() const noexcept { return steps_; }
  [[nodiscard]] const Tensor* first_moment(const std::string& name) const;
  [[nodiscard]] const Tensor* second_moment(const std::string& name) const;

 private:
  struct Moments {
    Tensor m;
    Tensor v;
  };
  AdamOptions options_;
  std::int64_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

struct TrainConfig {
  std::string phase = "pretrain";
  Schedule schedule = Schedule::fixed(5e-5);
  double label_smoothing = 0.1;
  double dropout = 0.1;
  std::int64_t max_updates = 1000;
  int max_epochs = 20;
  int eval_every = 200;
  /// Evaluations without improvement before stopping early; 0 disables.
  int patience = 0;
  std::set<std::string> trainable_groups;
  std::uint64_t seed = 1;
  BatchOptions batching;
  double p_extra = 0.0;
  /// JSON-lines training log; empty disables it.
  std::filesystem::path log_path;
};

using PlanFn = std::function<ActivationPlan(const Route&)>;

struct TrainData {
  std::vector<std::shared_ptr<const PairSource>> primary;
  std::vector<std::shared_ptr<const PairSource>> extra;
  std::vector<std::shared_ptr<const PairSource>> validation;
  PlanFn plan_for;
};

struct TrainResult {
  std::int64_t updates = 0;
  std::int64_t best_update = 0;
  double best_val_nll = 0.0;
  std::vector<double> val_history;
  double last_loss = 0.0;
  std::uint64_t pairs_drawn = 0;
};

/// Mean per-token NLL (no smoothing) over every pair of the sources.
double validation_nll(const TransformerModel& model, const Vocabulary& vocab,
                      const std::vector<std::shared_ptr<const PairSource>>& sources, const PlanFn& plan_for,
                      int max_tokens = 512);

/// Trains until min(max_updates, max_epochs epochs of primary pairs), or
/// until patience runs out. Validation runs at update 0 and every eval_every
/// updates; the trainable parameters are restored to the state with the
/// lowest validation NLL before returning (kept as trained when there is
/// nothing to validate on). `validator` replaces
/// validation_nll when set.
TrainResult train(TransformerModel& model, const Vocabulary& vocab, const TrainData& data, const TrainConfig& config,
                  const std::function<double()>& validator = {});

}  // namespace adapterforge
