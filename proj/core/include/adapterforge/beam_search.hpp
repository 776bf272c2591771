// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "adapterforge/plan.hpp"
#include "adapterforge/tensor.hpp"
#include "adapterforge/transformer.hpp"

namespace adapterforge {

/// Autoregressive next-token distribution over a set of live hypotheses.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  [[nodiscard]] virtual int vocab_size() const = 0;
  /// Feeds one token per live hypothesis; returns log-probabilities [hyps x V].
  virtual Tensor step(std::span<const int> tokens) = 0;
  /// New hypothesis i continues old hypothesis parents[i].
  virtual void reorder(std::span<const int> parents) = 0;
};

/// Scorer over a trained model for one source sentence.
class ModelScorer final : public StepScorer {
 public:
  ModelScorer(const TransformerModel& model, std::span<const int> src, const ActivationPlan& plan);
  [[nodiscard]] int vocab_size() const override { return vocab_; }
  Tensor step(std::span<const int> tokens) override { return decoder_->step(tokens); }
  void reorder(std::span<const int> parents) override { decoder_->reorder(parents); }

 private:
  int vocab_;
  std::unique_ptr<IncrementalDecoder> decoder_;
};

struct BeamOptions {
  int beam_size = 5;
  int max_len = 64;
  double length_alpha = 0.6;
  int bos = 1;
  int eos = 2;
};

struct Hypothesis {
  std::vector<int> tokens;  ///< generated tokens, </s> excluded
  double log_prob = 0.0;    ///< includes the </s> step when finished
  double score = 0.0;       ///< log_prob / length^alpha, length counting </s>
  bool finished = false;    ///< false when truncated at max_len
};

double normalized_score(double log_prob, int length, double alpha);

/// Highest-scoring finished hypothesis; when none finishes within max_len the
/// best truncated one is returned with finished = false.
Hypothesis beam_search(StepScorer& scorer, const BeamOptions& options);
Hypothesis greedy_search(StepScorer& scorer, BeamOptions options);

}  // namespace adapterforge
