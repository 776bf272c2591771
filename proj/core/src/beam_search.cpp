// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/beam_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adapterforge/errors.hpp"

namespace adapterforge {
namespace {

struct Candidate {
  int parent;
  int token;
  double log_prob;
};

Tensor encode_source(const TransformerModel& model, std::span<const int> src, const ActivationPlan& plan) {
  Tape tape(false);
  const TokenBatch batch = TokenBatch::from_rows({std::vector<int>(src.begin(), src.end())});
  return tape.value(model.encode(tape, batch, plan, RunOptions{}));
}

}  // namespace

ModelScorer::ModelScorer(const TransformerModel& model, std::span<const int> src, const ActivationPlan& plan)
    : vocab_(model.config().vocab_size),
      decoder_(std::make_unique<IncrementalDecoder>(model, encode_source(model, src, plan), plan, 1)) {}

double normalized_score(double log_prob, int length, double alpha) {
  return log_prob / std::pow(static_cast<double>(std::max(length, 1)), alpha);
}

Hypothesis beam_search(StepScorer& scorer, const BeamOptions& opt) {
  if (opt.beam_size < 1) throw UsageError("beam_size must be >= 1");
  if (opt.max_len < 1) throw UsageError("max_len must be >= 1");
  const int V = scorer.vocab_size();
  std::vector<std::vector<int>> alive{{}};
  std::vector<double> alive_lp{0.0};
  std::vector<int> last{opt.bos};
  std::vector<Hypothesis> finished;
  double best_finished = -std::numeric_limits<double>::infinity();
  const double max_norm = std::pow(static_cast<double>(opt.max_len), opt.length_alpha);

  for (int t = 1; t <= opt.max_len && !alive.empty(); ++t) {
    const Tensor lp = scorer.step(last);
    std::vector<Candidate> cands;
    cands.reserve(alive.size() * static_cast<std::size_t>(V));
    for (std::size_t h = 0; h < alive.size(); ++h) {
      for (int v = 0; v < V; ++v) {
        cands.push_back({static_cast<int>(h), v, alive_lp[h] + static_cast<double>(lp.at(static_cast<int>(h), v))});
      }
    }
    // Finishing competes for the same slots, so beam 1 is plain greedy search.
    const std::size_t keep = std::min(cands.size(), static_cast<std::size_t>(opt.beam_size));
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    cands.resize(keep);
    std::vector<std::vector<int>> next;
    std::vector<double> next_lp;
    std::vector<int> parents;
    last.clear();
    for (const auto& c : cands) {
      const auto& prefix = alive[static_cast<std::size_t>(c.parent)];
      if (c.token == opt.eos) {
        Hypothesis done{prefix, c.log_prob, normalized_score(c.log_prob, t, opt.length_alpha), true};
        best_finished = std::max(best_finished, done.score);
        finished.push_back(std::move(done));
        continue;
      }
      auto seq = prefix;
      seq.push_back(c.token);
      next.push_back(std::move(seq));
      next_lp.push_back(c.log_prob);
      parents.push_back(c.parent);
      last.push_back(c.token);
    }
    alive = std::move(next);
    alive_lp = std::move(next_lp);
    if (t == opt.max_len || alive.empty()) break;
    // Log-probabilities only fall, so an alive hypothesis can at best reach
    // its current log-prob over the largest length normaliser.
    if (!finished.empty()) {
      const double bound = *std::max_element(alive_lp.begin(), alive_lp.end()) / max_norm;
      if (best_finished >= bound) break;
    }
    scorer.reorder(parents);
  }

  auto better = [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; };
  if (!finished.empty()) return *std::min_element(finished.begin(), finished.end(), better);
  std::vector<Hypothesis> truncated;
  for (std::size_t h = 0; h < alive.size(); ++h) {
    truncated.push_back({alive[h], alive_lp[h],
                         normalized_score(alive_lp[h], static_cast<int>(alive[h].size()), opt.length_alpha), false});
  }
  return *std::min_element(truncated.begin(), truncated.end(), better);
}

Hypothesis greedy_search(StepScorer& scorer, BeamOptions options) {
  options.beam_size = 1;
  return beam_search(scorer, options);
}

}  // namespace adapterforge
