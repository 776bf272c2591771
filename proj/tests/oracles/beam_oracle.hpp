// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace adapterforge::oracle {

struct Scored {
  std::vector<int> tokens;  ///< eos excluded
  double log_prob = 0.0;
  double score = 0.0;
  bool finished = false;
};

/// Enumerates every token sequence of length 1..max_len over `vocab` symbols
/// (vocab + vocab^2 + ... sequences). Sequences with an interior eos are
/// unreachable and skipped. Finished sequences (ending in eos) are ranked by
/// log_prob / len^alpha with len counting eos; if none exists, the best
/// length-max_len sequence wins. `log_prob_of(seq)` scores a whole sequence.
inline Scored brute_force_decode(int vocab, int max_len, int eos, double alpha,
                                 const std::function<double(const std::vector<int>&)>& log_prob_of,
                                 int* enumerated = nullptr) {
  std::optional<Scored> best_finished;
  std::optional<Scored> best_open;
  int count = 0;
  std::vector<int> seq;
  std::function<void()> rec = [&] {
    if (!seq.empty()) {
      ++count;
      bool interior_eos = false;
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) interior_eos = interior_eos || seq[i] == eos;
      if (!interior_eos) {
        const double lp = log_prob_of(seq);
        if (seq.back() == eos) {
          Scored s{{seq.begin(), seq.end() - 1}, lp, lp / std::pow(static_cast<double>(seq.size()), alpha), true};
          if (!best_finished || s.score > best_finished->score) best_finished = s;
        } else if (static_cast<int>(seq.size()) == max_len) {
          Scored s{seq, lp, lp / std::pow(static_cast<double>(seq.size()), alpha), false};
          if (!best_open || s.score > best_open->score) best_open = s;
        }
      }
    }
    if (static_cast<int>(seq.size()) == max_len) return;
    for (int v = 0; v < vocab; ++v) {
      seq.push_back(v);
      rec();
      seq.pop_back();
    }
  };
  rec();
  if (enumerated) *enumerated = count;
  return best_finished ? *best_finished : *best_open;
}

}  // namespace adapterforge::oracle
