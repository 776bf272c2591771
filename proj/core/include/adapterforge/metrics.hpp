// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace adapterforge {

/// Sufficient statistics of corpus BLEU.
struct BleuStats {
  std::array<std::int64_t, 4> correct{};
  std::array<std::int64_t, 4> total{};
  std::int64_t sys_len = 0;
  std::int64_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& other);
};

/// mteval-v13a tokenisation as in sacrebleu: entity unescaping, punctuation
/// split off (underscores included), periods and commas split unless next to
/// a digit, dashes split after a digit.
std::vector<std::string> tokenize_13a(std::string_view text);

BleuStats bleu_statistics(std::string_view hypothesis, std::string_view reference);
/// 4-gram BLEU in [0, 100] with brevity penalty and exponential smoothing of
/// zero-match orders.
double bleu_from_statistics(const BleuStats& stats);
/// Corpus BLEU, single reference. Throws UsageError on an empty corpus or
/// mismatched counts.
double corpus_bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references);

/// Per-order character n-gram counts: hyp, ref, common.
struct ChrfStats {
  std::vector<std::int64_t> hyp;
  std::vector<std::int64_t> ref;
  std::vector<std::int64_t> common;

  explicit ChrfStats(int order = 6) : hyp(order, 0), ref(order, 0), common(order, 0) {}
  ChrfStats& operator+=(const ChrfStats& other);
};

ChrfStats chrf_statistics(std::string_view hypothesis, std::string_view reference, int order = 6);
double chrf_from_statistics(const ChrfStats& stats, double beta = 2.0);
/// Corpus chrF in [0, 1]: character 6-grams, beta 2, whitespace removed.
double corpus_chrf(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                   int order = 6, double beta = 2.0);

}  // namespace adapterforge
