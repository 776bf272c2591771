// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "adapterforge/beam_search.hpp"
#include "adapterforge/corpus.hpp"
#include "adapterforge/transformer.hpp"
#include "adapterforge/vocabulary.hpp"

namespace adapterforge {

enum class NoiseKind { None, Swap, Mask };
std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& text);

struct NoisedLine {
  std::vector<int> tokens;
  std::vector<int> perturbed;  ///< sorted positions chosen for noise
};

/// Chooses exactly round(rate * len) distinct positions. Swap exchanges each
/// chosen position with its right neighbour (left for the last position),
/// applied in ascending order; mask replaces it with <mask>.
NoisedLine apply_noise(std::span<const int> line, NoiseKind kind, double rate, std::mt19937_64& rng);

/// Denoising pairs on route (lang -> lang): target is the clean line, source
/// the noised copy. Throws UsageError unless 0 <= rate < 1.
ParallelCorpus make_denoising_pairs(const MultiParallelCorpus& mono, const std::string& lang, NoiseKind kind,
                                    double rate, std::mt19937_64& rng);

/// Source becomes [<domain>] + source. A pair that already starts with a
/// domain tag is rejected, as is an unknown domain.
SentencePair prepend_domain_tag(const Vocabulary& vocab, SentencePair pair, const std::string& domain);
/// Drops leading domain tags (metric hygiene).
std::vector<int> strip_domain_tags(const Vocabulary& vocab, std::span<const int> tokens);

/// English-centric synthetic data for one language.
struct BackTranslation {
  ParallelCorpus to_lang;    ///< (synthetic en -> clean lang)
  ParallelCorpus from_lang;  ///< (clean lang -> synthetic en)
};

/// Translates `lang` text of a multiparallel corpus into English with the
/// language adapters of `lang` and en and no domain adapter. Throws
/// MissingPrerequisiteError without those adapters, CorpusError on empty input.
BackTranslation back_translate(const TransformerModel& model, const Vocabulary& vocab, const MultiParallelCorpus& mono,
                               const std::string& lang, const BeamOptions& options);

}  // namespace adapterforge
