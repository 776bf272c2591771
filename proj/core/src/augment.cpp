// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adapterforge/errors.hpp"
#include "adapterforge/evaluation.hpp"
#include "adapterforge/parallel.hpp"

namespace adapterforge {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None:
      return "none";
    case NoiseKind::Swap:
      return "swap";
    case NoiseKind::Mask:
      return "mask";
  }
  return "?";
}

NoiseKind parse_noise_kind(const std::string& text) {
  if (text == "none") return NoiseKind::None;
  if (text == "swap") return NoiseKind::Swap;
  if (text == "mask") return NoiseKind::Mask;
  throw ConfigError("unknown noise kind " + text);
}

NoisedLine apply_noise(std::span<const int> line, NoiseKind kind, double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("noise rate must be in [0, 1)");
  NoisedLine out{std::vector<int>(line.begin(), line.end()), {}};
  if (kind == NoiseKind::None || line.empty()) return out;
  const auto k = static_cast<std::size_t>(std::lround(rate * static_cast<double>(line.size())));
  std::vector<int> positions(line.size());
  std::iota(positions.begin(), positions.end(), 0);
  std::shuffle(positions.begin(), positions.end(), rng);
  positions.resize(k);
  std::sort(positions.begin(), positions.end());
  for (int p : positions) {
    const auto i = static_cast<std::size_t>(p);
    if (kind == NoiseKind::Mask) {
      out.tokens[i] = tok::kMask;
    } else if (out.tokens.size() > 1) {
      const std::size_t j = i + 1 < out.tokens.size() ? i + 1 : i - 1;
      std::swap(out.tokens[i], out.tokens[j]);
    }
  }
  out.perturbed = std::move(positions);
  return out;
}

ParallelCorpus make_denoising_pairs(const MultiParallelCorpus& mono, const std::string& lang, NoiseKind kind,
                                    double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("noise rate must be in [0, 1)");
  std::vector<SentencePair> pairs;
  pairs.reserve(mono.size());
  for (std::size_t i = 0; i < mono.size(); ++i) {
    const auto& clean = mono.sentence(lang, i);
    pairs.push_back({apply_noise(clean, kind, rate, rng).tokens, clean, mono.pivot_ids[i], false, false});
  }
  return ParallelCorpus(Route{lang, lang, mono.domain}, std::move(pairs));
}

SentencePair prepend_domain_tag(const Vocabulary& vocab, SentencePair pair, const std::string& domain) {
  const int tag = vocab.domain_tag(domain);
  if (!pair.src.empty() && vocab.is_domain_tag(pair.src.front())) {
    throw UsageError("pair already carries domain tag " + vocab.token(pair.src.front()));
  }
  pair.src.insert(pair.src.begin(), tag);
  return pair;
}

std::vector<int> strip_domain_tags(const Vocabulary& vocab, std::span<const int> tokens) {
  std::size_t start = 0;
  while (start < tokens.size() && vocab.is_domain_tag(tokens[start])) ++start;
  return {tokens.begin() + static_cast<std::ptrdiff_t>(start), tokens.end()};
}

BackTranslation back_translate(const TransformerModel& model, const Vocabulary& vocab, const MultiParallelCorpus& mono,
                               const std::string& lang, const BeamOptions& options) {
  for (const auto& l : {lang, std::string("en")}) {
    if (!model.has_group(adapter_group(AdapterKind::Language, l))) {
      throw MissingPrerequisiteError("back-translation needs the language adapter for " + l);
    }
  }
  if (mono.size() == 0) throw CorpusError("no monolingual " + lang + " lines to back-translate");
  const auto& cfg = model.config();
  ActivationPlan plan;
  plan.encoder.assign(static_cast<std::size_t>(cfg.enc_layers), LayerStack{adapter_group(AdapterKind::Language, lang), {}});
  plan.decoder.assign(static_cast<std::size_t>(cfg.dec_layers), LayerStack{adapter_group(AdapterKind::Language, "en"), {}});
  model.validate_plan(plan);

  std::vector<std::vector<int>> english(mono.size());
  parallel_for(mono.size(), [&](std::size_t i) {
    english[i] = translate(model, vocab, mono.sentence(lang, i), "en", plan, options).tokens;
  });
  std::vector<SentencePair> to_lang;
  std::vector<SentencePair> from_lang;
  for (std::size_t i = 0; i < mono.size(); ++i) {
    if (english[i].empty()) continue;
    const auto& clean = mono.sentence(lang, i);
    to_lang.push_back({english[i], clean, mono.pivot_ids[i], true, false});
    from_lang.push_back({clean, english[i], mono.pivot_ids[i], false, true});
  }
  if (to_lang.empty()) throw CorpusError("back-translation of " + lang + " produced no usable lines");
  return {ParallelCorpus(Route{"en", lang, mono.domain}, std::move(to_lang)),
          ParallelCorpus(Route{lang, "en", mono.domain}, std::move(from_lang))};
}

}  // namespace adapterforge
