// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "adapterforge/vocabulary.hpp"

namespace adapterforge {

/// Sentence-level rule applied to the pivot before realisation. Every rule
/// acts on concept symbols only, so it commutes with each language's map.
enum class DomainTransform { None, Reverse, DoubleTerms, NumeralAfterTerm };

std::string to_string(DomainTransform t);
DomainTransform parse_domain_transform(const std::string& text);

struct DomainSpec {
  std::string name;
  int lines = 2000;
  int min_len = 4;  ///< content symbols before transform and markers
  int max_len = 10;
  double term_prob = 0.3;
  double numeral_prob = 0.05;
  DomainTransform transform = DomainTransform::None;
  /// Generic domains (the "paracrawl" analogue) own no terms; they draw rare
  /// terms from every term domain instead.
  bool generic = false;
};

/// Everything needed to regenerate a corpus bit for bit.
struct CorpusManifest {
  std::uint64_t seed = 1;
  std::vector<std::string> languages;
  std::vector<DomainSpec> domains;
  int general_concepts = 48;
  int terms_per_domain = 12;
  int numerals = 10;
  int marker_period = 5;
  int successors = 3;     ///< fan-out of each domain's concept chain
  int valid_size = 20;    ///< held-out pivots per domain
  int test_size = 20;

  [[nodiscard]] LexiconSpec lexicon() const;
  /// Throws ConfigError on an inconsistent manifest (e.g. no "en").
  void validate() const;
};

/// 12 languages, it/koran/medical/ted plus a 20k-line "paracrawl" analogue.
CorpusManifest default_manifest();

/// Pivot symbols: [0, C) concepts, C + n numeral n, kMarkerSymbol a marker.
inline constexpr int kMarkerSymbol = -1;

/// Deterministic realisation of pivot symbols in one language.
class ToyLanguage {
 public:
  ToyLanguage(const Vocabulary& vocab, std::string id);

  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] int realise(int symbol) const;
  [[nodiscard]] std::vector<int> realise(std::span<const int> pivot) const;
  /// Inverse map; throws CorpusError on a token foreign to this language.
  [[nodiscard]] int unrealise(int token) const;
  [[nodiscard]] std::vector<int> unrealise(std::span<const int> tokens) const;

 private:
  const Vocabulary* vocab_;
  std::string id_;
};

/// Samples pivot sentences for one domain.
class ToyDomain {
 public:
  ToyDomain(const Vocabulary& vocab, DomainSpec spec, int marker_period, int successors, std::uint64_t seed);

  [[nodiscard]] const DomainSpec& spec() const noexcept { return spec_; }
  /// Content symbols (no markers, no transform).
  template <class Rng>
  std::vector<int> sample_content(Rng& rng) const;
  [[nodiscard]] std::vector<int> transform(std::span<const int> content) const;
  /// Marker at position 0 and every marker_period symbols.
  [[nodiscard]] std::vector<int> insert_markers(std::span<const int> content) const;

 private:
  const Vocabulary* vocab_;
  DomainSpec spec_;
  int marker_period_;
  std::vector<int> terms_;
  std::vector<std::vector<int>> chain_;  ///< successors per general concept
};

/// Sentence-aligned text in every language, indexed by row. Row i of every
/// language realises the same pivot.
struct MultiParallelCorpus {
  std::string domain;
  std::vector<std::string> languages;
  std::vector<std::int64_t> pivot_ids;
  std::vector<std::vector<int>> pivots;  ///< symbols, markers included
  std::map<std::string, std::vector<std::vector<int>>> text;

  [[nodiscard]] std::size_t size() const noexcept { return pivot_ids.size(); }
  [[nodiscard]] const std::vector<int>& sentence(const std::string& lang, std::size_t row) const;
  [[nodiscard]] MultiParallelCorpus subset(std::span<const std::size_t> rows) const;
};

/// One corpus per domain. Pivot ids are unique across domains.
std::map<std::string, MultiParallelCorpus> generate_multiparallel(const Vocabulary& vocab,
                                                                  const CorpusManifest& manifest);

struct DomainSplit {
  MultiParallelCorpus train;
  MultiParallelCorpus valid;
  MultiParallelCorpus test;
  std::set<std::int64_t> held_out;
};

struct SplitSet {
  std::map<std::string, DomainSplit> domains;
  [[nodiscard]] const DomainSplit& at(const std::string& domain) const;
};

/// Sets aside valid_size + test_size pivots per domain (distinct English
/// sentences), then drops every training row whose pivot id or English text
/// matches a held-out row.
SplitSet make_splits(const std::map<std::string, MultiParallelCorpus>& corpora, int valid_size, int test_size,
                     std::uint64_t seed);

/// (source language, target language, domain).
struct Route {
  std::string src;
  std::string tgt;
  std::optional<std::string> domain;

  [[nodiscard]] std::string key() const;
  friend auto operator<=>(const Route&, const Route&) = default;
};

struct PairView {
  std::span<const int> src;
  std::span<const int> tgt;
  std::int64_t pivot = -1;
  bool synthetic_src = false;
  bool synthetic_tgt = false;
};

/// Random access to the sentence pairs of one route.
class PairSource {
 public:
  virtual ~PairSource() = default;
  [[nodiscard]] virtual const Route& route() const = 0;
  [[nodiscard]] virtual std::size_t size() const = 0;
  [[nodiscard]] virtual PairView pair(std::size_t i) const = 0;
};

/// Route view over a multiparallel corpus; no copies.
class AlignedRoute final : public PairSource {
 public:
  AlignedRoute(std::shared_ptr<const MultiParallelCorpus> corpus, Route route);
  [[nodiscard]] const Route& route() const override { return route_; }
  [[nodiscard]] std::size_t size() const override { return corpus_->size(); }
  [[nodiscard]] PairView pair(std::size_t i) const override;

 private:
  std::shared_ptr<const MultiParallelCorpus> corpus_;
  Route route_;
  const std::vector<std::vector<int>>* src_;
  const std::vector<std::vector<int>>* tgt_;
};

struct SentencePair {
  std::vector<int> src;
  std::vector<int> tgt;
  std::int64_t pivot = -1;
  bool synthetic_src = false;
  bool synthetic_tgt = false;
};

/// Materialised pairs of one route (augmented or tagged data).
class ParallelCorpus final : public PairSource {
 public:
  ParallelCorpus(Route route, std::vector<SentencePair> pairs);
  [[nodiscard]] const Route& route() const override { return route_; }
  [[nodiscard]] std::size_t size() const override { return pairs_.size(); }
  [[nodiscard]] PairView pair(std::size_t i) const override;
  [[nodiscard]] const std::vector<SentencePair>& pairs() const noexcept { return pairs_; }

 private:
  Route route_;
  std::vector<SentencePair> pairs_;
};

/// Pluggable language identification.
class LanguageIdentifier {
 public:
  virtual ~LanguageIdentifier() = default;
  /// Language id, or nullopt for "unknown".
  [[nodiscard]] virtual std::optional<std::string> identify(std::span<const int> tokens) const = 0;
};

/// Deterministic identifier for toy text: markers and words vote for their
/// language; numerals and special tokens abstain. Returns the language
/// holding a strict majority of the votes, unknown otherwise (including no
/// votes at all).
class ToyLanguageIdentifier final : public LanguageIdentifier {
 public:
  explicit ToyLanguageIdentifier(const Vocabulary& vocab) : vocab_(&vocab) {}
  [[nodiscard]] std::optional<std::string> identify(std::span<const int> tokens) const override;

 private:
  const Vocabulary* vocab_;
};

// --- template implementation ---

template <class Rng>
std::vector<int> ToyDomain::sample_content(Rng& rng) const {
  auto uniform = [&rng](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const int general = vocab_->spec().general_concepts;
  const int numerals = vocab_->spec().numerals;
  const int len = spec_.min_len + uniform(spec_.max_len - spec_.min_len + 1);
  std::vector<int> out;
  int last = uniform(general);
  for (int i = 0; i < len; ++i) {
    const double u = unit();
    if (!terms_.empty() && u < spec_.term_prob) {
      out.push_back(terms_[static_cast<std::size_t>(uniform(static_cast<int>(terms_.size())))]);
    } else if (numerals > 0 && u < spec_.term_prob + spec_.numeral_prob) {
      out.push_back(vocab_->concepts() + uniform(numerals));
    } else {
      const auto& next = chain_[static_cast<std::size_t>(last)];
      last = unit() < 0.2 ? uniform(general) : next[static_cast<std::size_t>(uniform(static_cast<int>(next.size())))];
      out.push_back(last);
    }
  }
  return out;
}

}  // namespace adapterforge
