// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/corpus.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <unordered_set>

#include "adapterforge/errors.hpp"

namespace adapterforge {
namespace {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint64_t, 1> out{};
  seq.generate(reinterpret_cast<std::uint32_t*>(out.data()), reinterpret_cast<std::uint32_t*>(out.data() + 1));
  return out[0];
}

constexpr std::int64_t kPivotStride = 10'000'000;

struct VectorHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ULL;
    return h;
  }
};

}  // namespace

std::string to_string(DomainTransform t) {
  switch (t) {
    case DomainTransform::None: return "none";
    case DomainTransform::Reverse: return "reverse";
    case DomainTransform::DoubleTerms: return "double_terms";
    case DomainTransform::NumeralAfterTerm: return "numeral_after_term";
  }
  return "none";
}

DomainTransform parse_domain_transform(const std::string& text) {
  if (text == "none") return DomainTransform::None;
  if (text == "reverse") return DomainTransform::Reverse;
  if (text == "double_terms") return DomainTransform::DoubleTerms;
  if (text == "numeral_after_term") return DomainTransform::NumeralAfterTerm;
  throw ConfigError("unknown domain transform '" + text + "'");
}

LexiconSpec CorpusManifest::lexicon() const {
  LexiconSpec spec;
  spec.languages = languages;
  for (const auto& d : domains) (d.generic ? spec.tag_domains : spec.term_domains).push_back(d.name);
  spec.general_concepts = general_concepts;
  spec.terms_per_domain = terms_per_domain;
  spec.numerals = numerals;
  return spec;
}

void CorpusManifest::validate() const {
  if (languages.size() < 2) throw ConfigError("manifest needs at least two languages");
  if (std::find(languages.begin(), languages.end(), "en") == languages.end()) {
    throw ConfigError("manifest must include the pivot language \"en\"");
  }
  if (domains.empty()) throw ConfigError("manifest lists no domains");
  for (const auto& d : domains) {
    if (d.lines < 1 || d.min_len < 1 || d.max_len < d.min_len) throw ConfigError("bad sizes for domain " + d.name);
    if (d.term_prob < 0 || d.numeral_prob < 0 || d.term_prob + d.numeral_prob > 1) {
      throw ConfigError("bad probabilities for domain " + d.name);
    }
  }
  if (marker_period < 2) throw ConfigError("marker_period must be >= 2");
  if (successors < 1) throw ConfigError("successors must be >= 1");
  if (valid_size < 0 || test_size < 0) throw ConfigError("split sizes must be >= 0");
}

CorpusManifest default_manifest() {
  CorpusManifest m;
  m.seed = 1;
  m.languages = {"cs", "da", "de", "en", "es", "fr", "it", "nb", "nl", "pl", "pt", "sv"};
  m.domains = {
      DomainSpec{"it", 3000, 4, 10, 0.30, 0.05, DomainTransform::NumeralAfterTerm, false},
      DomainSpec{"koran", 1000, 5, 11, 0.25, 0.02, DomainTransform::Reverse, false},
      DomainSpec{"medical", 3000, 5, 11, 0.35, 0.05, DomainTransform::DoubleTerms, false},
      DomainSpec{"ted", 2000, 4, 10, 0.20, 0.03, DomainTransform::None, false},
      DomainSpec{"paracrawl", 20000, 3, 10, 0.03, 0.05, DomainTransform::None, true},
  };
  return m;
}

ToyLanguage::ToyLanguage(const Vocabulary& vocab, std::string id) : vocab_(&vocab), id_(std::move(id)) {
  (void)vocab_->language_index(id_);
}

int ToyLanguage::realise(int symbol) const {
  if (symbol == kMarkerSymbol) return vocab_->marker(id_);
  if (symbol >= 0 && symbol < vocab_->concepts()) return vocab_->word(id_, symbol);
  if (symbol >= vocab_->concepts()) return vocab_->numeral(symbol - vocab_->concepts());
  throw CorpusError("pivot symbol " + std::to_string(symbol) + " is invalid");
}

std::vector<int> ToyLanguage::realise(std::span<const int> pivot) const {
  std::vector<int> out;
  out.reserve(pivot.size());
  for (int s : pivot) out.push_back(realise(s));
  return out;
}

int ToyLanguage::unrealise(int token) const {
  if (token == vocab_->marker(id_)) return kMarkerSymbol;
  if (auto n = vocab_->numeral_of(token)) return vocab_->concepts() + *n;
  const auto lang = vocab_->language_of(token);
  const auto c = vocab_->concept_of(token);
  if (!lang || !c || *lang != vocab_->language_index(id_)) {
    throw CorpusError("token '" + vocab_->token(token) + "' does not belong to language " + id_);
  }
  return *c;
}

std::vector<int> ToyLanguage::unrealise(std::span<const int> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (int t : tokens) out.push_back(unrealise(t));
  return out;
}

ToyDomain::ToyDomain(const Vocabulary& vocab, DomainSpec spec, int marker_period, int successors, std::uint64_t seed)
    : vocab_(&vocab), spec_(std::move(spec)), marker_period_(marker_period) {
  terms_ = spec_.generic ? vocab.all_terms() : vocab.domain_terms(spec_.name);
  const int general = vocab.spec().general_concepts;
  std::mt19937_64 rng(seed);
  chain_.resize(static_cast<std::size_t>(general));
  for (auto& next : chain_) {
    for (int k = 0; k < successors; ++k) next.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(general)));
  }
}

std::vector<int> ToyDomain::transform(std::span<const int> content) const {
  std::vector<int> out;
  auto is_term = [&](int s) { return s >= vocab_->spec().general_concepts && s < vocab_->concepts(); };
  switch (spec_.transform) {
    case DomainTransform::None:
      out.assign(content.begin(), content.end());
      break;
    case DomainTransform::Reverse:
      out.assign(content.rbegin(), content.rend());
      break;
    case DomainTransform::DoubleTerms:
      for (int s : content) {
        out.push_back(s);
        if (is_term(s)) out.push_back(s);
      }
      break;
    case DomainTransform::NumeralAfterTerm:
      for (int s : content) {
        out.push_back(s);
        if (is_term(s) && vocab_->spec().numerals > 0) out.push_back(vocab_->concepts() + s % vocab_->spec().numerals);
      }
      break;
  }
  return out;
}

std::vector<int> ToyDomain::insert_markers(std::span<const int> content) const {
  std::vector<int> out;
  for (int s : content) {
    if (out.size() % static_cast<std::size_t>(marker_period_) == 0) out.push_back(kMarkerSymbol);
    out.push_back(s);
  }
  if (out.empty()) out.push_back(kMarkerSymbol);
  return out;
}

const std::vector<int>& MultiParallelCorpus::sentence(const std::string& lang, std::size_t row) const {
  auto it = text.find(lang);
  if (it == text.end()) throw CorpusError("corpus " + domain + " has no language " + lang);
  return it->second.at(row);
}

MultiParallelCorpus MultiParallelCorpus::subset(std::span<const std::size_t> rows) const {
  MultiParallelCorpus out;
  out.domain = domain;
  out.languages = languages;
  for (const auto& l : languages) out.text[l];
  for (std::size_t r : rows) {
    out.pivot_ids.push_back(pivot_ids.at(r));
    if (!pivots.empty()) out.pivots.push_back(pivots.at(r));
    for (const auto& l : languages) out.text[l].push_back(text.at(l).at(r));
  }
  return out;
}

std::map<std::string, MultiParallelCorpus> generate_multiparallel(const Vocabulary& vocab,
                                                                  const CorpusManifest& manifest) {
  manifest.validate();
  std::vector<ToyLanguage> langs;
  for (const auto& l : manifest.languages) langs.emplace_back(vocab, l);
  std::map<std::string, MultiParallelCorpus> out;
  for (std::size_t d = 0; d < manifest.domains.size(); ++d) {
    const auto& spec = manifest.domains[d];
    if (!spec.generic && vocab.domain_terms(spec.name).empty() && spec.term_prob > 0) {
      throw CorpusError("domain " + spec.name + " asks for terms but the lexicon has none");
    }
    ToyDomain domain(vocab, spec, manifest.marker_period, manifest.successors, derive_seed(manifest.seed, 2 * d + 1));
    std::mt19937_64 rng(derive_seed(manifest.seed, 2 * d + 2));
    MultiParallelCorpus corpus;
    corpus.domain = spec.name;
    corpus.languages = manifest.languages;
    for (const auto& l : manifest.languages) corpus.text[l].reserve(static_cast<std::size_t>(spec.lines));
    for (int i = 0; i < spec.lines; ++i) {
      auto pivot = domain.insert_markers(domain.transform(domain.sample_content(rng)));
      corpus.pivot_ids.push_back(static_cast<std::int64_t>(d) * kPivotStride + i);
      for (const auto& lang : langs) corpus.text[lang.id()].push_back(lang.realise(pivot));
      corpus.pivots.push_back(std::move(pivot));
    }
    out.emplace(spec.name, std::move(corpus));
  }
  return out;
}

const DomainSplit& SplitSet::at(const std::string& domain) const {
  auto it = domains.find(domain);
  if (it == domains.end()) throw CorpusError("no split for domain " + domain);
  return it->second;
}

SplitSet make_splits(const std::map<std::string, MultiParallelCorpus>& corpora, int valid_size, int test_size,
                     std::uint64_t seed) {
  SplitSet out;
  std::uint64_t stream = 0;
  for (const auto& [name, corpus] : corpora) {
    const auto& english = corpus.text.count("en") ? corpus.text.at("en") : corpus.text.begin()->second;
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(seed, 1000 + stream++));
    std::shuffle(order.begin(), order.end(), rng);

    // Held-out rows must have pairwise distinct English text so that the
    // requested sizes are exact after deduplication.
    std::unordered_set<std::vector<int>, VectorHash> held_text;
    std::vector<std::size_t> valid_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t r : order) {
      if (static_cast<int>(valid_rows.size()) == valid_size && static_cast<int>(test_rows.size()) == test_size) break;
      if (!held_text.insert(english[r]).second) continue;
      (static_cast<int>(valid_rows.size()) < valid_size ? valid_rows : test_rows).push_back(r);
    }
    if (static_cast<int>(valid_rows.size()) < valid_size || static_cast<int>(test_rows.size()) < test_size) {
      throw CorpusError("domain " + name + " has too few distinct lines for the requested splits");
    }
    DomainSplit split;
    for (std::size_t r : valid_rows) split.held_out.insert(corpus.pivot_ids[r]);
    for (std::size_t r : test_rows) split.held_out.insert(corpus.pivot_ids[r]);
    std::vector<std::size_t> train_rows;
    for (std::size_t r = 0; r < corpus.size(); ++r) {
      if (split.held_out.contains(corpus.pivot_ids[r]) || held_text.contains(english[r])) continue;
      train_rows.push_back(r);
    }
    if (train_rows.empty()) throw CorpusError("domain " + name + " has no training lines left after the purge");
    std::sort(valid_rows.begin(), valid_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    split.train = corpus.subset(train_rows);
    split.valid = corpus.subset(valid_rows);
    split.test = corpus.subset(test_rows);
    out.domains.emplace(name, std::move(split));
  }
  return out;
}

std::string Route::key() const { return src + "-" + tgt + (domain ? "/" + *domain : ""); }

AlignedRoute::AlignedRoute(std::shared_ptr<const MultiParallelCorpus> corpus, Route route)
    : corpus_(std::move(corpus)), route_(std::move(route)) {
  auto s = corpus_->text.find(route_.src);
  auto t = corpus_->text.find(route_.tgt);
  if (s == corpus_->text.end() || t == corpus_->text.end()) {
    throw CorpusError("corpus " + corpus_->domain + " lacks a side of route " + route_.key());
  }
  src_ = &s->second;
  tgt_ = &t->second;
}

PairView AlignedRoute::pair(std::size_t i) const {
  return PairView{(*src_)[i], (*tgt_)[i], corpus_->pivot_ids[i], false};
}

ParallelCorpus::ParallelCorpus(Route route, std::vector<SentencePair> pairs)
    : route_(std::move(route)), pairs_(std::move(pairs)) {}

PairView ParallelCorpus::pair(std::size_t i) const {
  const auto& p = pairs_.at(i);
  return PairView{p.src, p.tgt, p.pivot, p.synthetic_src, p.synthetic_tgt};
}

std::optional<std::string> ToyLanguageIdentifier::identify(std::span<const int> tokens) const {
  std::vector<int> votes(vocab_->languages().size(), 0);
  int total = 0;
  for (int t : tokens) {
    if (t < 0 || t >= vocab_->size()) continue;
    if (auto l = vocab_->language_of(t)) {
      ++votes[static_cast<std::size_t>(*l)];
      ++total;
    }
  }
  if (total == 0) return std::nullopt;
  auto best = std::max_element(votes.begin(), votes.end());
  if (2 * *best <= total) return std::nullopt;
  return vocab_->languages()[static_cast<std::size_t>(best - votes.begin())];
}

}  // namespace adapterforge
