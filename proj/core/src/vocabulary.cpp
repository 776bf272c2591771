// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/vocabulary.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "adapterforge/errors.hpp"

namespace adapterforge {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr int kSyllables = static_cast<int>(kConsonants.size() * kVowels.size());

std::string syllable(int i) {
  std::string s;
  s += kConsonants[static_cast<std::size_t>(i / static_cast<int>(kVowels.size()))];
  s += kVowels[static_cast<std::size_t>(i % static_cast<int>(kVowels.size()))];
  return s;
}

}  // namespace

std::string concept_root(int concept_id, bool is_term) {
  // A fixed affine permutation of the two-syllable space spreads neighbouring
  // ids over different onsets; terms carry a third syllable.
  constexpr int kSpace = kSyllables * kSyllables;
  const int idx = (concept_id * 37 + 11) % kSpace;
  std::string root = syllable(idx / kSyllables) + syllable(idx % kSyllables);
  if (is_term) root += syllable((concept_id * 13 + 5) % kSyllables);
  return root;
}

Vocabulary::Vocabulary(LexiconSpec spec) : spec_(std::move(spec)) {
  if (spec_.languages.empty()) throw CorpusError("lexicon needs at least one language");
  if (spec_.general_concepts < 2 || spec_.terms_per_domain < 0 || spec_.numerals < 0) {
    throw CorpusError("lexicon sizes out of range");
  }
  std::set<std::string> seen;
  for (const auto& l : spec_.languages) {
    if (l.empty() || !seen.insert("lang:" + l).second) throw CorpusError("duplicate or empty language id '" + l + "'");
  }
  for (const auto& d : domains()) {
    if (d.empty() || !seen.insert("dom:" + d).second) throw CorpusError("duplicate or empty domain id '" + d + "'");
  }
  concepts_ = spec_.general_concepts + spec_.terms_per_domain * static_cast<int>(spec_.term_domains.size());
  if (concepts_ > kSyllables * kSyllables) throw CorpusError("vocabulary too small for the requested concept count");

  tokens_ = {"<pad>", "<s>", "</s>", "<unk>", "<mask>"};
  lang_tag_base_ = size();
  for (const auto& l : spec_.languages) tokens_.push_back("<2" + l + ">");
  domain_tag_base_ = size();
  for (const auto& d : domains()) tokens_.push_back("<" + d + ">");
  numeral_base_ = size();
  for (int n = 0; n < spec_.numerals; ++n) tokens_.push_back(std::to_string(n));
  language_base_ = size();
  per_language_ = 1 + concepts_;
  for (const auto& l : spec_.languages) {
    tokens_.push_back("@" + l);
    for (int c = 0; c < concepts_; ++c) tokens_.push_back(concept_root(c, is_term(c)) + "_" + l);
  }
  for (int i = 0; i < size(); ++i) {
    if (!index_.emplace(tokens_[static_cast<std::size_t>(i)], i).second) {
      throw CorpusError("token collision on '" + tokens_[static_cast<std::size_t>(i)] + "'");
    }
  }
}

std::vector<std::string> Vocabulary::domains() const {
  std::vector<std::string> out = spec_.term_domains;
  out.insert(out.end(), spec_.tag_domains.begin(), spec_.tag_domains.end());
  return out;
}

int Vocabulary::language_index(std::string_view lang) const {
  for (std::size_t i = 0; i < spec_.languages.size(); ++i) {
    if (spec_.languages[i] == lang) return static_cast<int>(i);
  }
  throw CorpusError("unknown language '" + std::string(lang) + "'");
}

bool Vocabulary::has_language(std::string_view lang) const {
  return std::find(spec_.languages.begin(), spec_.languages.end(), lang) != spec_.languages.end();
}

bool Vocabulary::has_domain(std::string_view domain) const {
  const auto all = domains();
  return std::find(all.begin(), all.end(), domain) != all.end();
}

int Vocabulary::language_token(std::string_view lang) const { return lang_tag_base_ + language_index(lang); }

int Vocabulary::domain_tag(std::string_view domain) const {
  const auto all = domains();
  auto it = std::find(all.begin(), all.end(), domain);
  if (it == all.end()) throw ConfigError("unknown domain '" + std::string(domain) + "'");
  return domain_tag_base_ + static_cast<int>(it - all.begin());
}

int Vocabulary::marker(std::string_view lang) const { return language_base_ + language_index(lang) * per_language_; }

int Vocabulary::word(std::string_view lang, int concept_id) const {
  if (concept_id < 0 || concept_id >= concepts_) throw CorpusError("concept id out of range");
  return marker(lang) + 1 + concept_id;
}

int Vocabulary::numeral(int value) const {
  if (value < 0 || value >= spec_.numerals) throw CorpusError("numeral out of range");
  return numeral_base_ + value;
}

std::vector<int> Vocabulary::domain_terms(std::string_view domain) const {
  for (std::size_t d = 0; d < spec_.term_domains.size(); ++d) {
    if (spec_.term_domains[d] == domain) {
      std::vector<int> out;
      for (int k = 0; k < spec_.terms_per_domain; ++k) {
        out.push_back(spec_.general_concepts + static_cast<int>(d) * spec_.terms_per_domain + k);
      }
      return out;
    }
  }
  if (has_domain(domain)) return {};
  throw ConfigError("unknown domain '" + std::string(domain) + "'");
}

std::vector<int> Vocabulary::all_terms() const {
  std::vector<int> out;
  for (int c = spec_.general_concepts; c < concepts_; ++c) out.push_back(c);
  return out;
}

Vocabulary::Kind Vocabulary::kind(int id) const {
  if (id < 0 || id >= size()) throw CorpusError("token id " + std::to_string(id) + " outside vocabulary");
  if (id < lang_tag_base_) return Kind::Special;
  if (id < domain_tag_base_) return Kind::LanguageTag;
  if (id < numeral_base_) return Kind::DomainTag;
  if (id < language_base_) return Kind::Numeral;
  return (id - language_base_) % per_language_ == 0 ? Kind::Marker : Kind::Word;
}

std::optional<int> Vocabulary::language_of(int id) const {
  if (id < language_base_ || id >= size()) return std::nullopt;
  return (id - language_base_) / per_language_;
}

std::optional<int> Vocabulary::concept_of(int id) const {
  if (id < language_base_ || id >= size()) return std::nullopt;
  const int offset = (id - language_base_) % per_language_;
  if (offset == 0) return std::nullopt;
  return offset - 1;
}

std::optional<int> Vocabulary::numeral_of(int id) const {
  if (id < numeral_base_ || id >= language_base_) return std::nullopt;
  return id - numeral_base_;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw CorpusError("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<int> Vocabulary::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::detokenize(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    const Kind k = kind(id);
    if (k == Kind::Special || k == Kind::LanguageTag || k == Kind::DomainTag) continue;
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

std::vector<int> Vocabulary::tokenize(std::string_view text) const {
  std::vector<int> out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.push_back(find(word).value_or(tok::kUnk));
  return out;
}

}  // namespace adapterforge
