// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace adapterforge {

/// Reserved ids shared by every vocabulary.
namespace tok {
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kMask = 4;
inline constexpr int kReserved = 5;
}  // namespace tok

/// Shape of the toy lexicon. Every language realises the same concepts;
/// domains listed in `term_domains` own a block of specialised concepts,
/// `tag_domains` only get a tag token (e.g. "paracrawl").
struct LexiconSpec {
  std::vector<std::string> languages;
  std::vector<std::string> term_domains;
  std::vector<std::string> tag_domains;
  int general_concepts = 48;
  int terms_per_domain = 12;
  int numerals = 10;
};

/// Closed word-level vocabulary. Layout: reserved ids, <2xx> language tokens,
/// <domain> tags, numerals, then per language a marker followed by one
/// surface form per concept.
///
/// A surface form is a concept root plus a language suffix ("kobe_fr"), so
/// the language of every word token is known exactly.
class Vocabulary {
 public:
  enum class Kind { Special, LanguageTag, DomainTag, Numeral, Marker, Word };

  explicit Vocabulary(LexiconSpec spec);

  [[nodiscard]] const LexiconSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] int size() const noexcept { return static_cast<int>(tokens_.size()); }
  [[nodiscard]] int concepts() const noexcept { return concepts_; }
  [[nodiscard]] const std::vector<std::string>& languages() const noexcept { return spec_.languages; }
  /// Term domains followed by tag-only domains.
  [[nodiscard]] std::vector<std::string> domains() const;

  [[nodiscard]] int language_index(std::string_view lang) const;
  [[nodiscard]] bool has_language(std::string_view lang) const;
  [[nodiscard]] bool has_domain(std::string_view domain) const;

  [[nodiscard]] int language_token(std::string_view lang) const;
  /// Throws ConfigError for an unknown domain.
  [[nodiscard]] int domain_tag(std::string_view domain) const;
  [[nodiscard]] int marker(std::string_view lang) const;
  [[nodiscard]] int word(std::string_view lang, int concept_id) const;
  [[nodiscard]] int numeral(int value) const;

  /// Concept ids owned by a term domain (empty for tag-only domains).
  [[nodiscard]] std::vector<int> domain_terms(std::string_view domain) const;
  /// Every term concept of every term domain.
  [[nodiscard]] std::vector<int> all_terms() const;
  [[nodiscard]] bool is_term(int concept_id) const { return concept_id >= spec_.general_concepts; }

  [[nodiscard]] Kind kind(int id) const;
  /// Language index of a marker or word token.
  [[nodiscard]] std::optional<int> language_of(int id) const;
  [[nodiscard]] std::optional<int> concept_of(int id) const;
  [[nodiscard]] std::optional<int> numeral_of(int id) const;
  [[nodiscard]] bool is_domain_tag(int id) const { return kind(id) == Kind::DomainTag; }

  [[nodiscard]] const std::string& token(int id) const;
  [[nodiscard]] std::optional<int> find(std::string_view text) const;

  /// Space-joined surface text; reserved, language-tag and domain-tag ids are
  /// dropped.
  [[nodiscard]] std::string detokenize(std::span<const int> ids) const;
  /// Whitespace split; unknown words map to <unk>.
  [[nodiscard]] std::vector<int> tokenize(std::string_view text) const;

 private:
  LexiconSpec spec_;
  int concepts_ = 0;
  int lang_tag_base_ = 0;
  int domain_tag_base_ = 0;
  int numeral_base_ = 0;
  int language_base_ = 0;
  int per_language_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Root string of a concept; distinct concepts get distinct roots.
std::string concept_root(int concept_id, bool is_term);

}  // namespace adapterforge
