// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "adapterforge/corpus.hpp"
#include "adapterforge/corpus_io.hpp"
#include "adapterforge/errors.hpp"
#include "adapterforge/vocabulary.hpp"

namespace adapterforge {
namespace {

CorpusManifest small_manifest() {
  CorpusManifest m = default_manifest();
  for (auto& d : m.domains) d.lines = 150;
  m.valid_size = 10;
  m.test_size = 10;
  return m;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Vocabulary, LayoutAndLookup) {
  const Vocabulary v(default_manifest().lexicon());
  EXPECT_EQ(v.token(tok::kPad), "<pad>");
  EXPECT_EQ(v.kind(v.language_token("fr")), Vocabulary::Kind::LanguageTag);
  EXPECT_EQ(v.kind(v.domain_tag("medical")), Vocabulary::Kind::DomainTag);
  EXPECT_EQ(v.kind(v.domain_tag("paracrawl")), Vocabulary::Kind::DomainTag);
  EXPECT_THROW((void)v.domain_tag("law"), ConfigError);
  const int w = v.word("fr", 3);
  EXPECT_EQ(v.language_of(w), v.language_index("fr"));
  EXPECT_EQ(v.concept_of(w), 3);
  EXPECT_EQ(v.tokenize(v.detokenize(std::vector<int>{w, v.numeral(4)})), (std::vector<int>{w, v.numeral(4)}));
  EXPECT_EQ(v.tokenize("no_such_word"), std::vector<int>{tok::kUnk});
}

TEST(Vocabulary, DomainTermsAreDisjoint) {
  const Vocabulary v(default_manifest().lexicon());
  std::set<int> seen;
  for (const char* d : {"it", "koran", "medical", "ted"}) {
    for (int t : v.domain_terms(d)) {
      EXPECT_TRUE(v.is_term(t));
      EXPECT_TRUE(seen.insert(t).second);
    }
  }
  EXPECT_TRUE(v.domain_terms("paracrawl").empty());
}

TEST(ToyLanguage, RealiseRoundTrips) {
  const Vocabulary v(default_manifest().lexicon());
  const ToyLanguage fr(v, "fr");
  const std::vector<int> pivot = {kMarkerSymbol, 1, 2, v.concepts() + 3, 60};
  EXPECT_EQ(fr.unrealise(fr.realise(pivot)), pivot);
  EXPECT_THROW((void)fr.unrealise(v.word("de", 1)), CorpusError);
}

TEST(Corpus, MultiparallelRowsShareThePivot) {
  const CorpusBundle b = generate_corpus(small_manifest());
  const auto& med = b.splits.at("medical").train;
  const ToyLanguage en(*b.vocab, "en");
  const ToyLanguage pl(*b.vocab, "pl");
  for (std::size_t i = 0; i < med.size(); ++i) {
    EXPECT_EQ(en.unrealise(med.sentence("en", i)), pl.unrealise(med.sentence("pl", i)));
  }
}

TEST(Corpus, ManifestWithoutEnglishRejected) {
  CorpusManifest m = default_manifest();
  m.languages = {"fr", "de"};
  EXPECT_THROW(m.validate(), ConfigError);
  EXPECT_THROW(generate_corpus(m), ConfigError);
}

TEST(Corpus, SplitsHaveNoLeakage) {
  const CorpusBundle b = generate_corpus(small_manifest());
  for (const auto& [name, split] : b.splits.domains) {
    EXPECT_EQ(split.valid.size(), 10U);
    EXPECT_EQ(split.test.size(), 10U);
    for (auto id : split.train.pivot_ids) EXPECT_FALSE(split.held_out.contains(id)) << name;
  }
}

TEST(Corpus, AlignedRouteViewsPairs) {
  const CorpusBundle b = generate_corpus(small_manifest());
  auto test = std::make_shared<MultiParallelCorpus>(b.splits.at("it").test);
  const AlignedRoute r(test, Route{"fr", "de", "it"});
  ASSERT_EQ(r.size(), test->size());
  const PairView p = r.pair(3);
  EXPECT_EQ(std::vector<int>(p.src.begin(), p.src.end()), test->sentence("fr", 3));
  EXPECT_EQ(std::vector<int>(p.tgt.begin(), p.tgt.end()), test->sentence("de", 3));
  EXPECT_EQ(p.pivot, test->pivot_ids[3]);
}

TEST(Corpus, LanguageIdentifierMajorityVote) {
  const Vocabulary v(default_manifest().lexicon());
  const ToyLanguageIdentifier id(v);
  EXPECT_EQ(id.identify(std::vector<int>{v.word("fr", 1), v.word("fr", 2), v.word("de", 3)}), "fr");
  EXPECT_EQ(id.identify(std::vector<int>{v.word("fr", 1), v.word("de", 3)}), std::nullopt);
  EXPECT_EQ(id.identify(std::vector<int>{v.numeral(1)}), std::nullopt);
}

TEST(CorpusIo, WriteLoadRoundTripAndDeterminism) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "adapterforge_corpus_io";
  fs::remove_all(root);
  const CorpusBundle b = generate_corpus(small_manifest());
  write_corpus(root / "a", b);
  write_corpus(root / "b", generate_corpus(small_manifest()));
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    EXPECT_EQ(slurp(e.path()), slurp(root / "b" / rel)) << rel;
  }
  const CorpusBundle loaded = load_corpus(root / "a");
  for (const auto& [name, split] : b.splits.domains) {
    const auto& other = loaded.splits.at(name);
    EXPECT_EQ(other.train.pivot_ids, split.train.pivot_ids);
    for (const auto& l : b.manifest.languages) EXPECT_EQ(other.test.text.at(l), split.test.text.at(l)) << l;
  }
  fs::remove_all(root);
}

TEST(CorpusIo, MissingDirectoryIsAnError) {
  EXPECT_ANY_THROW(load_corpus("/nonexistent/adapterforge"));
}

}  // namespace
}  // namespace adapterforge
