// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "adapterforge/augment.hpp"
#include "adapterforge/checkpoint.hpp"
#include "adapterforge/corpus_io.hpp"
#include "adapterforge/errors.hpp"

namespace adapterforge {
namespace {

namespace fs = std::filesystem;

TEST(Noise, ExactCountAndSortedPositions) {
  std::mt19937_64 rng(3);
  const std::vector<int> line = {10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
  const NoisedLine m = apply_noise(line, NoiseKind::Mask, 0.3, rng);
  ASSERT_EQ(m.perturbed.size(), 3U);
  EXPECT_TRUE(std::is_sorted(m.perturbed.begin(), m.perturbed.end()));
  for (int p : m.perturbed) EXPECT_EQ(m.tokens[static_cast<std::size_t>(p)], tok::kMask);
  const NoisedLine s = apply_noise(line, NoiseKind::Swap, 0.2, rng);
  EXPECT_EQ(s.tokens.size(), line.size());
  EXPECT_TRUE(std::is_permutation(s.tokens.begin(), s.tokens.end(), line.begin()));
  const NoisedLine n = apply_noise(line, NoiseKind::None, 0.5, rng);
  EXPECT_EQ(n.tokens, line);
}

TEST(Noise, KindNames) {
  EXPECT_EQ(parse_noise_kind(to_string(NoiseKind::Swap)), NoiseKind::Swap);
  EXPECT_THROW(parse_noise_kind("shuffle"), ConfigError);
}

class WithCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    CorpusManifest m = default_manifest();
    m.languages = {"en", "fr", "pl"};
    for (auto& d : m.domains) d.lines = 40;
    m.valid_size = 3;
    m.test_size = 3;
    bundle_ = new CorpusBundle(generate_corpus(m));
  }
  static void TearDownTestSuite() {
    delete bundle_;
    bundle_ = nullptr;
  }
  static ModelConfig tiny() {
    ModelConfig c;
    c.vocab_size = bundle_->vocab->size();
    c.d_model = 16;
    c.n_heads = 2;
    c.enc_layers = 1;
    c.dec_layers = 1;
    c.ffn_dim = 32;
    c.max_len = 40;
    return c;
  }
  static CorpusBundle* bundle_;
};
CorpusBundle* WithCorpus::bundle_ = nullptr;

TEST_F(WithCorpus, DenoisingPairsAreSelfRoutes) {
  std::mt19937_64 rng(1);
  const auto& mono = bundle_->splits.at("medical").train;
  const ParallelCorpus c = make_denoising_pairs(mono, "pl", NoiseKind::None, 0.0, rng);
  EXPECT_EQ(c.route().src, "pl");
  EXPECT_EQ(c.route().tgt, "pl");
  ASSERT_EQ(c.size(), mono.size());
  EXPECT_EQ(c.pairs()[0].src, c.pairs()[0].tgt);
  EXPECT_THROW(make_denoising_pairs(mono, "pl", NoiseKind::Mask, 1.0, rng), UsageError);
}

TEST_F(WithCorpus, DomainTagsPrependAndStrip) {
  const Vocabulary& v = *bundle_->vocab;
  SentencePair p{{v.word("en", 1)}, {v.word("fr", 1)}};
  const SentencePair tagged = prepend_domain_tag(v, p, "it");
  EXPECT_EQ(tagged.src.front(), v.domain_tag("it"));
  EXPECT_ANY_THROW(prepend_domain_tag(v, tagged, "it"));
  EXPECT_ANY_THROW(prepend_domain_tag(v, p, "law"));
  EXPECT_EQ(strip_domain_tags(v, tagged.src), p.src);
}

TEST_F(WithCorpus, BackTranslationNeedsLanguageAdapters) {
  TransformerModel m(tiny(), 1);
  BeamOptions opt;
  opt.beam_size = 1;
  opt.max_len = 40;
  const auto& mono = bundle_->splits.at("medical").test;
  EXPECT_THROW(back_translate(m, *bundle_->vocab, mono, "pl", opt), MissingPrerequisiteError);
  m.add_adapter_set(AdapterKind::Language, "pl", {0}, {0}, 4, 1);
  m.add_adapter_set(AdapterKind::Language, "en", {0}, {0}, 4, 2);
  const BackTranslation bt = back_translate(m, *bundle_->vocab, mono, "pl", opt);
  EXPECT_EQ(bt.to_lang.size(), mono.size());
  EXPECT_EQ(bt.to_lang.route().src, "en");
  EXPECT_EQ(bt.to_lang.route().tgt, "pl");
  EXPECT_TRUE(bt.to_lang.pairs()[0].synthetic_src);
  EXPECT_EQ(bt.from_lang.pairs()[0].src, mono.sentence("pl", 0));
}

TEST_F(WithCorpus, CheckpointRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "adapterforge_ckpt_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  TransformerModel m(tiny(), 5);
  m.add_adapter_set(AdapterKind::Language, "fr", {0}, {0}, 4, 1);
  m.add_adapter_set(AdapterKind::Domain, "medical", {}, {0}, 4, 2);
  m.adapter_settings().dadrop_p = 0.2;
  for (Parameter* p : m.params().in_group("da:medical")) p->value.fill(0.25F);
  save_checkpoint(dir / "all.ckpt", m, {}, R"({"id":"x"})");
  const CheckpointInfo info = read_checkpoint_info(dir / "all.ckpt");
  EXPECT_EQ(info.config, m.config());
  EXPECT_EQ(info.groups, (std::set<std::string>{"base", "da:medical", "la:fr"}));
  EXPECT_DOUBLE_EQ(info.settings.dadrop_p, 0.2);
  const auto loaded = load_model(dir / "all.ckpt");
  const std::vector<Parameter*> loaded_params = loaded->params().all();
  for (const Parameter* p : m.params().all()) {
    const auto q = std::find_if(loaded_params.begin(), loaded_params.end(),
                                [&](const Parameter* x) { return x->name == p->name; });
    ASSERT_NE(q, loaded_params.end()) << p->name;
    EXPECT_EQ((*q)->value, p->value) << p->name;
  }

  save_checkpoint(dir / "da.ckpt", m, {"da:medical"});
  EXPECT_THROW(load_model(dir / "da.ckpt"), FormatError);
  TransformerModel fresh(tiny(), 5);
  install_groups(fresh, dir / "da.ckpt");
  EXPECT_TRUE(fresh.has_group("da:medical"));
  EXPECT_THROW(install_groups(fresh, dir / "da.ckpt", {"la:fr"}), ConfigError);
  ModelConfig other = tiny();
  other.ffn_dim = 64;
  TransformerModel wrong(other, 5);
  EXPECT_THROW(install_groups(wrong, dir / "da.ckpt"), ConfigError);
  fs::remove_all(dir);
}

TEST_F(WithCorpus, CorruptCheckpointIsFormatError) {
  const fs::path p = fs::temp_directory_path() / "adapterforge_bad.ckpt";
  {
    std::ofstream out(p, std::ios::binary);
    out << "not a checkpoint";
  }
  EXPECT_THROW(read_checkpoint_info(p), FormatError);
  fs::remove(p);
}

TEST(ModelConfigJson, RoundTrip) {
  ModelConfig c;
  c.vocab_size = 99;
  c.dropout_p = 0.3;
  EXPECT_EQ(model_config_from_json(model_config_to_json(c)), c);
}

}  // namespace
}  // namespace adapterforge
