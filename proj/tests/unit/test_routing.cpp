// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "adapterforge/corpus_io.hpp"
#include "adapterforge/errors.hpp"
#include "adapterforge/routing.hpp"

namespace adapterforge {
namespace {

ExperimentConfig adapter_config() {
  ExperimentConfig c;
  c.languages = {"en", "fr", "de", "cs", "pl"};
  c.domains = {"medical", "it"};
  c.in_domain_languages = {"en", "fr"};
  c.domain_adapters = {"medical"};
  c.placement = PlacementSpec::decoder_only(2);
  return c;
}

std::shared_ptr<const ParallelCorpus> toy_route(const std::string& src, const std::string& tgt, int n, int len) {
  std::vector<SentencePair> pairs;
  for (int i = 0; i < n; ++i) {
    pairs.push_back({std::vector<int>(static_cast<std::size_t>(len), 10 + i), std::vector<int>(2, 20 + i), i});
  }
  return std::make_shared<ParallelCorpus>(Route{src, tgt, "medical"}, std::move(pairs));
}

TEST(Placement, Factories) {
  const PlacementSpec e = PlacementSpec::encoder_only(3);
  EXPECT_TRUE(e.is_encoder_only());
  EXPECT_EQ(e.encoder_layers, (std::set<int>{0, 1, 2}));
  EXPECT_TRUE(PlacementSpec::decoder_only(2).is_decoder_only());
  const PlacementSpec both = PlacementSpec::everywhere(2, 2);
  EXPECT_FALSE(both.is_encoder_only());
  EXPECT_FALSE(both.is_decoder_only());
}

TEST(Plan, LanguageAdaptersFollowSidesAndDomainFollowsPlacement) {
  const CorpusBundle b = generate_corpus(default_manifest());
  const ActivationPlan p = plan_activation(Route{"pl", "fr", "medical"}, adapter_config(), *b.vocab, 2, 2);
  ASSERT_EQ(p.encoder.size(), 2U);
  ASSERT_EQ(p.decoder.size(), 2U);
  for (const auto& s : p.encoder) {
    EXPECT_EQ(s.language, "la:pl");
    EXPECT_FALSE(s.domain);
  }
  for (const auto& s : p.decoder) {
    EXPECT_EQ(s.language, "la:fr");
    EXPECT_EQ(s.domain, "da:medical");
  }
  EXPECT_FALSE(p.tag_token);
}

TEST(Plan, DomainWithoutAdapterGetsNone) {
  const CorpusBundle b = generate_corpus(default_manifest());
  const ActivationPlan p = plan_activation(Route{"en", "fr", "it"}, adapter_config(), *b.vocab, 2, 2);
  for (const auto& s : p.decoder) EXPECT_FALSE(s.domain);
}

TEST(Plan, TagModeCarriesTagOnly) {
  const CorpusBundle b = generate_corpus(default_manifest());
  ExperimentConfig c = adapter_config();
  c.language_adapters = false;
  c.domain_adapters.clear();
  c.tag_mode = true;
  const ActivationPlan p = plan_activation(Route{"en", "fr", "medical"}, c, *b.vocab, 2, 2);
  EXPECT_TRUE(p.empty());
  EXPECT_EQ(p.tag_token, b.vocab->domain_tag("medical"));
}

TEST(Plan, UnknownLanguageIsRoutingError) {
  const CorpusBundle b = generate_corpus(default_manifest());
  EXPECT_THROW(plan_activation(Route{"xx", "fr", "medical"}, adapter_config(), *b.vocab, 2, 2), RoutingError);
}

TEST(ExperimentConfigJson, RoundTrip) {
  ExperimentConfig c = adapter_config();
  c.dadrop_p = 0.2;
  c.stack_mode = StackMode::MadX;
  c.temperature = std::numeric_limits<double>::infinity();
  const ExperimentConfig back = experiment_from_json(experiment_to_json(c));
  EXPECT_EQ(back.placement, c.placement);
  EXPECT_EQ(back.domain_adapters, c.domain_adapters);
  EXPECT_EQ(back.stack_mode, StackMode::MadX);
  EXPECT_DOUBLE_EQ(back.dadrop_p, 0.2);
  EXPECT_TRUE(std::isinf(back.temperature));
}

TEST(Sampling, TemperatureOneIsProportional) {
  std::mt19937_64 rng(5);
  const std::vector<std::size_t> sizes = {1, 3};
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) hits += static_cast<int>(sample_index(sizes, 1.0, rng));
  EXPECT_NEAR(hits / static_cast<double>(n), 0.75, 0.02);
}

TEST(Sampling, InfiniteTemperatureIsUniform) {
  std::mt19937_64 rng(5);
  const std::vector<std::size_t> sizes = {1, 1000};
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) hits += static_cast<int>(sample_index(sizes, std::numeric_limits<double>::infinity(), rng));
  EXPECT_NEAR(hits / static_cast<double>(n), 0.5, 0.02);
}

TEST(Sampling, UnitUniformRange) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = unit_uniform(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(BatchStream, BatchesAreHomogeneousAndWithinBudget) {
  BatchOptions opt;
  opt.max_tokens = 64;
  BatchStream stream({toy_route("en", "fr", 30, 5), toy_route("fr", "de", 30, 3)}, opt, 3);
  EXPECT_EQ(stream.primary_pairs(), 60U);
  for (int i = 0; i < 50; ++i) {
    const Batch b = stream.next();
    ASSERT_FALSE(b.pairs.empty());
    EXPECT_LE(padded_tokens(b, opt), 64);
    const std::size_t len = b.pairs.front().src.size();
    for (const auto& p : b.pairs) EXPECT_EQ(p.src.size(), len);
  }
}

TEST(BatchStream, EpochsVisitEveryPairOnce) {
  BatchOptions opt;
  opt.max_tokens = 40;
  BatchStream stream({toy_route("en", "fr", 12, 4)}, opt, 1);
  std::vector<std::int64_t> order;
  while (order.size() < 24) {
    for (const auto& p : stream.next().pairs) order.push_back(p.pivot);
  }
  const std::set<std::int64_t> first(order.begin(), order.begin() + 12);
  const std::set<std::int64_t> second(order.begin() + 12, order.begin() + 24);
  EXPECT_EQ(first.size(), 12U);
  EXPECT_EQ(second.size(), 12U);
}

TEST(BatchStream, DeterministicForSeed) {
  BatchOptions opt;
  opt.max_tokens = 40;
  BatchStream a({toy_route("en", "fr", 20, 4), toy_route("fr", "en", 5, 4)}, opt, 7);
  BatchStream b({toy_route("en", "fr", 20, 4), toy_route("fr", "en", 5, 4)}, opt, 7);
  for (int i = 0; i < 30; ++i) {
    const Batch x = a.next();
    const Batch y = b.next();
    ASSERT_EQ(x.route, y.route);
    ASSERT_EQ(x.pairs.size(), y.pairs.size());
    for (std::size_t k = 0; k < x.pairs.size(); ++k) EXPECT_EQ(x.pairs[k].pivot, y.pairs[k].pivot);
  }
}

TEST(BatchStream, OverlongPairRejected) {
  BatchOptions opt;
  opt.max_tokens = 8;
  EXPECT_ANY_THROW(BatchStream({toy_route("en", "fr", 2, 20)}, opt, 1));
}

TEST(ModelSource, LayoutAndDoubleTagRejected) {
  const CorpusBundle b = generate_corpus(default_manifest());
  const Vocabulary& v = *b.vocab;
  const std::vector<int> src = {v.word("en", 1), v.word("en", 2)};
  const int tag = v.domain_tag("it");
  const std::vector<int> out = model_source(v, src, "fr", tag);
  EXPECT_EQ(out, (std::vector<int>{v.language_token("fr"), tag, src[0], src[1], tok::kEos}));
  const std::vector<int> tagged = {tag, src[0]};
  EXPECT_ANY_THROW(model_source(v, tagged, "fr", tag));
}

TEST(ModelBatch, TargetsAreShiftedByOne) {
  const CorpusBundle b = generate_corpus(default_manifest());
  BatchOptions opt;
  BatchStream stream({toy_route("en", "fr", 4, 3)}, opt, 1);
  const Batch batch = stream.next();
  const ModelBatch mb = make_model_batch(*b.vocab, batch, {});
  EXPECT_EQ(mb.src.batch, static_cast<int>(batch.pairs.size()));
  EXPECT_EQ(mb.tgt_in.at(0, 0), tok::kBos);
  EXPECT_EQ(mb.tgt_out[static_cast<std::size_t>(mb.tgt_in.len - 1)], tok::kEos);
  EXPECT_EQ(mb.tgt_in.at(0, 1), mb.tgt_out[0]);
}

}  // namespace
}  // namespace adapterforge
