// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "adapterforge/corpus_io.hpp"
#include "adapterforge/errors.hpp"
#include "adapterforge/evaluation.hpp"

namespace adapterforge {
namespace {

class Eval : public ::testing::Test {
 protected:
  Eval() : vocab_(default_manifest().lexicon()), id_(vocab_) {}

  std::vector<int> fr(std::initializer_list<int> concepts) const {
    std::vector<int> out;
    for (int c : concepts) out.push_back(vocab_.word("fr", c));
    return out;
  }
  std::vector<int> de(std::initializer_list<int> concepts) const {
    std::vector<int> out;
    for (int c : concepts) out.push_back(vocab_.word("de", c));
    return out;
  }

  Vocabulary vocab_;
  ToyLanguageIdentifier id_;
};

TEST_F(Eval, OffTargetCountsOnlyIdentifiableReferences) {
  std::vector<std::vector<int>> hyps;
  std::vector<std::vector<int>> refs;
  for (int i = 0; i < 7; ++i) {
    hyps.push_back(fr({1, 2}));
    refs.push_back(fr({1, 2}));
  }
  hyps.push_back(de({1, 2}));
  refs.push_back(fr({1}));
  for (int i = 0; i < 2; ++i) {
    hyps.push_back(de({3}));
    refs.push_back({vocab_.numeral(1)});
  }
  EXPECT_NEAR(*off_target_rate(hyps, refs, "fr", id_), 87.5, 1e-12);
  EXPECT_FALSE(off_target_rate({{1}}, {{vocab_.numeral(2)}}, "fr", id_));
}

TEST_F(Eval, ClassifyRoute) {
  const std::vector<std::string> in = {"en", "fr"};
  EXPECT_EQ(classify_route("en", "fr", in), RouteGroup::InIn);
  EXPECT_EQ(classify_route("pl", "fr", in), RouteGroup::OutIn);
  EXPECT_EQ(classify_route("en", "pl", in), RouteGroup::InOut);
  EXPECT_EQ(classify_route("de", "pl", in), RouteGroup::OutOut);
  EXPECT_THROW(classify_route("fr", "fr", in), RoutingError);
  EXPECT_EQ(to_string(RouteGroup::InOut), "in->out");
}

EvalReport sample_report() {
  EvalReport r;
  r.model_id = "m";
  r.domain = "medical";
  r.languages = {"en", "fr", "pl"};
  r.in_domain_languages = {"en", "fr"};
  r.rows = {{"en", "fr", 30, 0.5, 100.0, 10}, {"fr", "en", 20, 0.4, 100.0, 10}, {"en", "pl", 10, 0.2, 50.0, 10},
            {"fr", "pl", 12, 0.3, std::nullopt, 10}, {"pl", "en", 8, 0.1, 90.0, 10}, {"pl", "fr", 4, 0.1, 80.0, 10}};
  aggregate(r);
  return r;
}

TEST_F(Eval, AggregateUnweightedMeans) {
  const EvalReport r = sample_report();
  EXPECT_DOUBLE_EQ(r.groups.at("in->in").bleu, 25.0);
  EXPECT_DOUBLE_EQ(r.groups.at("in->out").bleu, 11.0);
  EXPECT_DOUBLE_EQ(*r.groups.at("in->out").on_target, 50.0);
  EXPECT_DOUBLE_EQ(r.groups.at("out->in").bleu, 6.0);
  EXPECT_EQ(r.groups.at("out->out").routes, 0);
  EXPECT_EQ(r.groups.at("all").routes, 6);
  EXPECT_NEAR(r.groups.at("all").bleu, 84.0 / 6, 1e-12);
  ASSERT_NE(r.find("pl", "fr"), nullptr);
  EXPECT_EQ(r.find("pl", "pl"), nullptr);
}

TEST_F(Eval, ReportJsonRoundTrip) {
  const EvalReport r = sample_report();
  const EvalReport back = report_from_json(report_to_json(r));
  EXPECT_EQ(report_to_json(back), report_to_json(r));
  EXPECT_FALSE(back.find("fr", "pl")->on_target);
}

TEST_F(Eval, FormatCellBracketsLowOnTarget) {
  EXPECT_EQ(format_cell(20.14, 71.2), "20.1 (71%)");
  EXPECT_EQ(format_cell(20.14, 95.0), "20.1");
  EXPECT_EQ(format_cell(20.14, std::nullopt), "20.1");
}

TEST_F(Eval, HeatmapDeltasAgainstBaseline) {
  const EvalReport r = sample_report();
  EvalReport base = r;
  for (auto& row : base.rows) row.bleu -= 1.0;
  const std::string csv = heatmap_csv(r, &base);
  EXPECT_NE(csv.find("en,fr,bleu,30"), std::string::npos);
  EXPECT_NE(csv.find(",1"), std::string::npos);
}

TEST_F(Eval, ComparisonTableRejectsDifferentGrids) {
  const EvalReport a = sample_report();
  EvalReport b = sample_report();
  b.model_id = "b";
  const std::string table = comparison_table({a, b}, "bleu", "m");
  EXPECT_NE(table.find("delta"), std::string::npos);
  b.languages = {"en", "fr"};
  EXPECT_THROW(comparison_table({a, b}, "bleu", ""), ConfigError);
}

}  // namespace
}  // namespace adapterforge
