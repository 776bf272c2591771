// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "adapterforge/errors.hpp"
#include "adapterforge/experiment.hpp"

namespace adapterforge {
namespace {

namespace fs = std::filesystem;

TEST(Presets, IdsUniqueAndPrerequisitesResolve) {
  std::set<std::string> seen;
  for (const Preset& p : presets()) {
    EXPECT_TRUE(seen.insert(p.id).second) << p.id;
    for (const auto& dep : prerequisites(p)) EXPECT_TRUE(seen.contains(dep)) << p.id << " needs " << dep;
  }
  EXPECT_THROW(find_preset("nope"), ConfigError);
  EXPECT_EQ(find_preset("multi-domain-joint").id, "multi-domain-encdec-da");
}

TEST(Presets, BtPresetsDependOnBtData) {
  const auto deps = prerequisites(find_preset("freeze-la+dec-da+bt"));
  EXPECT_NE(std::find(deps.begin(), deps.end(), "bt-data"), deps.end());
  EXPECT_NE(std::find(deps.begin(), deps.end(), "paracrawl-la"), deps.end());
}

TEST(Presets, FullShapeBudgets) {
  EXPECT_EQ(full_shape_trainable(find_preset("freeze-la+dec-da")), 6'306'816);
  EXPECT_EQ(full_shape_trainable(find_preset("freeze-la+enc-da")), 6'306'816);
  EXPECT_EQ(full_shape_trainable(find_preset("freeze-la+encdec-da")), 12'613'632);
  EXPECT_EQ(full_shape_trainable(find_preset("la+encdec-da")), 201'818'112);
  EXPECT_EQ(scaled_bottleneck(1024, 64), 128);
  EXPECT_EQ(scaled_bottleneck(1, 64), 1);
}

TEST(Presets, ReferenceIndexPointsAtPresetsOrNonGoals) {
  for (const auto& m : reference_model_index()) {
    if (m.preset.empty()) {
      EXPECT_FALSE(m.non_goal.empty()) << m.name;
    } else {
      EXPECT_NO_THROW(find_preset(m.preset)) << m.name;
    }
  }
}

TEST(RunSettingsJson, RoundTripAndUnknownKey) {
  RunSettings s;
  s.seed = 9;
  s.adapter_lr = 1e-3;
  s.model.d_model = 32;
  s.in_domain_languages = {"en", "pl"};
  const RunSettings back = run_settings_from_json(run_settings_to_json(s));
  EXPECT_EQ(run_settings_to_json(back), run_settings_to_json(s));
  EXPECT_EQ(back.model.d_model, 32);
  EXPECT_THROW(run_settings_from_json(R"({"learning_rate": 1})"), ConfigError);
  EXPECT_EQ(run_settings_from_json(R"({"eval_beam": 3})").eval_beam, 3);
}

class Runner : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    CorpusManifest m = default_manifest();
    m.languages = {"en", "fr", "de", "pl"};
    for (auto& d : m.domains) d.lines = 40;
    m.valid_size = 3;
    m.test_size = 3;
    bundle_ = new CorpusBundle(generate_corpus(m));
  }
  static void TearDownTestSuite() {
    delete bundle_;
    bundle_ = nullptr;
  }
  static RunSettings settings(const fs::path& out) {
    RunSettings s;
    s.out_dir = out;
    s.in_domain_languages = {"en", "fr"};
    s.model.d_model = 16;
    s.model.n_heads = 2;
    s.model.enc_layers = 2;
    s.model.dec_layers = 1;
    s.model.ffn_dim = 32;
    s.model.max_len = 64;
    s.pretrain_updates = 4;
    s.la_updates = 3;
    s.adapt_updates = 3;
    s.eval_every = 2;
    s.val_lines = 2;
    s.eval_lines = 2;
    s.eval_beam = 1;
    s.bt_lines = 3;
    s.bt_beam = 1;
    return s;
  }
  static CorpusBundle* bundle_;
};
CorpusBundle* Runner::bundle_ = nullptr;

TEST_F(Runner, ExperimentConfigForPlacements) {
  const RunSettings s = settings("/tmp/unused");
  const ExperimentConfig dec = experiment_config(find_preset("freeze-la+dec-da"), s, *bundle_);
  EXPECT_TRUE(dec.placement.is_decoder_only());
  EXPECT_EQ(dec.domain_adapters, std::set<std::string>{"medical"});
  EXPECT_TRUE(dec.language_adapters);
  const ExperimentConfig half = experiment_config(find_preset("enc-first-half-da"), s, *bundle_);
  EXPECT_EQ(half.placement.encoder_layers, std::set<int>{0});
  const ExperimentConfig last = experiment_config(find_preset("enc-last-half-da"), s, *bundle_);
  EXPECT_EQ(last.placement.encoder_layers, std::set<int>{1});
  const ExperimentConfig tags = experiment_config(find_preset("tags"), s, *bundle_);
  EXPECT_TRUE(tags.tag_mode);
  EXPECT_FALSE(tags.language_adapters);
}

TEST_F(Runner, PipelineProducesArtifactsAndRefusesMissingPrerequisites) {
  const fs::path out = fs::temp_directory_path() / "adapterforge_runner_test";
  fs::remove_all(out);
  const RunSettings s = settings(out);
  EXPECT_THROW(run_preset(find_preset("freeze-la+dec-da+bt"), s, *bundle_), MissingPrerequisiteError);
  const auto outcomes = run_pipeline({"freeze-la+dec-da+bt"}, s, *bundle_);
  ASSERT_EQ(outcomes.size(), 4U);
  for (const char* f : {"model.ckpt", "report.json", "heatmap.csv", "train.jsonl", "experiment.json"}) {
    EXPECT_TRUE(fs::exists(out / "freeze-la+dec-da+bt" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(out / "bt-data" / "bt.json"));
  const EvalReport& r = outcomes.back().reports.front();
  EXPECT_EQ(r.domain, "medical");
  EXPECT_EQ(r.rows.size(), 12U);
  EXPECT_EQ(r.baseline_id, "paracrawl-la");
  RunSettings changed = s;
  changed.model.ffn_dim = 64;
  EXPECT_THROW(run_preset(find_preset("freeze-la+dec-da"), changed, *bundle_), ConfigError);
  fs::remove_all(out);
}

}  // namespace
}  // namespace adapterforge
