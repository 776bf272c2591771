// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adapterforge/adapters.hpp"
#include "adapterforge/corpus_io.hpp"
#include "adapterforge/evaluation.hpp"
#include "adapterforge/routing.hpp"
#include "adapterforge/transformer.hpp"

namespace adapterforge {

enum class StageKind {
  Pretrain,          ///< full model from scratch on English-centric generic data
  LanguageAdapters,  ///< one adapter per language on multiparallel generic data
  BackTranslate,     ///< synthetic English for out-of-domain languages
  Adapt,             ///< adapters, tags or full fine-tuning on domain data
};

/// Which pairs a stage trains on.
enum class DataRegime {
  EnCentricGeneric,    ///< generic domain, en <-> xx
  MultiparallelGeneric,  ///< generic domain, every ordered pair
  AdaptSubset,         ///< adapt domain, pairs among the in-domain languages
  AdaptAll,            ///< adapt domain, every ordered pair
  AllDomainsSubset,    ///< every term domain, in-domain language pairs
  AllDomainsAll,       ///< every term domain, every ordered pair
  MultiDomainJoint,    ///< other term domains on every pair, adapt domain on the subset
};

/// Layers that host domain adapters.
enum class DaPlacement { None, Encoder, Decoder, Both, EncoderFirstHalf, EncoderLastHalf };

std::string to_string(StageKind k);
std::string to_string(DataRegime r);
std::string to_string(DaPlacement p);

/// One runnable experiment. Every field is explicit; there are no hidden
/// flags outside this table.
struct Preset {
  std::string id;
  std::string title;
  StageKind kind = StageKind::Adapt;
  /// Preset whose checkpoint initialises this one; empty starts from scratch.
  std::string init_from;
  /// Needs the back-translation artifacts.
  bool uses_bt = false;
  DataRegime data = DataRegime::AdaptSubset;
  /// Generic multiparallel pairs mixed in with this probability (0 = none).
  double p_generic = 0.0;
  /// Copy-denoising pairs for out-of-domain languages.
  bool mono = false;
  bool language_adapters = false;
  /// Adapter widths at full shape (d_model 512); desk runs scale by d_model/512.
  int la_bottleneck = 1024;
  int da_bottleneck = 1024;
  DaPlacement placement = DaPlacement::None;
  /// A single adapter per layer shared by every route.
  bool shared_adapter = false;
  bool tag_mode = false;
  StackMode stack = StackMode::SerialNewLN;
  double dadrop_p = 0.0;
  /// "base", "la:*", "da:*" or explicit groups.
  std::set<std::string> trainable;
  /// Score every term domain rather than only the adapt domain.
  bool eval_all_domains = false;
  bool evaluate = true;
};

/// Preset table, in dependency order.
const std::vector<Preset>& presets();
/// Throws ConfigError for an unknown id. Accepts aliases.
const Preset& find_preset(const std::string& id);
/// Direct prerequisites (init checkpoint and back-translation stage).
std::vector<std::string> prerequisites(const Preset& preset);

/// A named reference configuration and the preset that reproduces it.
struct ReferenceModel {
  std::string name;
  std::string preset;    ///< empty when out of scope
  std::string non_goal;  ///< reason when out of scope
};
const std::vector<ReferenceModel>& reference_model_index();

/// Run-wide knobs shared by every preset.
struct RunSettings {
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  std::string adapt_domain = "medical";
  std::vector<std::string> in_domain_languages = {"en", "fr", "de", "cs"};
  ModelConfig model;  ///< vocab_size is taken from the corpus
  int max_tokens = 512;
  std::int64_t pretrain_updates = 6000;
  double pretrain_lr = 2e-3;
  int warmup = 400;
  std::int64_t la_updates = 3000;
  std::int64_t adapt_updates = 2000;
  double adapter_lr = 5e-5;
  double finetune_lr = 5e-5;
  int max_epochs = 20;
  int eval_every = 250;
  int patience = 0;
  double temperature = 5.0;
  /// Lines per language used as back-translation input; 0 uses all.
  int bt_lines = 0;
  int bt_beam = 5;
  int eval_beam = 5;
  /// Test lines per route; 0 uses the whole split.
  int eval_lines = 0;
  int val_lines = 0;  ///< validation lines per route; 0 uses all
};

/// JSON view of RunSettings. Missing keys keep their defaults; unknown keys
/// are a ConfigError.
std::string run_settings_to_json(const RunSettings& settings);
RunSettings run_settings_from_json(const std::string& text, RunSettings defaults = {});

/// Result of a preset run.
struct RunOutcome {
  std::filesystem::path dir;
  std::vector<EvalReport> reports;  ///< adapt domain first
};

/// Experiment config (routing view) for a preset.
ExperimentConfig experiment_config(const Preset& preset, const RunSettings& settings, const CorpusBundle& corpus);

/// Adapter width at the given model width.
int scaled_bottleneck(int full_bottleneck, int d_model);

/// Trainable parameter count of a preset at full shape (d_model 512, 6+6
/// layers, 64k vocabulary, 12 languages, 4 domains), in closed form.
std::int64_t full_shape_trainable(const Preset& preset);

/// Trains and evaluates one preset under settings.out_dir/<id>/. Throws
/// MissingPrerequisiteError when a prerequisite has not been run; never
/// retrains one.
RunOutcome run_preset(const Preset& preset, const RunSettings& settings, const CorpusBundle& corpus);

/// Runs presets in order, each after its prerequisites.
std::vector<RunOutcome> run_pipeline(const std::vector<std::string>& preset_ids, const RunSettings& settings,
                                     const CorpusBundle& corpus);

}  // namespace adapterforge
