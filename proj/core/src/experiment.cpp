// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "adapterforge/augment.hpp"
#include "adapterforge/checkpoint.hpp"
#include "adapterforge/errors.hpp"
#include "adapterforge/training.hpp"

namespace adapterforge {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using Sources = std::vector<std::shared_ptr<const PairSource>>;

constexpr const char* kCheckpoint = "model.ckpt";
constexpr const char* kBtManifest = "bt.json";

std::string generic_domain(const CorpusBundle& corpus) {
  for (const auto& d : corpus.manifest.domains) {
    if (d.generic) return d.name;
  }
  throw ConfigError("corpus has no generic domain");
}

std::vector<std::string> term_domains(const CorpusBundle& corpus) {
  std::vector<std::string> out;
  for (const auto& d : corpus.manifest.domains) {
    if (!d.generic) out.push_back(d.name);
  }
  return out;
}

std::vector<std::string> out_of_domain(const RunSettings& s, const CorpusBundle& corpus) {
  std::vector<std::string> out;
  for (const auto& l : corpus.manifest.languages) {
    if (std::find(s.in_domain_languages.begin(), s.in_domain_languages.end(), l) == s.in_domain_languages.end()) {
      out.push_back(l);
    }
  }
  return out;
}

std::set<std::string> da_owners(const Preset& p, const RunSettings& s, const CorpusBundle& corpus) {
  if (p.placement == DaPlacement::None || p.tag_mode) return {};
  if (p.shared_adapter) return {"shared"};
  switch (p.data) {
    case DataRegime::AllDomainsSubset:
    case DataRegime::AllDomainsAll:
    case DataRegime::MultiDomainJoint: {
      const auto t = term_domains(corpus);
      return {t.begin(), t.end()};
    }
    default:
      return {s.adapt_domain};
  }
}

PlacementSpec placement_spec(DaPlacement p, int enc, int dec) {
  PlacementSpec out;
  const int half = (enc + 1) / 2;
  switch (p) {
    case DaPlacement::None:
      break;
    case DaPlacement::Encoder:
      out = PlacementSpec::encoder_only(enc);
      break;
    case DaPlacement::Decoder:
      out = PlacementSpec::decoder_only(dec);
      break;
    case DaPlacement::Both:
      out = PlacementSpec::everywhere(enc, dec);
      break;
    case DaPlacement::EncoderFirstHalf:
      for (int l = 0; l < half; ++l) out.encoder_layers.insert(l);
      break;
    case DaPlacement::EncoderLastHalf:
      for (int l = enc - half; l < enc; ++l) out.encoder_layers.insert(l);
      break;
  }
  return out;
}

std::set<int> all_layers(int n) {
  std::set<int> out;
  for (int l = 0; l < n; ++l) out.insert(l);
  return out;
}

/// Ordered pairs; `centric` keeps only pairs with English on one side.
std::vector<std::pair<std::string, std::string>> pairs_of(const std::vector<std::string>& langs, bool centric) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : langs) {
    for (const auto& t : langs) {
      if (s == t) continue;
      if (centric && s != "en" && t != "en") continue;
      out.emplace_back(s, t);
    }
  }
  return out;
}

std::shared_ptr<const MultiParallelCorpus> capped(const MultiParallelCorpus& c, int lines) {
  if (lines <= 0 || static_cast<std::size_t>(lines) >= c.size()) return std::make_shared<MultiParallelCorpus>(c);
  std::vector<std::size_t> rows(static_cast<std::size_t>(lines));
  std::iota(rows.begin(), rows.end(), 0);
  return std::make_shared<MultiParallelCorpus>(c.subset(rows));
}

void add_routes(Sources& out, const std::shared_ptr<const MultiParallelCorpus>& corpus,
                const std::vector<std::pair<std::string, std::string>>& pairs, const std::string& label) {
  for (const auto& [s, t] : pairs) out.push_back(std::make_shared<AlignedRoute>(corpus, Route{s, t, label}));
}

/// Training and validation sources of one domain under a pair set.
void add_domain(Sources& train, Sources& valid, const CorpusBundle& corpus, const std::string& domain,
                const std::vector<std::pair<std::string, std::string>>& pairs, int val_lines,
                const std::string& label) {
  const DomainSplit& split = corpus.splits.at(domain);
  add_routes(train, std::make_shared<MultiParallelCorpus>(split.train), pairs, label);
  add_routes(valid, capped(split.valid, val_lines), pairs, label);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << text;
    if (!out) throw FormatError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingPrerequisiteError(path.string() + " does not exist");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path bt_file(const fs::path& bt_dir, const std::string& domain, const std::string& lang) {
  return bt_dir / domain / ("en-" + lang + ".tsv");
}

/// Loads synthetic pairs written by the back-translation stage: both the
/// (synthetic en -> lang) and (lang -> synthetic en) orientations.
void load_bt(Sources& out, const fs::path& bt_dir, const Vocabulary& vocab, const std::string& domain,
             const std::vector<std::string>& langs) {
  for (const auto& lang : langs) {
    const fs::path path = bt_file(bt_dir, domain, lang);
    std::istringstream in(read_text(path));
    std::vector<SentencePair> to_lang;
    std::vector<SentencePair> from_lang;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto a = line.find('\t');
      const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
      if (b == std::string::npos) throw FormatError("malformed back-translation line in " + path.string());
      const std::int64_t pivot = std::stoll(line.substr(0, a));
      auto en = vocab.tokenize(line.substr(a + 1, b - a - 1));
      auto clean = vocab.tokenize(line.substr(b + 1));
      to_lang.push_back({en, clean, pivot, true, false});
      from_lang.push_back({clean, en, pivot, false, true});
    }
    if (to_lang.empty()) throw CorpusError("back-translation file " + path.string() + " is empty");
    out.push_back(std::make_shared<ParallelCorpus>(Route{"en", lang, domain}, std::move(to_lang)));
    out.push_back(std::make_shared<ParallelCorpus>(Route{lang, "en", domain}, std::move(from_lang)));
  }
}

void run_back_translation(const Preset& preset, const RunSettings& s, const CorpusBundle& corpus, const fs::path& dir) {
  const auto model = load_model(s.out_dir / preset.init_from / kCheckpoint);
  const auto langs = out_of_domain(s, corpus);
  const MultiParallelCorpus& mono = corpus.splits.at(s.adapt_domain).train;
  BeamOptions beam;
  beam.beam_size = s.bt_beam;
  beam.max_len = model->config().max_len;
  for (const auto& lang : langs) {
    const auto input = capped(mono, s.bt_lines);
    const BackTranslation bt = back_translate(*model, *corpus.vocab, *input, lang, beam);
    std::ostringstream out;
    for (const auto& p : bt.to_lang.pairs()) {
      out << p.pivot << '\t' << corpus.vocab->detokenize(p.src) << '\t' << corpus.vocab->detokenize(p.tgt) << '\n';
    }
    write_text(bt_file(dir, s.adapt_domain, lang), out.str());
  }
  write_text(dir / kBtManifest,
             json{{"domain", s.adapt_domain}, {"languages", langs}, {"seed", s.seed}, {"source", preset.init_from}}
                 .dump(2));
}

void check_prerequisites(const Preset& preset, const RunSettings& s) {
  if (!preset.init_from.empty()) {
    const fs::path ckpt = s.out_dir / preset.init_from / kCheckpoint;
    if (!fs::exists(ckpt)) {
      throw MissingPrerequisiteError("preset " + preset.id + " needs " + preset.init_from + " (missing " +
                                     ckpt.string() + "); run it first");
    }
  }
  if (preset.uses_bt) {
    const fs::path manifest = s.out_dir / "bt-data" / kBtManifest;
    if (!fs::exists(manifest)) {
      throw MissingPrerequisiteError("preset " + preset.id + " needs bt-data (missing " + manifest.string() +
                                     "); run it first");
    }
    const json j = json::parse(read_text(manifest));
    if (j.at("domain").get<std::string>() != s.adapt_domain) {
      throw MissingPrerequisiteError("bt-data was produced for domain " + j.at("domain").get<std::string>());
    }
  }
}

TrainConfig train_config(const Preset& p, const RunSettings& s, const fs::path& dir) {
  TrainConfig c;
  c.phase = p.id;
  c.max_epochs = s.max_epochs;
  c.eval_every = s.eval_every;
  c.patience = s.patience;
  c.trainable_groups = p.trainable;
  c.seed = s.seed;
  c.batching.max_tokens = s.max_tokens;
  c.dropout = s.model.dropout_p;
  c.p_extra = p.p_generic;
  c.log_path = dir / "train.jsonl";
  switch (p.kind) {
    case StageKind::Pretrain:
      c.schedule = Schedule::inv_sqrt(s.pretrain_lr, s.warmup);
      c.max_updates = s.pretrain_updates;
      c.batching.temperature = s.temperature;
      break;
    case StageKind::LanguageAdapters:
      c.schedule = Schedule::fixed(s.adapter_lr);
      c.max_updates = s.la_updates;
      c.batching.temperature = s.temperature;
      break;
    default:
      c.schedule = Schedule::fixed(p.trainable.contains("base") ? s.finetune_lr : s.adapter_lr);
      c.max_updates = s.adapt_updates;
      c.batching.temperature = std::numeric_limits<double>::infinity();
      break;
  }
  return c;
}

std::unique_ptr<TransformerModel> initial_model(const Preset& p, const RunSettings& s, const CorpusBundle& corpus) {
  if (p.init_from.empty()) {
    ModelConfig cfg = s.model;
    cfg.vocab_size = corpus.vocab->size();
    return std::make_unique<TransformerModel>(cfg, s.seed);
  }
  auto model = load_model(s.out_dir / p.init_from / kCheckpoint);
  if (model->config().vocab_size != corpus.vocab->size()) {
    throw ConfigError("checkpoint of " + p.init_from + " was trained on a different vocabulary");
  }
  return model;
}

void install_adapters(TransformerModel& model, const Preset& p, const RunSettings& s, const CorpusBundle& corpus,
                      const ExperimentConfig& exp) {
  const auto& cfg = model.config();
  std::uint64_t salt = s.seed * 0x100000001b3ULL + 7;
  if (p.language_adapters) {
    const int width = scaled_bottleneck(p.la_bottleneck, cfg.d_model);
    for (const auto& lang : corpus.manifest.languages) {
      ++salt;
      if (model.has_group(adapter_group(AdapterKind::Language, lang))) continue;
      model.add_adapter_set(AdapterKind::Language, lang, all_layers(cfg.enc_layers), all_layers(cfg.dec_layers), width,
                            salt);
    }
  }
  const int da_width = scaled_bottleneck(p.da_bottleneck, cfg.d_model);
  std::set<std::string> owners = exp.domain_adapters;
  if (exp.shared_domain_adapter) owners.insert(*exp.shared_domain_adapter);
  for (const auto& owner : owners) {
    ++salt;
    if (model.has_group(adapter_group(AdapterKind::Domain, owner))) continue;
    model.add_adapter_set(AdapterKind::Domain, owner, exp.placement.encoder_layers, exp.placement.decoder_layers,
                          da_width, salt);
  }
  model.adapter_settings() = AdapterSettings{p.stack, p.dadrop_p};
}

struct StageData {
  TrainData data;
  std::vector<std::string> eval_domains;
};

StageData stage_data(const Preset& p, const RunSettings& s, const CorpusBundle& corpus, const ExperimentConfig& exp) {
  StageData out;
  auto& train = out.data.primary;
  auto& valid = out.data.validation;
  const auto& langs = corpus.manifest.languages;
  const auto generic = generic_domain(corpus);
  const auto all_pairs = pairs_of(langs, false);
  const auto in_pairs = pairs_of(s.in_domain_languages, false);
  switch (p.data) {
    case DataRegime::EnCentricGeneric:
      add_domain(train, valid, corpus, generic, pairs_of(langs, true), s.val_lines, generic);
      break;
    case DataRegime::MultiparallelGeneric:
      add_domain(train, valid, corpus, generic, all_pairs, s.val_lines, generic);
      break;
    case DataRegime::AdaptSubset:
      add_domain(train, valid, corpus, s.adapt_domain, in_pairs, s.val_lines, s.adapt_domain);
      break;
    case DataRegime::AdaptAll:
      add_domain(train, valid, corpus, s.adapt_domain, all_pairs, s.val_lines, s.adapt_domain);
      break;
    case DataRegime::AllDomainsSubset:
      for (const auto& d : term_domains(corpus)) add_domain(train, valid, corpus, d, in_pairs, s.val_lines, d);
      break;
    case DataRegime::AllDomainsAll:
      for (const auto& d : term_domains(corpus)) add_domain(train, valid, corpus, d, all_pairs, s.val_lines, d);
      break;
    case DataRegime::MultiDomainJoint:
      for (const auto& d : term_domains(corpus)) {
        add_domain(train, valid, corpus, d, d == s.adapt_domain ? in_pairs : all_pairs, s.val_lines, d);
      }
      break;
  }
  if (p.uses_bt) load_bt(train, s.out_dir / "bt-data", *corpus.vocab, s.adapt_domain, out_of_domain(s, corpus));
  if (p.mono) {
    std::mt19937_64 rng(s.seed ^ 0x6d6f6e6fULL);
    const MultiParallelCorpus& mono = corpus.splits.at(s.adapt_domain).train;
    for (const auto& lang : out_of_domain(s, corpus)) {
      train.push_back(std::make_shared<ParallelCorpus>(make_denoising_pairs(mono, lang, NoiseKind::None, 0.0, rng)));
    }
  }
  if (p.p_generic > 0.0) {
    // Adapter presets see generic pairs through their domain adapter; tag
    // presets see them under the generic tag.
    const std::string label = p.tag_mode ? generic : s.adapt_domain;
    add_routes(out.data.extra, std::make_shared<MultiParallelCorpus>(corpus.splits.at(generic).train), all_pairs, label);
  }
  const int enc = s.model.enc_layers;
  const int dec = s.model.dec_layers;
  out.data.plan_for = [exp, vocab = corpus.vocab, enc, dec](const Route& r) {
    return plan_activation(r, exp, *vocab, enc, dec);
  };
  if (p.eval_all_domains) {
    out.eval_domains.push_back(s.adapt_domain);
    for (const auto& d : term_domains(corpus)) {
      if (d != s.adapt_domain) out.eval_domains.push_back(d);
    }
  } else {
    out.eval_domains.push_back(s.adapt_domain);
  }
  return out;
}

std::string metadata(const Preset& p, const RunSettings& s, const TrainResult& r) {
  return json{{"preset", p.id},
              {"seed", s.seed},
              {"updates", r.updates},
              {"best_update", r.best_update},
              {"best_val_nll", r.best_val_nll},
              {"pairs_drawn", r.pairs_drawn}}
      .dump();
}

}  // namespace

ExperimentConfig experiment_config(const Preset& preset, const RunSettings& settings, const CorpusBundle& corpus) {
  ExperimentConfig c;
  c.languages = corpus.manifest.languages;
  for (const auto& d : corpus.manifest.domains) c.domains.push_back(d.name);
  c.in_domain_languages = settings.in_domain_languages;
  c.adapt_domain = settings.adapt_domain;
  c.language_adapters = preset.language_adapters;
  const auto owners = da_owners(preset, settings, corpus);
  if (preset.shared_adapter && !owners.empty()) {
    c.shared_domain_adapter = *owners.begin();
  } else {
    for (const auto& o : owners) c.domain_adapters.insert(o);
  }
  c.placement = placement_spec(owners.empty() ? DaPlacement::None : preset.placement, settings.model.enc_layers,
                               settings.model.dec_layers);
  c.stack_mode = preset.stack;
  c.dadrop_p = preset.dadrop_p;
  c.tag_mode = preset.tag_mode;
  c.p_extra = preset.p_generic;
  c.temperature = preset.kind == StageKind::Adapt ? std::numeric_limits<double>::infinity() : settings.temperature;
  c.validate();
  return c;
}

std::string run_settings_to_json(const RunSettings& s) {
  return json{{"seed", s.seed},
              {"adapt_domain", s.adapt_domain},
              {"in_domain_languages", s.in_domain_languages},
              {"model", json::parse(model_config_to_json(s.model))},
              {"max_tokens", s.max_tokens},
              {"pretrain_updates", s.pretrain_updates},
              {"pretrain_lr", s.pretrain_lr},
              {"warmup", s.warmup},
              {"la_updates", s.la_updates},
              {"adapt_updates", s.adapt_updates},
              {"adapter_lr", s.adapter_lr},
              {"finetune_lr", s.finetune_lr},
              {"max_epochs", s.max_epochs},
              {"eval_every", s.eval_every},
              {"patience", s.patience},
              {"temperature", s.temperature},
              {"bt_lines", s.bt_lines},
              {"bt_beam", s.bt_beam},
              {"eval_beam", s.eval_beam},
              {"eval_lines", s.eval_lines},
              {"val_lines", s.val_lines}}
      .dump(2);
}

RunSettings run_settings_from_json(const std::string& text, RunSettings s) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("run settings must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "seed") {
        s.seed = value.get<std::uint64_t>();
      } else if (key == "adapt_domain") {
        s.adapt_domain = value.get<std::string>();
      } else if (key == "in_domain_languages") {
        s.in_domain_languages = value.get<std::vector<std::string>>();
      } else if (key == "model") {
        json merged = json::parse(model_config_to_json(s.model));
        merged.update(value);
        s.model = model_config_from_json(merged.dump());
      } else if (key == "max_tokens") {
        s.max_tokens = value.get<int>();
      } else if (key == "pretrain_updates") {
        s.pretrain_updates = value.get<std::int64_t>();
      } else if (key == "pretrain_lr") {
        s.pretrain_lr = value.get<double>();
      } else if (key == "warmup") {
        s.warmup = value.get<int>();
      } else if (key == "la_updates") {
        s.la_updates = value.get<std::int64_t>();
      } else if (key == "adapt_updates") {
        s.adapt_updates = value.get<std::int64_t>();
      } else if (key == "adapter_lr") {
        s.adapter_lr = value.get<double>();
      } else if (key == "finetune_lr") {
        s.finetune_lr = value.get<double>();
      } else if (key == "max_epochs") {
        s.max_epochs = value.get<int>();
      } else if (key == "eval_every") {
        s.eval_every = value.get<int>();
      } else if (key == "patience") {
        s.patience = value.get<int>();
      } else if (key == "temperature") {
        s.temperature = value.get<double>();
      } else if (key == "bt_lines") {
        s.bt_lines = value.get<int>();
      } else if (key == "bt_beam") {
        s.bt_beam = value.get<int>();
      } else if (key == "eval_beam") {
        s.eval_beam = value.get<int>();
      } else if (key == "eval_lines") {
        s.eval_lines = value.get<int>();
      } else if (key == "val_lines") {
        s.val_lines = value.get<int>();
      } else {
        throw ConfigError("unknown run setting '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run settings: ") + e.what());
  }
  return s;
}

RunOutcome run_preset(const Preset& preset, const RunSettings& settings, const CorpusBundle& corpus) {
  if (settings.out_dir.empty()) throw ConfigError("run needs an output directory");
  if (!corpus.vocab) throw ConfigError("corpus has no vocabulary");
  check_prerequisites(preset, settings);
  RunOutcome outcome;
  outcome.dir = settings.out_dir / preset.id;
  fs::create_directories(outcome.dir);

  if (preset.kind == StageKind::BackTranslate) {
    run_back_translation(preset, settings, corpus, outcome.dir);
    return outcome;
  }

  const ExperimentConfig exp = experiment_config(preset, settings, corpus);
  write_text(outcome.dir / "experiment.json", experiment_to_json(exp));
  auto model = initial_model(preset, settings, corpus);
  ModelConfig expected = settings.model;
  expected.vocab_size = corpus.vocab->size();
  if (!(model->config() == expected)) {
    throw ConfigError("checkpoint of " + preset.init_from + " does not match the requested model config");
  }
  install_adapters(*model, preset, settings, corpus, exp);
  StageData stage = stage_data(preset, settings, corpus, exp);

  const TrainConfig config = train_config(preset, settings, outcome.dir);
  const TrainResult result = train(*model, *corpus.vocab, stage.data, config);
  save_checkpoint(outcome.dir / kCheckpoint, *model, {}, metadata(preset, settings, result));

  if (!preset.evaluate) return outcome;
  EvalOptions eval;
  eval.beam.beam_size = settings.eval_beam;
  eval.beam.max_len = model->config().max_len;
  eval.max_lines = settings.eval_lines;
  std::optional<EvalReport> baseline;
  const fs::path baseline_path = settings.out_dir / "paracrawl-la" / "report.json";
  if (preset.id != "paracrawl-la" && fs::exists(baseline_path)) baseline = report_from_json(read_text(baseline_path));
  for (const auto& domain : stage.eval_domains) {
    EvalReport report = evaluate_grid(*model, *corpus.vocab, corpus.splits.at(domain).test, corpus.manifest.languages,
                                      settings.in_domain_languages, stage.data.plan_for, eval);
    report.model_id = preset.id;
    if (baseline && domain == settings.adapt_domain) report.baseline_id = baseline->model_id;
    const std::string name = domain == settings.adapt_domain ? "report.json" : "report-" + domain + ".json";
    write_text(outcome.dir / name, report_to_json(report));
    if (domain == settings.adapt_domain) {
      write_text(outcome.dir / "heatmap.csv", heatmap_csv(report, baseline ? &*baseline : nullptr));
    }
    outcome.reports.push_back(std::move(report));
  }
  return outcome;
}

std::vector<RunOutcome> run_pipeline(const std::vector<std::string>& preset_ids, const RunSettings& settings,
                                     const CorpusBundle& corpus) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    const Preset& p = find_preset(id);
    if (seen.contains(p.id)) return;
    for (const auto& dep : prerequisites(p)) visit(dep);
    seen.insert(p.id);
    order.push_back(p.id);
  };
  for (const auto& id : preset_ids) visit(id);
  std::vector<RunOutcome> out;
  for (const auto& id : order) out.push_back(run_preset(find_preset(id), settings, corpus));
  return out;
}

}  // namespace adapterforge
