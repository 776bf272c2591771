// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>

#include "adapterforge/errors.hpp"
#include "adapterforge/experiment.hpp"

namespace adapterforge {
namespace {

using R = DataRegime;
using P = DaPlacement;

const std::set<std::string> kBase = {"base"};
const std::set<std::string> kLa = {"la:*"};
const std::set<std::string> kDa = {"da:*"};
const std::set<std::string> kLaDa = {"la:*", "da:*"};

Preset adapt(std::string id, std::string title, P placement, bool bt = false, double dadrop = 0.0,
             std::set<std::string> trainable = kDa) {
  Preset p;
  p.id = std::move(id);
  p.title = std::move(title);
  p.kind = StageKind::Adapt;
  p.init_from = "paracrawl-la";
  p.uses_bt = bt;
  p.data = R::AdaptSubset;
  p.language_adapters = true;
  p.placement = placement;
  p.dadrop_p = dadrop;
  p.trainable = std::move(trainable);
  return p;
}

Preset finetune(std::string id, std::string title, R data, bool tags, double p_generic = 0.0) {
  Preset p;
  p.id = std::move(id);
  p.title = std::move(title);
  p.init_from = "base";
  p.data = data;
  p.tag_mode = tags;
  p.p_generic = p_generic;
  p.trainable = kBase;
  p.eval_all_domains = data == R::AllDomainsAll;
  return p;
}

Preset multi_domain(std::string id, std::string title, bool la, int la_b, P placement, std::set<std::string> trainable) {
  Preset p;
  p.id = std::move(id);
  p.title = std::move(title);
  p.init_from = "base";
  p.data = R::AllDomainsAll;
  p.language_adapters = la;
  p.la_bottleneck = la_b;
  p.placement = placement;
  p.trainable = std::move(trainable);
  p.eval_all_domains = true;
  return p;
}

std::vector<Preset> build() {
  std::vector<Preset> v;
  {
    Preset p;
    p.id = "base";
    p.title = "English-centric base model";
    p.kind = StageKind::Pretrain;
    p.data = R::EnCentricGeneric;
    p.trainable = kBase;
    v.push_back(p);
  }
  {
    Preset p;
    p.id = "paracrawl-la";
    p.title = "Base + language adapters on multiparallel generic data";
    p.kind = StageKind::LanguageAdapters;
    p.init_from = "base";
    p.data = R::MultiparallelGeneric;
    p.language_adapters = true;
    p.trainable = kLa;
    v.push_back(p);
  }
  {
    Preset p;
    p.id = "bt-data";
    p.title = "Back-translation of out-of-domain languages into English";
    p.kind = StageKind::BackTranslate;
    p.init_from = "paracrawl-la";
    p.language_adapters = true;
    p.evaluate = false;
    v.push_back(p);
  }
  v.push_back(finetune("finetune-all-langs", "Full fine-tuning on every pair of the adapt domain", R::AdaptAll, false));
  v.push_back(finetune("finetune-all-domains", "Full fine-tuning on every pair and domain", R::AllDomainsAll, false));
  v.push_back(finetune("tags-all", "Full fine-tuning on every pair and domain with domain tags", R::AllDomainsAll, true));
  v.push_back(finetune("tags", "Full fine-tuning on in-domain pairs of every domain with domain tags",
                       R::AllDomainsSubset, true));
  v.push_back(finetune("tags+paracrawl", "Domain tags plus generic data mixed at p=0.5", R::AllDomainsSubset, true, 0.5));
  {
    Preset p = adapt("vanilla-da", "Base + domain adapters only", P::Both);
    p.init_from = "base";
    p.language_adapters = false;
    v.push_back(p);
  }
  v.push_back(adapt("freeze-la+encdec-da", "Frozen LA + encoder and decoder DA", P::Both));
  v.push_back(adapt("freeze-la+enc-da", "Frozen LA + encoder DA", P::Encoder));
  v.push_back(adapt("freeze-la+dec-da", "Frozen LA + decoder DA", P::Decoder));
  v.push_back(adapt("freeze-la+encdec-da+bt", "Frozen LA + encoder and decoder DA + BT", P::Both, true));
  v.push_back(adapt("freeze-la+enc-da+bt", "Frozen LA + encoder DA + BT", P::Encoder, true));
  v.push_back(adapt("freeze-la+dec-da+bt", "Frozen LA + decoder DA + BT", P::Decoder, true));
  v.push_back(adapt("freeze-la+encdec-da+dadrop", "Frozen LA + encoder and decoder DA + DADrop", P::Both, false, 0.2));
  v.push_back(
      adapt("freeze-la+encdec-da+dadrop+bt", "Frozen LA + encoder and decoder DA + BT + DADrop", P::Both, true, 0.2));
  v.push_back(adapt("freeze-la+dec-da+bt+dadrop", "Frozen LA + decoder DA + BT + DADrop", P::Decoder, true, 0.2));
  v.push_back(adapt("freeze-la+enc-da+bt+dadrop", "Frozen LA + encoder DA + BT + DADrop", P::Encoder, true, 0.2));
  v.push_back(adapt("unfreeze-la+dec-da", "Trainable LA + decoder DA", P::Decoder, false, 0.0, kLaDa));
  v.push_back(adapt("unfreeze-la+dec-da+dadrop", "Trainable LA + decoder DA + DADrop", P::Decoder, false, 0.2, kLaDa));
  v.push_back(
      adapt("unfreeze-la+dec-da+dadrop+bt", "Trainable LA + decoder DA + DADrop + BT", P::Decoder, true, 0.2, kLaDa));
  v.push_back(adapt("unfreeze-la", "Language adapters tuned on domain data", P::None, false, 0.0, kLa));
  v.push_back(adapt("unfreeze-la+bt", "Language adapters tuned on domain data + BT", P::None, true, 0.0, kLa));
  v.push_back(adapt("enc-first-half-da", "Frozen LA + DA on the first half of the encoder", P::EncoderFirstHalf));
  v.push_back(adapt("enc-last-half-da", "Frozen LA + DA on the last half of the encoder", P::EncoderLastHalf));
  {
    Preset p = adapt("madx-stack", "Frozen LA + encoder and decoder DA + BT, MAD-X stacking", P::Both, true);
    p.stack = StackMode::MadX;
    v.push_back(p);
  }
  for (const auto& [id, title, placement] :
       {std::tuple{"freeze-la+dec-da+mono", "Frozen LA + decoder DA + copied monolingual data", P::Decoder},
        std::tuple{"freeze-la+enc-da+mono", "Frozen LA + encoder DA + copied monolingual data", P::Encoder}}) {
    Preset p = adapt(id, title, placement);
    p.mono = true;
    p.p_generic = 0.1;
    v.push_back(p);
  }
  for (const auto& [id, title, placement] :
       {std::tuple{"multi-domain-dec-da", "Decoder DA per domain, trained jointly", P::Decoder},
        std::tuple{"multi-domain-enc-da", "Encoder DA per domain, trained jointly", P::Encoder},
        std::tuple{"multi-domain-encdec-da", "Encoder and decoder DA per domain, trained jointly", P::Both}}) {
    Preset p = adapt(id, title, placement);
    p.data = R::MultiDomainJoint;
    v.push_back(p);
  }
  {
    Preset p = multi_domain("single-adapter", "One shared adapter per layer on every pair and domain", false, 1024,
                            P::Both, kDa);
    p.shared_adapter = true;
    v.push_back(p);
  }
  v.push_back(multi_domain("la-1365", "Language adapters (d=1365) on every pair and domain", true, 1365, P::None, kLa));
  v.push_back(multi_domain("la-2048", "Language adapters (d=2048) on every pair and domain", true, 2048, P::None, kLa));
  v.push_back(multi_domain("la+dec-da", "LA + decoder DA per domain, trained jointly", true, 1024, P::Decoder, kLaDa));
  v.push_back(multi_domain("la+enc-da", "LA + encoder DA per domain, trained jointly", true, 1024, P::Encoder, kLaDa));
  v.push_back(
      multi_domain("la+encdec-da", "LA + encoder and decoder DA per domain, trained jointly", true, 1024, P::Both, kLaDa));
  return v;
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a = {{"multi-domain-joint", "multi-domain-encdec-da"}};
  return a;
}

}  // namespace

std::string to_string(StageKind k) {
  switch (k) {
    case StageKind::Pretrain:
      return "pretrain";
    case StageKind::LanguageAdapters:
      return "language_adapters";
    case StageKind::BackTranslate:
      return "back_translate";
    case StageKind::Adapt:
      return "adapt";
  }
  return "?";
}

std::string to_string(DataRegime r) {
  switch (r) {
    case R::EnCentricGeneric:
      return "en-centric-generic";
    case R::MultiparallelGeneric:
      return "multiparallel-generic";
    case R::AdaptSubset:
      return "adapt-subset";
    case R::AdaptAll:
      return "adapt-all";
    case R::AllDomainsSubset:
      return "all-domains-subset";
    case R::AllDomainsAll:
      return "all-domains-all";
    case R::MultiDomainJoint:
      return "multi-domain-joint";
  }
  return "?";
}

std::string to_string(DaPlacement p) {
  switch (p) {
    case P::None:
      return "none";
    case P::Encoder:
      return "encoder";
    case P::Decoder:
      return "decoder";
    case P::Both:
      return "both";
    case P::EncoderFirstHalf:
      return "encoder-first-half";
    case P::EncoderLastHalf:
      return "encoder-last-half";
  }
  return "?";
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = build();
  return table;
}

const Preset& find_preset(const std::string& id) {
  std::string key = id;
  if (auto it = aliases().find(id); it != aliases().end()) key = it->second;
  for (const auto& p : presets()) {
    if (p.id == key) return p;
  }
  throw ConfigError("unknown preset " + id);
}

std::vector<std::string> prerequisites(const Preset& preset) {
  std::vector<std::string> out;
  if (!preset.init_from.empty()) out.push_back(preset.init_from);
  if (preset.uses_bt) out.push_back("bt-data");
  return out;
}

const std::vector<ReferenceModel>& reference_model_index() {
  static const std::string bilingual =
      "bilingual German-English study; placement findings covered by enc-first-half-da / enc-last-half-da";
  static const std::vector<ReferenceModel> index = {
      {"Base (En-centric)", "base", ""},
      {"Base + ParaCrawl LA", "paracrawl-la", ""},
      {"Finetuned", "finetune-all-domains", ""},
      {"Finetuned + domain tags", "tags-all", ""},
      {"Single adapter per layer (d=1024)", "single-adapter", ""},
      {"LA (d=1365)", "la-1365", ""},
      {"LA (d=2048)", "la-2048", ""},
      {"LA + dec. DA (d=1024)", "la+dec-da", ""},
      {"LA + enc. DA (d=1024)", "la+enc-da", ""},
      {"LA + enc & dec. DA (d=1024)", "la+encdec-da", ""},
      {"Finetune (all langs)", "finetune-all-langs", ""},
      {"FT (all langs & domains) + dom. tags", "tags-all", ""},
      {"Base + Domain adapters only", "vanilla-da", ""},
      {"Freeze LA + enc. & dec. DA", "freeze-la+encdec-da", ""},
      {"Freeze LA + enc. DA", "freeze-la+enc-da", ""},
      {"Freeze LA + dec. DA", "freeze-la+dec-da", ""},
      {"FT (all domains) + dom. tags", "tags", ""},
      {"FT (all domains) + dom. tags + ParaCrawl", "tags+paracrawl", ""},
      {"Freeze LA + enc. & dec. DA + BT", "freeze-la+encdec-da+bt", ""},
      {"Freeze LA + enc. DA + BT", "freeze-la+enc-da+bt", ""},
      {"Freeze LA + dec. DA + BT", "freeze-la+dec-da+bt", ""},
      {"Freeze LA + enc. & dec. DA + DADrop", "freeze-la+encdec-da+dadrop", ""},
      {"Freeze LA + enc. & dec. DA + BT + DADrop", "freeze-la+encdec-da+dadrop+bt", ""},
      {"Unfreeze LA + dec. DA", "unfreeze-la+dec-da", ""},
      {"Unfreeze LA + dec. DA + DADrop", "unfreeze-la+dec-da+dadrop", ""},
      {"Unfreeze LA + dec. DA + DADrop + BT", "unfreeze-la+dec-da+dadrop+bt", ""},
      {"Unfreeze LA", "unfreeze-la", ""},
      {"Unfreeze LA + BT", "unfreeze-la+bt", ""},
      {"Freeze LA + dec. DA + BT + DADrop", "freeze-la+dec-da+bt+dadrop", ""},
      {"Freeze LA + enc. DA + BT + DADrop", "freeze-la+enc-da+bt+dadrop", ""},
      {"Freeze LA + enc. first 3 layers DA", "enc-first-half-da", ""},
      {"Freeze LA + enc. last 3 layers DA", "enc-last-half-da", ""},
      {"Freeze LA + enc. & dec. DA + BT + MAD-X style", "madx-stack", ""},
      {"Freeze LA + dec. DA + Mono data", "freeze-la+dec-da+mono", ""},
      {"Freeze LA + enc. DA + Mono data", "freeze-la+enc-da+mono", ""},
      {"Multi-domain dec. DA", "multi-domain-dec-da", ""},
      {"Multi-domain enc. DA", "multi-domain-enc-da", ""},
      {"Multi-domain enc. & dec. DA", "multi-domain-encdec-da", ""},
      {"No fine-tuning (bilingual)", "", bilingual},
      {"Fine-tuned (bilingual)", "", bilingual},
      {"Enc. + dec. adapters (d=1024, bilingual)", "", bilingual},
      {"Enc. + dec. adapters + MAD-X style (bilingual)", "", bilingual},
      {"Dec. adapters (d=2048, bilingual)", "", bilingual},
      {"Enc. adapters (d=2048, bilingual)", "", bilingual},
      {"Last 3 encoder layers only (d=4096, bilingual)", "", bilingual},
      {"First 3 encoder layers only (d=4096, bilingual)", "", bilingual},
  };
  return index;
}

int scaled_bottleneck(int full_bottleneck, int d_model) {
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(full_bottleneck) * d_model / 512.0)));
}

std::int64_t full_shape_trainable(const Preset& preset) {
  ModelConfig full;
  full.d_model = 512;
  full.n_heads = 8;
  full.enc_layers = 6;
  full.dec_layers = 6;
  full.ffn_dim = 2048;
  full.vocab_size = 64000;
  full.max_len = 512;
  constexpr int kLanguages = 12;
  constexpr int kDomains = 4;
  std::int64_t total = 0;
  const auto has = [&](const char* g) { return preset.trainable.contains(g); };
  if (has("base")) total += closed_form_base_parameters(full);
  std::vector<AdapterBudgetItem> items;
  if (has("la:*") && preset.language_adapters) {
    items.push_back({AdapterKind::Language, kLanguages, full.enc_layers + full.dec_layers, preset.la_bottleneck, 512});
  }
  if (has("da:*") && preset.placement != DaPlacement::None) {
    int layers = 0;
    switch (preset.placement) {
      case P::Encoder:
        layers = full.enc_layers;
        break;
      case P::Decoder:
        layers = full.dec_layers;
        break;
      case P::Both:
        layers = full.enc_layers + full.dec_layers;
        break;
      case P::EncoderFirstHalf:
      case P::EncoderLastHalf:
        layers = (full.enc_layers + 1) / 2;
        break;
      case P::None:
        break;
    }
    const bool per_domain = preset.data == R::AllDomainsAll || preset.data == R::AllDomainsSubset ||
                            preset.data == R::MultiDomainJoint;
    const int owners = preset.shared_adapter ? 1 : (per_domain ? kDomains : 1);
    items.push_back({AdapterKind::Domain, owners, layers, preset.da_bottleneck, 512});
  }
  return total + count_adapter_budget(items);
}

}  // namespace adapterforge
