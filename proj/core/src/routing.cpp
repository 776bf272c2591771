// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "adapterforge/errors.hpp"

namespace adapterforge {
namespace {

using nlohmann::json;

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

PlacementSpec PlacementSpec::everywhere(int enc_layers, int dec_layers) {
  PlacementSpec p = encoder_only(enc_layers);
  p.decoder_layers = decoder_only(dec_layers).decoder_layers;
  return p;
}

PlacementSpec PlacementSpec::encoder_only(int enc_layers) {
  PlacementSpec p;
  for (int l = 0; l < enc_layers; ++l) p.encoder_layers.insert(l);
  return p;
}

PlacementSpec PlacementSpec::decoder_only(int dec_layers) {
  PlacementSpec p;
  for (int l = 0; l < dec_layers; ++l) p.decoder_layers.insert(l);
  return p;
}

void ExperimentConfig::validate() const {
  if (languages.empty()) throw ConfigError("experiment lists no languages");
  for (const auto& l : in_domain_languages) {
    if (!contains(languages, l)) throw ConfigError("in-domain language " + l + " is not a registered language");
  }
  for (const auto& d : domain_adapters) {
    if (!contains(domains, d)) throw ConfigError("domain adapter for unregistered domain " + d);
  }
  if (!adapt_domain.empty() && !contains(domains, adapt_domain)) {
    throw ConfigError("adapt domain " + adapt_domain + " is not registered");
  }
  if (dadrop_p < 0.0 || dadrop_p >= 1.0) throw ConfigError("dadrop_p must be in [0, 1)");
  if (p_extra < 0.0 || p_extra >= 1.0) throw ConfigError("p_extra must be in [0, 1)");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
}

bool ExperimentConfig::is_in_domain(const std::string& lang) const { return contains(in_domain_languages, lang); }

std::string experiment_to_json(const ExperimentConfig& c) {
  json j{{"languages", c.languages},
         {"domains", c.domains},
         {"in_domain_languages", c.in_domain_languages},
         {"adapt_domain", c.adapt_domain},
         {"language_adapters", c.language_adapters},
         {"domain_adapters", c.domain_adapters},
         {"placement", {{"encoder", c.placement.encoder_layers}, {"decoder", c.placement.decoder_layers}}},
         {"stack_mode", to_string(c.stack_mode)},
         {"dadrop_p", c.dadrop_p},
         {"tag_mode", c.tag_mode},
         {"p_extra", c.p_extra},
         {"temperature", std::isinf(c.temperature) ? json("inf") : json(c.temperature)}};
  if (c.shared_domain_adapter) j["shared_domain_adapter"] = *c.shared_domain_adapter;
  return j.dump(2);
}

ExperimentConfig experiment_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ExperimentConfig c;
    c.languages = j.at("languages").get<std::vector<std::string>>();
    c.domains = j.value("domains", std::vector<std::string>{});
    c.in_domain_languages = j.value("in_domain_languages", std::vector<std::string>{});
    c.adapt_domain = j.value("adapt_domain", c.adapt_domain);
    c.language_adapters = j.value("language_adapters", c.language_adapters);
    c.domain_adapters = j.value("domain_adapters", std::set<std::string>{});
    if (j.contains("shared_domain_adapter")) c.shared_domain_adapter = j.at("shared_domain_adapter").get<std::string>();
    if (j.contains("placement")) {
      c.placement.encoder_layers = j.at("placement").value("encoder", std::set<int>{});
      c.placement.decoder_layers = j.at("placement").value("decoder", std::set<int>{});
    }
    c.stack_mode = parse_stack_mode(j.value("stack_mode", std::string("serial")));
    c.dadrop_p = j.value("dadrop_p", c.dadrop_p);
    c.tag_mode = j.value("tag_mode", c.tag_mode);
    c.p_extra = j.value("p_extra", c.p_extra);
    if (j.contains("temperature")) {
      const auto& t = j.at("temperature");
      c.temperature = t.is_string() && t.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                                      : t.get<double>();
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
}

ActivationPlan plan_activation(const Route& route, const ExperimentConfig& config, const Vocabulary& vocab,
                               int enc_layers, int dec_layers) {
  if (!contains(config.languages, route.src) || !contains(config.languages, route.tgt)) {
    throw RoutingError("route " + route.key() + " uses an unregistered language");
  }
  if (route.domain && !contains(config.domains, *route.domain)) {
    throw RoutingError("route " + route.key() + " uses an unregistered domain");
  }
  std::optional<std::string> da_owner;
  if (!config.tag_mode) {
    if (config.shared_domain_adapter) {
      da_owner = config.shared_domain_adapter;
    } else if (route.domain && config.domain_adapters.contains(*route.domain)) {
      da_owner = route.domain;
    }
  }
  ActivationPlan plan;
  for (int l = 0; l < enc_layers; ++l) {
    LayerStack s;
    if (config.language_adapters) s.language = adapter_group(AdapterKind::Language, route.src);
    if (da_owner && config.placement.encoder_layers.contains(l)) s.domain = adapter_group(AdapterKind::Domain, *da_owner);
    plan.encoder.push_back(s);
  }
  for (int l = 0; l < dec_layers; ++l) {
    LayerStack s;
    if (config.language_adapters) s.language = adapter_group(AdapterKind::Language, route.tgt);
    if (da_owner && config.placement.decoder_layers.contains(l)) s.domain = adapter_group(AdapterKind::Domain, *da_owner);
    plan.decoder.push_back(s);
  }
  if (config.tag_mode && route.domain) {
    try {
      plan.tag_token = vocab.domain_tag(*route.domain);
    } catch (const ConfigError&) {
      throw RoutingError("tag mode needs a tag for domain " + *route.domain);
    }
  }
  return plan;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_index(std::span<const std::size_t> sizes, double temperature, std::mt19937_64& rng) {
  if (sizes.empty()) throw UsageError("cannot sample from an empty corpus map");
  if (!(temperature > 0.0)) throw UsageError("temperature must be > 0");
  std::vector<double> w(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw UsageError("corpus sizes must be positive");
    w[i] = std::isinf(temperature) ? 1.0 : std::pow(static_cast<double>(sizes[i]), 1.0 / temperature);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double u = unit_uniform(rng) * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

Route sample_direction(const std::map<Route, std::size_t>& sizes, double temperature, std::mt19937_64& rng) {
  std::vector<std::size_t> counts;
  std::vector<const Route*> routes;
  for (const auto& [route, n] : sizes) {
    routes.push_back(&route);
    counts.push_back(n);
  }
  return *routes[sample_index(counts, temperature, rng)];
}

int padded_tokens(const Batch& batch, const BatchOptions& options) {
  int longest = 0;
  for (const auto& p : batch.pairs) {
    longest = std::max({longest, static_cast<int>(p.src.size()) + options.src_overhead,
                        static_cast<int>(p.tgt.size()) + options.tgt_overhead});
  }
  return static_cast<int>(batch.pairs.size()) * longest;
}

BatchStream::BatchStream(std::vector<std::shared_ptr<const PairSource>> primary, BatchOptions options,
                         std::uint64_t seed)
    : options_(options), rng_(seed) {
  if (primary.empty()) throw UsageError("batch stream needs at least one source");
  if (options_.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  for (auto& src : primary) {
    if (!src || src->size() == 0) throw CorpusError("empty source in batch stream");
    check_lengths(*src);
    primary_pairs_ += src->size();
    primary_sizes_.push_back(src->size());
    primary_.push_back(Cursor{std::move(src), {}, 0});
  }
}

void BatchStream::check_lengths(const PairSource& source) const {
  for (std::size_t i = 0; i < source.size(); ++i) {
    const auto p = source.pair(i);
    const int need = std::max(static_cast<int>(p.src.size()) + options_.src_overhead,
                              static_cast<int>(p.tgt.size()) + options_.tgt_overhead);
    if (need > options_.max_tokens) {
      throw CorpusError("pair " + std::to_string(i) + " of route " + source.route().key() + " needs " +
                        std::to_string(need) + " tokens, over max_tokens " + std::to_string(options_.max_tokens));
    }
  }
}

void BatchStream::mix(std::vector<std::shared_ptr<const PairSource>> extra, double p_extra) {
  if (p_extra < 0.0 || p_extra >= 1.0) throw ConfigError("p_extra must be in [0, 1)");
  extra_.clear();
  extra_sizes_.clear();
  for (auto& src : extra) {
    if (!src || src->size() == 0) throw CorpusError("empty extra source");
    check_lengths(*src);
    extra_sizes_.push_back(src->size());
    extra_.push_back(Cursor{std::move(src), {}, 0});
  }
  p_extra_ = extra_.empty() ? 0.0 : p_extra;
}

Batch BatchStream::draw(std::vector<Cursor>& group, std::vector<std::size_t>& sizes) {
  Cursor& c = group[sample_index(sizes, options_.temperature, rng_)];
  Batch batch;
  batch.route = c.source->route();
  int longest = 0;
  while (true) {
    if (c.pos >= c.order.size()) {
      c.order.resize(c.source->size());
      std::iota(c.order.begin(), c.order.end(), 0U);
      std::shuffle(c.order.begin(), c.order.end(), rng_);
      c.pos = 0;
    }
    const auto p = c.source->pair(c.order[c.pos]);
    const int need = std::max({longest, static_cast<int>(p.src.size()) + options_.src_overhead,
                               static_cast<int>(p.tgt.size()) + options_.tgt_overhead});
    if (!batch.pairs.empty() && need * static_cast<int>(batch.pairs.size() + 1) > options_.max_tokens) break;
    batch.pairs.push_back(p);
    longest = need;
    ++c.pos;
    if (batch.pairs.size() >= c.source->size()) break;
  }
  drawn_ += batch.pairs.size();
  return batch;
}

Batch BatchStream::next() {
  if (p_extra_ > 0.0 && unit_uniform(rng_) < p_extra_) {
    Batch b = draw(extra_, extra_sizes_);
    b.from_extra = true;
    return b;
  }
  return draw(primary_, primary_sizes_);
}

std::vector<int> model_source(const Vocabulary& vocab, std::span<const int> src, const std::string& tgt_lang,
                              std::optional<int> tag) {
  std::vector<int> out;
  out.reserve(src.size() + 3);
  out.push_back(vocab.language_token(tgt_lang));
  if (tag) {
    if (!src.empty() && vocab.is_domain_tag(src.front())) throw UsageError("source already carries a domain tag");
    out.push_back(*tag);
  }
  out.insert(out.end(), src.begin(), src.end());
  out.push_back(tok::kEos);
  return out;
}

ModelBatch make_model_batch(const Vocabulary& vocab, const Batch& batch, const ActivationPlan& plan) {
  if (batch.pairs.empty()) throw UsageError("empty batch");
  std::vector<std::vector<int>> src;
  std::vector<std::vector<int>> tgt_in;
  for (const auto& p : batch.pairs) {
    src.push_back(model_source(vocab, p.src, batch.route.tgt, plan.tag_token));
    std::vector<int> t{tok::kBos};
    t.insert(t.end(), p.tgt.begin(), p.tgt.end());
    tgt_in.push_back(std::move(t));
  }
  ModelBatch mb;
  mb.route = batch.route;
  mb.plan = plan;
  mb.src = TokenBatch::from_rows(src, tok::kPad);
  mb.tgt_in = TokenBatch::from_rows(tgt_in, tok::kPad);
  mb.tgt_out.assign(static_cast<std::size_t>(mb.tgt_in.tokens()), tok::kPad);
  for (int b = 0; b < mb.tgt_in.batch; ++b) {
    const auto& p = batch.pairs[static_cast<std::size_t>(b)];
    for (std::size_t t = 0; t < p.tgt.size(); ++t) {
      mb.tgt_out[static_cast<std::size_t>(b * mb.tgt_in.len) + t] = p.tgt[t];
    }
    mb.tgt_out[static_cast<std::size_t>(b * mb.tgt_in.len) + p.tgt.size()] = tok::kEos;
  }
  return mb;
}

}  // namespace adapterforge
