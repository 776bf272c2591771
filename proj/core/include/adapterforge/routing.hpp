// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "adapterforge/adapters.hpp"
#include "adapterforge/corpus.hpp"
#include "adapterforge/plan.hpp"
#include "adapterforge/transformer.hpp"
#include "adapterforge/vocabulary.hpp"

namespace adapterforge {

/// Layers that host domain adapters. Language adapters, when used, sit at
/// every layer of both sides.
struct PlacementSpec {
  std::set<int> encoder_layers;
  std::set<int> decoder_layers;

  static PlacementSpec everywhere(int enc_layers, int dec_layers);
  static PlacementSpec encoder_only(int enc_layers);
  static PlacementSpec decoder_only(int dec_layers);
  [[nodiscard]] bool is_encoder_only() const { return !encoder_layers.empty() && decoder_layers.empty(); }
  [[nodiscard]] bool is_decoder_only() const { return encoder_layers.empty() && !decoder_layers.empty(); }
  friend bool operator==(const PlacementSpec&, const PlacementSpec&) = default;
};

/// Routing-relevant part of an experiment.
struct ExperimentConfig {
  std::vector<std::string> languages;
  std::vector<std::string> domains;
  std::vector<std::string> in_domain_languages;
  std::string adapt_domain = "medical";
  bool language_adapters = true;
  /// Domains that own a domain adapter.
  std::set<std::string> domain_adapters;
  /// When set, this domain adapter serves every route regardless of domain.
  std::optional<std::string> shared_domain_adapter;
  PlacementSpec placement;
  StackMode stack_mode = StackMode::SerialNewLN;
  double dadrop_p = 0.0;
  bool tag_mode = false;
  double p_extra = 0.0;
  /// Sampling temperature over routes; +inf means uniform.
  double temperature = 5.0;

  void validate() const;
  [[nodiscard]] bool is_in_domain(const std::string& lang) const;
};

std::string experiment_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_from_json(const std::string& text);

/// Encoder stacks use the source language adapter, decoder stacks the target
/// language adapter; the domain adapter appears only at placement layers. In
/// tag mode the plan carries the domain tag and no domain adapter.
ActivationPlan plan_activation(const Route& route, const ExperimentConfig& config, const Vocabulary& vocab,
                               int enc_layers, int dec_layers);

/// Index drawn with probability proportional to sizes[i]^(1/T). T = +inf
/// gives the uniform distribution.
std::size_t sample_index(std::span<const std::size_t> sizes, double temperature, std::mt19937_64& rng);
Route sample_direction(const std::map<Route, std::size_t>& sizes, double temperature, std::mt19937_64& rng);

/// Uniform double in [0, 1) from 53 random bits.
double unit_uniform(std::mt19937_64& rng);

struct BatchOptions {
  int max_tokens = 512;
  double temperature = 5.0;
  /// Tokens the model adds around each side: <2xx>, tag, </s> / <s>.
  int src_overhead = 3;
  int tgt_overhead = 1;
};

/// Pairs of a single route.
struct Batch {
  Route route;
  std::vector<PairView> pairs;
  bool from_extra = false;
};

/// Padded token count B * max(longest source, longest target), overheads
/// included.
int padded_tokens(const Batch& batch, const BatchOptions& options);

/// Endless stream of homogeneous batches. Routes are drawn by temperature
/// sampling; inside a route pairs come in shuffled epochs without
/// replacement. With mixing enabled, each batch comes from the extra sources
/// with probability p_extra.
class BatchStream {
 public:
  BatchStream(std::vector<std::shared_ptr<const PairSource>> primary, BatchOptions options, std::uint64_t seed);

  void mix(std::vector<std::shared_ptr<const PairSource>> extra, double p_extra);
  Batch next();

  [[nodiscard]] std::size_t primary_pairs() const noexcept { return primary_pairs_; }
  [[nodiscard]] std::uint64_t pairs_drawn() const noexcept { return drawn_; }
  [[nodiscard]] const BatchOptions& options() const noexcept { return options_; }

 private:
  struct Cursor {
    std::shared_ptr<const PairSource> source;
    std::vector<std::uint32_t> order;
    std::size_t pos = 0;
  };
  void check_lengths(const PairSource& source) const;
  Batch draw(std::vector<Cursor>& group, std::vector<std::size_t>& sizes);

  BatchOptions options_;
  std::mt19937_64 rng_;
  std::vector<Cursor> primary_;
  std::vector<std::size_t> primary_sizes_;
  std::vector<Cursor> extra_;
  std::vector<std::size_t> extra_sizes_;
  double p_extra_ = 0.0;
  std::size_t primary_pairs_ = 0;
  std::uint64_t drawn_ = 0;
};

/// Model-side token sequences for one batch.
struct ModelBatch {
  Route route;
  TokenBatch src;
  TokenBatch tgt_in;
  std::vector<int> tgt_out;  ///< flattened [batch * tgt_len], padded with <pad>
  ActivationPlan plan;
};

/// [<2tgt>] + [tag] + src + [</s>]. A source that already starts with a
/// domain tag cannot take another one.
std::vector<int> model_source(const Vocabulary& vocab, std::span<const int> src, const std::string& tgt_lang,
                              std::optional<int> tag);

ModelBatch make_model_batch(const Vocabulary& vocab, const Batch& batch, const ActivationPlan& plan);

}  // namespace adapterforge
