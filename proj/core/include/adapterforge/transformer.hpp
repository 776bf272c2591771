// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "adapterforge/adapters.hpp"
#include "adapterforge/autograd.hpp"
#include "adapterforge/plan.hpp"

namespace adapterforge {

struct ModelConfig {
  int d_model = 64;
  int n_heads = 4;
  int enc_layers = 2;
  int dec_layers = 2;
  int ffn_dim = 256;
  int vocab_size = 0;
  int max_len = 128;
  double dropout_p = 0.1;
  bool tie_embeddings = true;

  /// Throws ConfigError on inconsistent sizes.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Scalar count of the bare encoder-decoder (no adapters), in closed form.
std::int64_t closed_form_base_parameters(const ModelConfig& config);

enum class Side { Encoder, Decoder };
std::string to_string(Side side);

/// What one layer hook did during a forward pass.
struct HookEvent {
  Side side = Side::Encoder;
  int layer = 0;
  std::optional<std::string> language;  ///< LA group that ran
  std::optional<std::string> domain;    ///< DA group that ran (absent when dropped)
  bool domain_dropped = false;
};

/// Instrumentation callback; called once per layer hook per forward pass.
class HookObserver {
 public:
  virtual ~HookObserver() = default;
  virtual void on_hook(const HookEvent& event) = 0;
};

/// Right-padded token matrix [batch x len] with per-row lengths.
struct TokenBatch {
  int batch = 0;
  int len = 0;
  std::vector<int> ids;
  std::vector<int> lengths;

  static TokenBatch from_rows(const std::vector<std::vector<int>>& rows, int pad_id = 0);
  [[nodiscard]] int at(int b, int t) const { return ids[static_cast<std::size_t>(b * len + t)]; }
  [[nodiscard]] int tokens() const { return batch * len; }
};

struct RunOptions {
  bool train = false;
  std::mt19937_64* rng = nullptr;  ///< required when train is true
  HookObserver* observer = nullptr;
  /// Overrides ModelConfig::dropout_p for this pass.
  std::optional<double> dropout;
};

/// How stacked adapters combine, and the train-time domain-adapter drop rate.
struct AdapterSettings {
  StackMode mode = StackMode::SerialNewLN;
  double dadrop_p = 0.0;
  friend bool operator==(const AdapterSettings&, const AdapterSettings&) = default;
};

/// Where one adapter lives; enough to rebuild it when loading a checkpoint.
struct AdapterDescriptor {
  AdapterKind kind = AdapterKind::Language;
  std::string owner;
  Side side = Side::Encoder;
  int layer = 0;
  int bottleneck = 1;
  friend bool operator==(const AdapterDescriptor&, const AdapterDescriptor&) = default;
};

/// Post-norm transformer encoder-decoder with tied embeddings. Each layer ends
/// with a hook where the activation plan's adapter stack runs.
class TransformerModel {
 public:
  TransformerModel(ModelConfig config, std::uint64_t seed);
  TransformerModel(const TransformerModel&) = delete;
  TransformerModel& operator=(const TransformerModel&) = delete;

  [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }
  ParameterStore& params() noexcept { return store_; }
  [[nodiscard]] const ParameterStore& params() const noexcept { return store_; }

  AdapterSettings& adapter_settings() noexcept { return settings_; }
  [[nodiscard]] const AdapterSettings& adapter_settings() const noexcept { return settings_; }

  /// Installs one adapter at (side, layer). Installing the same group twice at
  /// one hook is an error.
  AdapterLayer& add_adapter(const AdapterDescriptor& desc, std::uint64_t seed);
  /// Installs an adapter of the same owner at every listed layer.
  void add_adapter_set(AdapterKind kind, const std::string& owner, const std::set<int>& encoder_layers,
                       const std::set<int>& decoder_layers, int bottleneck, std::uint64_t seed);
  [[nodiscard]] const AdapterLayer* adapter(const std::string& group, Side side, int layer) const;
  [[nodiscard]] bool has_group(const std::string& group) const { return store_.has_group(group); }
  [[nodiscard]] std::vector<AdapterDescriptor> adapter_descriptors() const;

  /// Throws RoutingError if the plan references an adapter that is not
  /// installed at the hook it names, or has the wrong layer count.
  void validate_plan(const ActivationPlan& plan) const;

  /// Encoder states [batch*len x d_model].
  Var encode(Tape& tape, const TokenBatch& src, const ActivationPlan& plan, const RunOptions& opts) const;
  /// Teacher-forced decoder logits [batch*tgt_len x vocab].
  Var decode_train(Tape& tape, Var enc_out, const TokenBatch& src, const TokenBatch& tgt_in, const ActivationPlan& plan,
                   const RunOptions& opts) const;

  /// The matrix used as output projection (the embedding when tied).
  [[nodiscard]] const Parameter& output_weight() const;
  [[nodiscard]] const Parameter& embedding() const { return *embed_; }

 private:
  friend class IncrementalDecoder;

  struct Linear {
    Parameter* w = nullptr;
    Parameter* b = nullptr;
  };
  struct Norm {
    Parameter* gain = nullptr;
    Parameter* bias = nullptr;
  };
  struct Attention {
    Linear q, k, v, o;
  };
  struct EncoderLayer {
    Attention self_attn;
    Norm ln1, ln2;
    Linear ffn1, ffn2;
  };
  struct DecoderLayer {
    Attention self_attn, cross_attn;
    Norm ln1, ln2, ln3;
    Linear ffn1, ffn2;
  };

  Linear make_linear(const std::string& name, int in, int out, std::mt19937_64& rng);
  Norm make_norm(const std::string& name, int width);
  Attention make_attention(const std::string& name, std::mt19937_64& rng);

  Var embed(Tape& tape, const TokenBatch& tokens, int position_offset, const RunOptions& opts) const;
  Var linear(Tape& tape, const Linear& l, Var x) const;
  Var norm(Tape& tape, const Norm& n, Var x) const;
  Var feed_forward(Tape& tape, const Linear& a, const Linear& b, Var x, const RunOptions& opts) const;
  Var hook(Tape& tape, Side side, int layer, const LayerStack* stack, Var h, Var r, const Norm& ln_pre,
           const RunOptions& opts) const;
  const LayerStack* stack_at(const std::vector<LayerStack>& stacks, int layer) const;

  ModelConfig config_;
  ParameterStore store_;
  AdapterSettings settings_;
  Parameter* embed_ = nullptr;
  Parameter* out_w_ = nullptr;
  Tensor positions_;
  std::vector<EncoderLayer> enc_;
  std::vector<DecoderLayer> dec_;
  std::map<std::tuple<int, int, std::string>, AdapterLayer> adapters_;
  std::vector<AdapterDescriptor> descriptors_;
};

/// Groups selected for training: exactly these groups become trainable, all
/// others frozen. "la:*" / "da:*" select every installed language / domain
/// group. Unknown groups are a ConfigError.
void set_trainable(ParameterStore& store, const std::set<std::string>& groups);

/// Exact scalar count over the listed groups. An empty set counts every
/// parameter. Unknown groups are a ConfigError.
std::int64_t count_parameters(const ParameterStore& store, const std::set<std::string>& groups);

/// Autoregressive decoding with per-layer key/value caches for a single
/// source sentence expanded to n hypotheses.
class IncrementalDecoder {
 public:
  /// `enc_out` holds the source's encoder states [src_len x d_model].
  IncrementalDecoder(const TransformerModel& model, const Tensor& enc_out, const ActivationPlan& plan, int hyps);

  /// Feeds one token per hypothesis and returns log-probabilities [hyps x vocab].
  Tensor step(std::span<const int> tokens);
  /// New hypothesis i continues old hypothesis parents[i]; the hypothesis
  /// count becomes parents.size().
  void reorder(std::span<const int> parents);

  [[nodiscard]] int position() const noexcept { return position_; }
  [[nodiscard]] int hyps() const noexcept { return hyps_; }

 private:
  const TransformerModel& model_;
  ActivationPlan plan_;
  int hyps_;
  int src_len_;
  int position_ = 0;
  std::vector<Tensor> cross_k_;  ///< per layer [src_len x D]
  std::vector<Tensor> cross_v_;
  std::vector<Tensor> self_k_;   ///< per layer [hyps * position x D], hypothesis-major
  std::vector<Tensor> self_v_;
};

}  // namespace adapterforge
