// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/transformer.hpp"

#include <algorithm>
#include <cmath>

#include "adapterforge/errors.hpp"
#include "adapterforge/ops.hpp"

namespace adapterforge {
namespace {

constexpr int kPadId = 0;

int side_index(Side side) { return side == Side::Encoder ? 0 : 1; }

Tensor sinusoidal_table(int max_len, int width) {
  Tensor table({max_len, width});
  for (int pos = 0; pos < max_len; ++pos) {
    for (int i = 0; i < width; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / width);
      table.at(pos, i) = static_cast<real>(std::sin(pos * freq));
      if (i + 1 < width) table.at(pos, i + 1) = static_cast<real>(std::cos(pos * freq));
    }
  }
  return table;
}

void xavier(Tensor& t, int fan_in, int fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  for (auto& v : t.values()) v = static_cast<real>(dist(rng));
}

}  // namespace

void ModelConfig::validate() const {
  if (d_model < 1 || n_heads < 1 || enc_layers < 1 || dec_layers < 1 || ffn_dim < 1 || max_len < 2) {
    throw ConfigError("model sizes must be positive");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " + std::to_string(n_heads));
  }
  if (vocab_size < 3) throw ConfigError("vocab_size must cover <pad>, <s> and </s>");
  if (dropout_p < 0.0 || dropout_p >= 1.0) throw ConfigError("dropout_p must be in [0, 1)");
}

std::int64_t closed_form_base_parameters(const ModelConfig& c) {
  const std::int64_t D = c.d_model;
  const std::int64_t F = c.ffn_dim;
  const std::int64_t attn = 4 * (D * D + D);
  const std::int64_t ffn = D * F + F + F * D + D;
  const std::int64_t ln = 2 * D;
  const std::int64_t enc = attn + ffn + 2 * ln;
  const std::int64_t dec = 2 * attn + ffn + 3 * ln;
  std::int64_t total = static_cast<std::int64_t>(c.vocab_size) * D + c.enc_layers * enc + c.dec_layers * dec;
  if (!c.tie_embeddings) total += D * c.vocab_size;
  return total;
}

std::string to_string(Side side) { return side == Side::Encoder ? "enc" : "dec"; }

TokenBatch TokenBatch::from_rows(const std::vector<std::vector<int>>& rows, int pad_id) {
  if (rows.empty()) throw DimensionError("token batch needs at least one row");
  TokenBatch b;
  b.batch = static_cast<int>(rows.size());
  for (const auto& r : rows) {
    if (r.empty()) throw DimensionError("token batch row is empty");
    b.len = std::max(b.len, static_cast<int>(r.size()));
  }
  b.ids.assign(static_cast<std::size_t>(b.batch * b.len), pad_id);
  for (int i = 0; i < b.batch; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    std::copy(r.begin(), r.end(), b.ids.begin() + static_cast<std::ptrdiff_t>(i) * b.len);
    b.lengths.push_back(static_cast<int>(r.size()));
  }
  return b;
}

TransformerModel::Linear TransformerModel::make_linear(const std::string& name, int in, int out,
                                                       std::mt19937_64& rng) {
  Linear l;
  l.w = &store_.add(name + ".w", "base", Tensor({in, out}));
  xavier(l.w->value, in, out, rng);
  l.b = &store_.add(name + ".b", "base", Tensor({out}));
  return l;
}

TransformerModel::Norm TransformerModel::make_norm(const std::string& name, int width) {
  Norm n;
  n.gain = &store_.add(name + ".gain", "base", Tensor({width}, real{1}));
  n.bias = &store_.add(name + ".bias", "base", Tensor({width}));
  return n;
}

TransformerModel::Attention TransformerModel::make_attention(const std::string& name, std::mt19937_64& rng) {
  const int D = config_.d_model;
  return Attention{make_linear(name + ".q", D, D, rng), make_linear(name + ".k", D, D, rng),
                   make_linear(name + ".v", D, D, rng), make_linear(name + ".o", D, D, rng)};
}

TransformerModel::TransformerModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const int D = config_.d_model;
  const int F = config_.ffn_dim;
  embed_ = &store_.add("embed", "base", Tensor({config_.vocab_size, D}));
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(D)));
  for (auto& v : embed_->value.values()) v = static_cast<real>(normal(rng));
  std::fill(embed_->value.row(kPadId).begin(), embed_->value.row(kPadId).end(), real{0});

  for (int l = 0; l < config_.enc_layers; ++l) {
    const std::string p = "enc." + std::to_string(l);
    EncoderLayer layer;
    layer.self_attn = make_attention(p + ".self_attn", rng);
    layer.ln1 = make_norm(p + ".ln1", D);
    layer.ffn1 = make_linear(p + ".ffn1", D, F, rng);
    layer.ffn2 = make_linear(p + ".ffn2", F, D, rng);
    layer.ln2 = make_norm(p + ".ln2", D);
    enc_.push_back(layer);
  }
  for (int l = 0; l < config_.dec_layers; ++l) {
    const std::string p = "dec." + std::to_string(l);
    DecoderLayer layer;
    layer.self_attn = make_attention(p + ".self_attn", rng);
    layer.ln1 = make_norm(p + ".ln1", D);
    layer.cross_attn = make_attention(p + ".cross_attn", rng);
    layer.ln2 = make_norm(p + ".ln2", D);
    layer.ffn1 = make_linear(p + ".ffn1", D, F, rng);
    layer.ffn2 = make_linear(p + ".ffn2", F, D, rng);
    layer.ln3 = make_norm(p + ".ln3", D);
    dec_.push_back(layer);
  }
  if (!config_.tie_embeddings) {
    out_w_ = &store_.add("out.w", "base", Tensor({config_.vocab_size, D}));
    xavier(out_w_->value, D, config_.vocab_size, rng);
  }
  positions_ = sinusoidal_table(config_.max_len, D);
}

const Parameter& TransformerModel::output_weight() const { return config_.tie_embeddings ? *embed_ : *out_w_; }

AdapterLayer& TransformerModel::add_adapter(const AdapterDescriptor& desc, std::uint64_t seed) {
  const int layers = desc.side == Side::Encoder ? config_.enc_layers : config_.dec_layers;
  if (desc.layer < 0 || desc.layer >= layers) {
    throw ConfigError("adapter layer " + std::to_string(desc.layer) + " outside " + to_string(desc.side) + " range");
  }
  const std::string group = adapter_group(desc.kind, desc.owner);
  auto key = std::make_tuple(side_index(desc.side), desc.layer, group);
  if (adapters_.contains(key)) {
    throw ConfigError("adapter " + group + " already installed at " + to_string(desc.side) + "." +
                      std::to_string(desc.layer));
  }
  const std::string prefix = to_string(desc.side) + "." + std::to_string(desc.layer) + "." + group;
  AdapterLayer a = make_adapter_layer(store_, desc.kind, desc.owner, prefix, config_.d_model, desc.bottleneck, seed);
  descriptors_.push_back(desc);
  return adapters_.emplace(key, a).first->second;
}

void TransformerModel::add_adapter_set(AdapterKind kind, const std::string& owner, const std::set<int>& encoder_layers,
                                       const std::set<int>& decoder_layers, int bottleneck, std::uint64_t seed) {
  std::uint64_t s = seed;
  for (int l : encoder_layers) add_adapter(AdapterDescriptor{kind, owner, Side::Encoder, l, bottleneck}, s++);
  for (int l : decoder_layers) add_adapter(AdapterDescriptor{kind, owner, Side::Decoder, l, bottleneck}, s++);
}

const AdapterLayer* TransformerModel::adapter(const std::string& group, Side side, int layer) const {
  auto it = adapters_.find(std::make_tuple(side_index(side), layer, group));
  return it == adapters_.end() ? nullptr : &it->second;
}

std::vector<AdapterDescriptor> TransformerModel::adapter_descriptors() const { return descriptors_; }

void TransformerModel::validate_plan(const ActivationPlan& plan) const {
  auto check_side = [&](const std::vector<LayerStack>& stacks, Side side, int layers) {
    if (stacks.empty()) return;
    if (static_cast<int>(stacks.size()) != layers) {
      throw RoutingError("plan has " + std::to_string(stacks.size()) + " " + to_string(side) + " stacks for " +
                         std::to_string(layers) + " layers");
    }
    for (int l = 0; l < layers; ++l) {
      const auto& s = stacks[static_cast<std::size_t>(l)];
      for (const auto* g : {&s.language, &s.domain}) {
        if (*g && !adapter(**g, side, l)) {
          throw RoutingError("plan references adapter " + **g + " not installed at " + to_string(side) + "." +
                             std::to_string(l));
        }
      }
      if (s.language && s.language->rfind("la:", 0) != 0) throw RoutingError("language slot holds " + *s.language);
      if (s.domain && s.domain->rfind("da:", 0) != 0) throw RoutingError("domain slot holds " + *s.domain);
    }
  };
  check_side(plan.encoder, Side::Encoder, config_.enc_layers);
  check_side(plan.decoder, Side::Decoder, config_.dec_layers);
  if (plan.tag_token && (*plan.tag_token < 0 || *plan.tag_token >= config_.vocab_size)) {
    throw RoutingError("plan tag token outside vocabulary");
  }
}

Var TransformerModel::embed(Tape& tape, const TokenBatch& tokens, int position_offset, const RunOptions& opts) const {
  if (position_offset + tokens.len > config_.max_len) {
    throw DimensionError("sequence of length " + std::to_string(position_offset + tokens.len) + " exceeds max_len " +
                         std::to_string(config_.max_len));
  }
  Var x = scale(adapterforge::embedding(bind(tape, *embed_), tokens.ids), static_cast<real>(std::sqrt(config_.d_model)));
  Tensor pos({tokens.tokens(), config_.d_model});
  for (int b = 0; b < tokens.batch; ++b) {
    for (int t = 0; t < tokens.len; ++t) {
      auto src = positions_.row(position_offset + t);
      std::copy(src.begin(), src.end(), pos.row(b * tokens.len + t).begin());
    }
  }
  x = add(x, tape.constant(std::move(pos)));
  return opts.train ? dropout(x, opts.dropout.value_or(config_.dropout_p), *opts.rng, true) : x;
}

Var TransformerModel::linear(Tape& tape, const Linear& l, Var x) const {
  return add_bias(matmul(x, bind(tape, *l.w)), bind(tape, *l.b));
}

Var TransformerModel::norm(Tape& tape, const Norm& n, Var x) const {
  return layer_norm(x, bind(tape, *n.gain), bind(tape, *n.bias));
}

Var TransformerModel::feed_forward(Tape& tape, const Linear& a, const Linear& b, Var x, const RunOptions& opts) const {
  Var hidden = relu(linear(tape, a, x));
  if (opts.train) hidden = dropout(hidden, opts.dropout.value_or(config_.dropout_p), *opts.rng, true);
  return linear(tape, b, hidden);
}

const LayerStack* TransformerModel::stack_at(const std::vector<LayerStack>& stacks, int layer) const {
  if (stacks.empty()) return nullptr;
  return &stacks[static_cast<std::size_t>(layer)];
}

Var TransformerModel::hook(Tape& tape, Side side, int layer, const LayerStack* stack, Var h, Var r,
                           const Norm& ln_pre, const RunOptions& opts) const {
  HookEvent event{side, layer, std::nullopt, std::nullopt, false};
  const AdapterLayer* la = nullptr;
  const AdapterLayer* da = nullptr;
  if (stack) {
    if (stack->language) la = adapter(*stack->language, side, layer);
    if (stack->domain) da = adapter(*stack->domain, side, layer);
  }
  bool drop = false;
  if (da && opts.train && settings_.dadrop_p > 0.0) {
    std::bernoulli_distribution skip(settings_.dadrop_p);
    drop = skip(*opts.rng);
  }
  if (la) event.language = la->group();
  if (da && !drop) event.domain = da->group();
  event.domain_dropped = drop;
  if (opts.observer) opts.observer->on_hook(event);
  if (!la && !da) return h;
  return stack_forward(tape, la, da, h, r, settings_.mode, drop, LayerNormRef{ln_pre.gain, ln_pre.bias});
}

Var TransformerModel::encode(Tape& tape, const TokenBatch& src, const ActivationPlan& plan,
                             const RunOptions& opts) const {
  validate_plan(plan);
  if (opts.train && !opts.rng) throw UsageError("training forward needs an rng");
  AttentionSpec spec{src.batch, src.len, src.len, config_.n_heads, src.lengths, false, 0};
  Var x = embed(tape, src, 0, opts);
  for (int l = 0; l < config_.enc_layers; ++l) {
    const auto& L = enc_[static_cast<std::size_t>(l)];
    Var a = attention(linear(tape, L.self_attn.q, x), linear(tape, L.self_attn.k, x), linear(tape, L.self_attn.v, x),
                      spec);
    a = linear(tape, L.self_attn.o, a);
    if (opts.train) a = dropout(a, opts.dropout.value_or(config_.dropout_p), *opts.rng, true);
    Var x1 = norm(tape, L.ln1, add(x, a));
    Var f = feed_forward(tape, L.ffn1, L.ffn2, x1, opts);
    if (opts.train) f = dropout(f, opts.dropout.value_or(config_.dropout_p), *opts.rng, true);
    Var r = add(x1, f);
    Var h = norm(tape, L.ln2, r);
    x = hook(tape, Side::Encoder, l, stack_at(plan.encoder, l), h, r, L.ln2, opts);
  }
  return x;
}

Var TransformerModel::decode_train(Tape& tape, Var enc_out, const TokenBatch& src, const TokenBatch& tgt_in,
                                   const ActivationPlan& plan, const RunOptions& opts) const {
  validate_plan(plan);
  if (opts.train && !opts.rng) throw UsageError("training forward needs an rng");
  if (src.batch != tgt_in.batch) throw DimensionError("source and target batch sizes differ");
  AttentionSpec self_spec{tgt_in.batch, tgt_in.len, tgt_in.len, config_.n_heads, {}, true, 0};
  AttentionSpec cross_spec{tgt_in.batch, tgt_in.len, src.len, config_.n_heads, src.lengths, false, 0};
  Var x = embed(tape, tgt_in, 0, opts);
  for (int l = 0; l < config_.dec_layers; ++l) {
    const auto& L = dec_[static_cast<std::size_t>(l)];
    Var a = attention(linear(tape, L.self_attn.q, x), linear(tape, L.self_attn.k, x), linear(tape, L.self_attn.v, x),
                      self_spec);
    a = linear(tape, L.self_attn.o, a);
    if (opts.train) a = dropout(a, opts.dropout.value_or(config_.dropout_p), *opts.rng, true);
    Var x1 = norm(tape, L.ln1, add(x, a));
    Var c = attention(linear(tape, L.cross_attn.q, x1), linear(tape, L.cross_attn.k, enc_out),
                      linear(tape, L.cross_attn.v, enc_out), cross_spec);
    c = linear(tape, L.cross_attn.o, c);
    if (opts.train) c = dropout(c, opts.dropout.value_or(config_.dropout_p), *opts.rng, true);
    Var x2 = norm(tape, L.ln2, add(x1, c));
    Var f = feed_forward(tape, L.ffn1, L.ffn2, x2, opts);
    if (opts.train) f = dropout(f, opts.dropout.value_or(config_.dropout_p), *opts.rng, true);
    Var r = add(x2, f);
    Var h = norm(tape, L.ln3, r);
    x = hook(tape, Side::Decoder, l, stack_at(plan.decoder, l), h, r, L.ln3, opts);
  }
  return matmul_nt(x, bind(tape, output_weight()));
}

void set_trainable(ParameterStore& store, const std::set<std::string>& groups) {
  const auto existing = store.groups();
  std::set<std::string> selected;
  for (const auto& g : groups) {
    if (g == "la:*" || g == "da:*") {
      const std::string prefix = g.substr(0, 3);
      for (const auto& e : existing) {
        if (e.rfind(prefix, 0) == 0) selected.insert(e);
      }
    } else if (existing.contains(g)) {
      selected.insert(g);
    } else {
      throw ConfigError("unknown parameter group '" + g + "'");
    }
  }
  for (auto* p : store.all()) {
    p->trainable = selected.contains(p->group);
    if (!p->trainable) p->zero_grad();
  }
}

std::int64_t count_parameters(const ParameterStore& store, const std::set<std::string>& groups) {
  const auto existing = store.groups();
  for (const auto& g : groups) {
    if (!existing.contains(g)) throw ConfigError("unknown parameter group '" + g + "'");
  }
  std::int64_t total = 0;
  for (const auto* p : store.all()) {
    if (groups.empty() || groups.contains(p->group)) total += static_cast<std::int64_t>(p->value.size());
  }
  return total;
}

IncrementalDecoder::IncrementalDecoder(const TransformerModel& model, const Tensor& enc_out, const ActivationPlan& plan,
                                       int hyps)
    : model_(model), plan_(plan), hyps_(hyps), src_len_(enc_out.rows()) {
  model_.validate_plan(plan_);
  if (hyps_ < 1) throw UsageError("incremental decoder needs at least one hypothesis");
  if (enc_out.cols() != model_.config_.d_model) throw DimensionError("encoder output width mismatch");
  Tape tape(false);
  Var enc = tape.constant(enc_out);
  for (const auto& L : model_.dec_) {
    cross_k_.push_back(model_.linear(tape, L.cross_attn.k, enc).value());
    cross_v_.push_back(model_.linear(tape, L.cross_attn.v, enc).value());
  }
  self_k_.resize(model_.dec_.size());
  self_v_.resize(model_.dec_.size());
}

namespace {

// Rows of `cache` are hypothesis-major blocks of `len` rows; returns the
// cache extended by one row per hypothesis from `fresh` ([hyps x D]).
Tensor append_step(const Tensor& cache, const Tensor& fresh, int hyps, int len) {
  const int D = fresh.cols();
  Tensor out({hyps * (len + 1), D});
  for (int h = 0; h < hyps; ++h) {
    for (int t = 0; t < len; ++t) {
      auto src = cache.row(h * len + t);
      std::copy(src.begin(), src.end(), out.row(h * (len + 1) + t).begin());
    }
    auto src = fresh.row(h);
    std::copy(src.begin(), src.end(), out.row(h * (len + 1) + len).begin());
  }
  return out;
}

Tensor repeat_rows(const Tensor& block, int times) {
  Tensor out({block.rows() * times, block.cols()});
  for (int i = 0; i < times; ++i) std::copy(block.values().begin(), block.values().end(), out.row(i * block.rows()).begin());
  return out;
}

}  // namespace

Tensor IncrementalDecoder::step(std::span<const int> tokens) {
  if (static_cast<int>(tokens.size()) != hyps_) throw DimensionError("step needs one token per hypothesis");
  const auto& cfg = model_.config_;
  Tape tape(false);
  RunOptions opts;
  TokenBatch batch;
  batch.batch = hyps_;
  batch.len = 1;
  batch.ids.assign(tokens.begin(), tokens.end());
  batch.lengths.assign(static_cast<std::size_t>(hyps_), 1);
  Var x = model_.embed(tape, batch, position_, opts);
  AttentionSpec self_spec{hyps_, 1, position_ + 1, cfg.n_heads, {}, false, 0};
  AttentionSpec cross_spec{hyps_, 1, src_len_, cfg.n_heads, {}, false, 0};
  for (int l = 0; l < cfg.dec_layers; ++l) {
    const auto& L = model_.dec_[static_cast<std::size_t>(l)];
    const auto li = static_cast<std::size_t>(l);
    Var q = model_.linear(tape, L.self_attn.q, x);
    Tensor k = model_.linear(tape, L.self_attn.k, x).value();
    Tensor v = model_.linear(tape, L.self_attn.v, x).value();
    if (position_ == 0) {
      self_k_[li] = std::move(k);
      self_v_[li] = std::move(v);
    } else {
      self_k_[li] = append_step(self_k_[li], k, hyps_, position_);
      self_v_[li] = append_step(self_v_[li], v, hyps_, position_);
    }
    Var a = attention(q, tape.constant(self_k_[li]), tape.constant(self_v_[li]), self_spec);
    a = model_.linear(tape, L.self_attn.o, a);
    Var x1 = model_.norm(tape, L.ln1, add(x, a));
    Var cq = model_.linear(tape, L.cross_attn.q, x1);
    Var c = attention(cq, tape.constant(repeat_rows(cross_k_[li], hyps_)),
                      tape.constant(repeat_rows(cross_v_[li], hyps_)), cross_spec);
    c = model_.linear(tape, L.cross_attn.o, c);
    Var x2 = model_.norm(tape, L.ln2, add(x1, c));
    Var r = add(x2, model_.feed_forward(tape, L.ffn1, L.ffn2, x2, opts));
    Var h = model_.norm(tape, L.ln3, r);
    x = model_.hook(tape, Side::Decoder, l, model_.stack_at(plan_.decoder, l), h, r, L.ln3, opts);
  }
  Var logits = matmul_nt(x, bind(tape, model_.output_weight()));
  ++position_;
  return log_softmax_rows(logits.value());
}

void IncrementalDecoder::reorder(std::span<const int> parents) {
  const int n = static_cast<int>(parents.size());
  if (n < 1) throw UsageError("reorder needs at least one hypothesis");
  for (int p : parents) {
    if (p < 0 || p >= hyps_) throw UsageError("reorder parent out of range");
  }
  if (position_ > 0) {
    const int D = model_.config_.d_model;
    for (auto* caches : {&self_k_, &self_v_}) {
      for (auto& cache : *caches) {
        Tensor next({n * position_, D});
        for (int i = 0; i < n; ++i) {
          const int p = parents[static_cast<std::size_t>(i)];
          for (int t = 0; t < position_; ++t) {
            auto src = cache.row(p * position_ + t);
            std::copy(src.begin(), src.end(), next.row(i * position_ + t).begin());
          }
        }
        cache = std::move(next);
      }
    }
  }
  hyps_ = n;
}

}  // namespace adapterforge
