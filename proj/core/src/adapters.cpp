// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/adapters.hpp"

#include <random>

#include "adapterforge/errors.hpp"
#include "adapterforge/ops.hpp"

namespace adapterforge {

std::string to_string(AdapterKind kind) { return kind == AdapterKind::Language ? "language" : "domain"; }

std::string to_string(StackMode mode) { return mode == StackMode::SerialNewLN ? "serial" : "madx"; }

StackMode parse_stack_mode(const std::string& text) {
  if (text == "serial") return StackMode::SerialNewLN;
  if (text == "madx") return StackMode::MadX;
  throw ConfigError("unknown stack mode '" + text + "' (expected serial or madx)");
}

std::string adapter_group(AdapterKind kind, const std::string& owner) {
  return (kind == AdapterKind::Language ? "la:" : "da:") + owner;
}

std::vector<const Parameter*> AdapterLayer::parameters() const {
  return {w_down, b_down, w_up, b_up, ln_gain, ln_bias};
}

AdapterLayer make_adapter_layer(ParameterStore& store, AdapterKind kind, const std::string& owner,
                                const std::string& prefix, int width, int bottleneck, std::uint64_t seed) {
  if (width < 1 || bottleneck < 1) throw ConfigError("adapter width and bottleneck must be >= 1");
  AdapterLayer a;
  a.kind = kind;
  a.owner = owner;
  a.width = width;
  a.bottleneck = bottleneck;
  const std::string group = a.group();
  a.w_down = &store.add(prefix + ".w_down", group, Tensor({width, bottleneck}));
  a.b_down = &store.add(prefix + ".b_down", group, Tensor({bottleneck}));
  a.w_up = &store.add(prefix + ".w_up", group, Tensor({bottleneck, width}));
  a.b_up = &store.add(prefix + ".b_up", group, Tensor({width}));
  a.ln_gain = &store.add(prefix + ".ln.gain", group, Tensor({width}));
  a.ln_bias = &store.add(prefix + ".ln.bias", group, Tensor({width}));
  init_near_identity(a, seed);
  return a;
}

void init_near_identity(AdapterLayer& a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1e-2);
  for (auto& v : a.w_down->value.values()) v = static_cast<real>(normal(rng));
  a.b_down->value.fill(0);
  a.w_up->value.fill(0);
  a.b_up->value.fill(0);
  a.ln_gain->value.fill(1);
  a.ln_bias->value.fill(0);
}

std::int64_t adapter_parameter_count(int width, int bottleneck) {
  const auto D = static_cast<std::int64_t>(width);
  const auto d = static_cast<std::int64_t>(bottleneck);
  return 2 * D * d + d + D + 2 * D;
}

Var bind(Tape& tape, const Parameter& p) {
  // Training code owns the model mutably; the const view only exists so
  // inference can share a frozen model across threads.
  if (tape.recording()) return tape.param(const_cast<Parameter&>(p));
  return tape.param(p);
}

Var adapter_ffn(Tape& tape, const AdapterLayer& a, Var x) {
  Var down = relu(add_bias(matmul(x, bind(tape, *a.w_down)), bind(tape, *a.b_down)));
  return add_bias(matmul(down, bind(tape, *a.w_up)), bind(tape, *a.b_up));
}

Var adapter_forward(Tape& tape, const AdapterLayer& a, Var h) {
  if (h.value().cols() != a.width) {
    throw DimensionError("adapter of width " + std::to_string(a.width) + " applied to " + to_string(h.shape()));
  }
  Var normed = layer_norm(h, bind(tape, *a.ln_gain), bind(tape, *a.ln_bias));
  return add(adapter_ffn(tape, a, normed), h);
}

Var stack_forward(Tape& tape, const AdapterLayer* la, const AdapterLayer* da, Var h, std::optional<Var> r,
                  StackMode mode, bool drop_domain, const LayerNormRef& ln_pre) {
  const AdapterLayer* dom = drop_domain ? nullptr : da;
  if (mode == StackMode::SerialNewLN) {
    Var z = la ? adapter_forward(tape, *la, h) : h;
    return dom ? adapter_forward(tape, *dom, z) : z;
  }
  if (!la && !dom) return h;
  if (!r) throw UsageError("MadX stacking needs the feed-forward residual r");
  if (!ln_pre.gain || !ln_pre.bias) throw UsageError("MadX stacking needs the layer's pre-trained layer norm");
  for (const AdapterLayer* a : {la, dom}) {
    if (a && h.value().cols() != a->width) {
      throw DimensionError("adapter of width " + std::to_string(a->width) + " applied to " + to_string(h.shape()));
    }
  }
  Var z = la ? add(adapter_ffn(tape, *la, h), *r) : h;
  Var pre = dom ? add(adapter_ffn(tape, *dom, z), *r) : z;
  return layer_norm(pre, bind(tape, *ln_pre.gain), bind(tape, *ln_pre.bias));
}

std::int64_t count_adapter_budget(const std::vector<AdapterBudgetItem>& spec) {
  std::int64_t total = 0;
  for (const auto& item : spec) {
    total += static_cast<std::int64_t>(item.count) * item.layers * adapter_parameter_count(item.width, item.bottleneck);
  }
  return total;
}

}  // namespace adapterforge
