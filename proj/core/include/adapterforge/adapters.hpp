// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adapterforge/autograd.hpp"

namespace adapterforge {

enum class AdapterKind { Language, Domain };
enum class StackMode { SerialNewLN, MadX };

std::string to_string(AdapterKind kind);
std::string to_string(StackMode mode);
StackMode parse_stack_mode(const std::string& text);

/// "la:<owner>" or "da:<owner>".
std::string adapter_group(AdapterKind kind, const std::string& owner);

/// Bottleneck block W_up f(W_down LN(h)) + h with its own layer norm. The
/// parameters live in a ParameterStore; this struct only points at them.
struct AdapterLayer {
  AdapterKind kind = AdapterKind::Language;
  std::string owner;
  int width = 0;       ///< D
  int bottleneck = 0;  ///< d
  Parameter* w_down = nullptr;  ///< [D x d]
  Parameter* b_down = nullptr;  ///< [d]
  Parameter* w_up = nullptr;    ///< [d x D]
  Parameter* b_up = nullptr;    ///< [D]
  Parameter* ln_gain = nullptr;
  Parameter* ln_bias = nullptr;

  [[nodiscard]] std::string group() const { return adapter_group(kind, owner); }
  [[nodiscard]] std::vector<const Parameter*> parameters() const;
};

/// Registers the six tensors of an adapter under `prefix` (e.g.
/// "enc.0.la:fr") and returns the layer, initialised near identity.
AdapterLayer make_adapter_layer(ParameterStore& store, AdapterKind kind, const std::string& owner,
                                const std::string& prefix, int width, int bottleneck, std::uint64_t seed);

/// W_down ~ N(0, 0.01^2), biases zero, W_up zero, LN gain one / bias zero.
/// With W_up == 0 the adapter output equals its input exactly.
void init_near_identity(AdapterLayer& a, std::uint64_t seed);

/// 2*D*d + d + D + 2*D.
std::int64_t adapter_parameter_count(int width, int bottleneck);

/// Binds a parameter to a tape. A recording tape gets the mutable binding so
/// trainable parameters receive gradients; a non-recording tape never writes.
Var bind(Tape& tape, const Parameter& p);

/// W_up relu(W_down x + b_down) + b_up.
Var adapter_ffn(Tape& tape, const AdapterLayer& a, Var x);

/// LN_a(h) -> FFN -> + h.
Var adapter_forward(Tape& tape, const AdapterLayer& a, Var h);

/// The pre-trained layer norm of the host layer, needed by MadX stacking.
struct LayerNormRef {
  const Parameter* gain = nullptr;
  const Parameter* bias = nullptr;
};

/// Composes an optional language adapter and optional domain adapter at one
/// hook. `h` is the layer output and `r` the residual sum that produced it
/// (h = LN_pre(r)).
///
/// SerialNewLN: z = la ? adapter_forward(la, h) : h;
///              out = (da && !drop_domain) ? adapter_forward(da, z) : z.
/// MadX:        z = la ? FFN_la(h) + r : h;
///              out = (da && !drop_domain) ? LN_pre(FFN_da(z) + r)
///                                         : (la ? LN_pre(z) : h).
Var stack_forward(Tape& tape, const AdapterLayer* la, const AdapterLayer* da, Var h, std::optional<Var> r,
                  StackMode mode, bool drop_domain, const LayerNormRef& ln_pre = {});

/// Deployment description used for closed-form budget counting.
struct AdapterBudgetItem {
  AdapterKind kind = AdapterKind::Language;
  int count = 1;   ///< number of adapter sets (languages or domains)
  int layers = 1;  ///< hooks each set occupies
  int bottleneck = 1;
  int width = 1;
};

std::int64_t count_adapter_budget(const std::vector<AdapterBudgetItem>& spec);

}  // namespace adapterforge
