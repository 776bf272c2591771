// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace adapterforge {

/// Adapters active at one layer hook, applied language first, then domain.
/// Values are parameter group ids ("la:fr", "da:medical").
struct LayerStack {
  std::optional<std::string> language;
  std::optional<std::string> domain;

  friend bool operator==(const LayerStack&, const LayerStack&) = default;
};

/// Per-layer adapter stacks for one route. An empty vector on either side
/// means no adapters on that side.
struct ActivationPlan {
  std::vector<LayerStack> encoder;
  std::vector<LayerStack> decoder;
  /// Domain-tag vocabulary id prepended to the source in tag mode.
  std::optional<int> tag_token;

  [[nodiscard]] bool empty() const {
    for (const auto& s : encoder) {
      if (s.language || s.domain) return false;
    }
    for (const auto& s : decoder) {
      if (s.language || s.domain) return false;
    }
    return true;
  }

  friend bool operator==(const ActivationPlan&, const ActivationPlan&) = default;
};

}  // namespace adapterforge
