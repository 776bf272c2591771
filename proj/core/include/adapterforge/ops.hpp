// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <span>
#include <vector>

#include "adapterforge/autograd.hpp"

namespace adapterforge {

// Differentiable operations over 2-D activations ([rows x cols]). Every op
// records on the tape of its first operand.

/// [m x k] . [k x n] -> [m x n]
Var matmul(Var a, Var b);
/// [m x k] . [n x k]^T -> [m x n]   (tied output projection)
Var matmul_nt(Var a, Var b);

Var add(Var a, Var b);
Var mul(Var a, Var b);
/// x [N x D] + bias [D], broadcast over rows.
Var add_bias(Var x, Var bias);
Var scale(Var x, real factor);
Var relu(Var x);
Var sum(Var x);

/// Inverted dropout: kept units are scaled by 1/(1-p) at train time; identity
/// when train == false or p == 0.
Var dropout(Var x, double p, std::mt19937_64& rng, bool train);

/// Normalizes each row: (x - mean) / sqrt(var + eps) * gain + bias.
Var layer_norm(Var x, Var gain, Var bias, real eps = real(1e-5));

/// Row-wise softmax over the last axis.
Var softmax(Var x);

/// Rows of `table` selected by ids -> [ids.size() x D].
Var embedding(Var table, std::span<const int> ids);

/// Mean over non-ignored positions of
///   (1 - smoothing) * NLL(target) + smoothing * mean_v NLL(v).
/// Reductions run in double precision.
Var cross_entropy_smoothed(Var logits, std::span<const int> targets, double smoothing, int ignore_index = -1);

/// Layout of a multi-head attention call. Queries are [batch*q_len x D] and
/// keys/values [batch*k_len x D], both batch-major.
struct AttentionSpec {
  int batch = 1;
  int q_len = 1;
  int k_len = 1;
  int heads = 1;
  /// Valid key count per batch row (keys at or past it are padding). Empty
  /// means all keys valid.
  std::vector<int> key_lengths;
  bool causal = false;
  /// Absolute position of the first query, for causal masking during
  /// incremental decoding.
  int q_offset = 0;
};

/// softmax(Q K^T / sqrt(d_head) + mask) V per head, heads concatenated.
Var attention(Var q, Var k, Var v, const AttentionSpec& spec);

/// Row-wise log-softmax computed in double precision, no gradient. Returns
/// [rows x cols].
Tensor log_softmax_rows(const Tensor& logits);

}  // namespace adapterforge
