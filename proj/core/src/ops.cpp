// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "adapterforge/errors.hpp"

namespace adapterforge {
namespace {

using Mat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<Mat>;
using CMapM = Eigen::Map<const Mat>;

CMapM as_mat(const Tensor& t) { return CMapM(t.data(), t.rows(), t.cols()); }
MapM as_mat(Tensor& t) { return MapM(t.data(), t.rows(), t.cols()); }

Tape& tape_of(Var v) {
  if (!v.valid()) throw UsageError("op applied to an unbound Var");
  return *v.tape();
}

void same_tape(Var a, Var b) {
  if (a.tape() != b.tape()) throw UsageError("op operands recorded on different tapes");
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + " expects a 2-D operand, got " + to_string(t.shape()));
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_matrix(A, "matmul");
  require_matrix(B, "matmul");
  if (A.cols() != B.dim(0)) {
    throw DimensionError("matmul inner dims differ: " + to_string(A.shape()) + " . " + to_string(B.shape()));
  }
  Tensor out({A.rows(), B.cols()});
  as_mat(out).noalias() = as_mat(A) * as_mat(B);
  return t.push(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (tp.needs_grad(a)) {
      Tensor ga(a.value().shape());
      as_mat(ga).noalias() = as_mat(g) * as_mat(b.value()).transpose();
      tp.accumulate(a, ga);
    }
    if (tp.needs_grad(b)) {
      Tensor gb(b.value().shape());
      as_mat(gb).noalias() = as_mat(a.value()).transpose() * as_mat(g);
      tp.accumulate(b, gb);
    }
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = tape_of(a);
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_matrix(A, "matmul_nt");
  require_matrix(B, "matmul_nt");
  if (A.cols() != B.cols()) {
    throw DimensionError("matmul_nt inner dims differ: " + to_string(A.shape()) + " . " + to_string(B.shape()) + "^T");
  }
  Tensor out({A.rows(), B.rows()});
  as_mat(out).noalias() = as_mat(A) * as_mat(B).transpose();
  return t.push(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (tp.needs_grad(a)) {
      Tensor ga(a.value().shape());
      as_mat(ga).noalias() = as_mat(g) * as_mat(b.value());
      tp.accumulate(a, ga);
    }
    if (tp.needs_grad(b)) {
      Tensor gb(b.value().shape());
      as_mat(gb).noalias() = as_mat(g).transpose() * as_mat(a.value());
      tp.accumulate(b, gb);
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape()) {
    throw DimensionError("add shape mismatch " + to_string(A.shape()) + " vs " + to_string(B.shape()));
  }
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return t.push(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a);
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape()) {
    throw DimensionError("mul shape mismatch " + to_string(A.shape()) + " vs " + to_string(B.shape()));
  }
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return t.push(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (tp.needs_grad(a)) {
      Tensor ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= b.value()[i];
      tp.accumulate(a, ga);
    }
    if (tp.needs_grad(b)) {
      Tensor gb = g;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= a.value()[i];
      tp.accumulate(b, gb);
    }
  });
}

Var add_bias(Var x, Var bias) {
  Tape& t = tape_of(x);
  same_tape(x, bias);
  const Tensor& X = x.value();
  const Tensor& b = bias.value();
  if (b.size() != static_cast<std::size_t>(X.cols())) {
    throw DimensionError("bias of size " + std::to_string(b.size()) + " does not match " + to_string(X.shape()));
  }
  Tensor out = X;
  as_mat(out).rowwise() += CMapM(b.data(), 1, X.cols()).row(0);
  return t.push(std::move(out), {x, bias}, [x, bias](Tape& tp, const Tensor& g) {
    tp.accumulate(x, g);
    if (tp.needs_grad(bias)) {
      Tensor gb(bias.value().shape());
      MapM(gb.data(), 1, g.cols()) = as_mat(g).colwise().sum();
      tp.accumulate(bias, gb);
    }
  });
}

Var scale(Var x, real factor) {
  Tape& t = tape_of(x);
  Tensor out = x.value();
  for (auto& v : out.values()) v *= factor;
  return t.push(std::move(out), {x}, [x, factor](Tape& tp, const Tensor& g) {
    Tensor gx = g;
    for (auto& v : gx.values()) v *= factor;
    tp.accumulate(x, gx);
  });
}

Var relu(Var x) {
  Tape& t = tape_of(x);
  Tensor out = x.value();
  for (auto& v : out.values()) v = std::max(v, real{0});
  return t.push(std::move(out), {x}, [x](Tape& tp, const Tensor& g) {
    Tensor gx = g;
    const Tensor& X = x.value();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (X[i] <= 0) gx[i] = 0;
    }
    tp.accumulate(x, gx);
  });
}

Var sum(Var x) {
  Tape& t = tape_of(x);
  double acc = 0.0;
  for (real v : x.value().values()) acc += v;
  return t.push(Tensor::scalar(static_cast<real>(acc)), {x}, [x](Tape& tp, const Tensor& g) {
    tp.accumulate(x, Tensor(x.value().shape(), g.item()));
  });
}

Var dropout(Var x, double p, std::mt19937_64& rng, bool train) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(p));
  if (!train || p == 0.0) return x;
  Tape& t = tape_of(x);
  const real keep_scale = static_cast<real>(1.0 / (1.0 - p));
  auto mask = std::make_shared<Tensor>(x.value().shape());
  std::bernoulli_distribution keep(1.0 - p);
  for (auto& m : mask->values()) m = keep(rng) ? keep_scale : real{0};
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*mask)[i];
  return t.push(std::move(out), {x}, [x, mask](Tape& tp, const Tensor& g) {
    Tensor gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= (*mask)[i];
    tp.accumulate(x, gx);
  });
}

Var layer_norm(Var x, Var gain, Var bias, real eps) {
  Tape& t = tape_of(x);
  same_tape(x, gain);
  same_tape(x, bias);
  const Tensor& X = x.value();
  const int n = X.rows();
  const int d = X.cols();
  if (gain.value().size() != static_cast<std::size_t>(d) || bias.value().size() != static_cast<std::size_t>(d)) {
    throw DimensionError("layer_norm affine params do not match width " + std::to_string(d));
  }
  auto xhat = std::make_shared<Tensor>(X.shape());
  auto inv_std = std::make_shared<RealBuffer>(static_cast<std::size_t>(n));
  Tensor out(X.shape());
  const real* gv = gain.value().data();
  const real* bv = bias.value().data();
  for (int r = 0; r < n; ++r) {
    auto xr = X.row(r);
    double mean = 0.0;
    for (real v : xr) mean += v;
    mean /= d;
    double var = 0.0;
    for (real v : xr) var += (v - mean) * (v - mean);
    var /= d;
    const double is = 1.0 / std::sqrt(var + static_cast<double>(eps));
    (*inv_std)[static_cast<std::size_t>(r)] = static_cast<real>(is);
    auto hr = xhat->row(r);
    auto orow = out.row(r);
    for (int c = 0; c < d; ++c) {
      const auto k = static_cast<std::size_t>(c);
      hr[k] = static_cast<real>((xr[k] - mean) * is);
      orow[k] = hr[k] * gv[c] + bv[c];
    }
  }
  return t.push(std::move(out), {x, gain, bias}, [x, gain, bias, xhat, inv_std](Tape& tp, const Tensor& g) {
    const int rows = g.rows();
    const int width = g.cols();
    if (tp.needs_grad(gain) || tp.needs_grad(bias)) {
      Tensor gg(gain.value().shape());
      Tensor gb(bias.value().shape());
      for (int r = 0; r < rows; ++r) {
        auto gr = g.row(r);
        auto hr = xhat->row(r);
        for (int c = 0; c < width; ++c) {
          const auto k = static_cast<std::size_t>(c);
          gg[k] += gr[k] * hr[k];
          gb[k] += gr[k];
        }
      }
      tp.accumulate(gain, gg);
      tp.accumulate(bias, gb);
    }
    if (tp.needs_grad(x)) {
      const real* gv2 = gain.value().data();
      Tensor gx(x.value().shape());
      std::vector<double> dh(static_cast<std::size_t>(width));
      for (int r = 0; r < rows; ++r) {
        auto gr = g.row(r);
        auto hr = xhat->row(r);
        double mean_dh = 0.0;
        double mean_dh_h = 0.0;
        for (int c = 0; c < width; ++c) {
          const auto k = static_cast<std::size_t>(c);
          dh[k] = static_cast<double>(gr[k]) * gv2[c];
          mean_dh += dh[k];
          mean_dh_h += dh[k] * hr[k];
        }
        mean_dh /= width;
        mean_dh_h /= width;
        const double is = (*inv_std)[static_cast<std::size_t>(r)];
        auto out_row = gx.row(r);
        for (int c = 0; c < width; ++c) {
          const auto k = static_cast<std::size_t>(c);
          out_row[k] = static_cast<real>(is * (dh[k] - mean_dh - hr[k] * mean_dh_h));
        }
      }
      tp.accumulate(x, gx);
    }
  });
}

Var softmax(Var x) {
  Tape& t = tape_of(x);
  const Tensor& X = x.value();
  Tensor out(X.shape());
  for (int r = 0; r < X.rows(); ++r) {
    auto xr = X.row(r);
    auto orow = out.row(r);
    const real mx = *std::max_element(xr.begin(), xr.end());
    double z = 0.0;
    for (std::size_t c = 0; c < xr.size(); ++c) {
      const double e = std::exp(static_cast<double>(xr[c] - mx));
      orow[c] = static_cast<real>(e);
      z += e;
    }
    for (auto& v : orow) v = static_cast<real>(v / z);
  }
  auto y = std::make_shared<Tensor>(out);
  return t.push(std::move(out), {x}, [x, y](Tape& tp, const Tensor& g) {
    Tensor gx(g.shape());
    for (int r = 0; r < g.rows(); ++r) {
      auto gr = g.row(r);
      auto yr = y->row(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < gr.size(); ++c) dot += static_cast<double>(gr[c]) * yr[c];
      auto out_row = gx.row(r);
      for (std::size_t c = 0; c < gr.size(); ++c) out_row[c] = static_cast<real>(yr[c] * (gr[c] - dot));
    }
    tp.accumulate(x, gx);
  });
}

Var embedding(Var table, std::span<const int> ids) {
  Tape& t = tape_of(table);
  const Tensor& T = table.value();
  require_matrix(T, "embedding");
  if (ids.empty()) throw DimensionError("embedding lookup with no ids");
  const int vocab = T.rows();
  const int d = T.cols();
  Tensor out({static_cast<int>(ids.size()), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab) {
      throw DimensionError("token id " + std::to_string(ids[i]) + " outside vocabulary of " + std::to_string(vocab));
    }
    auto src = T.row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(static_cast<int>(i)).begin());
  }
  auto saved = std::make_shared<std::vector<int>>(ids.begin(), ids.end());
  return t.push(std::move(out), {table}, [table, saved](Tape& tp, const Tensor& g) {
    tp.accumulate_rows(table, *saved, g);
  });
}

Var cross_entropy_smoothed(Var logits, std::span<const int> targets, double smoothing, int ignore_index) {
  Tape& t = tape_of(logits);
  const Tensor& L = logits.value();
  require_matrix(L, "cross_entropy");
  if (static_cast<std::size_t>(L.rows()) != targets.size()) {
    throw DimensionError("cross_entropy has " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(L.rows()) + " rows");
  }
  if (smoothing < 0.0 || smoothing >= 1.0) throw ConfigError("label smoothing must be in [0, 1)");
  const int vocab = L.cols();
  auto probs = std::make_shared<Tensor>(L.shape());
  double total = 0.0;
  int count = 0;
  for (int r = 0; r < L.rows(); ++r) {
    const int y = targets[static_cast<std::size_t>(r)];
    if (y == ignore_index) continue;
    if (y < 0 || y >= vocab) throw DimensionError("target id " + std::to_string(y) + " outside vocabulary");
    auto lr = L.row(r);
    const double mx = *std::max_element(lr.begin(), lr.end());
    double z = 0.0;
    double mean_logit = 0.0;
    for (real v : lr) {
      z += std::exp(v - mx);
      mean_logit += v;
    }
    mean_logit /= vocab;
    const double lse = mx + std::log(z);
    total += (1.0 - smoothing) * (lse - lr[static_cast<std::size_t>(y)]) + smoothing * (lse - mean_logit);
    auto pr = probs->row(r);
    for (std::size_t c = 0; c < lr.size(); ++c) pr[c] = static_cast<real>(std::exp(lr[c] - lse));
    ++count;
  }
  if (count == 0) throw DimensionError("cross_entropy over zero non-ignored targets");
  const double loss = total / count;
  if (!std::isfinite(loss)) throw NumericError("non-finite cross-entropy loss");
  auto saved = std::make_shared<std::vector<int>>(targets.begin(), targets.end());
  return t.push(Tensor::scalar(static_cast<real>(loss)), {logits},
                [logits, probs, saved, smoothing, ignore_index, count, vocab](Tape& tp, const Tensor& g) {
                  const double coef = static_cast<double>(g.item()) / count;
                  const double uniform = smoothing / vocab;
                  Tensor gl(logits.value().shape());
                  for (int r = 0; r < gl.rows(); ++r) {
                    const int y = (*saved)[static_cast<std::size_t>(r)];
                    if (y == ignore_index) continue;
                    auto pr = probs->row(r);
                    auto out_row = gl.row(r);
                    for (std::size_t c = 0; c < pr.size(); ++c) {
                      double v = pr[c] - uniform;
                      if (static_cast<int>(c) == y) v -= 1.0 - smoothing;
                      out_row[c] = static_cast<real>(coef * v);
                    }
                  }
                  tp.accumulate(logits, gl);
                });
}

Var attention(Var q, Var k, Var v, const AttentionSpec& spec) {
  Tape& t = tape_of(q);
  same_tape(q, k);
  same_tape(q, v);
  const Tensor& Q = q.value();
  const Tensor& K = k.value();
  const Tensor& V = v.value();
  const int B = spec.batch;
  const int Lq = spec.q_len;
  const int Lk = spec.k_len;
  const int H = spec.heads;
  const int D = Q.cols();
  if (B < 1 || Lq < 1 || Lk < 1 || H < 1) throw DimensionError("attention layout must be positive");
  if (D % H != 0) throw DimensionError("model width " + std::to_string(D) + " not divisible by heads");
  if (Q.rows() != B * Lq || K.rows() != B * Lk || V.rows() != B * Lk || K.cols() != D || V.cols() != D) {
    throw DimensionError("attention operands " + to_string(Q.shape()) + ", " + to_string(K.shape()) + ", " +
                         to_string(V.shape()) + " do not match layout");
  }
  if (!spec.key_lengths.empty() && spec.key_lengths.size() != static_cast<std::size_t>(B)) {
    throw DimensionError("attention key_lengths size differs from batch");
  }
  const int dh = D / H;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  // probs[((b * H + h) * Lq + i) * Lk + j]
  auto probs = std::make_shared<RealBuffer>(static_cast<std::size_t>(B) * H * Lq * Lk, real{0});
  Tensor out(Q.shape());
  std::vector<double> s(static_cast<std::size_t>(Lk));
  for (int b = 0; b < B; ++b) {
    const int valid = spec.key_lengths.empty() ? Lk : std::clamp(spec.key_lengths[static_cast<std::size_t>(b)], 0, Lk);
    for (int h = 0; h < H; ++h) {
      const int off = h * dh;
      for (int i = 0; i < Lq; ++i) {
        const int limit = spec.causal ? std::min(valid, spec.q_offset + i + 1) : valid;
        real* p = probs->data() + ((static_cast<std::size_t>(b) * H + h) * Lq + i) * Lk;
        if (limit <= 0) continue;
        const real* qi = Q.data() + static_cast<std::size_t>(b * Lq + i) * D + off;
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < limit; ++j) {
          const real* kj = K.data() + static_cast<std::size_t>(b * Lk + j) * D + off;
          double dot = 0.0;
          for (int c = 0; c < dh; ++c) dot += static_cast<double>(qi[c]) * kj[c];
          s[static_cast<std::size_t>(j)] = dot * inv_sqrt;
          mx = std::max(mx, s[static_cast<std::size_t>(j)]);
        }
        double z = 0.0;
        for (int j = 0; j < limit; ++j) {
          const double e = std::exp(s[static_cast<std::size_t>(j)] - mx);
          s[static_cast<std::size_t>(j)] = e;
          z += e;
        }
        real* oi = out.data() + static_cast<std::size_t>(b * Lq + i) * D + off;
        for (int j = 0; j < limit; ++j) {
          const real pj = static_cast<real>(s[static_cast<std::size_t>(j)] / z);
          p[j] = pj;
          const real* vj = V.data() + static_cast<std::size_t>(b * Lk + j) * D + off;
          for (int c = 0; c < dh; ++c) oi[c] += pj * vj[c];
        }
      }
    }
  }

  return t.push(std::move(out), {q, k, v}, [q, k, v, probs, B, Lq, Lk, H, D, dh, inv_sqrt](Tape& tp, const Tensor& g) {
    const Tensor& Qv = q.value();
    const Tensor& Kv = k.value();
    const Tensor& Vv = v.value();
    Tensor gq(Qv.shape());
    Tensor gk(Kv.shape());
    Tensor gv(Vv.shape());
    std::vector<double> dp(static_cast<std::size_t>(Lk));
    for (int b = 0; b < B; ++b) {
      for (int h = 0; h < H; ++h) {
        const int off = h * dh;
        for (int i = 0; i < Lq; ++i) {
          const real* p = probs->data() + ((static_cast<std::size_t>(b) * H + h) * Lq + i) * Lk;
          const real* gi = g.data() + static_cast<std::size_t>(b * Lq + i) * D + off;
          double row_dot = 0.0;
          for (int j = 0; j < Lk; ++j) {
            if (p[j] == 0) {
              dp[static_cast<std::size_t>(j)] = 0.0;
              continue;
            }
            const real* vj = Vv.data() + static_cast<std::size_t>(b * Lk + j) * D + off;
            real* gvj = gv.data() + static_cast<std::size_t>(b * Lk + j) * D + off;
            double d = 0.0;
            for (int c = 0; c < dh; ++c) {
              d += static_cast<double>(gi[c]) * vj[c];
              gvj[c] += p[j] * gi[c];
            }
            dp[static_cast<std::size_t>(j)] = d;
            row_dot += d * p[j];
          }
          const real* qi = Qv.data() + static_cast<std::size_t>(b * Lq + i) * D + off;
          real* gqi = gq.data() + static_cast<std::size_t>(b * Lq + i) * D + off;
          for (int j = 0; j < Lk; ++j) {
            if (p[j] == 0) continue;
            const real ds = static_cast<real>(p[j] * (dp[static_cast<std::size_t>(j)] - row_dot) * inv_sqrt);
            const real* kj = Kv.data() + static_cast<std::size_t>(b * Lk + j) * D + off;
            real* gkj = gk.data() + static_cast<std::size_t>(b * Lk + j) * D + off;
            for (int c = 0; c < dh; ++c) {
              gqi[c] += ds * kj[c];
              gkj[c] += ds * qi[c];
            }
          }
        }
      }
    }
    tp.accumulate(q, gq);
    tp.accumulate(k, gk);
    tp.accumulate(v, gv);
  });
}

Tensor log_softmax_rows(const Tensor& logits) {
  Tensor out(logits.shape());
  for (int r = 0; r < logits.rows(); ++r) {
    auto lr = logits.row(r);
    const double mx = *std::max_element(lr.begin(), lr.end());
    double z = 0.0;
    for (real v : lr) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    auto orow = out.row(r);
    for (std::size_t c = 0; c < lr.size(); ++c) orow[c] = static_cast<real>(lr[c] - lse);
  }
  return out;
}

}  // namespace adapterforge
