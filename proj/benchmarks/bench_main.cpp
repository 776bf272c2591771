// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "adapterforge/beam_search.hpp"
#include "adapterforge/ops.hpp"
#include "adapterforge/transformer.hpp"

namespace adapterforge {
namespace {

Tensor random_tensor(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Tensor t({rows, cols});
  for (auto& v : t.values()) v = static_cast<real>(n(rng));
  return t;
}

ModelConfig desk_config() {
  ModelConfig c;
  c.d_model = 64;
  c.n_heads = 4;
  c.enc_layers = 2;
  c.dec_layers = 2;
  c.ffn_dim = 256;
  c.vocab_size = 1000;
  c.max_len = 64;
  return c;
}

std::vector<std::vector<int>> rows(int batch, int len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(batch));
  for (auto& r : out) {
    for (int t = 0; t < len; ++t) r.push_back(10 + static_cast<int>(rng() % 900));
  }
  return out;
}

void BM_Matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Tensor a = random_tensor(n, n, 1);
  const Tensor b = random_tensor(n, n, 2);
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(tape.value(matmul(tape.constant(a), tape.constant(b))));
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

void BM_Attention(benchmark::State& state) {
  const int len = static_cast<int>(state.range(0));
  TransformerModel model(desk_config(), 1);
  const TokenBatch src = TokenBatch::from_rows(rows(8, len, 3));
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(tape.value(model.encode(tape, src, {}, {})));
  }
}
BENCHMARK(BM_Attention)->Arg(16)->Arg(48);

void BM_ForwardBackward(benchmark::State& state) {
  TransformerModel model(desk_config(), 1);
  model.add_adapter_set(AdapterKind::Domain, "medical", {}, {0, 1}, 128, 2);
  set_trainable(model.params(), {"da:*"});
  ActivationPlan plan;
  plan.decoder.assign(2, LayerStack{std::nullopt, "da:medical"});
  const TokenBatch src = TokenBatch::from_rows(rows(16, 20, 4));
  const TokenBatch tgt = TokenBatch::from_rows(rows(16, 20, 5));
  const std::vector<int> targets = tgt.ids;
  std::mt19937_64 rng(6);
  RunOptions opts;
  opts.train = true;
  opts.rng = &rng;
  for (auto _ : state) {
    Tape tape(true);
    Var enc = model.encode(tape, src, plan, opts);
    Var logits = model.decode_train(tape, enc, src, tgt, plan, opts);
    tape.backward(cross_entropy_smoothed(logits, targets, 0.1, 0));
    for (Parameter* p : model.params().all()) p->grad = Tensor();
  }
}
BENCHMARK(BM_ForwardBackward);

void BM_Beam(benchmark::State& state) {
  TransformerModel model(desk_config(), 1);
  const std::vector<int> src = rows(1, 20, 7).front();
  BeamOptions opt;
  opt.beam_size = static_cast<int>(state.range(0));
  opt.max_len = 30;
  for (auto _ : state) {
    ModelScorer scorer(model, src, {});
    benchmark::DoNotOptimize(beam_search(scorer, opt));
  }
}
BENCHMARK(BM_Beam)->Arg(1)->Arg(5);

}  // namespace
}  // namespace adapterforge

BENCHMARK_MAIN();
