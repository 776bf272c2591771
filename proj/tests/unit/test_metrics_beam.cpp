// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "adapterforge/beam_search.hpp"
#include "adapterforge/errors.hpp"
#include "adapterforge/metrics.hpp"
#include "beam_oracle.hpp"
#include "metric_oracle.hpp"
#include "sacrebleu_fixtures.hpp"

namespace adapterforge {
namespace {

TEST(Bleu, MatchesFrozenFixtures) {
  for (const auto& f : oracle::sacrebleu_fixtures()) {
    EXPECT_NEAR(corpus_bleu(f.hyps, f.refs), f.bleu, 1e-9);
    EXPECT_NEAR(corpus_chrf(f.hyps, f.refs), f.chrf, 1e-9);
  }
}

TEST(Bleu, IdentityIsHundredAndEmptyIsError) {
  EXPECT_NEAR(corpus_bleu({"a b c d e"}, {"a b c d e"}), 100.0, 1e-9);
  EXPECT_THROW(corpus_bleu({}, {}), UsageError);
  EXPECT_THROW(corpus_bleu({"a"}, {"a", "b"}), UsageError);
}

TEST(Bleu, StatisticsAddUp) {
  BleuStats s = bleu_statistics("a b c", "a b d");
  EXPECT_EQ(s.correct[0], 2);
  EXPECT_EQ(s.total[0], 3);
  EXPECT_EQ(s.correct[1], 1);
  EXPECT_EQ(s.sys_len, 3);
  s += bleu_statistics("x", "x y");
  EXPECT_EQ(s.sys_len, 4);
  EXPECT_EQ(s.ref_len, 5);
}

TEST(Bleu, TokenizerSplitsOnWhitespace) {
  const auto t = tokenize_13a("  a  bb\tc ");
  ASSERT_EQ(t.size(), 3U);
  EXPECT_EQ(t[1], "bb");
}

TEST(Metrics, AgreeWithBruteForceOnRandomCorpora) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> words = {"ka", "mo", "ri", "5", "ta_fr", "ka_de"};
  auto sentence = [&] {
    std::string s;
    const int n = static_cast<int>(rng() % 9);
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + words[rng() % words.size()];
    return s;
  };
  for (int c = 0; c < 30; ++c) {
    std::vector<std::string> h;
    std::vector<std::string> r;
    for (int i = 0; i < 4; ++i) {
      h.push_back(sentence());
      r.push_back(sentence());
    }
    EXPECT_NEAR(corpus_bleu(h, r), oracle::brute_bleu(h, r), 1e-9);
    EXPECT_NEAR(corpus_chrf(h, r), oracle::brute_chrf(h, r), 1e-9);
  }
}

TEST(Chrf, IgnoresWhitespace) {
  EXPECT_NEAR(corpus_chrf({"ab cd"}, {"abcd"}), 1.0, 1e-12);
  EXPECT_NEAR(corpus_chrf({"zz"}, {"ab"}), 0.0, 1e-12);
}

/// Next-token distribution fixed per (position, previous token).
class TableScorer final : public StepScorer {
 public:
  TableScorer(int vocab, int max_len, std::uint64_t seed) : vocab_(vocab) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.5);
    table_.resize(static_cast<std::size_t>(max_len + 1));
    for (auto& by_prev : table_) {
      by_prev.resize(static_cast<std::size_t>(vocab + 2));
      for (auto& row : by_prev) {
        row.resize(static_cast<std::size_t>(vocab));
        double z = 0;
        for (auto& x : row) {
          x = n(rng);
          z += std::exp(x);
        }
        for (auto& x : row) x -= std::log(z);
      }
    }
  }
  [[nodiscard]] int vocab_size() const override { return vocab_; }
  Tensor step(std::span<const int> tokens) override {
    Tensor out({static_cast<int>(tokens.size()), vocab_});
    for (std::size_t h = 0; h < tokens.size(); ++h) {
      const auto& row = row_for(pos_, tokens[h]);
      for (int v = 0; v < vocab_; ++v) out.at(static_cast<int>(h), v) = static_cast<real>(row[static_cast<std::size_t>(v)]);
    }
    ++pos_;
    return out;
  }
  void reorder(std::span<const int>) override {}

  [[nodiscard]] double sequence_log_prob(const std::vector<int>& seq, int bos) const {
    double lp = 0;
    int prev = bos;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      lp += row_for(static_cast<int>(i), prev)[static_cast<std::size_t>(seq[i])];
      prev = seq[i];
    }
    return lp;
  }

 private:
  [[nodiscard]] const std::vector<double>& row_for(int pos, int prev) const {
    const int key = prev < vocab_ ? prev : vocab_ + 1;
    return table_[static_cast<std::size_t>(pos)][static_cast<std::size_t>(key)];
  }
  int vocab_;
  int pos_ = 0;
  std::vector<std::vector<std::vector<double>>> table_;
};

TEST(Beam, ExhaustiveBeamMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    BeamOptions opt;
    opt.beam_size = 27;
    opt.max_len = 3;
    opt.bos = 7;
    opt.eos = 2;
    TableScorer scorer(3, 3, seed);
    const TableScorer ref(3, 3, seed);
    const Hypothesis h = beam_search(scorer, opt);
    const oracle::Scored want = oracle::brute_force_decode(
        3, 3, 2, opt.length_alpha, [&](const std::vector<int>& s) { return ref.sequence_log_prob(s, 7); });
    EXPECT_EQ(h.tokens, want.tokens) << seed;
    EXPECT_NEAR(h.score, want.score, 1e-5) << seed;
    EXPECT_EQ(h.finished, want.finished);
  }
}

TEST(Beam, BeamOneEqualsGreedy) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    BeamOptions opt;
    opt.beam_size = 1;
    opt.max_len = 4;
    opt.bos = 7;
    TableScorer a(3, 4, seed);
    TableScorer b(3, 4, seed);
    const Hypothesis x = beam_search(a, opt);
    const Hypothesis y = greedy_search(b, opt);
    EXPECT_EQ(x.tokens, y.tokens);
    EXPECT_NEAR(x.log_prob, y.log_prob, 1e-9);
  }
}

TEST(Beam, NormalizedScore) {
  EXPECT_DOUBLE_EQ(normalized_score(-4.0, 4, 0.5), -2.0);
  EXPECT_DOUBLE_EQ(normalized_score(-4.0, 4, 0.0), -4.0);
}

}  // namespace
}  // namespace adapterforge
