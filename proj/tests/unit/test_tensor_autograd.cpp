// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "adapterforge/autograd.hpp"
#include "adapterforge/errors.hpp"
#include "adapterforge/ops.hpp"
#include "adapterforge/tensor.hpp"

namespace adapterforge {
namespace {

TEST(Tensor, ShapeAndAccess) {
  Tensor t({2, 3}, 1.5F);
  EXPECT_EQ(t.size(), 6U);
  EXPECT_EQ(t.rows(), 2);
  EXPECT_EQ(t.cols(), 3);
  t.at(1, 2) = 4.0F;
  EXPECT_FLOAT_EQ(t[5], 4.0F);
  EXPECT_TRUE(Tensor().empty());
}

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor({2, 0}), DimensionError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<real>{1, 2, 3}), DimensionError);
  EXPECT_THROW((void)max_abs_diff(Tensor({2}), Tensor({3})), DimensionError);
}

TEST(Ops, MatmulValues) {
  Tape tape(false);
  Var a = tape.constant(Tensor({2, 2}, {1, 2, 3, 4}));
  Var b = tape.constant(Tensor({2, 2}, {5, 6, 7, 8}));
  const Tensor c = tape.value(matmul(a, b));
  EXPECT_EQ(c, Tensor({2, 2}, {19, 22, 43, 50}));
  const Tensor d = tape.value(matmul_nt(a, b));
  EXPECT_EQ(d, Tensor({2, 2}, {17, 23, 39, 53}));
}

TEST(Ops, MatmulShapeMismatchThrows) {
  Tape tape(false);
  Var a = tape.constant(Tensor({2, 3}));
  Var b = tape.constant(Tensor({2, 3}));
  EXPECT_THROW(matmul(a, b), DimensionError);
}

TEST(Ops, SoftmaxRowsSumToOne) {
  Tape tape(false);
  Var x = tape.constant(Tensor({2, 3}, {1, 2, 3, -1, 0, 100}));
  const Tensor y = tape.value(softmax(x));
  for (int r = 0; r < 2; ++r) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += y.at(r, c);
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Ops, LayerNormNormalises) {
  Tape tape(false);
  Var x = tape.constant(Tensor({1, 4}, {1, 2, 3, 4}));
  Var g = tape.constant(Tensor({4}, 1.0F));
  Var b = tape.constant(Tensor({4}, 0.0F));
  const Tensor y = tape.value(layer_norm(x, g, b));
  double mean = 0;
  double var = 0;
  for (int i = 0; i < 4; ++i) mean += y[i];
  mean /= 4;
  for (int i = 0; i < 4; ++i) var += (y[i] - mean) * (y[i] - mean);
  EXPECT_NEAR(mean, 0.0, 1e-6);
  EXPECT_NEAR(var / 4, 1.0, 1e-4);
}

TEST(Ops, DropoutIsIdentityAtEval) {
  std::mt19937_64 rng(1);
  Tape tape(false);
  const Tensor x({3, 3}, 2.0F);
  EXPECT_EQ(tape.value(dropout(tape.constant(x), 0.5, rng, false)), x);
}

TEST(Ops, CrossEntropyIgnoresPadding) {
  Tape tape(false);
  Var logits = tape.constant(Tensor({2, 3}, {0, 0, 0, 5, 0, 0}));
  const std::vector<int> targets = {1, 0};
  const double loss = tape.value(cross_entropy_smoothed(logits, targets, 0.0, 0)).item();
  EXPECT_NEAR(loss, std::log(3.0), 1e-6);
}

TEST(Ops, CrossEntropySmoothingMatchesFormula) {
  Tape tape(false);
  Var logits = tape.constant(Tensor({1, 2}, {2, 0}));
  const std::vector<int> targets = {0};
  const double lse = std::log(std::exp(2.0) + 1.0);
  const double want = 0.9 * (lse - 2.0) + 0.1 * 0.5 * ((lse - 2.0) + lse);
  EXPECT_NEAR(tape.value(cross_entropy_smoothed(logits, targets, 0.1)).item(), want, 1e-6);
}

TEST(Autograd, GradientsReachTrainableParametersOnly) {
  ParameterStore store;
  Parameter& w = store.add("w", "base", Tensor({2, 2}, {1, 2, 3, 4}));
  Parameter& f = store.add("f", "la:fr", Tensor({2, 2}, 1.0F));
  f.trainable = false;
  Tape tape(true);
  Var loss = sum(mul(tape.param(w), tape.param(f)));
  tape.backward(loss);
  EXPECT_EQ(w.grad, Tensor({2, 2}, 1.0F));
  EXPECT_TRUE(f.grad.empty());
}

TEST(Autograd, GradientsAccumulateAcrossUses) {
  ParameterStore store;
  Parameter& w = store.add("w", "base", Tensor({1, 2}, {3, 4}));
  Tape tape(true);
  Var x = tape.param(w);
  tape.backward(sum(add(x, x)));
  EXPECT_EQ(w.grad, Tensor({1, 2}, 2.0F));
}

TEST(Autograd, DoubleBackwardIsAnError) {
  ParameterStore store;
  Parameter& w = store.add("w", "base", Tensor({1, 1}, 1.0F));
  Tape tape(true);
  Var loss = sum(tape.param(w));
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), UsageError);
}

TEST(ParameterStore, DuplicateNamesRejected) {
  ParameterStore store;
  store.add("w", "base", Tensor({1}));
  EXPECT_THROW(store.add("w", "base", Tensor({1})), UsageError);
  EXPECT_TRUE(store.has_group("base"));
  EXPECT_FALSE(store.has_group("la:fr"));
}

}  // namespace
}  // namespace adapterforge
