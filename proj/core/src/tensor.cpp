// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adapterforge/errors.hpp"

namespace adapterforge {

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 1) throw DimensionError("tensor dims must be >= 1, got " + to_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(Shape shape, real fill) : shape_(std::move(shape)) {
  if (shape_.empty()) throw DimensionError("tensor shape must have at least one axis");
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<real> data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (shape_.empty()) throw DimensionError("tensor shape must have at least one axis");
  if (shape_size(shape_) != data_.size()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         to_string(shape_));
  }
}

Tensor Tensor::scalar(real value) { return Tensor({1}, std::vector<real>{value}); }

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) throw DimensionError("axis out of range for " + to_string(shape_));
  return shape_[static_cast<std::size_t>(axis)];
}

int Tensor::cols() const {
  if (empty()) throw DimensionError("empty tensor has no columns");
  return shape_.back();
}

int Tensor::rows() const { return static_cast<int>(size() / static_cast<std::size_t>(cols())); }

std::span<real> Tensor::row(int r) {
  const auto c = static_cast<std::size_t>(cols());
  return {data_.data() + static_cast<std::size_t>(r) * c, c};
}

std::span<const real> Tensor::row(int r) const {
  const auto c = static_cast<std::size_t>(cols());
  return {data_.data() + static_cast<std::size_t>(r) * c, c};
}

real& Tensor::at(int r, int c) { return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols()) + c]; }

real Tensor::at(int r, int c) const {
  return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols()) + c];
}

real Tensor::item() const {
  if (size() != 1) throw DimensionError("item() needs a single-element tensor, got " + to_string(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != size()) {
    throw DimensionError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

void Tensor::fill(real value) { std::fill(data_.begin(), data_.end(), value); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("max_abs_diff shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return worst;
}

}  // namespace adapterforge
