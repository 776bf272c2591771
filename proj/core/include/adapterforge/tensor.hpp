// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace adapterforge {

// Storage scalar. The f64 build flavour exists for finite-difference checks.
#ifdef ADAPTERFORGE_DOUBLE
using real = double;
#else
using real = float;
#endif

/// Allocator with a fixed 64-byte alignment. Vectorised reductions peel a
/// number of leading elements that depends on the buffer address, so a fixed
/// alignment keeps results bit-identical from run to run.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}  // NOLINT(google-explicit-constructor)

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <class U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

using RealBuffer = std::vector<real, AlignedAllocator<real>>;

using Shape = std::vector<int>;

std::string to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array. A default-constructed tensor is "empty" (no shape);
/// every other tensor has all dims >= 1 and product(shape) == size().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, real fill = real{0});
  Tensor(Shape shape, std::vector<real> data);

  static Tensor scalar(real value);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] int rank() const noexcept { return static_cast<int>(shape_.size()); }
  [[nodiscard]] int dim(int axis) const;
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return shape_.empty(); }

  /// Size of the last axis.
  [[nodiscard]] int cols() const;
  /// Product of all axes but the last.
  [[nodiscard]] int rows() const;

  real* data() noexcept { return data_.data(); }
  [[nodiscard]] const real* data() const noexcept { return data_.data(); }
  std::span<real> values() noexcept { return data_; }
  [[nodiscard]] std::span<const real> values() const noexcept { return data_; }
  std::span<real> row(int r);
  [[nodiscard]] std::span<const real> row(int r) const;

  real& operator[](std::size_t i) { return data_[i]; }
  real operator[](std::size_t i) const { return data_[i]; }
  real& at(int r, int c);
  [[nodiscard]] real at(int r, int c) const;
  [[nodiscard]] real item() const;

  [[nodiscard]] Tensor reshaped(Shape shape) const;
  void fill(real value);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  RealBuffer data_;
};

/// Largest absolute elementwise difference; throws DimensionError on shape mismatch.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace adapterforge
