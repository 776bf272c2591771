// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adapterforge/tensor.hpp"

namespace adapterforge {

/// A named learnable tensor. `group` is the unit of freezing and shipping:
/// "base", "la:<lang>", "da:<domain>".
struct Parameter {
  std::string name;
  std::string group;
  Tensor value;
  Tensor grad;  ///< empty until a backward pass reaches this parameter
  bool trainable = true;

  void zero_grad() { grad = Tensor(); }
};

/// Owns parameters with stable addresses, in insertion order.
class ParameterStore {
 public:
  Parameter& add(std::string name, std::string group, Tensor value);

  [[nodiscard]] Parameter* find(std::string_view name);
  [[nodiscard]] const Parameter* find(std::string_view name) const;
  Parameter& get(std::string_view name);
  [[nodiscard]] const Parameter& get(std::string_view name) const;

  [[nodiscard]] std::vector<Parameter*> all();
  [[nodiscard]] std::vector<const Parameter*> all() const;
  [[nodiscard]] std::vector<Parameter*> in_group(std::string_view group);
  [[nodiscard]] std::set<std::string> groups() const;
  [[nodiscard]] bool has_group(std::string_view group) const;
  [[nodiscard]] std::size_t size() const noexcept { return params_.size(); }

  void zero_grad();

 private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape is alive and not reset.
class Var {
 public:
  Var() = default;

  [[nodiscard]] const Tensor& value() const;
  [[nodiscard]] const Shape& shape() const { return value().shape(); }
  [[nodiscard]] bool requires_grad() const;
  [[nodiscard]] Tape* tape() const noexcept { return tape_; }
  [[nodiscard]] int id() const noexcept { return id_; }
  [[nodiscard]] bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Ordered record of differentiable operations. Nodes are appended in
/// execution order, so walking them backwards is a reverse topological order.
///
/// A tape constructed with record=false evaluates eagerly and keeps no
/// backward closures (inference mode).
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  [[nodiscard]] bool recording() const noexcept { return record_; }

  Var constant(Tensor value);
  /// Leaf bound to a parameter. The tape references the parameter's storage,
  /// so it must not be mutated while the tape is live. Gradients reach the
  /// parameter only when it is trainable and the tape records.
  Var param(Parameter& p);
  /// Read-only leaf; never receives a gradient.
  Var param(const Parameter& p);

  /// Appends the result of an op. `backward` is kept only if some input needs a
  /// gradient; it must route out_grad into inputs with accumulate().
  Var push(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  [[nodiscard]] const Tensor& value(Var v) const;
  [[nodiscard]] bool needs_grad(Var v) const;
  void accumulate(Var v, const Tensor& grad);
  /// Adds `grad` into rows of v's gradient: row i of grad goes to row rows[i].
  void accumulate_rows(Var v, std::span<const int> rows, const Tensor& grad);

  /// Seeds d(loss)/d(loss) = 1 and walks the tape backwards. Parameters that
  /// are trainable receive their gradient in Parameter::grad (accumulated).
  void backward(Var loss);
  void reset();

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;  ///< parameter storage, when bound
    Tensor grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  static const Tensor& value_of(const Node& n) { return n.external ? *n.external : n.value; }
  Node& node(Var v);
  [[nodiscard]] const Node& node(Var v) const;
  Tensor& grad_slot(Var v);

  std::deque<Node> nodes_;
  bool record_;
  bool backward_done_ = false;
};

}  // namespace adapterforge
