// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/autograd.hpp"

#include "adapterforge/errors.hpp"

namespace adapterforge {

Parameter& ParameterStore::add(std::string name, std::string group, Tensor value) {
  if (index_.contains(name)) throw UsageError("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  params_.push_back(Parameter{std::move(name), std::move(group), std::move(value), Tensor(), true});
  return params_.back();
}

Parameter* ParameterStore::find(std::string_view name) {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &params_[it->second];
}

const Parameter* ParameterStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &params_[it->second];
}

Parameter& ParameterStore::get(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw UsageError("no parameter named " + std::string(name));
}

const Parameter& ParameterStore::get(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw UsageError("no parameter named " + std::string(name));
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<Parameter*> ParameterStore::in_group(std::string_view group) {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    if (p.group == group) out.push_back(&p);
  }
  return out;
}

std::set<std::string> ParameterStore::groups() const {
  std::set<std::string> out;
  for (const auto& p : params_) out.insert(p.group);
  return out;
}

bool ParameterStore::has_group(std::string_view group) const {
  for (const auto& p : params_) {
    if (p.group == group) return true;
  }
  return false;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

const Tensor& Var::value() const {
  if (!tape_) throw UsageError("value() on an unbound Var");
  return tape_->value(*this);
}

bool Var::requires_grad() const { return tape_ && tape_->needs_grad(*this); }

Tape::Node& Tape::node(Var v) {
  if (v.tape_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
    throw UsageError("Var does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id_)];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
    throw UsageError("Var does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id_)];
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), nullptr, Tensor(), false, nullptr, nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::param(Parameter& p) {
  const bool needs = record_ && p.trainable;
  nodes_.push_back(Node{Tensor(), &p.value, Tensor(), needs, needs ? &p : nullptr, nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::param(const Parameter& p) {
  nodes_.push_back(Node{Tensor(), &p.value, Tensor(), false, nullptr, nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::push(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs = false;
  if (record_) {
    for (const Var& in : inputs) needs = needs || node(in).requires_grad;
  }
  nodes_.push_back(Node{std::move(value), nullptr, Tensor(), needs, nullptr, needs ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

const Tensor& Tape::value(Var v) const { return value_of(node(v)); }

bool Tape::needs_grad(Var v) const { return node(v).requires_grad; }

Tensor& Tape::grad_slot(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Tensor(value_of(n).shape());
  return n.grad;
}

void Tape::accumulate(Var v, const Tensor& grad) {
  if (!needs_grad(v)) return;
  Tensor& slot = grad_slot(v);
  if (slot.shape() != grad.shape()) {
    throw DimensionError("gradient shape " + to_string(grad.shape()) + " does not match value shape " +
                         to_string(slot.shape()));
  }
  real* dst = slot.data();
  const real* src = grad.data();
  for (std::size_t i = 0; i < slot.size(); ++i) dst[i] += src[i];
}

void Tape::accumulate_rows(Var v, std::span<const int> rows, const Tensor& grad) {
  if (!needs_grad(v)) return;
  Tensor& slot = grad_slot(v);
  const int cols = slot.cols();
  if (grad.cols() != cols || static_cast<std::size_t>(grad.rows()) != rows.size()) {
    throw DimensionError("row gradient shape mismatch");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto dst = slot.row(rows[i]);
    auto src = grad.row(static_cast<int>(i));
    for (int c = 0; c < cols; ++c) dst[static_cast<std::size_t>(c)] += src[static_cast<std::size_t>(c)];
  }
}

void Tape::backward(Var loss) {
  if (backward_done_) throw UsageError("backward called twice without reset");
  if (!record_) throw UsageError("backward on a non-recording tape");
  Node& root = node(loss);
  if (value_of(root).size() != 1) {
    throw DimensionError("backward needs a scalar loss, got " + to_string(value_of(root).shape()));
  }
  backward_done_ = true;
  if (!root.requires_grad) return;
  grad_slot(loss).fill(real{1});

  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param != nullptr) {
      Parameter& p = *n.param;
      if (p.grad.empty()) {
        p.grad = n.grad;
      } else {
        for (std::size_t k = 0; k < p.grad.size(); ++k) p.grad[k] += n.grad[k];
      }
    }
  }
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace adapterforge
