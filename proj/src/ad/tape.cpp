// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#include "tground/tape.hpp"

#include "tground/common.hpp"

namespace tg::ad {

Var Tape::leaf(Tensor value, bool requires_grad) {
    nodes_.push_back(Node{std::move(value), Tensor{}, nullptr, requires_grad, false});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(ParamStore& store, ParamRef ref) {
    if (bound_store_ == nullptr) {
        bound_store_ = &store;
        param_node_.assign(static_cast<size_t>(store.count()), -1);
    } else if (bound_store_ != &store) {
        throw ConfigError("tape: a single tape cannot mount parameters from two stores");
    }
    if (ref.idx < 0 || ref.idx >= static_cast<int>(param_node_.size()))
        throw ConfigError("tape: invalid parameter reference");
    int& slot = param_node_[static_cast<size_t>(ref.idx)];
    if (slot < 0) {
        Var v = leaf(store.value(ref), true);
        slot = v.id;
        param_leaves_.emplace_back(ref.idx, v.id);
    }
    return Var{this, slot};
}

Var Tape::record(Tensor value, bool needs_grad, BackwardFn back) {
    nodes_.push_back(Node{std::move(value), Tensor{}, needs_grad ? std::move(back) : nullptr, needs_grad, false});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::clear() {
    nodes_.clear();
    param_leaves_.clear();
    param_node_.clear();
    bound_store_ = nullptr;
}

Tensor& Tape::grad_accum(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad_live) {
        if (!n.grad.same_shape(n.value)) n.grad = Tensor::zeros(n.value.shape());
        else n.grad.fill(0.0);
        n.grad_live = true;
    }
    return n.grad;
}

Tensor* Tape::grad_if_needed(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.needs_grad) return nullptr;
    return &grad_accum(id);
}

const Tensor* Tape::grad(int id) const {
    const Node& n = nodes_[static_cast<size_t>(id)];
    return n.grad_live ? &n.grad : nullptr;
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw ConfigError("backward: loss lives on a different tape");
    if (value(loss.id).size() != 1)
        throw ConfigError("backward: loss must be scalar, got shape " + value(loss.id).shape_str());
    for (Node& n : nodes_) n.grad_live = false;
    grad_accum(loss.id).fill(1.0);
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.grad_live && n.back) n.back(*this, id);
    }
}

Tensor Tape::param_gradient(ParamRef ref) const {
    if (bound_store_ == nullptr || ref.idx < 0 || ref.idx >= static_cast<int>(param_node_.size()) ||
        param_node_[static_cast<size_t>(ref.idx)] < 0)
        return Tensor{};
    int node_id = param_node_[static_cast<size_t>(ref.idx)];
    const Tensor* g = grad(node_id);
    if (g == nullptr) return Tensor::zeros(value(node_id).shape());
    return *g;
}

}  // namespace tg::ad
