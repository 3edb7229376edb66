// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "tground/params.hpp"
#include "tground/tensor.hpp"

namespace tg::ad {

class Tape;

// Handle to a node on a tape. Cheap to copy; invalidated by Tape::clear().
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
    const Tensor& val() const;
    double scalar() const;
};

// A backward step reads the output node's gradient from the tape and
// accumulates into its inputs' gradients. Closures capture input node ids,
// never references into the tape.
using BackwardFn = std::function<void(Tape&, int out_id)>;

// Append-only op record. Forward values are computed eagerly as nodes are
// recorded; backward() replays the records in reverse. Single-threaded by
// construction; values are immutable after forward, so concurrent reads
// from other threads are safe.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaves. Inputs that need gradients (or not); constants never do.
    Var leaf(Tensor value, bool requires_grad);
    Var constant(Tensor value) { return leaf(std::move(value), false); }
    Var constant_scalar(double v) { return constant(Tensor::scalar(v)); }

    // Mounts a parameter as a leaf. Repeated calls with the same ref on the
    // same tape return the same node, so shared weights accumulate
    // gradients correctly.
    Var param(ParamStore& store, ParamRef ref);

    Var record(Tensor value, bool needs_grad, BackwardFn back);

    void clear();
    int size() const { return static_cast<int>(nodes_.size()); }

    const Tensor& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
    bool needs_grad(int id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }

    // Gradient of a node, allocated as zeros on first touch.
    Tensor& grad_accum(int id);
    // Null when the node does not require a gradient (accumulation can be
    // skipped entirely).
    Tensor* grad_if_needed(int id);
    // Null when backward never reached this node.
    const Tensor* grad(int id) const;

    // Reverse pass from a scalar loss node. Deterministic: one reverse
    // sweep over the records.
    void backward(Var loss);

    // Gradient of the loss w.r.t. a mounted parameter; zeros if the
    // parameter never influenced the loss.
    Tensor param_gradient(ParamRef ref) const;

    template <typename F>
    void for_each_param_leaf(F&& f) const {
        for (const auto& [param_idx, node_id] : param_leaves_) f(param_idx, node_id);
    }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        BackwardFn back;
        bool needs_grad = false;
        bool grad_live = false;
    };

    std::vector<Node> nodes_;
    std::vector<std::pair<int, int>> param_leaves_;  // (param idx, node id)
    std::vector<int> param_node_;                    // param idx -> node id, -1 if absent
    const ParamStore* bound_store_ = nullptr;
};

inline const Tensor& Var::val() const { return tape->value(id); }
inline double Var::scalar() const { return val()[0]; }

}  // namespace tg::ad
