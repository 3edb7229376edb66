// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "tground/tensor.hpp"

namespace tg {

struct ParamRef {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

// Owns every learnable tensor plus its optimizer moments. Parameters live
// here across training steps; each forward pass mounts them onto a Tape as
// leaves.
class ParamStore {
public:
    ParamRef add(std::string name, Tensor init) {
        entries_.push_back(Entry{std::move(name), std::move(init), Tensor{}, Tensor{}});
        return ParamRef{static_cast<int>(entries_.size()) - 1};
    }

    int count() const { return static_cast<int>(entries_.size()); }

    const std::string& name(int idx) const { return entries_[static_cast<size_t>(idx)].name; }
    const Tensor& value(int idx) const { return entries_[static_cast<size_t>(idx)].value; }
    Tensor& value_mut(int idx) { return entries_[static_cast<size_t>(idx)].value; }
    const Tensor& value(ParamRef r) const { return value(r.idx); }
    Tensor& value_mut(ParamRef r) { return value_mut(r.idx); }

    // Adam moments, zero-initialized lazily to the parameter's shape.
    Tensor& moment1(int idx) { return lazy(entries_[static_cast<size_t>(idx)].m1, idx); }
    Tensor& moment2(int idx) { return lazy(entries_[static_cast<size_t>(idx)].m2, idx); }

    std::size_t total_scalars() const {
        std::size_t n = 0;
        for (const Entry& e : entries_) n += e.value.size();
        return n;
    }

private:
    struct Entry {
        std::string name;
        Tensor value;
        Tensor m1, m2;
    };

    Tensor& lazy(Tensor& t, int idx) {
        if (t.size() != entries_[static_cast<size_t>(idx)].value.size())
            t = Tensor::zeros(entries_[static_cast<size_t>(idx)].value.shape());
        return t;
    }

    std::vector<Entry> entries_;
};

}  // namespace tg
