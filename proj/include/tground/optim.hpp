// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "tground/params.hpp"

namespace tg {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moments live in the ParamStore so checkpoints
// and optimizer state stay together.
class Adam {
public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    // grads[i] pairs with parameter index i; empty tensors are skipped.
    void step(ParamStore& store, const std::vector<Tensor>& grads);

    int steps_taken() const { return t_; }

private:
    AdamConfig cfg_;
    int t_ = 0;
};

// grads[i] += delta for each parameter gradient produced by a backward pass;
// used to accumulate a minibatch sample by sample.
class GradAccumulator {
public:
    explicit GradAccumulator(const ParamStore& store);
    void add_scaled(int param_idx, const Tensor& g, double scale);
    void reset();
    std::vector<Tensor>& grads() { return grads_; }

private:
    std::vector<Tensor> grads_;
};

}  // namespace tg
