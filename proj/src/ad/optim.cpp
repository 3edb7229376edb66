// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#include "tground/optim.hpp"

#include <cmath>

#include "tground/kernels.hpp"

namespace tg {

void Adam::step(ParamStore& store, const std::vector<Tensor>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (int i = 0; i < store.count(); ++i) {
        const Tensor& g = grads[static_cast<size_t>(i)];
        if (g.size() == 0) continue;
        Tensor& p = store.value_mut(i);
        Tensor& m = store.moment1(i);
        Tensor& v = store.moment2(i);
        for (std::size_t c = 0; c < p.size(); ++c) {
            m[c] = cfg_.beta1 * m[c] + (1.0 - cfg_.beta1) * g[c];
            v[c] = cfg_.beta2 * v[c] + (1.0 - cfg_.beta2) * g[c] * g[c];
            const double mhat = m[c] / bc1;
            const double vhat = v[c] / bc2;
            p[c] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

GradAccumulator::GradAccumulator(const ParamStore& store) : grads_(static_cast<size_t>(store.count())) {}

void GradAccumulator::add_scaled(int param_idx, const Tensor& g, double scale) {
    Tensor& slot = grads_[static_cast<size_t>(param_idx)];
    if (slot.size() == 0) slot = Tensor::zeros(g.shape());
    kernels::active().axpy(scale, g.data(), slot.data(), g.size());
}

void GradAccumulator::reset() {
    for (Tensor& g : grads_)
        if (g.size() != 0) g.fill(0.0);
}

}  // namespace tg
