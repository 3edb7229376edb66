// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#include "tground/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "tground/common.hpp"

namespace tg::ad {

namespace {
double rel_err(double analytic, double fd) {
    return std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
}
}  // namespace

double check_gradients(const ScalarFn& f, const Tensor& point, double step) {
    Tensor analytic;
    {
        Tape tape;
        Var x = tape.leaf(point, true);
        Var loss = f(tape, x);
        tape.backward(loss);
        const Tensor* g = tape.grad(x.id);
        analytic = g ? *g : Tensor::zeros(point.shape());
    }
    auto eval_at = [&](const Tensor& p) {
        Tape tape;
        Var x = tape.leaf(p, false);
        return f(tape, x).scalar();
    };
    Tensor probe = point;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + step;
        const double up = eval_at(probe);
        probe[i] = saved - step;
        const double down = eval_at(probe);
        probe[i] = saved;
        const double fd = (up - down) / (2.0 * step);
        worst = std::max(worst, rel_err(analytic[i], fd));
    }
    return worst;
}

double check_param_gradients(ParamStore& store, const ParamLossFn& build_loss, double step,
                             const std::vector<ParamRef>& refs) {
    std::vector<ParamRef> targets = refs;
    if (targets.empty())
        for (int i = 0; i < store.count(); ++i) targets.push_back(ParamRef{i});

    std::vector<Tensor> analytic(targets.size());
    {
        Tape tape;
        Var loss = build_loss(tape);
        tape.backward(loss);
        for (std::size_t i = 0; i < targets.size(); ++i) analytic[i] = tape.param_gradient(targets[i]);
    }
    auto eval = [&]() {
        Tape tape;
        return build_loss(tape).scalar();
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        Tensor& value = store.value_mut(targets[i]);
        if (analytic[i].size() == 0) analytic[i] = Tensor::zeros(value.shape());
        for (std::size_t c = 0; c < value.size(); ++c) {
            const double saved = value[c];
            value[c] = saved + step;
            const double up = eval();
            value[c] = saved - step;
            const double down = eval();
            value[c] = saved;
            const double fd = (up - down) / (2.0 * step);
            worst = std::max(worst, rel_err(analytic[i][c], fd));
        }
    }
    return worst;
}

}  // namespace tg::ad
