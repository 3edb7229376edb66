// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "tground/ops.hpp"
#include "tground/params.hpp"

namespace tg::ad {

// Builds a scalar loss from one input leaf.
using ScalarFn = std::function<Var(Tape&, Var)>;

// Builds a scalar loss from parameters mounted off a store (via
// Tape::param inside the builder).
using ParamLossFn = std::function<Var(Tape&)>;

// Central-difference check of the tape gradient of f at `point`.
// Returns max over coordinates of |analytic - fd| / max(1, |fd|).
double check_gradients(const ScalarFn& f, const Tensor& point, double step = 1e-5);

// Same check over every coordinate of the listed parameters (all parameters
// in the store when `refs` is empty). The builder is re-evaluated twice per
// coordinate, so keep the instances small.
double check_param_gradients(ParamStore& store, const ParamLossFn& build_loss, double step = 1e-4,
                             const std::vector<ParamRef>& refs = {});

}  // namespace tg::ad
