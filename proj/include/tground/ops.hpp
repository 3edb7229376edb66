// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "tground/tape.hpp"

namespace tg::ad {

// Elementwise (same shape unless noted).
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var neg(Var a);
Var add_scalar(Var a, double c);
Var mul_scalar(Var a, double c);
inline Var operator+(Var a, double c) { return add_scalar(a, c); }
inline Var operator-(Var a, double c) { return add_scalar(a, -c); }
inline Var operator*(Var a, double c) { return mul_scalar(a, c); }
inline Var operator-(double c, Var a) { return add_scalar(neg(a), c); }

// Elementwise against a non-differentiable tensor.
Var add_const(Var a, Tensor c);
Var mul_const(Var a, Tensor c);

// Broadcast over rows/columns of a matrix.
Var add_rowvec(Var a, Var b);  // a: n x d, b: {d}
Var mul_rowvec(Var a, Var b);  // a: n x d, b: {d}
Var add_colvec(Var a, Var b);  // a: n x m, b: {n}

// Linear algebra.
Var matmul(Var a, Var b);
Var transpose(Var a);

// Nonlinearities.
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var log(Var a);
Var clamp(Var a, double lo, double hi);

// Softmax over the last axis (rows of a matrix, or a whole vector).
// Subtract-max stabilized; invariant under additive shifts.
Var softmax_rows(Var a);

// Reductions to a scalar node.
Var sum(Var a);
Var mean(Var a);
Var pick(Var a, int flat_index);

// Shape surgery. All are views materialized as copies with exact adjoints.
Var reshape(Var a, std::vector<int> shape);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, int c0, int c1);
Var slice_rows(Var a, int r0, int r1);
inline Var row(Var a, int r) { return slice_rows(a, r, r + 1); }
Var tile_rows(Var a, int n);  // a: 1 x d -> n x d

// Sequence ops over the row (time) axis of an n x d matrix.
// conv1d: w is k x d_in x d_out, odd k, zero "same" padding; output n x d_out.
Var conv1d(Var x, Var w, Var bias);
// Depthwise: w is k x d, one filter per channel.
Var conv1d_depthwise(Var x, Var w, Var bias);
Var maxpool2(Var x);    // n x d -> n/2 x d, window 2 stride 2; n must be even
Var upsample2(Var x);   // n x d -> 2n x d, nearest-neighbor repeat
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

// Mean over every length-`win` window of a vector, stride 1: {W} -> {W-win+1}.
Var sliding_mean(Var x, int win);

}  // namespace tg::ad
