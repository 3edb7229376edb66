// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#include "tground/ops.hpp"

#include <cmath>
#include <string>

#include "tground/common.hpp"
#include "tground/kernels.hpp"

namespace tg::ad {

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
    if (a.tape == nullptr || a.tape != b.tape)
        throw ConfigError(std::string(op) + ": operands live on different tapes");
    return *a.tape;
}

void require_rank(const Tensor& t, int rank, const char* op) {
    if (t.rank() != rank)
        throw ConfigError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                          t.shape_str());
}

// y += g
void accum(Tensor& y, const Tensor& g) { kernels::active().axpy(1.0, g.data(), y.data(), g.size()); }

}  // namespace

Var operator+(Var a, Var b) {
    Tape& t = same_tape(a, b, "add");
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    require_same_shape(av, bv, "add");
    Tensor out(av.shape());
    kernels::active().vadd(av.data(), bv.data(), out.data(), out.size());
    bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
    return t.record(std::move(out), ng, [ai = a.id, bi = b.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai)) accum(*ga, g);
        if (Tensor* gb = tp.grad_if_needed(bi)) accum(*gb, g);
    });
}

Var operator-(Var a, Var b) {
    Tape& t = same_tape(a, b, "sub");
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    require_same_shape(av, bv, "sub");
    Tensor out(av.shape());
    kernels::active().vsub(av.data(), bv.data(), out.data(), out.size());
    bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
    return t.record(std::move(out), ng, [ai = a.id, bi = b.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai)) accum(*ga, g);
        if (Tensor* gb = tp.grad_if_needed(bi)) kernels::active().axpy(-1.0, g.data(), gb->data(), g.size());
    });
}

Var operator*(Var a, Var b) {
    Tape& t = same_tape(a, b, "mul");
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    require_same_shape(av, bv, "mul");
    Tensor out(av.shape());
    kernels::active().vmul(av.data(), bv.data(), out.data(), out.size());
    bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
    return t.record(std::move(out), ng, [ai = a.id, bi = b.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai)) kernels::active().vmadd(g.data(), tp.value(bi).data(), ga->data(), g.size());
        if (Tensor* gb = tp.grad_if_needed(bi)) kernels::active().vmadd(g.data(), tp.value(ai).data(), gb->data(), g.size());
    });
}

Var operator/(Var a, Var b) {
    Tape& t = same_tape(a, b, "div");
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    require_same_shape(av, bv, "div");
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] / bv[i];
    bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
    return t.record(std::move(out), ng, [ai = a.id, bi = b.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& av2 = tp.value(ai);
        const Tensor& bv2 = tp.value(bi);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] / bv2[i];
        if (Tensor* gb = tp.grad_if_needed(bi))
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i] * av2[i] / (bv2[i] * bv2[i]);
    });
}

Var neg(Var a) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -av[i];
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai)) kernels::active().axpy(-1.0, g.data(), ga->data(), g.size());
    });
}

Var add_scalar(Var a, double c) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + c;
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        if (Tensor* ga = tp.grad_if_needed(ai)) accum(*ga, tp.grad_accum(self));
    });
}

Var mul_scalar(Var a, double c) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * c;
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id, c](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai)) kernels::active().axpy(c, g.data(), ga->data(), g.size());
    });
}

Var add_const(Var a, Tensor c) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    require_same_shape(av, c, "add_const");
    Tensor out(av.shape());
    kernels::active().vadd(av.data(), c.data(), out.data(), out.size());
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        if (Tensor* ga = tp.grad_if_needed(ai)) accum(*ga, tp.grad_accum(self));
    });
}

Var mul_const(Var a, Tensor c) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    require_same_shape(av, c, "mul_const");
    Tensor out(av.shape());
    kernels::active().vmul(av.data(), c.data(), out.data(), out.size());
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id, cv = std::move(c)](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai)) kernels::active().vmadd(g.data(), cv.data(), ga->data(), g.size());
    });
}

Var add_rowvec(Var a, Var b) {
    Tape& t = same_tape(a, b, "add_rowvec");
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    require_rank(av, 2, "add_rowvec");
    if (bv.rank() != 1 || bv.dim(0) != av.cols())
        throw ConfigError("add_rowvec: " + av.shape_str() + " vs " + bv.shape_str());
    Tensor out(av.shape());
    for (int r = 0; r < av.rows(); ++r)
        kernels::active().vadd(av.row(r), bv.data(), out.row(r), static_cast<size_t>(av.cols()));
    bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
    return t.record(std::move(out), ng, [ai = a.id, bi = b.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai)) accum(*ga, g);
        if (Tensor* gb = tp.grad_if_needed(bi))
            for (int r = 0; r < g.rows(); ++r)
                kernels::active().axpy(1.0, g.row(r), gb->data(), static_cast<size_t>(g.cols()));
    });
}

Var mul_rowvec(Var a, Var b) {
    Tape& t = same_tape(a, b, "mul_rowvec");
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    require_rank(av, 2, "mul_rowvec");
    if (bv.rank() != 1 || bv.dim(0) != av.cols())
        throw ConfigError("mul_rowvec: " + av.shape_str() + " vs " + bv.shape_str());
    Tensor out(av.shape());
    for (int r = 0; r < av.rows(); ++r)
        kernels::active().vmul(av.row(r), bv.data(), out.row(r), static_cast<size_t>(av.cols()));
    bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
    return t.record(std::move(out), ng, [ai = a.id, bi = b.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& av2 = tp.value(ai);
        const Tensor& bv2 = tp.value(bi);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (int r = 0; r < g.rows(); ++r)
                kernels::active().vmadd(g.row(r), bv2.data(), ga->row(r), static_cast<size_t>(g.cols()));
        if (Tensor* gb = tp.grad_if_needed(bi))
            for (int r = 0; r < g.rows(); ++r)
                kernels::active().vmadd(g.row(r), av2.row(r), gb->data(), static_cast<size_t>(g.cols()));
    });
}

Var add_colvec(Var a, Var b) {
    Tape& t = same_tape(a, b, "add_colvec");
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    require_rank(av, 2, "add_colvec");
    if (bv.rank() != 1 || bv.dim(0) != av.rows())
        throw ConfigError("add_colvec: " + av.shape_str() + " vs " + bv.shape_str());
    Tensor out(av.shape());
    for (int r = 0; r < av.rows(); ++r)
        for (int c = 0; c < av.cols(); ++c) out.at(r, c) = av.at(r, c) + bv[static_cast<size_t>(r)];
    bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
    return t.record(std::move(out), ng, [ai = a.id, bi = b.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai)) accum(*ga, g);
        if (Tensor* gb = tp.grad_if_needed(bi))
            for (int r = 0; r < g.rows(); ++r)
                (*gb)[static_cast<size_t>(r)] += kernels::active().vsum(g.row(r), static_cast<size_t>(g.cols()));
    });
}

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b, "matmul");
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    require_rank(av, 2, "matmul");
    require_rank(bv, 2, "matmul");
    if (av.cols() != bv.rows())
        throw ConfigError("matmul: inner dimensions disagree, " + av.shape_str() + " x " + bv.shape_str());
    const int p = av.rows(), q = av.cols(), r = bv.cols();
    Tensor out({p, r});
    const auto& K = kernels::active();
    for (int i = 0; i < p; ++i) {
        double* out_row = out.row(i);
        const double* a_row = av.row(i);
        for (int k = 0; k < q; ++k) K.axpy(a_row[k], bv.row(k), out_row, static_cast<size_t>(r));
    }
    bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
    return t.record(std::move(out), ng, [ai = a.id, bi = b.id, p, q, r](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& av2 = tp.value(ai);
        const Tensor& bv2 = tp.value(bi);
        const auto& K2 = kernels::active();
        if (Tensor* ga = tp.grad_if_needed(ai)) {
            for (int i = 0; i < p; ++i) {
                double* ga_row = ga->row(i);
                const double* g_row = g.row(i);
                for (int k = 0; k < q; ++k) ga_row[k] += K2.dot(g_row, bv2.row(k), static_cast<size_t>(r));
            }
        }
        if (Tensor* gb = tp.grad_if_needed(bi)) {
            for (int i = 0; i < p; ++i) {
                const double* g_row = g.row(i);
                const double* a_row = av2.row(i);
                for (int k = 0; k < q; ++k) K2.axpy(a_row[k], g_row, gb->row(k), static_cast<size_t>(r));
            }
        }
    });
}

Var transpose(Var a) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    require_rank(av, 2, "transpose");
    Tensor out({av.cols(), av.rows()});
    for (int i = 0; i < av.rows(); ++i)
        for (int j = 0; j < av.cols(); ++j) out.at(j, i) = av.at(i, j);
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (int i = 0; i < g.rows(); ++i)
                for (int j = 0; j < g.cols(); ++j) ga->at(j, i) += g.at(i, j);
    });
}

Var relu(Var a) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& x = tp.value(ai);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (std::size_t i = 0; i < g.size(); ++i)
                if (x[i] > 0.0) (*ga)[i] += g[i];
    });
}

Var sigmoid(Var a) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double x = av[i];
        out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& y = tp.value(self);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Var tanh(Var a) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(av[i]);
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& y = tp.value(self);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Var log(Var a) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(av[i]);
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& x = tp.value(ai);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] / x[i];
    });
}

Var clamp(Var a, double lo, double hi) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(std::max(av[i], lo), hi);
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id, lo, hi](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& x = tp.value(ai);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (std::size_t i = 0; i < g.size(); ++i)
                if (x[i] > lo && x[i] < hi) (*ga)[i] += g[i];
    });
}

Var softmax_rows(Var a) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    if (av.rank() != 1 && av.rank() != 2) throw ConfigError("softmax: rank must be 1 or 2, got " + av.shape_str());
    const int rows = av.rank() == 2 ? av.rows() : 1;
    const int cols = av.rank() == 2 ? av.cols() : av.dim(0);
    Tensor out(av.shape());
    const auto& K = kernels::active();
    for (int r = 0; r < rows; ++r) {
        const double* x = av.data() + static_cast<size_t>(r) * cols;
        double* y = out.data() + static_cast<size_t>(r) * cols;
        double m = K.vmax(x, static_cast<size_t>(cols));
        double s = 0.0;
        for (int c = 0; c < cols; ++c) {
            y[c] = std::exp(x[c] - m);
            s += y[c];
        }
        K.scale(1.0 / s, y, static_cast<size_t>(cols));
    }
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id, rows, cols](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& y = tp.value(self);
        Tensor* ga = tp.grad_if_needed(ai);
        if (!ga) return;
        const auto& K2 = kernels::active();
        for (int r = 0; r < rows; ++r) {
            const double* gr = g.data() + static_cast<size_t>(r) * cols;
            const double* yr = y.data() + static_cast<size_t>(r) * cols;
            double* gar = ga->data() + static_cast<size_t>(r) * cols;
            double dotgy = K2.dot(gr, yr, static_cast<size_t>(cols));
            for (int c = 0; c < cols; ++c) gar[c] += yr[c] * (gr[c] - dotgy);
        }
    });
}

Var sum(Var a) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out = Tensor::scalar(kernels::active().vsum(av.data(), av.size()));
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        double g = tp.grad_accum(self)[0];
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += g;
    });
}

Var mean(Var a) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    const double inv = 1.0 / static_cast<double>(av.size());
    Tensor out = Tensor::scalar(kernels::active().vsum(av.data(), av.size()) * inv);
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id, inv](Tape& tp, int self) {
        double g = tp.grad_accum(self)[0] * inv;
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += g;
    });
}

Var pick(Var a, int flat_index) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    if (flat_index < 0 || static_cast<std::size_t>(flat_index) >= av.size())
        throw ConfigError("pick: index " + std::to_string(flat_index) + " out of range for " + av.shape_str());
    Tensor out = Tensor::scalar(av[static_cast<size_t>(flat_index)]);
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id, flat_index](Tape& tp, int self) {
        if (Tensor* ga = tp.grad_if_needed(ai)) (*ga)[static_cast<size_t>(flat_index)] += tp.grad_accum(self)[0];
    });
}

Var reshape(Var a, std::vector<int> shape) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    Tensor out(std::move(shape));
    if (out.size() != av.size())
        throw ConfigError("reshape: element count mismatch, " + av.shape_str() + " -> " + out.shape_str());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i];
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id](Tape& tp, int self) {
        if (Tensor* ga = tp.grad_if_needed(ai)) accum(*ga, tp.grad_accum(self));
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ConfigError("concat_cols: no inputs");
    Tape& t = *parts[0].tape;
    const int rows = t.value(parts[0].id).rows();
    int total = 0;
    bool ng = false;
    std::vector<int> ids;
    ids.reserve(parts.size());
    for (Var p : parts) {
        const Tensor& pv = t.value(p.id);
        require_rank(pv, 2, "concat_cols");
        if (pv.rows() != rows) throw ConfigError("concat_cols: row counts differ");
        total += pv.cols();
        ng = ng || t.needs_grad(p.id);
        ids.push_back(p.id);
    }
    Tensor out({rows, total});
    int off = 0;
    for (Var p : parts) {
        const Tensor& pv = t.value(p.id);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < pv.cols(); ++c) out.at(r, off + c) = pv.at(r, c);
        off += pv.cols();
    }
    return t.record(std::move(out), ng, [ids = std::move(ids), rows](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        int off2 = 0;
        for (int id : ids) {
            const int c = tp.value(id).cols();
            if (Tensor* ga = tp.grad_if_needed(id))
                for (int r = 0; r < rows; ++r)
                    for (int j = 0; j < c; ++j) ga->at(r, j) += g.at(r, off2 + j);
            off2 += c;
        }
    });
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ConfigError("concat_rows: no inputs");
    Tape& t = *parts[0].tape;
    const int cols = t.value(parts[0].id).cols();
    int total = 0;
    bool ng = false;
    std::vector<int> ids;
    ids.reserve(parts.size());
    for (Var p : parts) {
        const Tensor& pv = t.value(p.id);
        require_rank(pv, 2, "concat_rows");
        if (pv.cols() != cols) throw ConfigError("concat_rows: column counts differ");
        total += pv.rows();
        ng = ng || t.needs_grad(p.id);
        ids.push_back(p.id);
    }
    Tensor out({total, cols});
    int off = 0;
    for (Var p : parts) {
        const Tensor& pv = t.value(p.id);
        for (int r = 0; r < pv.rows(); ++r)
            for (int c = 0; c < cols; ++c) out.at(off + r, c) = pv.at(r, c);
        off += pv.rows();
    }
    return t.record(std::move(out), ng, [ids = std::move(ids), cols](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        int off2 = 0;
        for (int id : ids) {
            const int rws = tp.value(id).rows();
            if (Tensor* ga = tp.grad_if_needed(id))
                for (int r = 0; r < rws; ++r)
                    kernels::active().axpy(1.0, g.row(off2 + r), ga->row(r), static_cast<size_t>(cols));
            off2 += rws;
        }
    });
}

Var slice_cols(Var a, int c0, int c1) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    require_rank(av, 2, "slice_cols");
    if (c0 < 0 || c1 > av.cols() || c0 >= c1)
        throw ConfigError("slice_cols: bad range [" + std::to_string(c0) + "," + std::to_string(c1) + ") for " +
                          av.shape_str());
    Tensor out({av.rows(), c1 - c0});
    for (int r = 0; r < av.rows(); ++r)
        for (int c = c0; c < c1; ++c) out.at(r, c - c0) = av.at(r, c);
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id, c0](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (int r = 0; r < g.rows(); ++r)
                for (int c = 0; c < g.cols(); ++c) ga->at(r, c0 + c) += g.at(r, c);
    });
}

Var slice_rows(Var a, int r0, int r1) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    require_rank(av, 2, "slice_rows");
    if (r0 < 0 || r1 > av.rows() || r0 >= r1)
        throw ConfigError("slice_rows: bad range [" + std::to_string(r0) + "," + std::to_string(r1) + ") for " +
                          av.shape_str());
    Tensor out({r1 - r0, av.cols()});
    for (int r = r0; r < r1; ++r)
        for (int c = 0; c < av.cols(); ++c) out.at(r - r0, c) = av.at(r, c);
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id, r0](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (int r = 0; r < g.rows(); ++r)
                kernels::active().axpy(1.0, g.row(r), ga->row(r0 + r), static_cast<size_t>(g.cols()));
    });
}

Var tile_rows(Var a, int n) {
    Tape& t = *a.tape;
    const Tensor& av = t.value(a.id);
    require_rank(av, 2, "tile_rows");
    if (av.rows() != 1) throw ConfigError("tile_rows: input must be 1 x d, got " + av.shape_str());
    Tensor out({n, av.cols()});
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < av.cols(); ++c) out.at(r, c) = av.at(0, c);
    return t.record(std::move(out), t.needs_grad(a.id), [ai = a.id, n](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* ga = tp.grad_if_needed(ai))
            for (int r = 0; r < n; ++r)
                kernels::active().axpy(1.0, g.row(r), ga->row(0), static_cast<size_t>(g.cols()));
    });
}

namespace {
int same_pad(const Tensor& w, const char* op) {
    const int k = w.dim(0);
    if (k % 2 == 0) throw ConfigError(std::string(op) + ": kernel size must be odd, got " + std::to_string(k));
    return (k - 1) / 2;
}
}  // namespace

Var conv1d(Var x, Var w, Var bias) {
    Tape& t = same_tape(x, w, "conv1d");
    const Tensor& xv = t.value(x.id);
    const Tensor& wv = t.value(w.id);
    require_rank(xv, 2, "conv1d");
    require_rank(wv, 3, "conv1d");
    if (wv.dim(1) != xv.cols())
        throw ConfigError("conv1d: input channels " + xv.shape_str() + " vs kernel " + wv.shape_str());
    const int n = xv.rows(), din = xv.cols(), k = wv.dim(0), dout = wv.dim(2);
    const int pad = same_pad(wv, "conv1d");
    Tensor out({n, dout});
    const auto& K = kernels::active();
    for (int ti = 0; ti < n; ++ti) {
        double* orow = out.row(ti);
        for (int j = 0; j < k; ++j) {
            const int s = ti + j - pad;
            if (s < 0 || s >= n) continue;
            const double* xrow = xv.row(s);
            const double* wslab = wv.data() + static_cast<size_t>(j) * din * dout;
            for (int ci = 0; ci < din; ++ci)
                K.axpy(xrow[ci], wslab + static_cast<size_t>(ci) * dout, orow, static_cast<size_t>(dout));
        }
    }
    bool ng = t.needs_grad(x.id) || t.needs_grad(w.id);
    if (bias.valid()) {
        const Tensor& bv = t.value(bias.id);
        if (bv.rank() != 1 || bv.dim(0) != dout) throw ConfigError("conv1d: bias shape " + bv.shape_str());
        for (int ti = 0; ti < n; ++ti) K.vadd(out.row(ti), bv.data(), out.row(ti), static_cast<size_t>(dout));
        ng = ng || t.needs_grad(bias.id);
    }
    const int bias_id = bias.valid() ? bias.id : -1;
    return t.record(std::move(out), ng, [xi = x.id, wi = w.id, bias_id, n, din, k, dout, pad](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& xv2 = tp.value(xi);
        const Tensor& wv2 = tp.value(wi);
        const auto& K2 = kernels::active();
        Tensor* gx = tp.grad_if_needed(xi);
        Tensor* gw = tp.grad_if_needed(wi);
        for (int ti = 0; ti < n; ++ti) {
            const double* grow = g.row(ti);
            for (int j = 0; j < k; ++j) {
                const int s = ti + j - pad;
                if (s < 0 || s >= n) continue;
                const double* wslab = wv2.data() + static_cast<size_t>(j) * din * dout;
                if (gx) {
                    double* gxrow = gx->row(s);
                    for (int ci = 0; ci < din; ++ci)
                        gxrow[ci] += K2.dot(grow, wslab + static_cast<size_t>(ci) * dout, static_cast<size_t>(dout));
                }
                if (gw) {
                    const double* xrow = xv2.row(s);
                    double* gwslab = gw->data() + static_cast<size_t>(j) * din * dout;
                    for (int ci = 0; ci < din; ++ci)
                        K2.axpy(xrow[ci], grow, gwslab + static_cast<size_t>(ci) * dout, static_cast<size_t>(dout));
                }
            }
            if (bias_id >= 0)
                if (Tensor* gb = tp.grad_if_needed(bias_id))
                    K2.axpy(1.0, grow, gb->data(), static_cast<size_t>(dout));
        }
    });
}

Var conv1d_depthwise(Var x, Var w, Var bias) {
    Tape& t = same_tape(x, w, "conv1d_depthwise");
    const Tensor& xv = t.value(x.id);
    const Tensor& wv = t.value(w.id);
    require_rank(xv, 2, "conv1d_depthwise");
    require_rank(wv, 2, "conv1d_depthwise");
    if (wv.cols() != xv.cols())
        throw ConfigError("conv1d_depthwise: channels " + xv.shape_str() + " vs kernel " + wv.shape_str());
    const int n = xv.rows(), d = xv.cols(), k = wv.rows();
    if (k % 2 == 0) throw ConfigError("conv1d_depthwise: kernel size must be odd, got " + std::to_string(k));
    const int pad = (k - 1) / 2;
    Tensor out({n, d});
    const auto& K = kernels::active();
    for (int ti = 0; ti < n; ++ti) {
        double* orow = out.row(ti);
        for (int j = 0; j < k; ++j) {
            const int s = ti + j - pad;
            if (s < 0 || s >= n) continue;
            K.vmadd(xv.row(s), wv.row(j), orow, static_cast<size_t>(d));
        }
    }
    bool ng = t.needs_grad(x.id) || t.needs_grad(w.id);
    if (bias.valid()) {
        const Tensor& bv = t.value(bias.id);
        if (bv.rank() != 1 || bv.dim(0) != d) throw ConfigError("conv1d_depthwise: bias shape " + bv.shape_str());
        for (int ti = 0; ti < n; ++ti) K.vadd(out.row(ti), bv.data(), out.row(ti), static_cast<size_t>(d));
        ng = ng || t.needs_grad(bias.id);
    }
    const int bias_id = bias.valid() ? bias.id : -1;
    return t.record(std::move(out), ng, [xi = x.id, wi = w.id, bias_id, n, d, k, pad](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& xv2 = tp.value(xi);
        const Tensor& wv2 = tp.value(wi);
        const auto& K2 = kernels::active();
        Tensor* gx = tp.grad_if_needed(xi);
        Tensor* gw = tp.grad_if_needed(wi);
        for (int ti = 0; ti < n; ++ti) {
            const double* grow = g.row(ti);
            for (int j = 0; j < k; ++j) {
                const int s = ti + j - pad;
                if (s < 0 || s >= n) continue;
                if (gx) K2.vmadd(grow, wv2.row(j), gx->row(s), static_cast<size_t>(d));
                if (gw) K2.vmadd(grow, xv2.row(s), gw->row(j), static_cast<size_t>(d));
            }
            if (bias_id >= 0)
                if (Tensor* gb = tp.grad_if_needed(bias_id)) K2.axpy(1.0, grow, gb->data(), static_cast<size_t>(d));
        }
    });
}

Var maxpool2(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x.id);
    require_rank(xv, 2, "maxpool2");
    const int n = xv.rows(), d = xv.cols();
    if (n % 2 != 0) throw ConfigError("maxpool2: row count must be even, got " + std::to_string(n));
    Tensor out({n / 2, d});
    for (int r = 0; r < n / 2; ++r)
        for (int c = 0; c < d; ++c) out.at(r, c) = std::max(xv.at(2 * r, c), xv.at(2 * r + 1, c));
    return t.record(std::move(out), t.needs_grad(x.id), [xi = x.id, n, d](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& xv2 = tp.value(xi);
        Tensor* gx = tp.grad_if_needed(xi);
        if (!gx) return;
        // Ties route to the earlier row for determinism.
        for (int r = 0; r < n / 2; ++r)
            for (int c = 0; c < d; ++c) {
                if (xv2.at(2 * r, c) >= xv2.at(2 * r + 1, c)) gx->at(2 * r, c) += g.at(r, c);
                else gx->at(2 * r + 1, c) += g.at(r, c);
            }
    });
}

Var upsample2(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x.id);
    require_rank(xv, 2, "upsample2");
    const int n = xv.rows(), d = xv.cols();
    Tensor out({2 * n, d});
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) {
            out.at(2 * r, c) = xv.at(r, c);
            out.at(2 * r + 1, c) = xv.at(r, c);
        }
    return t.record(std::move(out), t.needs_grad(x.id), [xi = x.id, n, d](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        Tensor* gx = tp.grad_if_needed(xi);
        if (!gx) return;
        const auto& K2 = kernels::active();
        for (int r = 0; r < n; ++r) {
            K2.axpy(1.0, g.row(2 * r), gx->row(r), static_cast<size_t>(d));
            K2.axpy(1.0, g.row(2 * r + 1), gx->row(r), static_cast<size_t>(d));
        }
    });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    Tape& t = same_tape(x, gamma, "layer_norm");
    const Tensor& xv = t.value(x.id);
    const Tensor& gv = t.value(gamma.id);
    const Tensor& bv = t.value(beta.id);
    require_rank(xv, 2, "layer_norm");
    const int n = xv.rows(), d = xv.cols();
    if (gv.rank() != 1 || gv.dim(0) != d || bv.rank() != 1 || bv.dim(0) != d)
        throw ConfigError("layer_norm: gain/bias must be {d}, got " + gv.shape_str() + ", " + bv.shape_str());
    Tensor out({n, d});
    const auto& K = kernels::active();
    for (int r = 0; r < n; ++r) {
        const double* xr = xv.row(r);
        double* yr = out.row(r);
        const double mu = K.vsum(xr, static_cast<size_t>(d)) / d;
        double var = 0.0;
        for (int c = 0; c < d; ++c) var += (xr[c] - mu) * (xr[c] - mu);
        var /= d;
        const double inv_s = 1.0 / std::sqrt(var + eps);
        for (int c = 0; c < d; ++c) yr[c] = gv[static_cast<size_t>(c)] * (xr[c] - mu) * inv_s + bv[static_cast<size_t>(c)];
    }
    bool ng = t.needs_grad(x.id) || t.needs_grad(gamma.id) || t.needs_grad(beta.id);
    return t.record(std::move(out), ng, [xi = x.id, gi = gamma.id, bi = beta.id, n, d, eps](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        const Tensor& xv2 = tp.value(xi);
        const Tensor& gv2 = tp.value(gi);
        Tensor* gx = tp.grad_if_needed(xi);
        Tensor* gg = tp.grad_if_needed(gi);
        Tensor* gb = tp.grad_if_needed(bi);
        std::vector<double> xhat(static_cast<size_t>(d)), h(static_cast<size_t>(d));
        const auto& K2 = kernels::active();
        for (int r = 0; r < n; ++r) {
            const double* xr = xv2.row(r);
            const double* gr = g.row(r);
            const double mu = K2.vsum(xr, static_cast<size_t>(d)) / d;
            double var = 0.0;
            for (int c = 0; c < d; ++c) var += (xr[c] - mu) * (xr[c] - mu);
            var /= d;
            const double inv_s = 1.0 / std::sqrt(var + eps);
            for (int c = 0; c < d; ++c) {
                xhat[static_cast<size_t>(c)] = (xr[c] - mu) * inv_s;
                h[static_cast<size_t>(c)] = gr[c] * gv2[static_cast<size_t>(c)];
            }
            if (gg)
                for (int c = 0; c < d; ++c) (*gg)[static_cast<size_t>(c)] += gr[c] * xhat[static_cast<size_t>(c)];
            if (gb) K2.axpy(1.0, gr, gb->data(), static_cast<size_t>(d));
            if (gx) {
                const double mean_h = K2.vsum(h.data(), static_cast<size_t>(d)) / d;
                const double mean_hx = K2.dot(h.data(), xhat.data(), static_cast<size_t>(d)) / d;
                double* gxr = gx->row(r);
                for (int c = 0; c < d; ++c)
                    gxr[c] += (h[static_cast<size_t>(c)] - mean_h - xhat[static_cast<size_t>(c)] * mean_hx) * inv_s;
            }
        }
    });
}

Var sliding_mean(Var x, int win) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x.id);
    require_rank(xv, 1, "sliding_mean");
    const int w = xv.dim(0);
    if (win < 1 || win > w)
        throw ConfigError("sliding_mean: window " + std::to_string(win) + " does not fit length " + std::to_string(w));
    const int m = w - win + 1;
    Tensor out({m});
    double acc = 0.0;
    for (int i = 0; i < win; ++i) acc += xv[static_cast<size_t>(i)];
    const double inv = 1.0 / win;
    out[0] = acc * inv;
    for (int i = 1; i < m; ++i) {
        acc += xv[static_cast<size_t>(i + win - 1)] - xv[static_cast<size_t>(i - 1)];
        out[static_cast<size_t>(i)] = acc * inv;
    }
    return t.record(std::move(out), t.needs_grad(x.id), [xi = x.id, win, m, inv](Tape& tp, int self) {
        const Tensor& g = tp.grad_accum(self);
        if (Tensor* gx = tp.grad_if_needed(xi))
            for (int i = 0; i < m; ++i) {
                const double gi = g[static_cast<size_t>(i)] * inv;
                for (int j = 0; j < win; ++j) (*gx)[static_cast<size_t>(i + j)] += gi;
            }
    });
}

}  // namespace tg::ad
