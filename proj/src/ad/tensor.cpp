// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#include "tground/tensor.hpp"

#include <cmath>
#include <sstream>

namespace tg {

namespace {
std::size_t checked_count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 0) throw ConfigError("tensor dimension must be non-negative, got " + std::to_string(d));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)), data_(checked_count(shape_), 0.0) {}

Tensor Tensor::full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t{std::vector<int>{}};
    t.data_[0] = v;
    return t;
}

Tensor Tensor::vector(std::vector<double> v) {
    Tensor t;
    t.shape_ = {static_cast<int>(v.size())};
    t.data_ = std::move(v);
    return t;
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> v) {
    if (v.size() != static_cast<std::size_t>(rows) * cols)
        throw ConfigError("matrix literal: " + std::to_string(v.size()) + " values for " + std::to_string(rows) +
                          "x" + std::to_string(cols));
    Tensor t;
    t.shape_ = {rows, cols};
    t.data_ = std::move(v);
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
    os << "]";
    return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw ConfigError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace tg
