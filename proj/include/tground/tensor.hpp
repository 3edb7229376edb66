// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "tground/common.hpp"

namespace tg {

// Dense row-major array of f64. Rank 0 is a scalar, rank 1 a vector,
// rank 2 a (rows x cols) matrix, rank 3 is used for conv kernels.
// All training math runs in f64; feature files hold f32 and are widened
// on load.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double v);
    static Tensor scalar(double v);
    static Tensor vector(std::vector<double> v);
    static Tensor matrix(int rows, int cols, std::vector<double> v);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    std::size_t size() const { return data_.size(); }

    // Rank-2 accessors; rows()/cols() assert rank in debug builds only.
    int rows() const { return shape_[0]; }
    int cols() const { return shape_[1]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(int r) { return data_.data() + static_cast<size_t>(r) * shape_.back(); }
    const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * shape_.back(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
    double at(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;
    void fill(double v);

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

// Throws ConfigError naming both shapes when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace tg
