// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tg::kernels {

// The f64 inner loops everything above is built from. One scalar reference
// implementation plus SIMD variants selected once at startup; all variants
// are equivalence-tested against the scalar one.
struct KernelTable {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
    void (*scale)(double alpha, double* x, std::size_t n);                  // x *= alpha
    void (*vadd)(const double* a, const double* b, double* out, std::size_t n);
    void (*vsub)(const double* a, const double* b, double* out, std::size_t n);
    void (*vmul)(const double* a, const double* b, double* out, std::size_t n);
    void (*vmadd)(const double* a, const double* b, double* out, std::size_t n);  // out += a*b
    double (*vsum)(const double* a, std::size_t n);
    double (*vmax)(const double* a, std::size_t n);  // n >= 1
};

const KernelTable& scalar_table();

// Null when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Active table: best available variant, overridable by the TGROUND_KERNELS
// environment variable ("scalar", "avx2", "neon", "auto").
const KernelTable& active();

// Test hook. Throws ConfigError for names that are not usable here.
void force(const std::string& name);

std::vector<const KernelTable*> available_tables();

}  // namespace tg::kernels
