// Copyright 2026 the tground authors
// SPDX-License-Identifier: Apache-2.0

#include "tground/kernels.hpp"

#include <cstdlib>

#include "tground/common.hpp"

namespace tg::kernels {

// Defined in the per-ISA TUs; null when not compiled for this target.
const KernelTable* avx2_table_impl();
const KernelTable* neon_table_impl();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* pick_best() {
    if (const KernelTable* t = avx2_table()) return t;
    if (const KernelTable* t = neon_table()) return t;
    return &scalar_table();
}

const KernelTable* resolve(const std::string& name) {
    if (name == "auto") return pick_best();
    if (name == "scalar") return &scalar_table();
    if (name == "avx2") {
        if (const KernelTable* t = avx2_table()) return t;
        throw ConfigError("kernels: avx2 not available on this machine");
    }
    if (name == "neon") {
        if (const KernelTable* t = neon_table()) return t;
        throw ConfigError("kernels: neon not available on this machine");
    }
    throw ConfigError("kernels: unknown variant '" + name + "' (use scalar|avx2|neon|auto)");
}

const KernelTable* initial() {
    if (const char* env = std::getenv("TGROUND_KERNELS")) return resolve(env);
    return pick_best();
}

const KernelTable*& active_slot() {
    static const KernelTable* slot = initial();
    return slot;
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable* t = cpu_has_avx2() ? avx2_table_impl() : nullptr;
    return t;
}

const KernelTable* neon_table() { return neon_table_impl(); }

const KernelTable& active() { return *active_slot(); }

void force(const std::string& name) { active_slot() = resolve(name); }

std::vector<const KernelTable*> available_tables() {
    std::vector<const KernelTable*> out{&scalar_table()};
    if (const KernelTable* t = avx2_table()) out.push_back(t);
    if (const KernelTable* t = neon_table()) out.push_back(t);
    return out;
}

}  // namespace tg::kernels
