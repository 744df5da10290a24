#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rescur/common.hpp"

namespace rescur {

/// Multi-index of non-negative integers; length = ambient dimension.
using ExponentVector = std::vector<int>;

inline void check_exponents(const ExponentVector& e) {
    for (int x : e)
        if (x < 0) throw std::invalid_argument("exponent vector must be non-negative");
}

inline ExponentVector ev_zero(int n) { return ExponentVector(static_cast<std::size_t>(n), 0); }

inline ExponentVector ev_unit(int n, int i) {
    ExponentVector e = ev_zero(n);
    e[static_cast<std::size_t>(i)] = 1;
    return e;
}

inline ExponentVector ev_add(const ExponentVector& a, const ExponentVector& b) {
    if (a.size() != b.size()) throw dimension_error("exponent vectors of different length");
    ExponentVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline bool ev_is_zero(const ExponentVector& a) {
    return std::all_of(a.begin(), a.end(), [](int x) { return x == 0; });
}

inline int ev_total(const ExponentVector& a) {
    int s = 0;
    for (int x : a) s += x;
    return s;
}

// ---------------------------------------------------------------------------
// Index subsets of {0..n-1} as bitmasks. Canonical order of a dz_K basis
// element is ascending indices; all signs below are relative to that.
// ---------------------------------------------------------------------------

using IndexSet = std::uint32_t;

inline int set_size(IndexSet s) { return std::popcount(s); }

inline bool set_contains(IndexSet s, int i) { return (s >> i) & 1u; }

/// Sign of sorting dz_K ∧ dz_L into dz_{K∪L}; K, L disjoint.
/// Inversions = Σ_{k∈K} #{l∈L : l < k}.
inline int merge_sign(IndexSet K, IndexSet L) {
    int inv = 0;
    for (IndexSet k = K; k; k &= k - 1) {
        const int i = std::countr_zero(k);
        inv += std::popcount(L & ((1u << i) - 1u));
    }
    return (inv % 2) ? -1 : 1;
}

/// Sign of inserting dz_i in front of dz_K into sorted position; i ∉ K.
inline int insert_sign(int i, IndexSet K) {
    return (std::popcount(K & ((1u << i) - 1u)) % 2) ? -1 : 1;
}

inline std::vector<int> set_to_indices(IndexSet s) {
    std::vector<int> v;
    for (IndexSet k = s; k; k &= k - 1) v.push_back(std::countr_zero(k));
    return v;
}

inline IndexSet indices_to_set(const std::vector<int>& v) {
    IndexSet s = 0;
    for (int i : v) {
        if (i < 0 || i >= 31) throw std::invalid_argument("index out of range");
        if (set_contains(s, i)) throw std::invalid_argument("repeated index");
        s |= (1u << i);
    }
    return s;
}

/// All subsets of `s` with exactly `m` elements, in lexicographic order.
inline std::vector<IndexSet> subsets_of_size(IndexSet s, int m) {
    std::vector<int> idx = set_to_indices(s);
    std::vector<IndexSet> out;
    const int n = static_cast<int>(idx.size());
    if (m < 0 || m > n) return out;
    std::vector<int> pick(static_cast<std::size_t>(m));
    // standard combination enumeration
    for (int i = 0; i < m; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
        IndexSet t = 0;
        for (int p : pick) t |= (1u << idx[static_cast<std::size_t>(p)]);
        out.push_back(t);
        int i = m - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - m + i) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < m; ++j)
            pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

} // namespace rescur
