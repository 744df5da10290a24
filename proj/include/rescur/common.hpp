#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rescur {

using complexd = std::complex<double>;

inline constexpr const char* version_string = "0.1.0";

/// Value of dz_1∧..∧dz_n∧dz̄_1∧..∧dz̄_n против Lebesgue measure on C^n ≅ R^{2n}.
/// Fixed once for the whole library: dz∧dz̄ = -2i dA per variable, interleaving
/// parity (-1)^{n(n-1)/2}.
inline complexd volume_factor(int n) {
    complexd f{1.0, 0.0};
    for (int k = 0; k < n; ++k) f *= complexd{0.0, -2.0};
    if (((n * (n - 1) / 2) % 2) != 0) f = -f;
    return f;
}

/// Pairwise (cascade) summation: deterministic reduction order regardless of
/// how the values were produced.
inline complexd pairwise_sum(std::span<const complexd> v) {
    if (v.empty()) return {};
    if (v.size() == 1) return v[0];
    if (v.size() <= 8) {
        complexd s{};
        for (auto x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

inline double pairwise_sum(std::span<const double> v) {
    if (v.empty()) return 0.0;
    if (v.size() == 1) return v[0];
    if (v.size() <= 8) {
        double s = 0.0;
        for (auto x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct budget_exceeded : std::runtime_error {
    complexd best_estimate;
    double error_bound;
    budget_exceeded(const std::string& what, complexd est, double err)
        : std::runtime_error(what), best_estimate(est), error_bound(err) {}
};

} // namespace rescur
