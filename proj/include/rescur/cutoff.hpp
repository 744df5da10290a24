#pragma once

#include <functional>
#include <string>

#include "rescur/jets.hpp"
#include "rescur/profiles.hpp"

namespace rescur {

enum class CutoffKind { rational, exponential, smoothstep, custom };

struct invariant_violation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Regularizing cutoff χ on [0, ∞]: χ(0) = 0, χ(∞) = 1, with χ̃(t) = t χ'(t)
/// bounded and vanishing at 0 (χ' ∈ O(1/t²) at ∞). χ̃ is the factor produced
/// when ∂̄ falls on χ(|f|²/ε).
struct CutoffSpec {
    CutoffKind kind = CutoffKind::rational;
    std::string name = "rational";
    std::function<double(double)> chi;
    std::function<double(double)> chi_tilde;

    /// Invariants checked on a log grid t ∈ [1e-8, 1e8].
    void validate() const {
        if (!chi || !chi_tilde) throw invariant_violation("cutoff lacks evaluators");
        if (chi(0.0) != 0.0) throw invariant_violation("chi(0) must be 0");
        if (chi(1e8) < 1.0 - 1e-7) throw invariant_violation("chi(1e8) must exceed 1 - 1e-7");
        double prev_t = 0.0;
        (void)prev_t;
        for (int i = 0; i <= 256; ++i) {
            const double t = std::pow(10.0, -8.0 + 16.0 * i / 256.0);
            const double c = chi(t), ct = chi_tilde(t);
            if (!std::isfinite(c) || !std::isfinite(ct))
                throw invariant_violation("cutoff evaluator not finite on the grid");
            if (c < -1e-12 || c > 1.0 + 1e-9)
                throw invariant_violation("chi must stay within [0, 1]");
            if (std::abs(ct) > 50.0)
                throw invariant_violation("chi_tilde = t chi' must stay bounded (chi' ∈ O(1/t²))");
        }
        if (std::abs(chi_tilde(1e-8)) > 1e-4)
            throw invariant_violation("chi_tilde must vanish at 0");
        if (std::abs(chi_tilde(1e8)) > 1e-4)
            throw invariant_violation("chi_tilde must vanish at infinity");
    }

    /// The cutoff as a radial profile generator: values only, the reductions
    /// never differentiate the cutoffs themselves.
    ProfilePtr as_profile(bool tilde) const {
        auto f = tilde ? chi_tilde : chi;
        return Profile1D::radial_custom([f](int t, double u) {
            if (t != 0) throw std::invalid_argument("cutoff factors carry no derivatives");
            return f(u);
        }, std::numeric_limits<double>::infinity(), 0);
    }
};

inline CutoffSpec make_cutoff(CutoffKind kind, double t_lo = 0.5, double t_hi = 2.0) {
    CutoffSpec c;
    c.kind = kind;
    switch (kind) {
        case CutoffKind::rational:
            c.name = "rational";
            c.chi = [](double t) { return t / (1.0 + t); };
            c.chi_tilde = [](double t) { return t / ((1.0 + t) * (1.0 + t)); };
            break;
        case CutoffKind::exponential:
            c.name = "exponential";
            c.chi = [](double t) { return -std::expm1(-t); };
            c.chi_tilde = [](double t) { return t * std::exp(-t); };
            break;
        case CutoffKind::smoothstep: {
            if (!(0.0 <= t_lo && t_lo < t_hi))
                throw std::invalid_argument("smoothstep cutoff needs 0 <= t_lo < t_hi");
            c.name = "smoothstep";
            const double w = t_hi - t_lo;
            c.chi = [t_lo, w](double t) {
                Jet s = smoothstep_jet((t - t_lo) / w);
                return s.d[0];
            };
            c.chi_tilde = [t_lo, w](double t) {
                Jet s = smoothstep_jet((t - t_lo) / w);
                return t * s.d[1] / w;
            };
            break;
        }
        case CutoffKind::custom:
            throw std::invalid_argument("use make_cutoff_custom for user-supplied evaluators");
    }
    c.validate();
    return c;
}

inline CutoffSpec make_cutoff_custom(std::function<double(double)> chi,
                                     std::function<double(double)> chi_tilde,
                                     std::string name = "custom") {
    CutoffSpec c;
    c.kind = CutoffKind::custom;
    c.name = std::move(name);
    c.chi = std::move(chi);
    c.chi_tilde = std::move(chi_tilde);
    c.validate();
    return c;
}

} // namespace rescur
