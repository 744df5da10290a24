#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace rescur {

/// Truncated Taylor arithmetic over the reals: value plus derivatives up to
/// order N at a point. Used to get high-order derivatives of the exp-based
/// smoothstep profiles, whose closed forms are unwieldy.
template <std::size_t N>
struct RealJet {
    std::array<double, N + 1> d{}; // d[k] = f^{(k)}(x)

    static RealJet constant(double c) {
        RealJet j;
        j.d[0] = c;
        return j;
    }
    static RealJet variable(double x) {
        RealJet j;
        j.d[0] = x;
        if constexpr (N >= 1) j.d[1] = 1.0;
        return j;
    }

    friend RealJet operator+(const RealJet& a, const RealJet& b) {
        RealJet r;
        for (std::size_t k = 0; k <= N; ++k) r.d[k] = a.d[k] + b.d[k];
        return r;
    }
    friend RealJet operator-(const RealJet& a, const RealJet& b) {
        RealJet r;
        for (std::size_t k = 0; k <= N; ++k) r.d[k] = a.d[k] - b.d[k];
        return r;
    }
    friend RealJet operator-(const RealJet& a) {
        RealJet r;
        for (std::size_t k = 0; k <= N; ++k) r.d[k] = -a.d[k];
        return r;
    }

    // Leibniz on derivative coefficients (not Taylor coefficients)
    friend RealJet operator*(const RealJet& a, const RealJet& b) {
        RealJet r;
        for (std::size_t k = 0; k <= N; ++k) {
            double s = 0.0;
            double binom = 1.0;
            for (std::size_t j = 0; j <= k; ++j) {
                s += binom * a.d[j] * b.d[k - j];
                binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
            }
            r.d[k] = s;
        }
        return r;
    }

    friend RealJet operator/(const RealJet& a, const RealJet& b) {
        // q = a/b solved from (q*b)^{(k)} = a^{(k)} order by order
        std::array<std::array<double, N + 1>, N + 1> C{};
        for (std::size_t i = 0; i <= N; ++i) {
            C[i][0] = 1.0;
            for (std::size_t j = 1; j <= i; ++j)
                C[i][j] = C[i - 1][j - 1] + ((j <= i - 1) ? C[i - 1][j] : 0.0);
        }
        RealJet q;
        q.d[0] = a.d[0] / b.d[0];
        for (std::size_t k = 1; k <= N; ++k) {
            double s = a.d[k];
            for (std::size_t j = 0; j < k; ++j) s -= C[k][j] * q.d[j] * b.d[k - j];
            q.d[k] = s / b.d[0];
        }
        return q;
    }
};

/// exp of a jet via the ODE (e^f)' = f' e^f, expanded with Leibniz.
template <std::size_t N>
RealJet<N> jet_exp(const RealJet<N>& f) {
    RealJet<N> r;
    r.d[0] = std::exp(f.d[0]);
    std::array<std::array<double, N + 1>, N + 1> C{};
    for (std::size_t i = 0; i <= N; ++i) {
        C[i][0] = 1.0;
        for (std::size_t j = 1; j <= i; ++j)
            C[i][j] = C[i - 1][j - 1] + ((j <= i - 1) ? C[i - 1][j] : 0.0);
    }
    // r^{(k)} = (f' r)^{(k-1)} = sum_j C(k-1,j) f^{(j+1)} r^{(k-1-j)}
    for (std::size_t k = 1; k <= N; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j <= k - 1; ++j) s += C[k - 1][j] * f.d[j + 1] * r.d[k - 1 - j];
        r.d[k] = s;
    }
    return r;
}

/// Compose: derivatives of f∘v at u given f's derivatives at v(u) and the jet
/// of v. Works through truncated Taylor series.
template <std::size_t N>
RealJet<N> jet_compose(const std::array<double, N + 1>& f_derivs, const RealJet<N>& v) {
    // Taylor coefficients of v around its base point, constant term dropped
    std::array<double, N + 1> vt{};
    double fact = 1.0;
    for (std::size_t k = 1; k <= N; ++k) {
        fact *= static_cast<double>(k);
        vt[k] = v.d[k] / fact;
    }
    // Horner-free accumulation of sum_j f^{(j)}/j! * (v - v0)^j as series
    std::array<double, N + 1> acc{}; // result Taylor coefficients
    std::array<double, N + 1> pow{};
    pow[0] = 1.0;
    double jfact = 1.0;
    for (std::size_t j = 0; j <= N; ++j) {
        if (j > 0) {
            jfact *= static_cast<double>(j);
            // pow *= vt (truncated product), vt has zero constant term
            std::array<double, N + 1> np{};
            for (std::size_t a = 0; a + 1 <= N; ++a) {
                if (pow[a] == 0.0) continue;
                for (std::size_t b = 1; a + b <= N; ++b) np[a + b] += pow[a] * vt[b];
            }
            pow = np;
        }
        for (std::size_t k = 0; k <= N; ++k) acc[k] += f_derivs[j] / jfact * pow[k];
    }
    RealJet<N> r;
    fact = 1.0;
    for (std::size_t k = 0; k <= N; ++k) {
        if (k > 0) fact *= static_cast<double>(k);
        r.d[k] = acc[k] * fact;
    }
    return r;
}

inline constexpr std::size_t kMaxRadialDeriv = 8;
using Jet = RealJet<kMaxRadialDeriv>;

/// Smoothstep s(x) = e(x)/(e(x)+e(1-x)) with e(x) = exp(-1/x); s ≡ 0 for
/// x ≤ 0, ≡ 1 for x ≥ 1, strictly increasing between. Returns derivatives
/// 0..kMaxRadialDeriv at x.
inline Jet smoothstep_jet(double x) {
    Jet r{};
    if (x <= 0.0) return r; // all zero
    if (x >= 1.0) {
        r.d[0] = 1.0;
        return r;
    }
    Jet jx = Jet::variable(x);
    Jet e = jet_exp(Jet::constant(-1.0) / jx);
    Jet eb = jet_exp(Jet::constant(-1.0) / (Jet::constant(1.0) - jx));
    return e / (e + eb);
}

} // namespace rescur
