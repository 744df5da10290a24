#pragma once

#include <cmath>
#include <map>
#include <memory>

#include "rescur/common.hpp"
#include "rescur/jets.hpp"

namespace rescur {

/// A term of the Wirtinger-derivative expansion of a profile:
/// coef · (w-c)^a · (w̄-c̄)^b · f^{(t)}(|w-c|²).
struct ProfileExpTerm {
    int t = 0;
    int a = 0;
    int b = 0;
    complexd coef{1.0, 0.0};
};

enum class ProfileKind {
    constant_one,       // ≡ 1 (for purely polynomial data)
    gaussian_bump,      // A · exp(-|w-c|²/r²)
    poly_bump,          // P(w-c, conj) · exp(-|w-c|²/r²)
    plateau_bump,       // radial: 1 on |w| ≤ r_in, 0 off |w| ≥ r_out
    plateau_complement, // 1 - plateau(1/|w|): the plateau transported by w ↦ 1/w
    radial_custom,      // user-supplied radial generator f(u), u = |w|²
};

/// One-variable smooth profile with exact-closed-form Wirtinger derivatives of
/// any order. Profiles are the smooth building blocks of test forms; the
/// plateau kinds are the partition-of-unity pieces. A profile may be flagged
/// as a Wirtinger derivative of its parent (base_dw/base_dwbar), which is how
/// "the data is ∂ϕ/∂w̄ of a stored ϕ" is represented structurally.
class Profile1D {
public:
    ProfileKind kind = ProfileKind::gaussian_bump;
    complexd center{0.0, 0.0};
    double radius = 1.0;        // gaussian scale r
    double r_inner = 1.0;       // plateau radii
    double r_outer = 2.0;
    double amplitude = 1.0;
    // polynomial part of poly_bump: map (a,b) -> coefficient of (w-c)^a (w̄-c̄)^b
    std::map<std::pair<int, int>, complexd> poly;
    int base_dw = 0;
    int base_dwbar = 0;

    static std::shared_ptr<const Profile1D> gaussian(double amplitude, double radius,
                                                     complexd center = {0.0, 0.0}) {
        auto p = std::make_shared<Profile1D>();
        p->kind = ProfileKind::gaussian_bump;
        p->amplitude = amplitude;
        p->radius = radius;
        p->center = center;
        return p;
    }

    static std::shared_ptr<const Profile1D> poly_gaussian(
        std::map<std::pair<int, int>, complexd> poly_part, double radius,
        complexd center = {0.0, 0.0}) {
        auto p = std::make_shared<Profile1D>();
        p->kind = ProfileKind::poly_bump;
        p->poly = std::move(poly_part);
        p->radius = radius;
        p->center = center;
        return p;
    }

    static std::shared_ptr<const Profile1D> plateau(double r_inner, double r_outer) {
        if (!(0 < r_inner && r_inner < r_outer))
            throw std::invalid_argument("plateau radii must satisfy 0 < r_in < r_out");
        auto p = std::make_shared<Profile1D>();
        p->kind = ProfileKind::plateau_bump;
        p->r_inner = r_inner;
        p->r_outer = r_outer;
        return p;
    }

    /// 1 - base(1/w) for a plateau base: equals 1 near 0, vanishes for
    /// |w| ≥ 1/r_inner. Used to transport a partition of unity through the
    /// chart transition w ↦ 1/w.
    static std::shared_ptr<const Profile1D> plateau_complement(double r_inner, double r_outer) {
        auto p = std::make_shared<Profile1D>();
        p->kind = ProfileKind::plateau_complement;
        p->r_inner = r_inner;
        p->r_outer = r_outer;
        return p;
    }

    static std::shared_ptr<const Profile1D> one() {
        auto p = std::make_shared<Profile1D>();
        p->kind = ProfileKind::constant_one;
        return p;
    }

    /// Radial generator given as a callable f(t, u) = f^{(t)}(u) up to
    /// derivative order `max_deriv`; support radius in |w|. The regularizing
    /// cutoffs enter the integrands through this kind.
    static std::shared_ptr<const Profile1D> radial_custom(
        std::function<double(int, double)> f, double support_radius_w, int max_deriv = 0) {
        auto p = std::make_shared<Profile1D>();
        p->kind = ProfileKind::radial_custom;
        p->custom = std::move(f);
        p->custom_support = support_radius_w;
        p->custom_max_deriv = max_deriv;
        return p;
    }

    std::function<double(int, double)> custom;
    double custom_support = std::numeric_limits<double>::infinity();
    int custom_max_deriv = 0;

    /// The same profile with one more ∂/∂w̄ applied (structural flag).
    std::shared_ptr<const Profile1D> dbar_derived() const {
        auto p = std::make_shared<Profile1D>(*this);
        p->base_dwbar += 1;
        return p;
    }

    /// True when the profile admits a radial normal form about the origin
    /// (polynomial parts get expanded to explicit monomials by the caller).
    bool is_radial() const { return center == complexd{0.0, 0.0}; }

    /// Radius beyond which the profile is zero to working precision
    /// (gaussian tails at 8r are below 1e-27).
    double support_radius() const {
        switch (kind) {
            case ProfileKind::constant_one: return std::numeric_limits<double>::infinity();
            case ProfileKind::gaussian_bump:
            case ProfileKind::poly_bump: return 8.0 * radius + std::abs(center);
            case ProfileKind::plateau_bump: return r_outer;
            case ProfileKind::plateau_complement: return 1.0 / r_inner;
            case ProfileKind::radial_custom: return custom_support;
        }
        return std::numeric_limits<double>::infinity();
    }

    /// t-th derivative of the radial generator f(u), u = |w-c|². Base
    /// derivative orders and polynomial parts are NOT applied here; the
    /// expansion layer handles those (for poly_bump the generator is the
    /// plain unit gaussian).
    double radial_deriv(int t, double u) const {
        if (t > static_cast<int>(kMaxRadialDeriv)) throw std::invalid_argument("radial derivative order too high");
        switch (kind) {
            case ProfileKind::constant_one:
                return t == 0 ? 1.0 : 0.0;
            case ProfileKind::gaussian_bump:
            case ProfileKind::poly_bump: {
                const double s = -1.0 / (radius * radius);
                const double amp = kind == ProfileKind::gaussian_bump ? amplitude : 1.0;
                return amp * std::pow(s, t) * std::exp(-u / (radius * radius));
            }
            case ProfileKind::plateau_bump: {
                const double u_in = r_inner * r_inner, u_out = r_outer * r_outer;
                if (u <= u_in) return t == 0 ? 1.0 : 0.0;
                if (u >= u_out) return 0.0;
                const double scale = -1.0 / (u_out - u_in);
                Jet s = smoothstep_jet((u_out - u) / (u_out - u_in));
                return s.d[static_cast<std::size_t>(t)] * std::pow(scale, t);
            }
            case ProfileKind::plateau_complement: {
                const double u_in = r_inner * r_inner, u_out = r_outer * r_outer;
                if (u <= 1.0 / u_out) return t == 0 ? 1.0 : 0.0; // base(1/u) = 0 there
                if (u >= 1.0 / u_in) return 0.0;                  // base(1/u) = 1 there
                // g(u) = 1 - f_base(1/u) via jet composition
                Jet uj = Jet::variable(u);
                Jet inv = Jet::constant(1.0) / uj;
                std::array<double, kMaxRadialDeriv + 1> fd{};
                for (std::size_t k = 0; k <= kMaxRadialDeriv; ++k)
                    fd[k] = base_plateau_deriv(static_cast<int>(k), inv.d[0]);
                Jet comp = jet_compose(fd, inv);
                double v = -comp.d[static_cast<std::size_t>(t)];
                if (t == 0) v += 1.0;
                return v;
            }
            case ProfileKind::radial_custom: {
                if (t > custom_max_deriv)
                    throw std::invalid_argument("custom radial profile lacks derivative order");
                return custom(t, u);
            }
        }
        return 0.0;
    }

    /// Mixed Wirtinger derivative of the profile (including its base orders)
    /// at a point.
    complexd wirtinger(int i, int j, complexd w) const {
        complexd acc{0.0, 0.0};
        const complexd dw = w - center;
        const double u = std::norm(dw);
        for (const auto& tm : expansion(i + base_dw, j + base_dwbar)) {
            complexd v = tm.coef;
            for (int a = 0; a < tm.a; ++a) v *= dw;
            for (int b = 0; b < tm.b; ++b) v *= std::conj(dw);
            v *= radial_deriv(tm.t, u);
            acc += v;
        }
        return acc;
    }

    complexd value(complexd w) const { return wirtinger(0, 0, w); }

    /// Expansion of ∂_w^i ∂_w̄^j applied to the profile in the basis
    /// (w-c)^a (w̄-c̄)^b f^{(t)}(|w-c|²); base derivative orders must already
    /// be folded into (i, j) by the caller.
    std::vector<ProfileExpTerm> expansion(int i, int j) const {
        std::vector<ProfileExpTerm> terms;
        if (kind == ProfileKind::poly_bump) {
            for (const auto& [ab, c] : poly) terms.push_back({0, ab.first, ab.second, c});
        } else {
            terms.push_back({0, 0, 0, {1.0, 0.0}});
        }
        for (int s = 0; s < i; ++s) terms = apply_dw(terms);
        for (int s = 0; s < j; ++s) terms = apply_dwbar(terms);
        return terms;
    }

private:
    double base_plateau_deriv(int t, double v) const {
        const double u_in = r_inner * r_inner, u_out = r_outer * r_outer;
        if (v <= u_in) return t == 0 ? 1.0 : 0.0;
        if (v >= u_out) return 0.0;
        const double scale = -1.0 / (u_out - u_in);
        Jet s = smoothstep_jet((u_out - v) / (u_out - u_in));
        return s.d[static_cast<std::size_t>(t)] * std::pow(scale, t);
    }

    static std::vector<ProfileExpTerm> apply_dw(const std::vector<ProfileExpTerm>& in) {
        std::vector<ProfileExpTerm> out;
        for (const auto& t : in) {
            // ∂_w f^{(t)} = f^{(t+1)} (w̄-c̄);  ∂_w (w-c)^a = a (w-c)^{a-1}
            out.push_back({t.t + 1, t.a, t.b + 1, t.coef});
            if (t.a > 0) out.push_back({t.t, t.a - 1, t.b, t.coef * static_cast<double>(t.a)});
        }
        return merge(out);
    }
    static std::vector<ProfileExpTerm> apply_dwbar(const std::vector<ProfileExpTerm>& in) {
        std::vector<ProfileExpTerm> out;
        for (const auto& t : in) {
            out.push_back({t.t + 1, t.a + 1, t.b, t.coef});
            if (t.b > 0) out.push_back({t.t, t.a, t.b - 1, t.coef * static_cast<double>(t.b)});
        }
        return merge(out);
    }
    static std::vector<ProfileExpTerm> merge(std::vector<ProfileExpTerm> v) {
        std::map<std::tuple<int, int, int>, complexd> m;
        for (const auto& t : v) m[{t.t, t.a, t.b}] += t.coef;
        std::vector<ProfileExpTerm> out;
        for (const auto& [k, c] : m)
            if (c != complexd{0.0, 0.0}) out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), c});
        return out;
    }
};

using ProfilePtr = std::shared_ptr<const Profile1D>;

} // namespace rescur
