#pragma once

#include <algorithm>

#include "rescur/exponent.hpp"
#include "rescur/profiles.hpp"

namespace rescur {

/// Profile evaluated at a monomial argument: P applied to coef·z^exps, with
/// extra Wirtinger orders (di, dj) on top of the profile's base orders.
struct ProfileFactor {
    ProfilePtr prof;
    int di = 0, dj = 0;
    complexd arg_coef{1.0, 0.0};
    ExponentVector arg_exps;

    complexd argument(std::span<const complexd> z) const {
        complexd w = arg_coef;
        for (std::size_t k = 0; k < arg_exps.size(); ++k)
            for (int t = 0; t < arg_exps[k]; ++t) w *= z[k];
        return w;
    }

    friend bool operator<(const ProfileFactor& a, const ProfileFactor& b) {
        auto ka = std::tuple(a.prof.get(), a.di, a.dj, a.arg_exps, a.arg_coef.real(), a.arg_coef.imag());
        auto kb = std::tuple(b.prof.get(), b.di, b.dj, b.arg_exps, b.arg_coef.real(), b.arg_coef.imag());
        return ka < kb;
    }
    friend bool operator==(const ProfileFactor& a, const ProfileFactor& b) {
        return a.prof.get() == b.prof.get() && a.di == b.di && a.dj == b.dj &&
               a.arg_coef == b.arg_coef && a.arg_exps == b.arg_exps;
    }
};

/// coef · z^zpow · z̄^zbarpow · Π profile factors
struct ScalarTerm {
    complexd coef{1.0, 0.0};
    ExponentVector zpow, zbarpow;
    std::vector<ProfileFactor> factors;

    explicit ScalarTerm(int n = 0) : zpow(ev_zero(n)), zbarpow(ev_zero(n)) {}
};

/// Smooth scalar data: finite sums of profile-monomial products. The class is
/// closed under Wirtinger derivatives, multiplication, substituting z_k := 0,
/// and pullback under monomial maps, which is everything the reductions in
/// the integral engines need.
class Scalar {
public:
    Scalar() : n_(0) {}
    explicit Scalar(int n) : n_(n) {}
    Scalar(int n, complexd constant) : n_(n) {
        if (constant != complexd{}) {
            ScalarTerm t(n);
            t.coef = constant;
            terms_.push_back(std::move(t));
        }
    }

    static Scalar profile(int n, ProfilePtr p, const ExponentVector& arg_exps,
                          complexd arg_coef = {1.0, 0.0}) {
        if (static_cast<int>(arg_exps.size()) != n) throw dimension_error("profile argument length");
        Scalar s(n);
        ScalarTerm t(n);
        t.factors.push_back({std::move(p), 0, 0, arg_coef, arg_exps});
        s.terms_.push_back(std::move(t));
        return s;
    }

    /// P(z_k) for a single variable.
    static Scalar profile_of_var(int n, ProfilePtr p, int k) {
        return profile(n, std::move(p), ev_unit(n, k));
    }

    int dim() const { return n_; }
    bool empty() const { return terms_.empty(); }
    const std::vector<ScalarTerm>& terms() const { return terms_; }
    std::vector<ScalarTerm>& terms() { return terms_; }

    friend Scalar operator+(const Scalar& a, const Scalar& b) {
        if (a.n_ != b.n_) throw dimension_error("scalar dimension mismatch");
        Scalar r = a;
        r.terms_.insert(r.terms_.end(), b.terms_.begin(), b.terms_.end());
        return r;
    }
    friend Scalar operator*(const Scalar& a, const Scalar& b) {
        if (a.n_ != b.n_) throw dimension_error("scalar dimension mismatch");
        Scalar r(a.n_);
        for (const auto& ta : a.terms_)
            for (const auto& tb : b.terms_) {
                ScalarTerm t(a.n_);
                t.coef = ta.coef * tb.coef;
                t.zpow = ev_add(ta.zpow, tb.zpow);
                t.zbarpow = ev_add(ta.zbarpow, tb.zbarpow);
                t.factors = ta.factors;
                t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
                r.terms_.push_back(std::move(t));
            }
        return r;
    }
    friend Scalar operator*(complexd c, const Scalar& a) {
        Scalar r = a;
        for (auto& t : r.terms_) t.coef *= c;
        return r;
    }

    Scalar times_monomial(const ExponentVector& zp, const ExponentVector& zbp) const {
        Scalar r = *this;
        for (auto& t : r.terms_) {
            t.zpow = ev_add(t.zpow, zp);
            t.zbarpow = ev_add(t.zbarpow, zbp);
        }
        return r;
    }

    complexd evaluate(std::span<const complexd> z) const {
        std::vector<complexd> vals;
        vals.reserve(terms_.size());
        for (const auto& t : terms_) {
            complexd v = t.coef;
            for (std::size_t k = 0; k < t.zpow.size(); ++k) {
                for (int i = 0; i < t.zpow[k]; ++i) v *= z[k];
                for (int i = 0; i < t.zbarpow[k]; ++i) v *= std::conj(z[k]);
            }
            for (const auto& f : t.factors) v *= f.prof->wirtinger(f.di, f.dj, f.argument(z));
            vals.push_back(v);
        }
        return pairwise_sum(std::span<const complexd>(vals));
    }

    /// ∂/∂z_k (holo = true) or ∂/∂z̄_k (holo = false), by the product rule.
    Scalar wirtinger(int k, bool holo) const {
        Scalar r(n_);
        for (const auto& t : terms_) {
            // monomial part
            const auto& pw = holo ? t.zpow : t.zbarpow;
            if (pw[static_cast<std::size_t>(k)] > 0) {
                ScalarTerm d = t;
                auto& dpw = holo ? d.zpow : d.zbarpow;
                d.coef *= static_cast<double>(dpw[static_cast<std::size_t>(k)]);
                --dpw[static_cast<std::size_t>(k)];
                r.terms_.push_back(std::move(d));
            }
            // each profile factor via the chain rule: the argument is the
            // monomial w = c z^m, so ∂w/∂z_k = c m_k z^{m - e_k} and
            // ∂w̄/∂z̄_k is its conjugate.
            for (std::size_t fi = 0; fi < t.factors.size(); ++fi) {
                const auto& f = t.factors[fi];
                const int mk = f.arg_exps[static_cast<std::size_t>(k)];
                if (mk == 0) continue;
                ScalarTerm d = t;
                auto& df = d.factors[fi];
                ExponentVector shifted = f.arg_exps;
                --shifted[static_cast<std::size_t>(k)];
                if (holo) {
                    df.di += 1;
                    d.coef *= f.arg_coef * static_cast<double>(mk);
                    d.zpow = ev_add(d.zpow, shifted);
                } else {
                    df.dj += 1;
                    d.coef *= std::conj(f.arg_coef) * static_cast<double>(mk);
                    d.zbarpow = ev_add(d.zbarpow, shifted);
                }
                r.terms_.push_back(std::move(d));
            }
        }
        return r;
    }

    /// Substitute z_k := 0 (and z̄_k := 0). Profile factors whose argument
    /// monomial involves z_k collapse to their value at 0.
    Scalar at_zero(int k) const {
        Scalar r(n_);
        for (const auto& t : terms_) {
            if (t.zpow[static_cast<std::size_t>(k)] > 0 || t.zbarpow[static_cast<std::size_t>(k)] > 0)
                continue;
            ScalarTerm d(n_);
            d.coef = t.coef;
            d.zpow = t.zpow;
            d.zbarpow = t.zbarpow;
            bool dead = false;
            for (const auto& f : t.factors) {
                if (f.arg_exps[static_cast<std::size_t>(k)] > 0) {
                    const complexd v = f.prof->wirtinger(f.di, f.dj, complexd{0.0, 0.0});
                    if (v == complexd{0.0, 0.0}) { dead = true; break; }
                    d.coef *= v;
                } else {
                    d.factors.push_back(f);
                }
            }
            if (!dead) r.terms_.push_back(std::move(d));
        }
        return r;
    }

    bool depends_on(int k) const {
        for (const auto& t : terms_) {
            if (t.zpow[static_cast<std::size_t>(k)] > 0 || t.zbarpow[static_cast<std::size_t>(k)] > 0)
                return true;
            for (const auto& f : t.factors)
                if (f.arg_exps[static_cast<std::size_t>(k)] > 0) return true;
        }
        return false;
    }

    /// Canonical form: factors sorted, identical terms merged, zero (or
    /// below-threshold) coefficients dropped. Used by the ∂̄∘∂̄ bookkeeping
    /// check; `tol` is an absolute coefficient threshold.
    Scalar normalized(double tol = 0.0) const {
        std::map<std::tuple<ExponentVector, ExponentVector, std::vector<ProfileFactor>>, complexd> m;
        for (auto t : terms_) {
            std::sort(t.factors.begin(), t.factors.end());
            m[{t.zpow, t.zbarpow, t.factors}] += t.coef;
        }
        Scalar r(n_);
        for (const auto& [key, c] : m) {
            if (std::abs(c) <= tol) continue;
            ScalarTerm t(n_);
            t.coef = c;
            t.zpow = std::get<0>(key);
            t.zbarpow = std::get<1>(key);
            t.factors = std::get<2>(key);
            r.terms_.push_back(std::move(t));
        }
        return r;
    }

    double max_abs_coef() const {
        double m = 0.0;
        for (const auto& t : terms_) m = std::max(m, std::abs(t.coef));
        return m;
    }

private:
    int n_;
    std::vector<ScalarTerm> terms_;
};

// ---------------------------------------------------------------------------
// Radial normal form: the shape the integral engines consume. Valid when
// every profile is radial and centered at the origin; polynomial parts and
// derivative bookkeeping are expanded into explicit z/z̄ monomials.
// ---------------------------------------------------------------------------

struct RadialFactor {
    ProfilePtr prof;  // radial generator owner
    int t = 0;        // derivative order of the radial generator
    double arg_scale = 1.0;       // u = arg_scale · Π v_k^{m_k}, v_k = r_k²
    ExponentVector arg_exps;      // m

    double eval(std::span<const double> v) const {
        double u = arg_scale;
        for (std::size_t k = 0; k < arg_exps.size(); ++k)
            for (int i = 0; i < arg_exps[k]; ++i) u *= v[k];
        return prof->radial_deriv(t, u);
    }
};

struct RadialTerm {
    complexd coef{1.0, 0.0};
    ExponentVector zpow, zbarpow;
    std::vector<RadialFactor> rad;

    explicit RadialTerm(int n = 0) : zpow(ev_zero(n)), zbarpow(ev_zero(n)) {}

    /// Product of the radial factors at squared radii v.
    double radial_value(std::span<const double> v) const {
        double p = 1.0;
        for (const auto& f : rad) p *= f.eval(v);
        return p;
    }
};

struct not_radial_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Expand a Scalar into radial normal form. Throws not_radial_error if some
/// profile is not an origin-centered radial kind.
inline std::vector<RadialTerm> radial_normal_form(const Scalar& s) {
    std::vector<RadialTerm> out;
    const int n = s.dim();
    for (const auto& t : s.terms()) {
        std::vector<RadialTerm> partial;
        RadialTerm seed(n);
        seed.coef = t.coef;
        seed.zpow = t.zpow;
        seed.zbarpow = t.zbarpow;
        partial.push_back(seed);
        for (const auto& f : t.factors) {
            const auto& P = *f.prof;
            if (!P.is_radial())
                throw not_radial_error("profile is not radial about the origin");
            auto expansion = P.expansion(f.di + P.base_dw, f.dj + P.base_dwbar);
            std::vector<RadialTerm> next;
            for (const auto& base : partial) {
                for (const auto& e : expansion) {
                    RadialTerm r = base;
                    r.coef *= e.coef;
                    // (w)^a (w̄)^b with w = c z^m
                    for (int i = 0; i < e.a; ++i) {
                        r.coef *= f.arg_coef;
                        r.zpow = ev_add(r.zpow, f.arg_exps);
                    }
                    for (int i = 0; i < e.b; ++i) {
                        r.coef *= std::conj(f.arg_coef);
                        r.zbarpow = ev_add(r.zbarpow, f.arg_exps);
                    }
                    RadialFactor rf;
                    rf.prof = f.prof;
                    rf.t = e.t;
                    rf.arg_scale = std::norm(f.arg_coef);
                    rf.arg_exps = f.arg_exps;
                    r.rad.push_back(std::move(rf));
                    next.push_back(std::move(r));
                }
            }
            partial = std::move(next);
        }
        for (auto& r : partial) out.push_back(std::move(r));
    }
    return out;
}

} // namespace rescur
