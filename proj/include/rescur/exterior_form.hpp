#pragma once

#include <map>
#include <optional>

#include "rescur/sparse_poly.hpp"

namespace rescur {

/// Divisor of a monomial z^a: the union of {z_i = 0} over i with a_i > 0.
struct DivisorSpec {
    ExponentVector monomial;

    explicit DivisorSpec(ExponentVector m) : monomial(std::move(m)) {
        check_exponents(monomial);
        if (ev_is_zero(monomial))
            throw std::invalid_argument("divisor monomial must have a positive entry");
    }

    IndexSet support() const {
        IndexSet s = 0;
        for (std::size_t i = 0; i < monomial.size(); ++i)
            if (monomial[i] > 0) s |= (1u << i);
        return s;
    }
};

/// Holomorphic k-form with sparse polynomial coefficients: a map from strictly
/// increasing index subsets K (|K| = k) to the coefficient of dz_K.
template <class C>
class ExteriorForm {
public:
    using component_map = std::map<IndexSet, SparsePoly<C>>;

    ExteriorForm() : n_(0), degree_(0) {}
    // degree > n is allowed (the form is then identically zero and stays empty)
    ExteriorForm(int n, int degree) : n_(n), degree_(degree) {
        if (degree < 0) throw std::invalid_argument("negative form degree");
    }

    static ExteriorForm zero(int n, int degree) { return ExteriorForm(n, degree); }

    static ExteriorForm from_poly(const SparsePoly<C>& p) {
        ExteriorForm f(p.dim(), 0);
        if (!p.is_zero()) f.comps_[0] = p;
        return f;
    }

    static ExteriorForm constant(int n, const C& c) { return from_poly(SparsePoly<C>(n, c)); }

    /// Basis covector dz_i.
    static ExteriorForm dz(int n, int i) {
        ExteriorForm f(n, 1);
        f.comps_[1u << i] = SparsePoly<C>(n, coeff_traits<C>::one());
        return f;
    }

    int dim() const { return n_; }
    int degree() const { return degree_; }
    bool is_zero() const { return comps_.empty(); }
    const component_map& components() const { return comps_; }

    SparsePoly<C> component(IndexSet K) const {
        auto it = comps_.find(K);
        return it == comps_.end() ? SparsePoly<C>(n_) : it->second;
    }

    void add_component(IndexSet K, const SparsePoly<C>& p) {
        if (set_size(K) != degree_) throw std::invalid_argument("component subset size != degree");
        if (p.is_zero()) return;
        auto it = comps_.find(K);
        if (it == comps_.end()) {
            comps_.emplace(K, p);
        } else {
            it->second += p;
            if (it->second.is_zero()) comps_.erase(it);
        }
    }

    friend ExteriorForm operator+(const ExteriorForm& a, const ExteriorForm& b) {
        a.check_compatible(b);
        ExteriorForm r = a;
        for (const auto& [K, p] : b.comps_) r.add_component(K, p);
        return r;
    }
    friend ExteriorForm operator-(const ExteriorForm& a, const ExteriorForm& b) {
        a.check_compatible(b);
        ExteriorForm r = a;
        for (const auto& [K, p] : b.comps_) r.add_component(K, -p);
        return r;
    }
    friend ExteriorForm operator-(const ExteriorForm& a) {
        ExteriorForm r(a.n_, a.degree_);
        for (const auto& [K, p] : a.comps_) r.comps_.emplace(K, -p);
        return r;
    }
    friend ExteriorForm operator*(const SparsePoly<C>& p, const ExteriorForm& a) {
        ExteriorForm r(a.n_, a.degree_);
        for (const auto& [K, q] : a.comps_) r.add_component(K, p * q);
        return r;
    }
    friend bool operator==(const ExteriorForm& a, const ExteriorForm& b) {
        if (a.n_ != b.n_) return false;
        if (a.comps_.empty() && b.comps_.empty()) return true; // zero form, any degree
        return a.degree_ == b.degree_ && a.comps_ == b.comps_;
    }

    ExteriorForm conjugated() const {
        static_assert(std::is_same_v<C, ComplexQ>);
        ExteriorForm r(n_, degree_);
        for (const auto& [K, p] : comps_) {
            SparsePoly<C> q(n_);
            for (const auto& [e, c] : p.terms()) q.add_term(e, c.conj());
            r.add_component(K, q);
        }
        return r;
    }

private:
    void check_compatible(const ExteriorForm& o) const {
        if (n_ != o.n_) throw dimension_error("forms in different dimensions");
        if (degree_ != o.degree_) throw std::invalid_argument("forms of different degree");
    }

    int n_;
    int degree_;
    component_map comps_;
};

using FormQ = ExteriorForm<ComplexQ>;
using FormD = ExteriorForm<complexd>;

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

template <class C>
ExteriorForm<C> wedge(const ExteriorForm<C>& a, const ExteriorForm<C>& b) {
    if (a.dim() != b.dim()) throw dimension_error("wedge of forms in different dimensions");
    ExteriorForm<C> r(a.dim(), a.degree() + b.degree());
    if (a.degree() + b.degree() > a.dim()) return r;
    for (const auto& [K, p] : a.components())
        for (const auto& [L, q] : b.components()) {
            if (K & L) continue;
            const int s = merge_sign(K, L);
            auto pq = p * q;
            r.add_component(K | L, s < 0 ? -pq : pq);
        }
    return r;
}

template <class C>
ExteriorForm<C> exterior_d(const ExteriorForm<C>& a) {
    ExteriorForm<C> r(a.dim(), a.degree() + 1);
    if (a.degree() + 1 > a.dim()) return r;
    for (const auto& [K, p] : a.components())
        for (int i = 0; i < a.dim(); ++i) {
            if (set_contains(K, i)) continue;
            auto dp = p.derivative(i);
            if (dp.is_zero()) continue;
            const int s = insert_sign(i, K);
            r.add_component(K | (1u << i), s < 0 ? -dp : dp);
        }
    return r;
}

/// Sets z_i := 0 and dz_i := 0 for all i ∈ J: pull back to the coordinate
/// subspace V_J and extend constantly.
template <class C>
ExteriorForm<C> restrict_extend(const ExteriorForm<C>& a, IndexSet J) {
    ExteriorForm<C> r(a.dim(), a.degree());
    for (const auto& [K, p] : a.components()) {
        if (K & J) continue;
        r.add_component(K, p.restricted(J));
    }
    return r;
}

/// A holomorphic form vanishes on the normal crossings divisor {z^a = 0} iff
/// its pullback to each irreducible component {z_i = 0}, a_i > 0, is zero.
template <class C>
bool vanishes_on(const ExteriorForm<C>& a, const DivisorSpec& d) {
    if (static_cast<int>(d.monomial.size()) != a.dim())
        throw dimension_error("divisor dimension mismatch");
    for (IndexSet s = d.support(); s; s &= s - 1) {
        const int i = std::countr_zero(s);
        if (!restrict_extend(a, 1u << i).is_zero()) return false;
    }
    return true;
}

/// Indices k such that z_k divides exactly one of the monomials.
inline IndexSet simple_factors(const std::vector<ExponentVector>& monomials) {
    if (monomials.empty()) throw std::invalid_argument("simple_factors: no monomials");
    const std::size_t n = monomials.front().size();
    IndexSet r = 0;
    for (std::size_t k = 0; k < n; ++k) {
        int cnt = 0;
        for (const auto& m : monomials) {
            if (m.size() != n) throw dimension_error("monomials of different length");
            if (m[k] > 0) ++cnt;
        }
        if (cnt == 1) r |= (1u << k);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Monomial maps and pullback
// ---------------------------------------------------------------------------

/// Holomorphic map each of whose component functions is a single monomial with
/// a constant coefficient: z ↦ (c_1 z^{m_1}, ..., c_{n_t} z^{m_{n_t}}).
template <class C>
struct MonomialMap {
    int n_source = 0;
    int n_target = 0;
    std::vector<std::pair<C, ExponentVector>> images; // length n_target, exponents over source

    static MonomialMap identity(int n) {
        MonomialMap m;
        m.n_source = m.n_target = n;
        for (int i = 0; i < n; ++i) m.images.emplace_back(coeff_traits<C>::one(), ev_unit(n, i));
        return m;
    }

    void validate() const {
        if (static_cast<int>(images.size()) != n_target)
            throw dimension_error("monomial map image count");
        for (const auto& [c, e] : images) {
            if (static_cast<int>(e.size()) != n_source) throw dimension_error("monomial map exponent length");
            check_exponents(e);
        }
    }
};

using MapQ = MonomialMap<ComplexQ>;
using MapD = MonomialMap<complexd>;

/// f ∘ g : first apply g, then f.
template <class C>
MonomialMap<C> compose(const MonomialMap<C>& f, const MonomialMap<C>& g) {
    if (f.n_source != g.n_target) throw dimension_error("map composition dimension mismatch");
    MonomialMap<C> r;
    r.n_source = g.n_source;
    r.n_target = f.n_target;
    for (const auto& [c, e] : f.images) {
        C coef = c;
        ExponentVector acc = ev_zero(g.n_source);
        for (int j = 0; j < f.n_source; ++j)
            for (int t = 0; t < e[static_cast<std::size_t>(j)]; ++t) {
                coef *= g.images[static_cast<std::size_t>(j)].first;
                acc = ev_add(acc, g.images[static_cast<std::size_t>(j)].second);
            }
        r.images.emplace_back(coef, acc);
    }
    return r;
}

/// Exact pullback m*(a): substitute in coefficients and expand d(images).
template <class C>
ExteriorForm<C> pullback(const ExteriorForm<C>& a, const MonomialMap<C>& m) {
    m.validate();
    if (a.dim() != m.n_target) throw dimension_error("pullback: form dimension != map target");
    const int ns = m.n_source;

    // d(c_j z^{m_j}) as a 1-form over the source ring
    std::vector<ExteriorForm<C>> dimg;
    dimg.reserve(m.images.size());
    for (const auto& [c, e] : m.images) {
        SparsePoly<C> mono = SparsePoly<C>::monomial(ns, e, c);
        dimg.push_back(exterior_d(ExteriorForm<C>::from_poly(mono)));
    }

    ExteriorForm<C> r(ns, a.degree());
    for (const auto& [K, p] : a.components()) {
        ExteriorForm<C> part = ExteriorForm<C>::from_poly(p.substitute_monomials(ns, m.images));
        for (int j : set_to_indices(K)) part = wedge(part, dimg[static_cast<std::size_t>(j)]);
        if (part.degree() != a.degree()) throw std::logic_error("pullback degree bookkeeping");
        for (const auto& [L, q] : part.components()) r.add_component(L, q);
    }
    return r;
}

} // namespace rescur
