#pragma once

#include <map>
#include <utility>

#include "rescur/exact.hpp"
#include "rescur/exponent.hpp"

namespace rescur {

/// Multivariate polynomial with sparse term storage. No zero coefficients are
/// ever kept and terms are ordered lexicographically by exponent vector, so
/// operator== is structural equality of values.
template <class C>
class SparsePoly {
public:
    using term_map = std::map<ExponentVector, C>;

    SparsePoly() : n_(0) {}
    explicit SparsePoly(int n) : n_(n) {}
    SparsePoly(int n, const C& constant) : n_(n) {
        if (!coeff_traits<C>::is_zero(constant)) terms_[ev_zero(n)] = constant;
    }

    static SparsePoly monomial(int n, const ExponentVector& e, const C& c) {
        if (static_cast<int>(e.size()) != n) throw dimension_error("monomial exponent length");
        check_exponents(e);
        SparsePoly p(n);
        if (!coeff_traits<C>::is_zero(c)) p.terms_[e] = c;
        return p;
    }

    static SparsePoly variable(int n, int i) { return monomial(n, ev_unit(n, i), coeff_traits<C>::one()); }

    int dim() const { return n_; }
    bool is_zero() const { return terms_.empty(); }
    const term_map& terms() const { return terms_; }

    void add_term(const ExponentVector& e, const C& c) {
        if (coeff_traits<C>::is_zero(c)) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
            if (coeff_traits<C>::is_zero(it->second)) terms_.erase(it);
        }
    }

    friend SparsePoly operator+(const SparsePoly& a, const SparsePoly& b) {
        a.check_same_dim(b);
        SparsePoly r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }
    friend SparsePoly operator-(const SparsePoly& a, const SparsePoly& b) {
        a.check_same_dim(b);
        SparsePoly r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, -c);
        return r;
    }
    friend SparsePoly operator-(const SparsePoly& a) {
        SparsePoly r(a.n_);
        for (const auto& [e, c] : a.terms_) r.terms_.emplace(e, -c);
        return r;
    }
    friend SparsePoly operator*(const SparsePoly& a, const SparsePoly& b) {
        a.check_same_dim(b);
        SparsePoly r(a.n_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) r.add_term(ev_add(ea, eb), ca * cb);
        return r;
    }
    friend SparsePoly operator*(const C& c, const SparsePoly& a) {
        SparsePoly r(a.n_);
        for (const auto& [e, pc] : a.terms_) r.add_term(e, c * pc);
        return r;
    }
    SparsePoly& operator+=(const SparsePoly& o) { *this = *this + o; return *this; }
    SparsePoly& operator-=(const SparsePoly& o) { *this = *this - o; return *this; }

    friend bool operator==(const SparsePoly& a, const SparsePoly& b) {
        return a.n_ == b.n_ && a.terms_ == b.terms_;
    }

    /// ∂/∂z_i
    SparsePoly derivative(int i) const {
        SparsePoly r(n_);
        for (const auto& [e, c] : terms_) {
            const int k = e[static_cast<std::size_t>(i)];
            if (k == 0) continue;
            ExponentVector e2 = e;
            --e2[static_cast<std::size_t>(i)];
            r.add_term(e2, C(k) * c);
        }
        return r;
    }

    /// Substitute z_i := 0 for every i in J.
    SparsePoly restricted(IndexSet J) const {
        SparsePoly r(n_);
        for (const auto& [e, c] : terms_) {
            bool kill = false;
            for (IndexSet j = J; j; j &= j - 1)
                if (e[static_cast<std::size_t>(std::countr_zero(j))] > 0) { kill = true; break; }
            if (!kill) r.add_term(e, c);
        }
        return r;
    }

    /// True iff every term has exponent ≥ 1 in variable i (so z_i divides).
    bool divisible_by_variable(int i) const {
        for (const auto& [e, c] : terms_)
            if (e[static_cast<std::size_t>(i)] == 0) return false;
        return true;
    }

    /// Exact quotient by z_i; caller must have checked divisibility.
    SparsePoly divided_by_variable(int i) const {
        SparsePoly r(n_);
        for (const auto& [e, c] : terms_) {
            ExponentVector e2 = e;
            --e2[static_cast<std::size_t>(i)];
            r.terms_.emplace(e2, c);
        }
        return r;
    }

    /// Substitute each variable by a single-monomial image (c_j, m_j) living in
    /// an n_src-dimensional ring.
    SparsePoly substitute_monomials(int n_src, const std::vector<std::pair<C, ExponentVector>>& images) const {
        if (static_cast<int>(images.size()) != n_) throw dimension_error("substitution image count");
        SparsePoly r(n_src);
        for (const auto& [e, c] : terms_) {
            C coef = c;
            ExponentVector acc = ev_zero(n_src);
            for (int j = 0; j < n_; ++j) {
                const int p = e[static_cast<std::size_t>(j)];
                for (int t = 0; t < p; ++t) {
                    coef *= images[static_cast<std::size_t>(j)].first;
                    acc = ev_add(acc, images[static_cast<std::size_t>(j)].second);
                }
            }
            r.add_term(acc, coef);
        }
        return r;
    }

    template <class Point, class Out>
    Out evaluate(const Point& z) const {
        Out acc{};
        for (const auto& [e, c] : terms_) {
            Out t = to_out<Out>(c);
            for (int i = 0; i < n_; ++i)
                for (int k = 0; k < e[static_cast<std::size_t>(i)]; ++k) t *= z[static_cast<std::size_t>(i)];
            acc += t;
        }
        return acc;
    }

private:
    template <class Out> static Out to_out(const C& c) {
        if constexpr (std::is_same_v<C, ComplexQ>) return Out(c.to_complex());
        else return Out(c);
    }
    void check_same_dim(const SparsePoly& o) const {
        if (n_ != o.n_) throw dimension_error("polynomials in different rings");
    }

    int n_;
    term_map terms_;
};

using PolyQ = SparsePoly<ComplexQ>;
using PolyD = SparsePoly<complexd>;

} // namespace rescur
