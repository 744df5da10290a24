#pragma once

#include "rescur/exterior_form.hpp"
#include "rescur/scalar.hpp"

namespace rescur {

/// Compactly supported smooth (n, q) form. The holomorphic differential part
/// is always the full dz_1∧...∧dz_n; each summand carries its scalar data and
/// an anti-holomorphic subset dz̄_K (canonically ordered, sign folded into the
/// scalar).
class TestForm {
public:
    struct Summand {
        Scalar scalar;
        IndexSet dzbar = 0;
    };

    TestForm() : n_(0), q_(0) {}
    TestForm(int n, int q) : n_(n), q_(q) {
        if (q < 0 || q > n) throw std::invalid_argument("test form bidegree out of range");
    }

    static TestForm top(int n, Scalar s, IndexSet dzbar = 0) {
        TestForm t(n, set_size(dzbar));
        t.add(std::move(s), dzbar);
        return t;
    }

    int dim() const { return n_; }
    int antiholomorphic_degree() const { return q_; }
    const std::vector<Summand>& summands() const { return s_; }

    void add(Scalar s, IndexSet dzbar) {
        if (set_size(dzbar) != q_) throw std::invalid_argument("summand bidegree mismatch");
        if (s.dim() != n_) throw dimension_error("summand dimension mismatch");
        if (s.empty()) return;
        s_.push_back({std::move(s), dzbar});
    }

    TestForm multiplied(const Scalar& m) const {
        TestForm r(n_, q_);
        for (const auto& s : s_) r.add(m * s.scalar, s.dzbar);
        return r;
    }

    friend TestForm operator+(const TestForm& a, const TestForm& b) {
        if (a.n_ != b.n_ || a.q_ != b.q_) throw std::invalid_argument("test form shape mismatch");
        TestForm r = a;
        for (const auto& s : b.s_) r.s_.push_back(s);
        return r;
    }

    friend TestForm operator*(complexd c, const TestForm& a) {
        TestForm r(a.n_, a.q_);
        for (const auto& s : a.s_) r.add(c * s.scalar, s.dzbar);
        return r;
    }

    /// Coefficient of dz_N ∧ dz̄_K at a point, for each K present.
    std::map<IndexSet, complexd> evaluate(std::span<const complexd> z) const {
        std::map<IndexSet, complexd> out;
        for (const auto& s : s_) out[s.dzbar] += s.scalar.evaluate(z);
        return out;
    }

    /// Summands grouped by their dz̄ mask (scalars concatenated).
    std::map<IndexSet, Scalar> collect() const {
        std::map<IndexSet, Scalar> out;
        for (const auto& s : s_) {
            auto it = out.find(s.dzbar);
            if (it == out.end()) out.emplace(s.dzbar, s.scalar);
            else it->second = it->second + s.scalar;
        }
        return out;
    }

    /// Per-variable radius beyond which the form vanishes: the union over
    /// terms of each term's tightest single-variable profile bound. Infinite
    /// entries mean the data does not bound that variable.
    std::vector<double> support_radii() const {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> r(static_cast<std::size_t>(n_), 0.0);
        bool any = false;
        for (const auto& s : s_)
            for (const auto& t : s.scalar.terms()) {
                any = true;
                std::vector<double> term_r(static_cast<std::size_t>(n_), inf);
                for (const auto& f : t.factors) {
                    int var = -1, nvars = 0, power = 0;
                    for (int k = 0; k < n_; ++k)
                        if (f.arg_exps[static_cast<std::size_t>(k)] > 0) {
                            var = k;
                            ++nvars;
                            power = f.arg_exps[static_cast<std::size_t>(k)];
                        }
                    if (nvars != 1) continue; // coupled arguments give no per-variable bound
                    const double sup =
                        std::pow(f.prof->support_radius() / std::abs(f.arg_coef), 1.0 / power);
                    auto& tr = term_r[static_cast<std::size_t>(var)];
                    tr = std::min(tr, sup);
                }
                for (int k = 0; k < n_; ++k)
                    r[static_cast<std::size_t>(k)] =
                        std::max(r[static_cast<std::size_t>(k)], term_r[static_cast<std::size_t>(k)]);
            }
        if (!any) std::fill(r.begin(), r.end(), 0.0);
        return r;
    }

private:
    int n_;
    int q_;
    std::vector<Summand> s_;
};

/// ∂̄ of a test form, term by term through the chain rule on the profile
/// arguments. Errors at top anti-holomorphic degree.
inline TestForm dbar(const TestForm& t) {
    const int n = t.dim();
    if (t.antiholomorphic_degree() >= n)
        throw std::invalid_argument("dbar of a top-degree (n,n) form");
    TestForm r(n, t.antiholomorphic_degree() + 1);
    for (const auto& s : t.summands()) {
        for (int k = 0; k < n; ++k) {
            if (set_contains(s.dzbar, k)) continue;
            Scalar d = s.scalar.wirtinger(k, /*holo=*/false);
            if (d.empty()) continue;
            // dz̄_k ∧ dz_N ∧ dz̄_K  →  (-1)^n · insert_sign · dz_N ∧ dz̄_{K∪k}
            int sign = (n % 2) ? -1 : 1;
            sign *= insert_sign(k, s.dzbar);
            r.add(complexd(sign, 0) * d, s.dzbar | (1u << k));
        }
    }
    return r;
}

/// Pullback under a monomial map between equal-dimension spaces: profile
/// arguments compose, monomials substitute, and the differential parts go
/// through the exact exterior-algebra pullback (the holomorphic Jacobian
/// factor and the conjugated anti-holomorphic parts land in the scalars).
inline TestForm pullback_test(const TestForm& t, const MapD& m) {
    m.validate();
    if (m.n_source != m.n_target) throw dimension_error("test form pullback needs equal dimensions");
    if (t.dim() != m.n_target) throw dimension_error("test form pullback dimension mismatch");
    const int n = m.n_source;

    // pullback of dx_1∧...∧dx_n: single (n,0) component, poly · dz_N
    FormD top(n, n);
    top.add_component((1u << n) - 1u, SparsePoly<complexd>(n, complexd{1.0, 0.0}));
    FormD top_pb = pullback(top, m);
    const SparsePoly<complexd> jac = top_pb.component((1u << n) - 1u);

    TestForm r(n, t.antiholomorphic_degree());
    for (const auto& s : t.summands()) {
        // scalar part: substitute into monomials and compose profile arguments
        Scalar base(n);
        {
            // rebuild each term over the source ring
            for (const auto& term : s.scalar.terms()) {
                ScalarTerm nt(n);
                nt.coef = term.coef;
                for (int j = 0; j < n; ++j) {
                    const auto& [cj, ej] = m.images[static_cast<std::size_t>(j)];
                    for (int i = 0; i < term.zpow[static_cast<std::size_t>(j)]; ++i) {
                        nt.coef *= cj;
                        nt.zpow = ev_add(nt.zpow, ej);
                    }
                    for (int i = 0; i < term.zbarpow[static_cast<std::size_t>(j)]; ++i) {
                        nt.coef *= std::conj(cj);
                        nt.zbarpow = ev_add(nt.zbarpow, ej);
                    }
                }
                for (const auto& f : term.factors) {
                    ProfileFactor nf = f;
                    nf.arg_coef = f.arg_coef;
                    nf.arg_exps = ev_zero(n);
                    for (int j = 0; j < n; ++j) {
                        const auto& [cj, ej] = m.images[static_cast<std::size_t>(j)];
                        for (int i = 0; i < f.arg_exps[static_cast<std::size_t>(j)]; ++i) {
                            nf.arg_coef *= cj;
                            nf.arg_exps = ev_add(nf.arg_exps, ej);
                        }
                    }
                    nt.factors.push_back(std::move(nf));
                }
                base.terms().push_back(std::move(nt));
            }
        }

        // anti-holomorphic part: conjugate of the pullback of dx_K
        FormD kpart(n, set_size(s.dzbar));
        if (s.dzbar == 0) {
            kpart = FormD::constant(n, complexd{1.0, 0.0});
        } else {
            kpart = FormD(n, set_size(s.dzbar));
            kpart.add_component(s.dzbar, SparsePoly<complexd>(n, complexd{1.0, 0.0}));
            kpart = pullback(kpart, m);
        }

        for (const auto& [L, q] : kpart.components()) {
            for (const auto& [e, c] : q.terms()) {
                // conj: coefficient conjugated, z^e → z̄^e, dx_L → dz̄_L
                Scalar piece = std::conj(c) * base.times_monomial(ev_zero(n), e);
                // multiply by the holomorphic Jacobian polynomial
                Scalar with_jac(n);
                for (const auto& [je, jc] : jac.terms()) {
                    Scalar jm = jc * piece.times_monomial(je, ev_zero(n));
                    with_jac = with_jac + jm;
                }
                r.add(std::move(with_jac), L);
            }
        }
    }
    return r;
}

/// φ̃ ∧ ϕ̄ for a smooth (n,0) form φ̃ and a holomorphic form ϕ given exactly;
/// the conjugation turns coefficients into z̄ monomials and dz_K into dz̄_K.
inline TestForm product_split(const TestForm& phi_tilde, const FormQ& phi) {
    const int n = phi_tilde.dim();
    if (phi_tilde.antiholomorphic_degree() != 0)
        throw std::invalid_argument("product_split: first factor must be an (n,0) form");
    if (phi.dim() != n) throw dimension_error("product_split dimension mismatch");
    TestForm r(n, phi.degree());
    for (const auto& s : phi_tilde.summands())
        for (const auto& [K, p] : phi.components())
            for (const auto& [e, c] : p.terms()) {
                const complexd cc = std::conj(c.to_complex());
                r.add(cc * s.scalar.times_monomial(ev_zero(n), e), K);
            }
    return r;
}

} // namespace rescur
