#pragma once

#include <optional>
#include <string>

#include "rescur/exterior_form.hpp"
#include "rescur/form_io.hpp"

namespace rescur {

/// The index family of a squarefree coordinate monomial: the base set I and,
/// per level j, all subsets of I with j elements fewer.
struct IndexFamily {
    IndexSet base = 0;

    explicit IndexFamily(IndexSet I) : base(I) {
        if (!I) throw std::invalid_argument("index family must be nonempty");
    }

    int size() const { return set_size(base); }

    /// Subsets with |I| - j elements; level(0) = {I}, level(size()) = {∅}.
    std::vector<IndexSet> level(int j) const { return subsets_of_size(base, size() - j); }

    /// Z_J for a subset J ⊆ I: the union of {z_i = 0} over i ∈ I∖J.
    std::optional<DivisorSpec> complement_divisor(int n, IndexSet J) const {
        const IndexSet rest = base & ~J;
        if (!rest) return std::nullopt;
        ExponentVector m = ev_zero(n);
        for (int i : set_to_indices(rest)) m[static_cast<std::size_t>(i)] = 1;
        return DivisorSpec(m);
    }
};

/// Layered decomposition of a holomorphic form along the coordinate subspaces
/// of an index family:  a = head + Σ_j Σ_{J at level j} layer[j][J] + tail,
/// exactly, with layer[j][J] vanishing on Z_J and the tail vanishing on the
/// full divisor z_I = 0.
template <class C>
struct Decomposition {
    ExteriorForm<C> head;
    // layers[j-1] maps each level-j subset J to its piece
    std::vector<std::map<IndexSet, ExteriorForm<C>>> layers;
    ExteriorForm<C> tail;

    ExteriorForm<C> reconstruct() const {
        ExteriorForm<C> s = head;
        for (const auto& lvl : layers)
            for (const auto& [J, f] : lvl) s = s + f;
        return s + tail;
    }
};

/// Recursive restriction decomposition: head is the constant extension of the
/// pullback to V_I; each subsequent layer peels off the restrictions to the
/// larger coordinate subspaces of the remainder.
template <class C>
Decomposition<C> restriction_decomposition(const ExteriorForm<C>& a, const IndexFamily& I) {
    const int n = a.dim();
    if ((I.base >> n) != 0u) throw dimension_error("index family exceeds dimension");
    Decomposition<C> d;
    d.head = restrict_extend(a, I.base);
    ExteriorForm<C> rem = a - d.head; // α^1
    const int m = I.size();
    for (int j = 1; j <= m - 1; ++j) {
        std::map<IndexSet, ExteriorForm<C>> lvl;
        ExteriorForm<C> next = rem;
        for (IndexSet J : I.level(j)) {
            ExteriorForm<C> piece = restrict_extend(rem, J);
            next = next - piece;
            lvl.emplace(J, std::move(piece));
        }
        d.layers.push_back(std::move(lvl));
        rem = std::move(next);
    }
    d.tail = std::move(rem);
    return d;
}

struct DecompositionCheck {
    std::string name;
    bool pass = false;
    std::string witness; // serialized residual on failure
};

struct DecompositionReport {
    std::vector<DecompositionCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Re-verify a decomposition against the original form: exact reconstruction
/// plus every membership claim, with a witness for any failure.
inline DecompositionReport verify_decomposition(const Decomposition<ComplexQ>& d, const FormQ& a,
                                                const IndexFamily& I) {
    DecompositionReport rep;
    {
        FormQ residual = a - d.reconstruct();
        rep.checks.push_back({"reconstruction", residual.is_zero(),
                              residual.is_zero() ? "" : to_string(residual)});
    }
    const int n = a.dim();
    for (std::size_t lj = 0; lj < d.layers.size(); ++lj) {
        for (const auto& [J, f] : d.layers[lj]) {
            auto div = I.complement_divisor(n, J);
            const std::string nm = "layer " + std::to_string(lj + 1) + " subset {" + [&] {
                std::string s;
                for (int i : set_to_indices(J)) s += std::to_string(i + 1) + " ";
                return s;
            }() + "} vanishes on complement divisor";
            const bool ok = !div || vanishes_on(f, *div);
            rep.checks.push_back({nm, ok, ok ? "" : to_string(f)});
        }
    }
    {
        auto div = I.complement_divisor(n, 0);
        const bool ok = !div || vanishes_on(d.tail, *div);
        rep.checks.push_back({"tail vanishes on full divisor", ok, ok ? "" : to_string(d.tail)});
    }
    return rep;
}

struct precondition_error : std::invalid_argument {
    int witness_index; // 1-based coordinate index witnessing the failure
    precondition_error(const std::string& w, int idx)
        : std::invalid_argument(w), witness_index(idx) {}
};

/// Given a monomial sigma and a squarefree coordinate set tau (disjoint from
/// sigma's support) such that d(sigma)∧a vanishes on Z_tau, produce a' with
///   (i) d(sigma)∧a' = 0,  (ii) a' vanishes on Z_sigma,  (iii) a - a'
/// vanishes on Z_tau.  a' is the decomposition of a along tau with the tail
/// dropped.
template <class C>
ExteriorForm<C> correction_form(const ExteriorForm<C>& a, const ExponentVector& sigma, IndexSet tau) {
    const int n = a.dim();
    if (static_cast<int>(sigma.size()) != n) throw dimension_error("sigma length != dimension");
    check_exponents(sigma);
    if (ev_is_zero(sigma)) throw std::invalid_argument("sigma must be a nonconstant monomial");
    if (!tau) throw std::invalid_argument("tau must be nonempty");
    IndexSet sig_support = 0;
    for (int i = 0; i < n; ++i)
        if (sigma[static_cast<std::size_t>(i)] > 0) sig_support |= (1u << i);
    if (sig_support & tau)
        throw std::invalid_argument("sigma support and tau must be disjoint");

    // precondition: d(sigma)∧a vanishes on Z_tau
    auto dsigma = exterior_d(ExteriorForm<C>::from_poly(SparsePoly<C>::monomial(n, sigma, coeff_traits<C>::one())));
    auto w = wedge(dsigma, a);
    for (int i : set_to_indices(tau)) {
        if (!restrict_extend(w, 1u << i).is_zero())
            throw precondition_error("d(sigma)^a does not vanish on {z_" + std::to_string(i + 1) + " = 0}",
                                     i + 1);
    }

    Decomposition<C> d = restriction_decomposition(a, IndexFamily(tau));
    ExteriorForm<C> corr = d.head;
    for (const auto& lvl : d.layers)
        for (const auto& [J, f] : lvl) corr = corr + f;
    return corr;
}

} // namespace rescur
