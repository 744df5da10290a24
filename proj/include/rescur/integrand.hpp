#pragma once

#include <numeric>

#include "rescur/quadrature.hpp"
#include "rescur/scalar.hpp"
#include "rescur/testform.hpp"

namespace rescur {

struct QuadResult {
    complexd value{};
    double error = 0.0;
    long long evals = 0;
};

/// 1D kernel |z|^{2λ} z^{-k} z̄^{m̄} (anti-holomorphic power in the numerator).
struct SingularKernel1D {
    complexd lambda{};
    int pole_order = 0;
    int antihol_power = 0;

    /// Absolutely integrable against smooth compactly supported data iff
    /// 2 Re λ - k + m̄ > -2.
    bool integrable() const {
        return 2.0 * lambda.real() - pole_order + antihol_power > -2.0;
    }
};

struct not_integrable_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Radial leaves: after exact angular selection every integral here is a sum
// of products of radial factors against per-variable powers r^{c_k}. Addends
// are summed pointwise inside each coupling block so jet-subtracted
// remainders stay numerically tame.
// ---------------------------------------------------------------------------

struct RadialAddend {
    double cst = 1.0;
    ExponentVector vpow;               // extra squared-radius powers, length n
    std::vector<RadialFactor> factors; // real radial parts

    double eval(std::span<const double> v) const {
        double x = cst;
        for (std::size_t k = 0; k < vpow.size(); ++k)
            for (int i = 0; i < vpow[k]; ++i) x *= v[k];
        for (const auto& f : factors) x *= f.eval(v);
        return x;
    }
};

struct RadialLeaf {
    int n = 0;                       // ambient variable count (indices into vpow etc.)
    complexd coef{1.0, 0.0};
    std::vector<int> vars;           // active variables
    std::vector<complexd> exponent;  // per ambient var: r^{c_k} with the dr-Jacobian included
    std::vector<double> trunc;       // per ambient var upper radius
    std::vector<RadialAddend> addends;
};

namespace detail {

inline std::vector<std::vector<int>> coupling_blocks(const RadialLeaf& leaf) {
    // union-find over active vars linked by any factor argument
    std::map<int, int> parent;
    for (int v : leaf.vars) parent[v] = v;
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
    for (const auto& ad : leaf.addends)
        for (const auto& f : ad.factors) {
            int first = -1;
            for (std::size_t k = 0; k < f.arg_exps.size(); ++k) {
                if (f.arg_exps[k] == 0) continue;
                if (!parent.count(static_cast<int>(k))) continue; // eliminated variable
                if (first < 0) first = static_cast<int>(k);
                else unite(first, static_cast<int>(k));
            }
        }
    std::map<int, std::vector<int>> groups;
    for (int v : leaf.vars) groups[find(v)].push_back(v);
    std::vector<std::vector<int>> blocks;
    for (auto& [root, vs] : groups) blocks.push_back(vs);
    return blocks;
}

inline complexd integrate_leaf_once(const RadialLeaf& leaf, const QuadratureSpec& spec,
                                    long long& evals) {
    if (leaf.vars.empty()) {
        double s = 0.0;
        std::vector<double> dummy(static_cast<std::size_t>(leaf.n), 0.0);
        for (const auto& ad : leaf.addends) s += ad.eval(dummy);
        return leaf.coef * s;
    }
    auto blocks = coupling_blocks(leaf);

    // per-variable grids and complex weights w_i * r_i^{c_k}
    std::map<int, RadialGrid> grid;
    std::map<int, std::vector<complexd>> cw;
    for (int v : leaf.vars) {
        const double R = leaf.trunc[static_cast<std::size_t>(v)];
        if (!std::isfinite(R))
            throw std::invalid_argument("unbounded radial integral: no support bound for variable " +
                                        std::to_string(v + 1));
        RadialGrid g(spec.r_min, R, spec.panels_per_decade, spec.radial_order);
        std::vector<complexd> w(g.size());
        const complexd c = leaf.exponent[static_cast<std::size_t>(v)];
        for (std::size_t i = 0; i < g.size(); ++i)
            w[i] = g.w[i] * std::exp(c * std::log(g.r[i]));
        grid.emplace(v, std::move(g));
        cw.emplace(v, std::move(w));
    }

    // S_{addend, block} tensor sums; v holds squared radii for factor args
    std::vector<std::vector<complexd>> S(leaf.addends.size(),
                                         std::vector<complexd>(blocks.size(), complexd{}));
    std::vector<double> v(static_cast<std::size_t>(leaf.n), 0.0);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const auto& B = blocks[bi];
        std::vector<std::size_t> idx(B.size(), 0);
        std::vector<std::size_t> sizes(B.size());
        long long count = 1;
        for (std::size_t d = 0; d < B.size(); ++d) {
            sizes[d] = grid.at(B[d]).size();
            count *= static_cast<long long>(sizes[d]);
        }
        evals += count * static_cast<long long>(leaf.addends.size());
        if (evals > spec.node_budget)
            throw budget_exceeded("radial quadrature exceeded the node budget", complexd{}, 1.0);
        // iterate the tensor grid of this block
        while (true) {
            complexd wt{1.0, 0.0};
            for (std::size_t d = 0; d < B.size(); ++d) {
                const int var = B[d];
                wt *= cw.at(var)[idx[d]];
                const double r = grid.at(var).r[idx[d]];
                v[static_cast<std::size_t>(var)] = r * r;
            }
            for (std::size_t ai = 0; ai < leaf.addends.size(); ++ai) {
                // addend evaluation restricted to this block: factors and
                // powers of other blocks' variables contribute in their own
                // block sums (the addend constant is applied at assembly)
                const auto& ad = leaf.addends[ai];
                double x = 1.0;
                for (std::size_t k = 0; k < ad.vpow.size(); ++k) {
                    if (ad.vpow[k] == 0) continue;
                    if (std::find(B.begin(), B.end(), static_cast<int>(k)) == B.end()) continue;
                    for (int i = 0; i < ad.vpow[k]; ++i) x *= v[k];
                }
                for (const auto& fac : ad.factors) {
                    int owner = -1;
                    for (std::size_t k = 0; k < fac.arg_exps.size(); ++k)
                        if (fac.arg_exps[k] > 0) {
                            if (!grid.count(static_cast<int>(k)))
                                throw std::logic_error("radial factor references an eliminated variable");
                            if (owner < 0) owner = static_cast<int>(k);
                        }
                    const bool inB = owner >= 0 && std::find(B.begin(), B.end(), owner) != B.end();
                    const bool constant_here = owner < 0 && bi == 0; // var-free factors counted once
                    if (inB || constant_here) x *= fac.eval(v);
                }
                S[ai][bi] += wt * x;
            }
            // advance the multi-index
            std::size_t d = 0;
            for (; d < B.size(); ++d) {
                if (++idx[d] < sizes[d]) break;
                idx[d] = 0;
            }
            if (d == B.size()) break;
        }
    }

    complexd total{};
    for (std::size_t ai = 0; ai < leaf.addends.size(); ++ai) {
        complexd prod{leaf.addends[ai].cst, 0.0};
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) prod *= S[ai][bi];
        total += prod;
    }
    double twopis = 1.0;
    for (std::size_t i = 0; i < leaf.vars.size(); ++i) twopis *= 2.0 * M_PI;
    return leaf.coef * twopis * total;
}

inline QuadResult integrate_leaf(const RadialLeaf& leaf, const QuadratureSpec& spec) {
    QuadResult r;
    complexd coarse = integrate_leaf_once(leaf, spec, r.evals);
    complexd fine = integrate_leaf_once(leaf, spec.refined(), r.evals);
    r.value = fine;
    r.error = std::abs(fine - coarse);
    return r;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Structured integrands over C^n (Lebesgue measure):
//   ∫ Π_k |z_k|^{2μ_k} z_k^{-p_k} z̄_k^{-q_k} · data(z) · extra(z) dV
// ---------------------------------------------------------------------------

struct StructuredIntegrand {
    int n = 0;
    std::vector<complexd> mu;
    std::vector<int> p, q; // may be negative (numerator powers)
    Scalar data;
    std::function<complexd(std::span<const complexd>)> extra; // optional, non-radial
    std::vector<double> trunc;                                // optional override
};

namespace detail {

inline std::vector<double> resolve_trunc(const StructuredIntegrand& I) {
    std::vector<double> t(static_cast<std::size_t>(I.n),
                          std::numeric_limits<double>::infinity());
    // per-variable bound from single-variable profile factors, union over terms
    TestForm probe(I.n, 0);
    probe.add(I.data, 0);
    auto radii = probe.support_radii();
    for (int k = 0; k < I.n; ++k) t[static_cast<std::size_t>(k)] = radii[static_cast<std::size_t>(k)];
    if (!I.trunc.empty()) {
        if (static_cast<int>(I.trunc.size()) != I.n) throw dimension_error("trunc length");
        for (int k = 0; k < I.n; ++k)
            if (std::isfinite(I.trunc[static_cast<std::size_t>(k)]))
                t[static_cast<std::size_t>(k)] = I.trunc[static_cast<std::size_t>(k)];
    }
    return t;
}

/// Full polar-tensor evaluation for non-radial data (small n only).
inline QuadResult integrate_polar_general(const StructuredIntegrand& I, const QuadratureSpec& spec);

} // namespace detail

/// Evaluate a structured integrand: exact angular selection when the data is
/// radial-structured, full polar quadrature otherwise (small n). Per-term
/// absolute integrability is required; use the continuation engine for
/// anything at or past the convergence boundary.
inline QuadResult quad_nested(const StructuredIntegrand& I, const QuadratureSpec& spec) {
    spec.validate();
    if (static_cast<int>(I.mu.size()) != I.n || static_cast<int>(I.p.size()) != I.n ||
        static_cast<int>(I.q.size()) != I.n)
        throw dimension_error("structured integrand field lengths");

    if (I.extra) return detail::integrate_polar_general(I, spec);

    std::vector<RadialTerm> terms = radial_normal_form(I.data); // may throw not_radial_error
    auto trunc = detail::resolve_trunc(I);

    QuadResult out;
    std::vector<complexd> vals;
    double err = 0.0;
    for (const auto& t : terms) {
        bool selected = true;
        for (int k = 0; k < I.n && selected; ++k) {
            const int nu = t.zpow[static_cast<std::size_t>(k)] - t.zbarpow[static_cast<std::size_t>(k)] -
                           I.p[static_cast<std::size_t>(k)] + I.q[static_cast<std::size_t>(k)];
            if (nu != 0) selected = false;
        }
        if (!selected) continue;

        RadialLeaf leaf;
        leaf.n = I.n;
        leaf.coef = t.coef;
        leaf.trunc = trunc;
        for (int k = 0; k < I.n; ++k) {
            const double ab = t.zpow[static_cast<std::size_t>(k)] + t.zbarpow[static_cast<std::size_t>(k)];
            const complexd c = 2.0 * I.mu[static_cast<std::size_t>(k)] + ab -
                               static_cast<double>(I.p[static_cast<std::size_t>(k)]) -
                               static_cast<double>(I.q[static_cast<std::size_t>(k)]);
            if (c.real() <= -2.0)
                throw not_integrable_error("term not absolutely integrable in variable " +
                                           std::to_string(k + 1));
            leaf.vars.push_back(k);
            leaf.exponent.push_back(c + 1.0); // dr Jacobian
        }
        RadialAddend ad;
        ad.vpow = ev_zero(I.n);
        ad.factors = t.rad;
        leaf.addends.push_back(std::move(ad));
        auto r = detail::integrate_leaf(leaf, spec);
        vals.push_back(r.value);
        err += r.error;
        out.evals += r.evals;
    }
    out.value = pairwise_sum(std::span<const complexd>(vals));
    out.error = err;
    return out;
}

namespace detail {

inline QuadResult integrate_polar_general(const StructuredIntegrand& I, const QuadratureSpec& spec) {
    if (I.n > 2)
        throw std::invalid_argument("general polar quadrature limited to n <= 2 (use radial data)");
    auto trunc = resolve_trunc(I);
    auto run = [&](const QuadratureSpec& sp, long long& evals) {
        std::vector<RadialGrid> rg;
        AngularGrid ag(sp.angular_order);
        for (int k = 0; k < I.n; ++k) {
            if (!std::isfinite(trunc[static_cast<std::size_t>(k)]))
                throw std::invalid_argument("unbounded integral: no support bound");
            rg.emplace_back(sp.r_min, trunc[static_cast<std::size_t>(k)], sp.panels_per_decade,
                            sp.radial_order);
        }
        std::vector<std::size_t> shape;
        long long count = 1;
        for (int k = 0; k < I.n; ++k) {
            shape.push_back(rg[static_cast<std::size_t>(k)].size());
            shape.push_back(ag.theta.size());
            count *= static_cast<long long>(rg[static_cast<std::size_t>(k)].size() * ag.theta.size());
        }
        evals += count;
        if (evals > sp.node_budget)
            throw budget_exceeded("polar quadrature exceeded the node budget", complexd{}, 1.0);
        std::vector<std::size_t> idx(shape.size(), 0);
        std::vector<complexd> z(static_cast<std::size_t>(I.n));
        complexd acc{};
        while (true) {
            complexd wt{1.0, 0.0};
            for (int k = 0; k < I.n; ++k) {
                const double r = rg[static_cast<std::size_t>(k)].r[idx[static_cast<std::size_t>(2 * k)]];
                const double th = ag.theta[idx[static_cast<std::size_t>(2 * k + 1)]];
                z[static_cast<std::size_t>(k)] = std::polar(r, th);
                // |z|^{2mu} z^{-p} z̄^{-q} r dr dθ
                wt *= rg[static_cast<std::size_t>(k)].w[idx[static_cast<std::size_t>(2 * k)]] * ag.weight * r;
                wt *= std::exp(2.0 * I.mu[static_cast<std::size_t>(k)] * std::log(r));
                wt *= std::polar(std::pow(r, -I.p[static_cast<std::size_t>(k)] - I.q[static_cast<std::size_t>(k)]),
                                 th * (-I.p[static_cast<std::size_t>(k)] + I.q[static_cast<std::size_t>(k)]));
            }
            complexd f = I.data.evaluate(z);
            if (I.extra) f *= I.extra(z);
            acc += wt * f;
            std::size_t d = 0;
            for (; d < idx.size(); ++d) {
                if (++idx[d] < shape[d]) break;
                idx[d] = 0;
            }
            if (d == idx.size()) break;
        }
        return acc;
    };
    QuadResult out;
    complexd coarse = run(spec, out.evals);
    complexd fine = run(spec.refined(), out.evals);
    out.value = fine;
    out.error = std::abs(fine - coarse);
    return out;
}

} // namespace detail

/// ∫ |z|^{2λ} z^{-k} z̄^{m̄} · data dA over the disk of radius `trunc`
/// (defaults to the data's own support).
inline QuadResult quad1d(const SingularKernel1D& kernel, const Scalar& data,
                         const QuadratureSpec& spec,
                         double trunc = std::numeric_limits<double>::infinity()) {
    if (data.dim() != 1) throw dimension_error("quad1d wants one-variable data");
    if (!kernel.integrable()) throw not_integrable_error("quad1d kernel not integrable");
    StructuredIntegrand I;
    I.n = 1;
    I.mu = {kernel.lambda};
    I.p = {kernel.pole_order};
    I.q = {-kernel.antihol_power};
    I.data = data;
    if (std::isfinite(trunc)) I.trunc = {trunc};
    try {
        return quad_nested(I, spec);
    } catch (const not_radial_error&) {
        StructuredIntegrand J = I;
        if (J.trunc.empty()) J.trunc = detail::resolve_trunc(I);
        J.extra = [](std::span<const complexd>) { return complexd{1.0, 0.0}; };
        return detail::integrate_polar_general(J, spec);
    }
}

/// ∫ (∂ψ/∂z̄)(1/z) dz∧dz̄ — must equal 2πi·ψ(0) under the fixed orientation
/// convention dz∧dz̄ = -2i dA.
inline QuadResult cauchy_pompeiu(const ProfilePtr& psi, const QuadratureSpec& spec) {
    Scalar data(1);
    {
        ScalarTerm t(1);
        t.factors.push_back({psi, 0, 1, complexd{1.0, 0.0}, ev_unit(1, 0)});
        data.terms().push_back(std::move(t));
    }
    SingularKernel1D k{complexd{0.0, 0.0}, 1, 0};
    QuadResult r = quad1d(k, data, spec, psi->support_radius());
    r.value *= complexd{0.0, -2.0};
    r.error *= 2.0;
    return r;
}

// ---------------------------------------------------------------------------
// Tube residue, diagonal monomial case
// ---------------------------------------------------------------------------

/// ε in the closed first octant.
struct EpsPoint {
    std::vector<double> eps;

    explicit EpsPoint(std::vector<double> e) : eps(std::move(e)) {
        for (double x : eps)
            if (x < 0) throw std::invalid_argument("eps entries must be non-negative");
    }
    bool strictly_positive() const {
        for (double x : eps)
            if (x <= 0) return false;
        return true;
    }
};

/// ∮_{T_ε} φ / (f_1 f_2 f_3) for f_j = z_j^{a_j} in its own variable:
/// iterated torus quadrature over |z_j| = ε_j^{1/(2 a_j)}. Positively
/// oriented circles; φ must be an (n,0) test form (only that part can pair
/// with the n-real-dimensional tube).
inline complexd tube_residue_diagonal(const std::vector<ExponentVector>& exponents,
                                      const TestForm& t, const EpsPoint& eps,
                                      int angular_order = 128) {
    const int n = t.dim();
    if (static_cast<int>(exponents.size()) != static_cast<int>(eps.eps.size()))
        throw dimension_error("one eps entry per factor");
    if (t.antiholomorphic_degree() != 0)
        throw std::invalid_argument("tube residue pairs with (n,0) test forms");
    if (!eps.strictly_positive())
        throw std::invalid_argument("tube degenerates: eps entries must be strictly positive");
    // diagonal means factor j is a pure power of variable j
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    if (static_cast<int>(exponents.size()) != n)
        throw std::invalid_argument("diagonal case needs one factor per variable");
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            const int e = exponents[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            if (e == 0) continue;
            if (k != j || a[static_cast<std::size_t>(j)] != 0)
                throw std::invalid_argument(
                    "non-diagonal exponents: use the regularized or Mellin evaluators");
            a[static_cast<std::size_t>(j)] = e;
        }
        if (a[static_cast<std::size_t>(j)] == 0)
            throw std::invalid_argument("factor " + std::to_string(j + 1) + " is constant");
    }

    AngularGrid ag(angular_order);
    std::vector<double> radius(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        radius[static_cast<std::size_t>(j)] =
            std::pow(eps.eps[static_cast<std::size_t>(j)], 1.0 / (2.0 * a[static_cast<std::size_t>(j)]));

    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    std::vector<complexd> z(static_cast<std::size_t>(n));
    complexd acc{};
    while (true) {
        complexd wt{1.0, 0.0};
        for (int j = 0; j < n; ++j) {
            const double th = ag.theta[idx[static_cast<std::size_t>(j)]];
            z[static_cast<std::size_t>(j)] = std::polar(radius[static_cast<std::size_t>(j)], th);
            // dz_j = i z_j dθ; denominator z_j^{a_j}
            wt *= complexd{0.0, 1.0} * z[static_cast<std::size_t>(j)] * ag.weight;
            wt *= std::pow(z[static_cast<std::size_t>(j)], -a[static_cast<std::size_t>(j)]);
        }
        auto vals = t.evaluate(z);
        if (auto it = vals.find(0u); it != vals.end()) acc += wt * it->second;
        std::size_t d = 0;
        for (; d < idx.size(); ++d) {
            if (++idx[d] < static_cast<std::size_t>(angular_order)) break;
            idx[d] = 0;
        }
        if (d == idx.size()) break;
    }
    return acc;
}

} // namespace rescur
