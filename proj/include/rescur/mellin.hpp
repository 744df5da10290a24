#pragma once

#include <random>

#include "rescur/exact.hpp"
#include "rescur/integrand.hpp"

namespace rescur {

/// Normal crossings chart: each factor is the monomial z^{a_j} times an
/// optional non-vanishing unit; dbar_flags says which factors carry ∂̄ in the
/// integrand (the Mellin integrand of the main theorems flags factors 2,3).
struct ChartSpec {
    int n = 0;
    std::vector<ExponentVector> exponents; // a_j, one per factor
    std::vector<PolyD> units;              // empty or same length; empty poly = 1
    IndexSet dbar_flags = 0;

    int factors() const { return static_cast<int>(exponents.size()); }

    bool unit_trivial(int j) const {
        if (units.empty()) return true;
        const auto& u = units[static_cast<std::size_t>(j)];
        if (u.is_zero()) return true; // unset
        return u == PolyD(n, complexd{1.0, 0.0});
    }
    bool all_units_trivial() const {
        for (int j = 0; j < factors(); ++j)
            if (!unit_trivial(j)) return false;
        return true;
    }

    /// Per-variable pole order of the product monomial.
    std::vector<int> pole_orders() const {
        std::vector<int> p(static_cast<std::size_t>(n), 0);
        for (const auto& a : exponents)
            for (int k = 0; k < n; ++k) p[static_cast<std::size_t>(k)] += a[static_cast<std::size_t>(k)];
        return p;
    }

    /// Per-variable rows of the kernel weight: |z_k|^{2 μ_k}, μ_k = Σ_j a_{jk} λ_j.
    std::vector<std::vector<int>> mu_rows() const {
        std::vector<std::vector<int>> rows(static_cast<std::size_t>(n),
                                           std::vector<int>(static_cast<std::size_t>(factors()), 0));
        for (int j = 0; j < factors(); ++j)
            for (int k = 0; k < n; ++k)
                rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
                    exponents[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        return rows;
    }

    IndexSet simple_set() const { return simple_factors(exponents); }

    void validate(double sample_radius = 2.0) const {
        if (factors() < 1 || factors() > 3)
            throw std::invalid_argument("charts carry one to three factors");
        for (const auto& a : exponents) {
            if (static_cast<int>(a.size()) != n) throw dimension_error("chart exponent length");
            check_exponents(a);
            if (ev_is_zero(a)) throw std::invalid_argument("chart factor must be a nonconstant monomial");
        }
        if (!units.empty() && static_cast<int>(units.size()) != factors())
            throw std::invalid_argument("one unit per factor");
        // units must not vanish on the truncated domain: sampled check
        for (int j = 0; j < factors(); ++j) {
            if (unit_trivial(j)) continue;
            const auto& u = units[static_cast<std::size_t>(j)];
            std::mt19937_64 rng(99);
            std::uniform_real_distribution<double> d(-sample_radius, sample_radius);
            for (int trial = 0; trial < 512; ++trial) {
                std::vector<complexd> z(static_cast<std::size_t>(n));
                for (auto& x : z) x = {d(rng), d(rng)};
                if (std::abs(u.evaluate<std::vector<complexd>, complexd>(z)) < 1e-9)
                    throw std::invalid_argument("chart unit vanishes on the sample grid");
            }
        }
    }
};

struct LambdaPoint {
    std::vector<complexd> lambda;

    LambdaPoint() = default;
    LambdaPoint(std::initializer_list<complexd> l) : lambda(l) {}
    explicit LambdaPoint(std::vector<complexd> l) : lambda(std::move(l)) {}
    complexd operator[](std::size_t j) const { return lambda[j]; }
    std::size_t size() const { return lambda.size(); }
};

/// A rational factor num·λ / den·λ attached to a value: the hyperplane den·λ=0
/// carries a simple pole whose strength is modulated by the numerator.
struct PoleFactor {
    std::vector<int> numerator;   // integer coefficients over λ (may be empty = 1)
    std::vector<int> denominator; // nonzero integer row

    friend bool operator==(const PoleFactor& a, const PoleFactor& b) {
        return a.numerator == b.numerator && a.denominator == b.denominator;
    }
};

struct MeromorphicValue {
    std::vector<PoleFactor> pole_factors;
    complexd value{};
    double error = 0.0;
    long long evals = 0;
};

struct pole_proximity_error : std::runtime_error {
    std::vector<int> hyperplane;
    pole_proximity_error(const std::string& w, std::vector<int> h)
        : std::runtime_error(w), hyperplane(std::move(h)) {}
};

struct hypothesis_violation : std::invalid_argument {
    int factor_k; // offending non-simple coordinate, 1-based
    hypothesis_violation(const std::string& w, int k) : std::invalid_argument(w), factor_k(k) {}
};

// ---------------------------------------------------------------------------
// Chart reduction (the ∂̄-splitting): every flagged ∂̄ either lands on a
// simple factor's variable and is integrated by parts onto the data, or acts
// on a non-simple variable and its dz̄_k/z̄_k is absorbed into the kernel
// bookkeeping (q_k += 1) with a λ_j prefactor. The output terms carry pure
// |z^{a_j}|^{2λ_j} weights against smooth data — the shape whose continuation
// is classical.
// ---------------------------------------------------------------------------

struct ReducedTerm {
    std::vector<std::vector<int>> prefactor; // linear forms c·λ (one per absorbed ∂̄)
    double constant = 1.0;                   // combinatorial a_{jk} factors
    std::vector<int> q;                      // absorbed z̄-orders per variable
    TestForm piece;                          // (n,n) data with all dz̄ slots filled
    std::vector<int> byparts;                // variables handled by integration by parts
    std::vector<int> absorbed;               // variables with dz̄/z̄ absorbed
    std::vector<std::pair<int, int>> absorbed_jk; // (factor, variable) absorbed actions
    std::vector<std::pair<int, int>> byparts_jk;  // (factor, variable) by-parts actions
    bool smooth_absorption = true;           // strict Lemma-5-style smoothness of absorptions

    bool factor_absorbed(int j) const {
        for (const auto& [fj, k] : absorbed_jk)
            if (fj == j) return true;
        return false;
    }
};

struct ReducedChart {
    ChartSpec chart;
    std::vector<std::vector<int>> rows; // μ_k rows
    std::vector<int> p;                 // per-variable pole orders
    std::vector<ReducedTerm> terms;
    std::vector<std::string> warnings;
};

namespace detail {

/// dz̄_k ∧ piece with the sign of moving dz̄_k into canonical position;
/// optionally applying -∂̄_k to the scalars instead (integration by parts).
inline TestForm wedge_dzbar(const TestForm& t, int k, bool by_parts) {
    const int n = t.dim();
    TestForm r(n, t.antiholomorphic_degree() + 1);
    for (const auto& s : t.summands()) {
        if (set_contains(s.dzbar, k)) continue;
        int sign = (n % 2) ? -1 : 1;
        sign *= insert_sign(k, s.dzbar);
        Scalar sc = by_parts ? complexd(-1.0, 0.0) * s.scalar.wirtinger(k, false) : s.scalar;
        if (sc.empty()) continue;
        r.add(complexd(sign, 0.0) * sc, s.dzbar | (1u << k));
    }
    return r;
}

/// Structural z̄_k-divisibility of every surviving summand: the strict
/// reading of "(dz̄_k/z̄_k) ∧ φ is still a test form".
inline bool smooth_after_division(const TestForm& t, int k) {
    for (const auto& s : t.summands()) {
        if (set_contains(s.dzbar, k)) continue; // dies in the wedge
        for (const auto& term : s.scalar.terms())
            if (term.zbarpow[static_cast<std::size_t>(k)] == 0) return false;
    }
    return true;
}

} // namespace detail

/// Reduce the integrand Π_{flagged j} ∂̄|z^{a_j}|^{2λ_j} · Π_{plain} |…|^{2λ_j}
/// / z^{Σa_j} ∧ t into Eq->continuable terms. `strict` enforces the smooth
/// absorption hypothesis and throws naming the offending variable.
inline ReducedChart reduce_chart(const ChartSpec& chart, const TestForm& t, bool strict = false) {
    chart.validate();
    if (t.dim() != chart.n) throw dimension_error("test form dimension != chart dimension");
    const int flagged = set_size(chart.dbar_flags);
    if (t.antiholomorphic_degree() + flagged != chart.n)
        throw std::invalid_argument("test form bidegree does not complete to (n,n) under the flags");
    for (int j = 0; j < chart.factors(); ++j)
        if (set_contains(chart.dbar_flags, j) && !chart.unit_trivial(j))
            throw std::invalid_argument(
                "nontrivial unit on a ∂̄-flagged factor: fold the unit numerically (mellin_direct)");

    ReducedChart out;
    out.chart = chart;
    out.rows = chart.mu_rows();
    out.p = chart.pole_orders();

    const IndexSet simple = chart.simple_set();
    std::vector<ReducedTerm> work;
    {
        ReducedTerm seed;
        seed.q.assign(static_cast<std::size_t>(chart.n), 0);
        seed.piece = t;
        work.push_back(std::move(seed));
    }
    // rightmost ∂̄ factor sits next to the test form, so its dz̄ wedges first
    for (int j = chart.factors() - 1; j >= 0; --j) {
        if (!set_contains(chart.dbar_flags, j)) continue;
        std::vector<ReducedTerm> next;
        for (const auto& base : work) {
            for (int k = 0; k < chart.n; ++k) {
                const int ajk = chart.exponents[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                if (ajk == 0) continue;
                if (set_contains(simple, k)) {
                    // don't let ∂̄_k act: integrate by parts onto the data
                    ReducedTerm r = base;
                    r.piece = detail::wedge_dzbar(base.piece, k, /*by_parts=*/true);
                    if (r.piece.summands().empty()) continue;
                    r.byparts.push_back(k);
                    r.byparts_jk.emplace_back(j, k);
                    next.push_back(std::move(r));
                } else {
                    ReducedTerm r = base;
                    r.piece = detail::wedge_dzbar(base.piece, k, /*by_parts=*/false);
                    if (r.piece.summands().empty()) continue;
                    const bool ok = detail::smooth_after_division(base.piece, k);
                    if (!ok) {
                        if (strict)
                            throw hypothesis_violation(
                                "(dz̄_" + std::to_string(k + 1) +
                                    "/z̄_" + std::to_string(k + 1) +
                                    ") ∧ data is not smooth (non-simple factor)",
                                k + 1);
                        r.smooth_absorption = false;
                        out.warnings.push_back("non-simple factor z_" + std::to_string(k + 1) +
                                               ": dz̄/z̄ absorbed into the kernel (data not divisible)");
                    }
                    r.constant *= static_cast<double>(ajk);
                    std::vector<int> row(static_cast<std::size_t>(chart.factors()), 0);
                    row[static_cast<std::size_t>(j)] = 1;
                    r.prefactor.push_back(std::move(row));
                    r.q[static_cast<std::size_t>(k)] += 1;
                    r.absorbed.push_back(k);
                    r.absorbed_jk.emplace_back(j, k);
                    next.push_back(std::move(r));
                }
            }
        }
        work = std::move(next);
    }
    for (auto& r : work)
        if (r.piece.antiholomorphic_degree() != chart.n)
            throw std::logic_error("reduction did not complete the (n,n) degree");
    out.terms = std::move(work);
    return out;
}

// ---------------------------------------------------------------------------
// Analytic continuation: per variable, matched Taylor jets of the radial data
// get explicit meromorphic radial integrals; remainders are absolutely
// convergent and integrated numerically.
// ---------------------------------------------------------------------------

namespace detail {

inline const ProfilePtr& jet_plateau() {
    static ProfilePtr theta = Profile1D::plateau(1.0, 1.4);
    return theta;
}

/// Entire tail of the jet radial integral: ∫_{1}^{1.4} r^{s+1} θ(r²) dr.
inline complexd mfac_tail(complexd s) {
    static std::vector<double> gx, gw;
    if (gx.empty()) gauss_legendre(32, gx, gw);
    const auto& theta = jet_plateau();
    complexd acc{};
    const double lo = 1.0, hi = 1.4;
    const double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < gx.size(); ++i) {
        const double r = mid + half * gx[i];
        acc += half * gw[i] * std::exp((s + 1.0) * std::log(r)) * theta->radial_deriv(0, r * r);
    }
    return acc;
}

/// 2π ∫_0^∞ r^{s+1} θ(r²) dr continued in s: simple pole at s = -2.
inline complexd mfac(complexd s) { return 2.0 * M_PI * (1.0 / (s + 2.0) + mfac_tail(s)); }

/// Taylor coefficient structures of a radial-factor product in v_k.
struct RadialCoeff {
    double cst = 1.0;
    ExponentVector vpow; // squared-radius powers over the ambient variables
    std::vector<RadialFactor> facs;
};

/// Coefficient of v_k^ℓ in Π facs (and v_k^{vpow_k}), as structures over the
/// other variables.
inline std::vector<RadialCoeff> taylor_vk(const RadialCoeff& in, int k, int ell) {
    // shift by the explicit power of v_k carried by vpow
    const int own = in.vpow[static_cast<std::size_t>(k)];
    const int target = ell - own;
    if (target < 0) return {};
    std::vector<RadialFactor> touching, passive;
    for (const auto& f : in.facs) {
        if (f.arg_exps[static_cast<std::size_t>(k)] > 0) touching.push_back(f);
        else passive.push_back(f);
    }
    // distribute `target` over the touching factors; each factor contributes
    // at orders that are multiples of its m_k
    struct Partial {
        double cst;
        ExponentVector vpow;
        int order;
    };
    ExponentVector base_vpow = in.vpow;
    base_vpow[static_cast<std::size_t>(k)] = 0;
    std::vector<Partial> partials{{in.cst, base_vpow, 0}};
    for (const auto& f : touching) {
        const int m = f.arg_exps[static_cast<std::size_t>(k)];
        std::vector<Partial> next;
        for (const auto& p : partials) {
            double cfact = 1.0;
            for (int c = 0; p.order + c * m <= target; ++c) {
                if (c > 0) cfact /= static_cast<double>(c);
                // f^{(t+c)}(0) · arg_scale^c · Π_{j≠k} v_j^{c·m_j} / c!
                double deriv0;
                try {
                    deriv0 = f.prof->radial_deriv(f.t + c, 0.0);
                } catch (const std::exception&) {
                    throw std::invalid_argument("jet extraction needs more radial derivatives than available");
                }
                Partial np = p;
                np.order += c * m;
                np.cst *= deriv0 * std::pow(f.arg_scale, c) * cfact;
                for (std::size_t j = 0; j < f.arg_exps.size(); ++j)
                    if (static_cast<int>(j) != k)
                        np.vpow[j] += c * f.arg_exps[j];
                if (np.cst != 0.0) next.push_back(std::move(np));
            }
        }
        partials = std::move(next);
    }
    std::vector<RadialCoeff> out;
    for (auto& p : partials) {
        if (p.order != target) continue;
        RadialCoeff rc;
        rc.cst = p.cst;
        rc.vpow = p.vpow;
        rc.facs = passive;
        out.push_back(std::move(rc));
    }
    return out;
}

struct ContinuationScratch {
    std::vector<PoleFactor> poles;
    std::vector<complexd> values;
    double error = 0.0;
    long long evals = 0;
};

} // namespace detail

/// Evaluate the reduced chart at a λ point by explicit continuation.
/// Poles on hyperplanes through the origin are reported as PoleFactor records
/// (numerators = the term's λ prefactors); evaluation refuses λ within 1e-12
/// of any needed pole hyperplane.
inline MeromorphicValue continue_eval(const ReducedChart& rc, const LambdaPoint& lam,
                                      const QuadratureSpec& spec) {
    const int n = rc.chart.n;
    const int m = rc.chart.factors();
    if (static_cast<int>(lam.size()) != m) throw dimension_error("lambda size != factor count");
    if (!rc.chart.all_units_trivial())
        throw std::invalid_argument("continuation requires units ≡ 1 (fold units via mellin_direct)");

    // per-variable kernel weights
    std::vector<complexd> mu(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        complexd acc{};
        for (int j = 0; j < m; ++j)
            acc += static_cast<double>(rc.rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]) *
                   lam[static_cast<std::size_t>(j)];
        mu[static_cast<std::size_t>(k)] = acc;
    }
    const double lam_scale = [&] {
        double s = 0.0;
        for (std::size_t j = 0; j < lam.size(); ++j) s += std::abs(lam[j]);
        return 1.0 + s;
    }();

    detail::ContinuationScratch scratch;
    const complexd vol = volume_factor(n);

    for (const auto& term : rc.terms) {
        complexd pref{term.constant, 0.0};
        for (const auto& row : term.prefactor) {
            complexd x{};
            for (int j = 0; j < m; ++j) x += static_cast<double>(row[static_cast<std::size_t>(j)]) * lam[static_cast<std::size_t>(j)];
            pref *= x;
        }

        auto trunc = [&] {
            TestForm probe(n, 0);
            for (const auto& s : term.piece.summands()) probe.add(s.scalar, 0);
            return probe.support_radii();
        }();

        for (const auto& summand : term.piece.summands()) {
            for (const auto& rt : radial_normal_form(summand.scalar)) {
                // exact angular selection
                bool selected = true;
                for (int k = 0; k < n && selected; ++k) {
                    const int nu = rt.zpow[static_cast<std::size_t>(k)] - rt.zbarpow[static_cast<std::size_t>(k)] -
                                   rc.p[static_cast<std::size_t>(k)] + term.q[static_cast<std::size_t>(k)];
                    if (nu != 0) selected = false;
                }
                if (!selected) continue;

                // jet plan: subtraction is only applied near the convergence
                // boundary; away from it the plain integral converges and the
                // jet/remainder split would cancel catastrophically
                std::vector<int> jet_vars;
                std::vector<int> jet_levels;
                for (int k = 0; k < n; ++k) {
                    const int ab = rt.zpow[static_cast<std::size_t>(k)] + rt.zbarpow[static_cast<std::size_t>(k)];
                    const int depth = rc.p[static_cast<std::size_t>(k)] + term.q[static_cast<std::size_t>(k)] - 2 - ab;
                    if (depth < 0) continue;
                    // the critical jet sits exactly on μ_k = 0: a pole
                    // hyperplane through the origin, recorded structurally
                    {
                        PoleFactor pf;
                        pf.denominator = rc.rows[static_cast<std::size_t>(k)];
                        if (!term.prefactor.empty()) pf.numerator = term.prefactor.front();
                        if (std::find(scratch.poles.begin(), scratch.poles.end(), pf) == scratch.poles.end())
                            scratch.poles.push_back(pf);
                    }
                    const double s0 = 2.0 * mu[static_cast<std::size_t>(k)].real() + ab -
                                      rc.p[static_cast<std::size_t>(k)] - term.q[static_cast<std::size_t>(k)];
                    if (s0 + 2.0 < 0.75) {
                        jet_vars.push_back(k);
                        jet_levels.push_back(depth / 2); // parity matches by selection
                    }
                }

                // enumerate assignments: each jet var either takes a jet level
                // (eliminated, M-factor) or joins the remainder set
                const std::size_t J = jet_vars.size();
                std::vector<int> choice(J, -2); // -1 = remainder, ℓ ≥ 0 = jet
                std::function<void(std::size_t, complexd)> recurse = [&](std::size_t d, complexd mprod) {
                    if (d == J) {
                        // build the numeric leaf for remainder + untouched vars
                        std::vector<int> elim, rem;
                        for (std::size_t i = 0; i < J; ++i)
                            (choice[i] >= 0 ? elim : rem).push_back(jet_vars[i]);

                        // multi-jet table for the eliminated set at the chosen levels
                        detail::RadialCoeff seed;
                        seed.cst = 1.0;
                        seed.vpow = ev_zero(n);
                        seed.facs = rt.rad;
                        std::vector<detail::RadialCoeff> coeffs{seed};
                        for (std::size_t i = 0; i < J; ++i) {
                            if (choice[i] < 0) continue;
                            std::vector<detail::RadialCoeff> next;
                            for (const auto& c : coeffs)
                                for (auto& piece : detail::taylor_vk(c, jet_vars[i], choice[i]))
                                    next.push_back(std::move(piece));
                            coeffs = std::move(next);
                        }
                        if (coeffs.empty()) return;

                        RadialLeaf leaf;
                        leaf.n = n;
                        leaf.coef = vol * pref * rt.coef;
                        leaf.trunc = trunc;
                        leaf.exponent.assign(static_cast<std::size_t>(n), complexd{});
                        for (int k = 0; k < n; ++k) {
                            if (std::find(elim.begin(), elim.end(), k) != elim.end()) continue;
                            const double ab = rt.zpow[static_cast<std::size_t>(k)] + rt.zbarpow[static_cast<std::size_t>(k)];
                            leaf.vars.push_back(k);
                            leaf.exponent[static_cast<std::size_t>(k)] =
                                2.0 * mu[static_cast<std::size_t>(k)] + ab -
                                static_cast<double>(rc.p[static_cast<std::size_t>(k)]) -
                                static_cast<double>(term.q[static_cast<std::size_t>(k)]) + 1.0;
                        }
                        for (int k : rem)
                            leaf.trunc[static_cast<std::size_t>(k)] =
                                std::max(std::isfinite(leaf.trunc[static_cast<std::size_t>(k)])
                                             ? leaf.trunc[static_cast<std::size_t>(k)]
                                             : 0.0,
                                         1.5);

                        // addends: nested remainders by inclusion-exclusion over `rem`
                        const std::size_t R = rem.size();
                        for (std::size_t sub = 0; sub < (1u << R); ++sub) {
                            // choose jet levels for the subtracted variables
                            std::vector<int> sub_vars;
                            for (std::size_t i = 0; i < R; ++i)
                                if (sub & (1u << i)) sub_vars.push_back(rem[i]);
                            const double sgn = (std::popcount(static_cast<unsigned>(sub)) % 2) ? -1.0 : 1.0;
                            // iterate level tuples over sub_vars
                            std::vector<int> lv(sub_vars.size(), 0);
                            const auto max_level = [&](int var) {
                                for (std::size_t i = 0; i < J; ++i)
                                    if (jet_vars[i] == var) return jet_levels[i];
                                return 0;
                            };
                            while (true) {
                                std::vector<detail::RadialCoeff> cs = coeffs;
                                for (std::size_t i = 0; i < sub_vars.size(); ++i) {
                                    std::vector<detail::RadialCoeff> next;
                                    for (const auto& c : cs)
                                        for (auto& piece : detail::taylor_vk(c, sub_vars[i], lv[i]))
                                            next.push_back(std::move(piece));
                                    cs = std::move(next);
                                }
                                for (const auto& c : cs) {
                                    RadialAddend ad;
                                    ad.cst = sgn * c.cst;
                                    ad.vpow = c.vpow;
                                    ad.factors = c.facs;
                                    for (std::size_t i = 0; i < sub_vars.size(); ++i) {
                                        ad.vpow[static_cast<std::size_t>(sub_vars[i])] += lv[i];
                                        RadialFactor th;
                                        th.prof = detail::jet_plateau();
                                        th.t = 0;
                                        th.arg_scale = 1.0;
                                        th.arg_exps = ev_unit(n, sub_vars[i]);
                                        ad.factors.push_back(std::move(th));
                                    }
                                    leaf.addends.push_back(std::move(ad));
                                }
                                // next level tuple
                                std::size_t i = 0;
                                for (; i < sub_vars.size(); ++i) {
                                    if (++lv[i] <= max_level(sub_vars[i])) break;
                                    lv[i] = 0;
                                }
                                if (i == sub_vars.size() || sub_vars.empty()) break;
                            }
                        }
                        if (leaf.addends.empty()) return;
                        auto r = detail::integrate_leaf(leaf, spec);
                        scratch.values.push_back(mprod * r.value);
                        scratch.error += std::abs(mprod) * r.error;
                        scratch.evals += r.evals;
                        return;
                    }
                    const int k = jet_vars[d];
                    const int L = jet_levels[d];
                    const int ab = rt.zpow[static_cast<std::size_t>(k)] + rt.zbarpow[static_cast<std::size_t>(k)];
                    // remainder branch
                    choice[d] = -1;
                    recurse(d + 1, mprod);
                    // jet branches
                    for (int ell = 0; ell <= L; ++ell) {
                        const complexd s = 2.0 * mu[static_cast<std::size_t>(k)] +
                                           static_cast<double>(ab + 2 * ell) -
                                           static_cast<double>(rc.p[static_cast<std::size_t>(k)]) -
                                           static_cast<double>(term.q[static_cast<std::size_t>(k)]);
                        if (std::abs(s + 2.0) < 1e-12 * lam_scale)
                            throw pole_proximity_error("λ lies on a pole hyperplane of the continuation",
                                                       rc.rows[static_cast<std::size_t>(k)]);
                        choice[d] = ell;
                        recurse(d + 1, mprod * detail::mfac(s));
                    }
                    choice[d] = -2;
                };
                recurse(0, complexd{1.0, 0.0});
            }
        }
    }

    MeromorphicValue out;
    out.pole_factors = std::move(scratch.poles);
    out.value = pairwise_sum(std::span<const complexd>(scratch.values));
    out.error = scratch.error;
    out.evals = scratch.evals;
    return out;
}

// ---------------------------------------------------------------------------
// Resonance detection: exact rational dependence of the exponent rows.
// ---------------------------------------------------------------------------

struct ResonanceResult {
    bool resonant = false;
    std::vector<int> certificate; // integer dependency Σ c_j a_j = 0
};

inline ResonanceResult detect_resonance(const ChartSpec& chart) {
    const int m = chart.factors();
    const int n = chart.n;
    // row-reduce the m×n exponent matrix over Q, tracking combinations
    std::vector<std::vector<Rational>> A(static_cast<std::size_t>(m),
                                         std::vector<Rational>(static_cast<std::size_t>(n)));
    std::vector<std::vector<Rational>> C(static_cast<std::size_t>(m),
                                         std::vector<Rational>(static_cast<std::size_t>(m)));
    for (int j = 0; j < m; ++j) {
        C[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = 1;
        for (int k = 0; k < n; ++k)
            A[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
                chart.exponents[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    }
    int rank = 0;
    for (int col = 0; col < n && rank < m; ++col) {
        int pivot = -1;
        for (int r = rank; r < m; ++r)
            if (A[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] != 0) { pivot = r; break; }
        if (pivot < 0) continue;
        std::swap(A[static_cast<std::size_t>(pivot)], A[static_cast<std::size_t>(rank)]);
        std::swap(C[static_cast<std::size_t>(pivot)], C[static_cast<std::size_t>(rank)]);
        for (int r = 0; r < m; ++r) {
            if (r == rank) continue;
            if (A[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] == 0) continue;
            Rational f = A[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                         A[static_cast<std::size_t>(rank)][static_cast<std::size_t>(col)];
            for (int k = 0; k < n; ++k)
                A[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] -=
                    f * A[static_cast<std::size_t>(rank)][static_cast<std::size_t>(k)];
            for (int k = 0; k < m; ++k)
                C[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] -=
                    f * C[static_cast<std::size_t>(rank)][static_cast<std::size_t>(k)];
        }
        ++rank;
    }
    ResonanceResult res;
    res.resonant = rank < m;
    if (res.resonant) {
        // first zero row's combination, scaled to coprime integers
        for (int r = rank; r < m; ++r) {
            bool zero = true;
            for (int k = 0; k < n; ++k)
                if (A[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] != 0) zero = false;
            if (!zero) continue;
            using boost::multiprecision::cpp_int;
            cpp_int l = 1;
            for (int j = 0; j < m; ++j)
                l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(
                                                      C[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]));
            std::vector<cpp_int> v(static_cast<std::size_t>(m));
            cpp_int g = 0;
            for (int j = 0; j < m; ++j) {
                Rational x = C[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] * l;
                v[static_cast<std::size_t>(j)] = boost::multiprecision::numerator(x);
                g = boost::multiprecision::gcd(g, v[static_cast<std::size_t>(j)]);
            }
            if (g == 0) continue;
            int lead = 0;
            while (lead < m && v[static_cast<std::size_t>(lead)] == 0) ++lead;
            const bool flip = lead < m && v[static_cast<std::size_t>(lead)] < 0;
            res.certificate.clear();
            for (int j = 0; j < m; ++j) {
                cpp_int x = v[static_cast<std::size_t>(j)] / g;
                if (flip) x = -x;
                res.certificate.push_back(x.convert_to<int>());
            }
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Direct evaluation for Re λ large: the ∂̄-expanded integrand without
// integration by parts, the reference oracle for continue_eval. Nontrivial
// units are folded in as exp(λ log|f̃|²) through the non-radial path.
// ---------------------------------------------------------------------------

inline QuadResult mellin_direct(const ChartSpec& chart, const TestForm& t, const LambdaPoint& lam,
                                const QuadratureSpec& spec) {
    chart.validate();
    const int n = chart.n;
    const int m = chart.factors();
    if (static_cast<int>(lam.size()) != m) throw dimension_error("lambda size != factor count");
    const int flagged = set_size(chart.dbar_flags);
    if (t.antiholomorphic_degree() + flagged != n)
        throw std::invalid_argument("test form bidegree does not complete to (n,n) under the flags");

    // expand the flagged ∂̄'s fully: each contributes λ_j a_{jk} dz̄_k/z̄_k plus,
    // for a nontrivial unit, the smooth λ_j conj(∂_k f̃_j / f̃_j) dz̄_k terms
    struct Branch {
        complexd coef{1.0, 0.0};
        std::vector<int> q;
        TestForm piece;
        std::vector<std::pair<int, int>> unit_dbar; // (factor j, variable k)
    };
    std::vector<Branch> work{
        {complexd{1.0, 0.0}, std::vector<int>(static_cast<std::size_t>(n), 0), t, {}}};
    for (int j = m - 1; j >= 0; --j) {
        if (!set_contains(chart.dbar_flags, j)) continue;
        std::vector<Branch> next;
        for (const auto& base : work)
            for (int k = 0; k < n; ++k) {
                const int ajk = chart.exponents[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                if (ajk != 0) {
                    Branch b = base;
                    b.piece = detail::wedge_dzbar(base.piece, k, /*by_parts=*/false);
                    if (!b.piece.summands().empty()) {
                        b.coef *= lam[static_cast<std::size_t>(j)] * static_cast<double>(ajk);
                        b.q[static_cast<std::size_t>(k)] += 1;
                        next.push_back(std::move(b));
                    }
                }
                if (!chart.unit_trivial(j) &&
                    !chart.units[static_cast<std::size_t>(j)].derivative(k).is_zero()) {
                    Branch b = base;
                    b.piece = detail::wedge_dzbar(base.piece, k, /*by_parts=*/false);
                    if (!b.piece.summands().empty()) {
                        b.coef *= lam[static_cast<std::size_t>(j)];
                        b.unit_dbar.emplace_back(j, k);
                        next.push_back(std::move(b));
                    }
                }
            }
        work = std::move(next);
    }

    // per-variable weights and pole orders
    auto rows = chart.mu_rows();
    auto p = chart.pole_orders();
    std::vector<complexd> mu(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        complexd acc{};
        for (int j = 0; j < m; ++j)
            acc += static_cast<double>(rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]) *
                   lam[static_cast<std::size_t>(j)];
        mu[static_cast<std::size_t>(k)] = acc;
    }

    QuadResult out;
    const complexd vol = volume_factor(n);
    std::vector<complexd> vals;
    for (const auto& b : work) {
        std::function<complexd(std::span<const complexd>)> extra;
        if (!chart.all_units_trivial()) {
            auto unit_dbar = b.unit_dbar;
            extra = [chart, lam, unit_dbar](std::span<const complexd> z) {
                complexd w{1.0, 0.0};
                for (int j = 0; j < chart.factors(); ++j) {
                    if (chart.unit_trivial(j)) continue;
                    const auto& u = chart.units[static_cast<std::size_t>(j)];
                    const complexd uv = u.evaluate<std::span<const complexd>, complexd>(z);
                    // |f̃|^{2λ} / f̃ with f̃ never vanishing on the domain
                    w *= std::exp(lam[static_cast<std::size_t>(j)] * std::log(std::norm(uv))) / uv;
                }
                for (const auto& [j, k] : unit_dbar) {
                    const auto& u = chart.units[static_cast<std::size_t>(j)];
                    const complexd uv = u.evaluate<std::span<const complexd>, complexd>(z);
                    const complexd du = u.derivative(k).evaluate<std::span<const complexd>, complexd>(z);
                    w *= std::conj(du / uv);
                }
                return w;
            };
        }
        for (const auto& summand : b.piece.summands()) {
            StructuredIntegrand I;
            I.n = n;
            I.mu = mu;
            I.p = p;
            I.q = b.q;
            I.data = summand.scalar;
            I.extra = extra;
            try {
                auto r = quad_nested(I, spec);
                vals.push_back(vol * b.coef * r.value);
                out.error += std::abs(vol * b.coef) * r.error;
                out.evals += r.evals;
            } catch (const not_integrable_error&) {
                throw not_integrable_error("Re λ too small for direct Mellin evaluation");
            }
        }
    }
    out.value = pairwise_sum(std::span<const complexd>(vals));
    return out;
}

} // namespace rescur
