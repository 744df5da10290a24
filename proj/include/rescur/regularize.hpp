#pragma once

#include "rescur/cutoff.hpp"
#include "rescur/mellin.hpp"

namespace rescur {

struct non_convergent_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// The regularized integral: χ/χ̃ products against the same reduced terms as
// the Mellin side. A ∂̄-flagged factor appears as χ̃_j(|z^{a_j}|²/ε_j) when its
// dz̄/z̄ was absorbed and as plain χ_j when the ∂̄ was integrated by parts;
// unflagged factors stay plain χ_j.
// ---------------------------------------------------------------------------

namespace detail {

/// t_j = |z^{a_j}|²/ε_j as a profile factor on the reduced data.
inline ProfileFactor cutoff_factor(const CutoffSpec& c, bool tilde, const ExponentVector& a,
                                   double eps) {
    ProfileFactor f;
    f.prof = c.as_profile(tilde);
    f.arg_coef = complexd{1.0 / std::sqrt(eps), 0.0};
    f.arg_exps = a;
    return f;
}

/// Exact ε_j → 0 limit weight of an absorbed χ̃ factor in a single variable
/// of multiplicity b: only the critical radial order survives, with weight
/// (1/2b) ∫ χ̃(t)/t dt = (1/2b) (cutoff independent).
inline double boundary_weight(int b) { return 1.0 / (2.0 * b); }

} // namespace detail

/// Evaluate ∫ (χ/χ̃ pattern) / Π f_j ∧ t at an ε in the closed first octant.
/// The ∂̄ pattern is chart.dbar_flags. Boundary entries ε_j = 0 are evaluated
/// as the continuous extension: plain factors become 1, absorbed single
/// variable factors reduce to their critical radial jet; coupled boundary
/// factors fall back to Richardson extrapolation in ε_j.
inline QuadResult reg_integral(const ChartSpec& chart, const TestForm& t,
                               const std::vector<CutoffSpec>& cutoffs, const EpsPoint& eps,
                               const QuadratureSpec& spec) {
    chart.validate();
    if (!chart.all_units_trivial())
        throw std::invalid_argument("regularized evaluation requires units ≡ 1");
    const int n = chart.n;
    const int m = chart.factors();
    if (static_cast<int>(cutoffs.size()) != m) throw dimension_error("one cutoff per factor");
    if (static_cast<int>(eps.eps.size()) != m) throw dimension_error("one eps entry per factor");

    ReducedChart rc = reduce_chart(chart, t);

    // coupled boundary factors need the extrapolation fallback
    for (int j = 0; j < m; ++j) {
        if (eps.eps[static_cast<std::size_t>(j)] > 0.0) continue;
        if (!set_contains(chart.dbar_flags, j)) continue; // plain factor: drop below
        int vars = 0;
        for (int k = 0; k < n; ++k)
            if (chart.exponents[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] > 0) ++vars;
        bool absorbed_somewhere = false;
        for (const auto& term : rc.terms) absorbed_somewhere |= term.factor_absorbed(j);
        if (vars > 1 && absorbed_somewhere) {
            // extrapolate in ε_j over a geometric grid
            std::array<complexd, 3> v{};
            QuadResult out;
            int i = 0;
            for (double e : {1e-4, 2.5e-5, 6.25e-6}) {
                EpsPoint shifted = eps;
                shifted.eps[static_cast<std::size_t>(j)] = e;
                auto r = reg_integral(chart, t, cutoffs, shifted, spec);
                v[static_cast<std::size_t>(i++)] = r.value;
                out.error = std::max(out.error, r.error);
                out.evals += r.evals;
            }
            out.value = v[2] + (v[2] - v[1]) * (v[2] - v[1]) / ((v[1] - v[0]) - (v[2] - v[1]) + complexd{1e-300, 0});
            out.error += std::abs(v[2] - v[1]);
            return out;
        }
    }

    const complexd vol = volume_factor(n);
    QuadResult out;
    std::vector<complexd> vals;

    for (const auto& term : rc.terms) {
        // cutoff factors for positive ε; boundary bookkeeping for zeros
        Scalar cut(n, complexd{1.0, 0.0});
        struct BoundaryVar {
            int var;
            int multiplicity;
        };
        std::vector<BoundaryVar> boundary;
        bool term_alive = true;
        for (int j = 0; j < m && term_alive; ++j) {
            const bool tilde = term.factor_absorbed(j);
            const double ej = eps.eps[static_cast<std::size_t>(j)];
            if (ej > 0.0) {
                Scalar f(n);
                ScalarTerm st(n);
                st.factors.push_back(detail::cutoff_factor(cutoffs[static_cast<std::size_t>(j)], tilde,
                                                           chart.exponents[static_cast<std::size_t>(j)], ej));
                f.terms().push_back(std::move(st));
                cut = cut * f;
            } else if (tilde) {
                // single-variable absorbed factor at the boundary
                int var = -1, b = 0;
                for (int k = 0; k < n; ++k)
                    if (chart.exponents[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] > 0) {
                        var = k;
                        b = chart.exponents[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                    }
                boundary.push_back({var, b});
            }
            // plain factor at ε_j = 0: χ ≡ 1 off the zero set, dropped
        }
        if (!term_alive) continue;

        const double pref = term.constant; // λ-prefactors have become the χ̃ factors

        auto trunc = [&] {
            TestForm probe(n, 0);
            for (const auto& s : term.piece.summands()) probe.add(s.scalar, 0);
            return probe.support_radii();
        }();

        for (const auto& summand : term.piece.summands()) {
            Scalar data = cut * summand.scalar;
            for (const auto& rt : radial_normal_form(data)) {
                bool selected = true;
                for (int k = 0; k < n && selected; ++k) {
                    const int nu = rt.zpow[static_cast<std::size_t>(k)] - rt.zbarpow[static_cast<std::size_t>(k)] -
                                   rc.p[static_cast<std::size_t>(k)] + term.q[static_cast<std::size_t>(k)];
                    if (nu != 0) selected = false;
                }
                if (!selected) continue;

                // eliminate boundary variables through their critical radial order
                std::vector<detail::RadialCoeff> coeffs;
                {
                    detail::RadialCoeff seed;
                    seed.cst = 1.0;
                    seed.vpow = ev_zero(n);
                    seed.facs = rt.rad;
                    coeffs.push_back(std::move(seed));
                }
                double weight = 1.0;
                std::vector<int> elim;
                bool dead = false;
                for (const auto& bv : boundary) {
                    const int k = bv.var;
                    const int ab = rt.zpow[static_cast<std::size_t>(k)] + rt.zbarpow[static_cast<std::size_t>(k)];
                    const int depth = rc.p[static_cast<std::size_t>(k)] + term.q[static_cast<std::size_t>(k)] - 2 - ab;
                    if (depth < 0) { dead = true; break; }   // shallower orders scale to 0
                    if (depth % 2 != 0) { dead = true; break; }
                    const int crit = depth / 2;
                    // deeper radial orders diverge as ε_j → 0: their
                    // coefficients must vanish for the limit to exist
                    for (int ell = 0; ell < crit; ++ell) {
                        std::vector<detail::RadialCoeff> deep;
                        for (const auto& c : coeffs)
                            for (auto& piece : detail::taylor_vk(c, k, ell)) deep.push_back(std::move(piece));
                        double mass = 0.0;
                        for (const auto& c : deep) mass = std::max(mass, std::abs(c.cst));
                        if (mass > 1e-12)
                            throw non_convergent_error(
                                "regularized integral diverges at the octant boundary (deep radial order)");
                    }
                    std::vector<detail::RadialCoeff> next;
                    for (const auto& c : coeffs)
                        for (auto& piece : detail::taylor_vk(c, k, crit)) next.push_back(std::move(piece));
                    coeffs = std::move(next);
                    weight *= 2.0 * M_PI * detail::boundary_weight(bv.multiplicity);
                    elim.push_back(k);
                    if (coeffs.empty()) { dead = true; break; }
                }
                if (dead || coeffs.empty()) continue;

                RadialLeaf leaf;
                leaf.n = n;
                leaf.coef = vol * pref * rt.coef * weight;
                leaf.trunc = trunc;
                leaf.exponent.assign(static_cast<std::size_t>(n), complexd{});
                for (int k = 0; k < n; ++k) {
                    if (std::find(elim.begin(), elim.end(), k) != elim.end()) continue;
                    const double ab = rt.zpow[static_cast<std::size_t>(k)] + rt.zbarpow[static_cast<std::size_t>(k)];
                    leaf.vars.push_back(k);
                    leaf.exponent[static_cast<std::size_t>(k)] =
                        complexd{ab - rc.p[static_cast<std::size_t>(k)] - term.q[static_cast<std::size_t>(k)] + 1.0,
                                 0.0};
                }
                for (const auto& c : coeffs) {
                    RadialAddend ad;
                    ad.cst = c.cst;
                    ad.vpow = c.vpow;
                    ad.factors = c.facs;
                    leaf.addends.push_back(std::move(ad));
                }
                auto r = detail::integrate_leaf(leaf, spec);
                vals.push_back(r.value);
                out.error += r.error;
                out.evals += r.evals;
            }
        }
    }
    out.value = pairwise_sum(std::span<const complexd>(vals));
    return out;
}

// ---------------------------------------------------------------------------
// ε paths and sweeps
// ---------------------------------------------------------------------------

struct EpsPath {
    enum class Kind { parabolic, iterated_admissible, straight };
    Kind kind = Kind::parabolic;
    std::vector<double> parabolic_exponents; // a_j > 0
    std::vector<int> order;                  // iterated: innermost factor first
    std::vector<double> delta_grid;          // strictly decreasing towards 0
    std::vector<double> line_from, line_to;  // straight segment endpoints

    static EpsPath parabolic(std::vector<double> exponents, std::vector<double> deltas) {
        EpsPath p;
        p.kind = Kind::parabolic;
        p.parabolic_exponents = std::move(exponents);
        p.delta_grid = std::move(deltas);
        p.validate();
        return p;
    }
    static EpsPath iterated(std::vector<int> order, std::vector<double> deltas) {
        EpsPath p;
        p.kind = Kind::iterated_admissible;
        p.order = std::move(order);
        p.delta_grid = std::move(deltas);
        p.validate();
        return p;
    }
    static EpsPath straight(std::vector<double> from, std::vector<double> to, int points) {
        EpsPath p;
        p.kind = Kind::straight;
        p.line_from = std::move(from);
        p.line_to = std::move(to);
        p.delta_grid.resize(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i)
            p.delta_grid[static_cast<std::size_t>(i)] = std::pow(0.5, i); // geometric towards `to`
        p.validate();
        return p;
    }

    void validate() const {
        if (kind == Kind::parabolic)
            for (double a : parabolic_exponents)
                if (a <= 0) throw std::invalid_argument("parabolic exponents must be positive");
        for (std::size_t i = 1; i < delta_grid.size(); ++i)
            if (!(delta_grid[i] < delta_grid[i - 1]))
                throw std::invalid_argument("delta grid must decrease strictly");
        if (!delta_grid.empty() && delta_grid.back() <= 0)
            throw std::invalid_argument("delta grid must stay positive");
    }
};

struct SweepRow {
    double delta = 0.0;
    std::vector<double> eps;
    complexd value{};
    double err = 0.0;
};

struct HolderEstimate {
    double gamma = 0.0;
    double stderr_gamma = 0.0;
    double residual = 0.0;
    bool ok = false;
    bool log_warning = false; // curvature hints at a logarithmic factor
};

struct SweepResult {
    std::vector<SweepRow> rows;
    complexd limit{};
    double limit_err = 0.0;
    bool converged = false;
    HolderEstimate holder;
};

namespace detail {

/// Aitken Δ²-accelerated limit of a convergent sequence with error estimate.
inline std::pair<complexd, double> accelerate(const std::vector<complexd>& v) {
    if (v.empty()) return {complexd{}, 0.0};
    if (v.size() == 1) return {v[0], 0.0};
    std::vector<complexd> cur = v;
    complexd best = cur.back();
    double err = std::abs(cur[cur.size() - 1] - cur[cur.size() - 2]);
    for (int round = 0; round < 2 && cur.size() >= 3; ++round) {
        std::vector<complexd> next;
        for (std::size_t i = 0; i + 2 < cur.size(); ++i) {
            const complexd d1 = cur[i + 1] - cur[i];
            const complexd d2 = cur[i + 2] - cur[i + 1];
            const complexd den = d2 - d1;
            if (std::abs(den) < 1e-300)
                next.push_back(cur[i + 2]);
            else
                next.push_back(cur[i + 2] - d2 * d2 / den);
        }
        const double e = std::abs(next.back() - best);
        best = next.back();
        err = std::min(err, e);
        cur = std::move(next);
    }
    return {best, err};
}

inline bool decreasing_diffs(const std::vector<complexd>& v) {
    if (v.size() < 3) return false;
    const double floor = 1e-7 * (std::abs(v.back()) + 1e-30);
    double prev = std::abs(v[1] - v[0]);
    for (std::size_t i = 2; i < v.size(); ++i) {
        const double d = std::abs(v[i] - v[i - 1]);
        if (d <= floor) return true; // differences have hit the quadrature noise
        if (d > 0.95 * prev) return false;
        prev = d;
    }
    return true;
}

} // namespace detail

/// Least-squares Hölder exponent from samples (|ε-ε*|, |I(ε)-I*|).
inline HolderEstimate holder_estimate(const std::vector<std::pair<double, double>>& samples) {
    HolderEstimate h;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, y] : samples)
        if (x > 0 && y > 0) pts.emplace_back(std::log(x), std::log(y));
    if (pts.size() < 8) throw std::invalid_argument("holder_estimate needs at least 8 usable samples");
    double xmin = pts.front().first, xmax = pts.front().first;
    for (auto& [x, y] : pts) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    if (xmax - xmin < 3.0 * std::log(10.0))
        throw std::invalid_argument("holder_estimate needs 3 decades of dynamic range");
    const double N = static_cast<double>(pts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = N * sxx - sx * sx;
    h.gamma = (N * sxy - sx * sy) / det;
    const double intercept = (sy - h.gamma * sx) / N;
    double ss = 0;
    for (auto& [x, y] : pts) {
        const double r = y - (intercept + h.gamma * x);
        ss += r * r;
    }
    h.residual = std::sqrt(ss / N);
    h.stderr_gamma = std::sqrt((ss / (N - 2)) * (N / det));
    h.ok = h.residual < 0.5;
    // quadratic probe: log-curvature hints at a logarithmic factor
    double sx3 = 0, sx4 = 0, sx2y = 0;
    for (auto& [x, y] : pts) {
        sx3 += x * x * x;
        sx4 += x * x * x * x;
        sx2y += x * x * y;
    }
    const double A[3][3] = {{N, sx, sxx}, {sx, sxx, sx3}, {sxx, sx3, sx4}};
    const double b[3] = {sy, sxy, sx2y};
    const double D = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
                     A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
                     A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
    if (std::abs(D) > 1e-12) {
        double M[3][4] = {{A[0][0], A[0][1], A[0][2], b[0]},
                          {A[1][0], A[1][1], A[1][2], b[1]},
                          {A[2][0], A[2][1], A[2][2], b[2]}};
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r2 = col + 1; r2 < 3; ++r2)
                if (std::abs(M[r2][col]) > std::abs(M[piv][col])) piv = r2;
            std::swap(M[piv], M[col]);
            for (int r2 = 0; r2 < 3; ++r2) {
                if (r2 == col || M[col][col] == 0.0) continue;
                const double f = M[r2][col] / M[col][col];
                for (int c2 = col; c2 < 4; ++c2) M[r2][c2] -= f * M[col][c2];
            }
        }
        if (M[2][2] != 0.0) {
            const double quad = M[2][3] / M[2][2];
            if (std::abs(quad) > 0.02) h.log_warning = true;
        }
    }
    return h;
}

/// Sweep the regularized integral along an ε path and extrapolate the limit.
inline SweepResult sweep(const ChartSpec& chart, const TestForm& t,
                         const std::vector<CutoffSpec>& cutoffs, const EpsPath& path,
                         const QuadratureSpec& spec) {
    path.validate();
    const int m = chart.factors();
    SweepResult out;

    auto eval_at = [&](const std::vector<double>& eps) {
        return reg_integral(chart, t, cutoffs, EpsPoint(eps), spec);
    };

    switch (path.kind) {
        case EpsPath::Kind::parabolic: {
            if (static_cast<int>(path.parabolic_exponents.size()) != m)
                throw dimension_error("one parabolic exponent per factor");
            std::vector<complexd> vals;
            for (double d : path.delta_grid) {
                std::vector<double> eps(static_cast<std::size_t>(m));
                for (int j = 0; j < m; ++j)
                    eps[static_cast<std::size_t>(j)] =
                        std::pow(d, path.parabolic_exponents[static_cast<std::size_t>(j)]);
                auto r = eval_at(eps);
                out.rows.push_back({d, eps, r.value, r.error});
                vals.push_back(r.value);
            }
            out.converged = detail::decreasing_diffs(vals);
            auto [lim, err] = detail::accelerate(vals);
            out.limit = lim;
            out.limit_err = err;
            break;
        }
        case EpsPath::Kind::iterated_admissible: {
            std::vector<int> ord = path.order;
            if (ord.empty())
                for (int j = 0; j < m; ++j) ord.push_back(j);
            if (static_cast<int>(ord.size()) != m)
                throw dimension_error("iterated order must list every factor");
            // innermost variable extrapolated first, recursively
            std::function<std::pair<complexd, double>(std::size_t, std::vector<double>&)> stage =
                [&](std::size_t level, std::vector<double>& eps) -> std::pair<complexd, double> {
                const int j = ord[level];
                std::vector<complexd> vals;
                double errs = 0.0;
                for (double d : path.delta_grid) {
                    eps[static_cast<std::size_t>(j)] = d;
                    if (level == 0) {
                        auto r = eval_at(eps);
                        vals.push_back(r.value);
                        errs = std::max(errs, r.error);
                        out.rows.push_back({d, eps, r.value, r.error});
                    } else {
                        auto [v, e] = stage(level - 1, eps);
                        vals.push_back(v);
                        errs = std::max(errs, e);
                    }
                }
                auto [lim, err] = detail::accelerate(vals);
                return {lim, err + errs};
            };
            std::vector<double> eps(static_cast<std::size_t>(m), 1.0);
            auto [lim, err] = stage(static_cast<std::size_t>(m - 1), eps);
            out.limit = lim;
            out.limit_err = err;
            out.converged = true;
            break;
        }
        case EpsPath::Kind::straight: {
            if (static_cast<int>(path.line_from.size()) != m ||
                static_cast<int>(path.line_to.size()) != m)
                throw dimension_error("straight path endpoints must match the factor count");
            for (double s : path.delta_grid) {
                std::vector<double> eps(static_cast<std::size_t>(m));
                for (int j = 0; j < m; ++j)
                    eps[static_cast<std::size_t>(j)] =
                        path.line_to[static_cast<std::size_t>(j)] +
                        s * (path.line_from[static_cast<std::size_t>(j)] - path.line_to[static_cast<std::size_t>(j)]);
                auto r = eval_at(eps);
                out.rows.push_back({s, eps, r.value, r.error});
            }
            auto rto = eval_at(path.line_to);
            out.limit = rto.value;
            out.limit_err = rto.error;
            out.converged = true;
            break;
        }
    }

    // Hölder fit against the extrapolated limit when the data allows it
    if (out.rows.size() >= 8) {
        std::vector<std::pair<double, double>> samples;
        for (const auto& row : out.rows) {
            double dist = 0.0;
            for (double e : row.eps) dist += e * e;
            dist = std::sqrt(dist);
            samples.emplace_back(dist, std::abs(row.value - out.limit));
        }
        try {
            out.holder = holder_estimate(samples);
        } catch (const std::invalid_argument&) {
            out.holder.ok = false;
        }
    }
    return out;
}

} // namespace rescur
