#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "rescur/common.hpp"

namespace rescur {

/// Knobs for the numeric integrators. Radial rules are composite
/// Gauss-Legendre on geometrically spaced panels (which absorb the r^{2Reλ}
/// endpoint behaviour); angular rules are trapezoid sums, spectrally accurate
/// for the periodic integrands here.
struct QuadratureSpec {
    int radial_order = 10;      // GL nodes per panel
    int panels_per_decade = 2;
    int angular_order = 96;     // trapezoid nodes for non-radial data
    double r_min = 1e-9;
    double target_tol = 1e-7;
    long long node_budget = 200'000'000;

    void validate() const {
        if (radial_order < 4 || angular_order < 4)
            throw std::invalid_argument("quadrature orders must be at least 4");
        if (r_min <= 0) throw std::invalid_argument("r_min must be positive");
        if (node_budget <= 0) throw std::invalid_argument("node budget must be positive");
    }

    QuadratureSpec refined() const {
        QuadratureSpec r = *this;
        r.radial_order += 4;
        r.panels_per_decade += 1;
        r.angular_order = angular_order * 3 / 2;
        return r;
    }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = -t;
        x[static_cast<std::size_t>(n - 1 - i)] = t;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
        w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
    }
}

} // namespace detail

/// Composite radial rule on [r_min, r_max] with geometric panels.
struct RadialGrid {
    std::vector<double> r;
    std::vector<double> w; // plain dr weights

    RadialGrid() = default;
    RadialGrid(double r_min, double r_max, int panels_per_decade, int order) {
        if (!(r_max > r_min)) throw std::invalid_argument("empty radial range");
        std::vector<double> gx, gw;
        detail::gauss_legendre(order, gx, gw);
        const double decades = std::log10(r_max / r_min);
        const int panels = std::max(1, static_cast<int>(std::ceil(decades * panels_per_decade)));
        // geometric edges absorb the r^{2Reλ} behaviour at 0; wide top panels
        // are split linearly so O(1)-scale features (plateau transitions,
        // cutoff shoulders) stay resolved
        const double max_width = r_max / (2.0 * panels_per_decade);
        std::vector<double> edges{r_min};
        const double ratio = std::pow(r_max / r_min, 1.0 / panels);
        double lo = r_min;
        for (int pnl = 0; pnl < panels; ++pnl) {
            const double hi = (pnl == panels - 1) ? r_max : lo * ratio;
            const int split = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width)));
            for (int s = 1; s <= split; ++s) edges.push_back(lo + (hi - lo) * s / split);
            lo = hi;
        }
        for (std::size_t pnl = 0; pnl + 1 < edges.size(); ++pnl) {
            const double a = edges[pnl], b = edges[pnl + 1];
            const double mid = 0.5 * (b + a), half = 0.5 * (b - a);
            for (int i = 0; i < order; ++i) {
                r.push_back(mid + half * gx[static_cast<std::size_t>(i)]);
                w.push_back(half * gw[static_cast<std::size_t>(i)]);
            }
        }
    }

    std::size_t size() const { return r.size(); }
};

/// Trapezoid nodes on [0, 2π).
struct AngularGrid {
    std::vector<double> theta;
    double weight; // uniform

    explicit AngularGrid(int order) : weight(2.0 * M_PI / order) {
        theta.reserve(static_cast<std::size_t>(order));
        for (int i = 0; i < order; ++i) theta.push_back(2.0 * M_PI * i / order);
    }
};

} // namespace rescur
