#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rescur/integrand.hpp"

using namespace rescur;
using Catch::Approx;

namespace {

QuadratureSpec spec() { return {}; }

Scalar const_data_1d(double c = 1.0) { return Scalar(1, complexd{c, 0.0}); }

Scalar gaussian_data_1d(double amp = 1.0, double radius = 1.0) {
    return Scalar::profile_of_var(1, Profile1D::gaussian(amp, radius), 0);
}

} // namespace

TEST_CASE("quad1d closed forms") {
    SECTION("disk integral of |z|^{2λ}: π/(λ+1)") {
        // truncation at the unit disk; data ≡ 1
        SingularKernel1D k{complexd{1.0, 0.0}, 0, 0};
        auto r = quad1d(k, const_data_1d(), spec(), 1.0);
        CHECK(std::abs(r.value - M_PI / 2.0) < 1e-9);
        SingularKernel1D k2{complexd{-0.5, 0.0}, 0, 0};
        auto r2 = quad1d(k2, const_data_1d(), spec(), 1.0);
        CHECK(std::abs(r2.value - 2.0 * M_PI) < 1e-7);
    }

    SECTION("z^{-1} against radial data vanishes by angular orthogonality") {
        SingularKernel1D k{complexd{0.5, 0.0}, 1, 0};
        auto r = quad1d(k, gaussian_data_1d(), spec());
        CHECK(std::abs(r.value) < 1e-12);
    }

    SECTION("matched polynomial data gives Γ-type values") {
        // ∫ |z|^{2λ} z̄ z^{-1} · z² e^{-|z|²} dA = 2π ∫ r^{2λ+3} e^{-r²} dr = π Γ(λ+2)
        Scalar data(1);
        {
            ScalarTerm t(1);
            t.zpow = {2};
            t.factors.push_back({Profile1D::gaussian(1.0, 1.0), 0, 0, complexd{1, 0}, {1}});
            data.terms().push_back(std::move(t));
        }
        SingularKernel1D k{complexd{0.0, 0.0}, 1, 1};
        auto r = quad1d(k, data, spec());
        CHECK(std::abs(r.value - M_PI) < 1e-8);
        SingularKernel1D k1{complexd{1.0, 0.0}, 1, 1};
        auto r1 = quad1d(k1, data, spec());
        CHECK(std::abs(r1.value - 2.0 * M_PI) < 1e-7); // π Γ(3)
    }

    SECTION("non-integrable kernels are rejected") {
        SingularKernel1D k{complexd{0.0, 0.0}, 2, 0};
        CHECK_FALSE(k.integrable());
        CHECK_THROWS_AS(quad1d(k, gaussian_data_1d(), spec()), not_integrable_error);
    }
}

TEST_CASE("quad1d agrees with Monte Carlo on random integrable kernels") {
    std::mt19937_64 rng(4711);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int done = 0;
    for (int trial = 0; trial < 40 && done < 10; ++trial) {
        const double lam = 0.8 * unif(rng);
        const int k = static_cast<int>(3.0 * unif(rng));
        const int mbar = static_cast<int>(2.0 * unif(rng));
        // variance-finite so the 3σ comparison is meaningful: 2(2λ-k+m̄) > -2
        if (2.0 * (2.0 * lam - k + mbar) <= -1.0) continue;
        // matched data so the value is nonzero: z^{k-m̄} · gaussian when k ≥ m̄
        if (k - mbar < 0) continue;
        ++done;
        Scalar data(1);
        {
            ScalarTerm t(1);
            t.zpow = {k - mbar};
            t.factors.push_back({Profile1D::gaussian(1.0, 0.8), 0, 0, complexd{1, 0}, {1}});
            data.terms().push_back(std::move(t));
        }
        SingularKernel1D kern{complexd{lam, 0.0}, k, mbar};
        auto q = quad1d(kern, data, spec());

        const double R = 6.4; // 8 × radius
        std::size_t N = 100000;
        complexd sum{}, sumsq{};
        std::mt19937_64 mcrng(trial * 7919 + 13);
        for (std::size_t i = 0; i < N; ++i) {
            const double r = R * std::sqrt(unif(mcrng));
            const double th = 2.0 * M_PI * unif(mcrng);
            const complexd z = std::polar(r, th);
            complexd f = std::pow(r, 2.0 * lam) * std::pow(z, -k) * std::pow(std::conj(z), mbar);
            f *= std::pow(z, k - mbar) * std::exp(-std::norm(z) / 0.64);
            sum += f;
            sumsq += complexd{f.real() * f.real(), f.imag() * f.imag()};
        }
        const double area = M_PI * R * R;
        const complexd mc = area * sum / static_cast<double>(N);
        const double var_re = (sumsq.real() / N - std::pow(sum.real() / N, 2)) / N;
        const double sigma = area * std::sqrt(std::max(var_re, 1e-30));
        INFO("λ=" << lam << " k=" << k << " m̄=" << mbar << " quad=" << q.value << " mc=" << mc);
        CHECK(std::abs(q.value.real() - mc.real()) < 3.0 * sigma + 1e-9);
    }
    CHECK(done == 10);
}

TEST_CASE("cauchy_pompeiu equals 2πi ψ(0) on five profiles") {
    std::vector<ProfilePtr> profiles = {
        Profile1D::gaussian(1.0, 1.0),
        Profile1D::gaussian(2.5, 0.5),
        Profile1D::gaussian(1.0, 0.7, complexd{0.2, 0.1}), // shifted: non-radial path
        Profile1D::poly_gaussian({{{0, 0}, {1.0, 0.0}}, {{1, 1}, {0.5, 0.0}}}, 0.8),
        Profile1D::plateau(0.6, 1.8),
    };
    for (const auto& psi : profiles) {
        auto r = cauchy_pompeiu(psi, spec());
        const complexd expect = complexd{0.0, 2.0 * M_PI} * psi->value(complexd{0.0, 0.0});
        INFO("profile kind " << static_cast<int>(psi->kind) << " got " << r.value << " want " << expect);
        CHECK(std::abs(r.value - expect) <= 1e-8 * std::abs(expect));
    }

    SECTION("ψ vanishing at the origin") {
        auto psi = Profile1D::poly_gaussian({{{1, 0}, {1.0, 0.0}}}, 0.9); // z · bump
        auto r = cauchy_pompeiu(psi, spec());
        CHECK(std::abs(r.value) <= 1e-8);
    }

    SECTION("linearity in the amplitude") {
        auto a = cauchy_pompeiu(Profile1D::gaussian(1.0, 0.8), spec());
        auto b = cauchy_pompeiu(Profile1D::gaussian(-3.5, 0.8), spec());
        CHECK(std::abs(b.value + 3.5 * a.value) < 1e-9);
    }
}

TEST_CASE("quad_nested") {
    const int n = 3;
    auto b = Profile1D::gaussian(1.0, 0.5);

    SECTION("separable integrand equals the product of 1D integrals") {
        // data z_k · b(z_k) against kernels |z_k|^{2μ} z_k^{-1}
        Scalar data(n, complexd{1.0, 0.0});
        for (int k = 0; k < n; ++k) {
            Scalar f(n);
            ScalarTerm t(n);
            t.zpow = ev_unit(n, k);
            t.factors.push_back({b, 0, 0, complexd{1, 0}, ev_unit(n, k)});
            f.terms().push_back(std::move(t));
            data = data * f;
        }
        StructuredIntegrand I;
        I.n = n;
        I.mu = {complexd{0.7, 0.0}, complexd{1.1, 0.3}, complexd{0.4, -0.2}};
        I.p = {1, 1, 1};
        I.q = {0, 0, 0};
        I.data = data;
        auto whole = quad_nested(I, spec());

        complexd prod{1.0, 0.0};
        for (int k = 0; k < n; ++k) {
            Scalar d1(1);
            ScalarTerm t(1);
            t.zpow = {1};
            t.factors.push_back({b, 0, 0, complexd{1, 0}, {1}});
            d1.terms().push_back(std::move(t));
            auto r = quad1d(SingularKernel1D{I.mu[static_cast<std::size_t>(k)], 1, 0}, d1, spec());
            prod *= r.value;
        }
        CHECK(std::abs(whole.value - prod) <= 1e-6 * std::abs(prod));
    }

    SECTION("zero integrand") {
        StructuredIntegrand I;
        I.n = 2;
        I.mu = {complexd{1, 0}, complexd{1, 0}};
        I.p = {0, 0};
        I.q = {0, 0};
        I.data = Scalar(2);
        auto r = quad_nested(I, spec());
        CHECK(r.value == complexd{});
    }

    SECTION("coupled radial data blocks") {
        // ∫ b(|z1 z2|) b(z1) b(z2) dV factorizes after the radial reduction to
        // a genuine 2D radial integral; compare against a dense 2D radial sum
        const int n2 = 2;
        Scalar data = Scalar::profile(n2, Profile1D::gaussian(1.0, 1.0), {1, 1}) *
                      Scalar::profile_of_var(n2, Profile1D::gaussian(1.0, 0.8), 0) *
                      Scalar::profile_of_var(n2, Profile1D::gaussian(1.0, 0.8), 1);
        StructuredIntegrand I;
        I.n = n2;
        I.mu = {complexd{0.5, 0.0}, complexd{0.25, 0.0}};
        I.p = {0, 0};
        I.q = {0, 0};
        I.data = data;
        auto got = quad_nested(I, spec());
        // dense oracle on a fine grid
        RadialGrid g(1e-7, 6.4, 4, 16);
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = 0; j < g.size(); ++j) {
                const double r1 = g.r[i], r2 = g.r[j];
                acc += g.w[i] * g.w[j] * std::pow(r1, 2.0 * 0.5 + 1.0) * std::pow(r2, 2.0 * 0.25 + 1.0) *
                       std::exp(-r1 * r1 * r2 * r2) * std::exp(-r1 * r1 / 0.64) *
                       std::exp(-r2 * r2 / 0.64);
            }
        const double oracle = 4.0 * M_PI * M_PI * acc;
        CHECK(std::abs(got.value.real() - oracle) <= 1e-6 * std::abs(oracle));
        CHECK(std::abs(got.value.imag()) < 1e-12);
    }

    SECTION("budget exceeded reports the cap") {
        StructuredIntegrand I;
        I.n = 3;
        I.mu = {complexd{1, 0}, complexd{1, 0}, complexd{1, 0}};
        I.p = {0, 0, 0};
        I.q = {0, 0, 0};
        I.data = Scalar::profile(3, Profile1D::gaussian(1.0, 1.0), {1, 1, 1}) *
                 Scalar::profile_of_var(3, b, 0) * Scalar::profile_of_var(3, b, 1) *
                 Scalar::profile_of_var(3, b, 2);
        QuadratureSpec tiny;
        tiny.node_budget = 100;
        CHECK_THROWS_AS(quad_nested(I, tiny), budget_exceeded);
    }
}

TEST_CASE("tube residue, diagonal case") {
    const int n = 3;

    SECTION("simple poles pick the constant coefficient, uniformly in ε") {
        // φ = (c0 + z1 z2 z3) dz: value (2πi)³ c0 for every ε
        Scalar data(n, complexd{0.75, 0.25});
        {
            ScalarTerm t(n);
            t.zpow = {1, 1, 1};
            data.terms().push_back(std::move(t));
        }
        TestForm phi = TestForm::top(n, data, 0);
        std::vector<ExponentVector> f = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        const complexd c2pii{0.0, 2.0 * M_PI};
        const complexd expect = c2pii * c2pii * c2pii * complexd{0.75, 0.25};
        complexd prev{};
        for (double e : {1e-2, 1e-4, 1e-6}) {
            auto v = tube_residue_diagonal(f, phi, EpsPoint({e, e, e}));
            CHECK(std::abs(v - expect) <= 1e-10 * std::abs(expect));
            if (prev != complexd{}) CHECK(std::abs(v - prev) <= 1e-8 * std::abs(prev));
            prev = v;
        }
    }

    SECTION("double pole against z1·bump: radial average at the tube radius") {
        // f = (z1², z2, z3), φ = z1 b1(z1) b2(z2) b3(z3) dz: the z1 circle sees
        // ∮ b1/z1 dz1 = 2πi f_{b1}(√ε1); the others give 2πi f_b(√ε)
        auto b1 = Profile1D::gaussian(1.0, 0.4);
        auto b2 = Profile1D::gaussian(0.5, 0.7);
        auto b3 = Profile1D::gaussian(2.0, 0.6);
        Scalar data(n, complexd{1.0, 0.0});
        {
            ScalarTerm t(n);
            t.zpow = {1, 0, 0};
            t.factors.push_back({b1, 0, 0, complexd{1, 0}, {1, 0, 0}});
            t.factors.push_back({b2, 0, 0, complexd{1, 0}, {0, 1, 0}});
            t.factors.push_back({b3, 0, 0, complexd{1, 0}, {0, 0, 1}});
            data = Scalar(n);
            data.terms().push_back(std::move(t));
        }
        TestForm phi = TestForm::top(n, data, 0);
        std::vector<ExponentVector> f = {{2, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        const double e1 = 1e-3, e2 = 2e-3, e3 = 5e-4;
        auto v = tube_residue_diagonal(f, phi, EpsPoint({e1, e2, e3}));
        const complexd c2pii{0.0, 2.0 * M_PI};
        const complexd expect = c2pii * c2pii * c2pii * b1->radial_deriv(0, std::sqrt(e1)) *
                                b2->radial_deriv(0, e2) * b3->radial_deriv(0, e3);
        CHECK(std::abs(v - expect) <= 1e-9 * std::abs(expect));
    }

    SECTION("degenerate tube rejected") {
        TestForm phi = TestForm::top(n, Scalar(n, complexd{1.0, 0.0}), 0);
        std::vector<ExponentVector> f = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        CHECK_THROWS_AS(tube_residue_diagonal(f, phi, EpsPoint({1e-2, 0.0, 1e-2})),
                        std::invalid_argument);
    }

    SECTION("non-diagonal exponents are redirected") {
        TestForm phi = TestForm::top(n, Scalar(n, complexd{1.0, 0.0}), 0);
        std::vector<ExponentVector> f = {{1, 0, 0}, {0, 1, 1}, {0, 0, 1}};
        CHECK_THROWS_WITH(tube_residue_diagonal(f, phi, EpsPoint({1e-2, 1e-2, 1e-2})),
                          Catch::Matchers::ContainsSubstring("non-diagonal"));
    }
}
