#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rescur/decompose.hpp"

using namespace rescur;

namespace {

PolyQ zvar(int n, int i) { return PolyQ::variable(n, i); }
FormQ dz(int n, int i) { return FormQ::dz(n, i); }

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    ComplexQ coef() { return ComplexQ(Rational(uniform(-9, 9), uniform(1, 9)), Rational(uniform(-9, 9), uniform(1, 9))); }
    ExponentVector exps(int n, int maxdeg) {
        ExponentVector e(static_cast<std::size_t>(n), 0);
        int budget = maxdeg;
        for (int i = 0; i < n && budget > 0; ++i) {
            int d = uniform(0, budget);
            e[static_cast<std::size_t>(i)] = d;
            budget -= d;
        }
        return e;
    }
    PolyQ poly(int n, int maxdeg) {
        PolyQ p(n);
        const int t = uniform(1, 4);
        for (int i = 0; i < t; ++i) p.add_term(exps(n, maxdeg), coef());
        return p;
    }
    FormQ form(int n, int degree, int maxdeg = 4) {
        FormQ f(n, degree);
        for (IndexSet K : subsets_of_size((1u << n) - 1u, degree))
            if (uniform(0, 1)) f.add_component(K, poly(n, maxdeg));
        return f;
    }
    IndexSet subset(int n, int minsize) {
        IndexSet s = 0;
        while (set_size(s) < minsize) s = static_cast<IndexSet>(uniform(1, (1 << n) - 1));
        return s;
    }
};

} // namespace

TEST_CASE("restriction decomposition, hand-checked cases") {
    SECTION("constant: everything lands in the head") {
        auto c = FormQ::constant(2, ComplexQ(Rational(7, 2)));
        auto d = restriction_decomposition(c, IndexFamily(0b11));
        CHECK(d.head == c);
        for (const auto& lvl : d.layers)
            for (const auto& [J, f] : lvl) CHECK(f.is_zero());
        CHECK(d.tail.is_zero());
    }

    SECTION("dz1 with I = {1,2}") {
        const int n = 2;
        auto a = dz(n, 0);
        auto d = restriction_decomposition(a, IndexFamily(0b11));
        // head: restriction kills dz1
        CHECK(d.head.is_zero());
        REQUIRE(d.layers.size() == 1);
        // level-1 subsets are {1} and {2}; on V_{2} = {z2=0} the form dz1 survives
        CHECK(d.layers[0].at(0b10) == a);
        CHECK(d.layers[0].at(0b01).is_zero());
        CHECK(d.tail.is_zero());
    }

    SECTION("z1 z2 lands in the tail") {
        const int n = 2;
        auto a = FormQ::from_poly(zvar(n, 0) * zvar(n, 1));
        auto d = restriction_decomposition(a, IndexFamily(0b11));
        CHECK(d.head.is_zero());
        CHECK(d.layers[0].at(0b01).is_zero());
        CHECK(d.layers[0].at(0b10).is_zero());
        CHECK(d.tail == a);
    }
}

TEST_CASE("exact reconstruction and memberships, randomized") {
    Gen g(11);
    for (int iter = 0; iter < 100; ++iter) {
        const int n = g.uniform(2, 5);
        const int k = g.uniform(0, n - 1);
        auto a = g.form(n, k);
        IndexFamily I(g.subset(n, 1));
        auto d = restriction_decomposition(a, I);
        auto rep = verify_decomposition(d, a, I);
        INFO("n=" << n << " k=" << k << " I=" << I.base);
        for (const auto& c : rep.checks) {
            INFO(c.name << " witness: " << c.witness);
            CHECK(c.pass);
        }
    }
}

TEST_CASE("idempotence on tail forms") {
    Gen g(12);
    for (int iter = 0; iter < 50; ++iter) {
        const int n = g.uniform(2, 4);
        IndexFamily I(g.subset(n, 1));
        // anything multiplied by all I-variables vanishes on the full divisor
        PolyQ mono(n, ComplexQ(1));
        for (int i : set_to_indices(I.base)) mono = mono * zvar(n, i);
        auto tail_form = mono * g.form(n, g.uniform(0, n - 1));
        auto d = restriction_decomposition(tail_form, I);
        CHECK(d.head.is_zero());
        for (const auto& lvl : d.layers)
            for (const auto& [J, f] : lvl) CHECK(f.is_zero());
        CHECK(d.tail == tail_form);
    }
}

TEST_CASE("level enumeration order does not change the result") {
    // The recursion subtracts the whole level at once, so any enumeration
    // order of the level subsets gives identical layers. Exercise by
    // decomposing, permuting nothing (the API is deterministic) and instead
    // comparing against a manual re-run that walks levels in reverse.
    Gen g(13);
    for (int iter = 0; iter < 10; ++iter) {
        const int n = 4;
        auto a = g.form(n, g.uniform(0, 3));
        IndexFamily I(g.subset(n, 2));
        auto d = restriction_decomposition(a, I);

        // manual reverse-order recomputation
        FormQ rem = a - restrict_extend(a, I.base);
        for (int j = 1; j <= I.size() - 1; ++j) {
            auto lvl = I.level(j);
            FormQ next = rem;
            for (auto it = lvl.rbegin(); it != lvl.rend(); ++it) {
                auto piece = restrict_extend(rem, *it);
                next = next - piece;
                CHECK(piece == d.layers[static_cast<std::size_t>(j - 1)].at(*it));
            }
            rem = next;
        }
        CHECK(rem == d.tail);
    }
}

TEST_CASE("correction form, hand-checked cases") {
    const int n = 2;
    SECTION("a vanishing on Z_tau needs no correction") {
        auto a = zvar(n, 1) * dz(n, 1); // z2 dz2
        auto corr = correction_form(a, ExponentVector{1, 0}, 1u << 1);
        CHECK(corr.is_zero());
        DivisorSpec ztau{{0, 1}};
        CHECK(vanishes_on(a - corr, ztau));
    }

    SECTION("dz1 is its own correction") {
        auto a = dz(n, 0);
        auto corr = correction_form(a, ExponentVector{1, 0}, 1u << 1);
        CHECK(corr == a);
        auto dsigma = exterior_d(FormQ::from_poly(zvar(n, 0)));
        CHECK(wedge(dsigma, corr).is_zero());
    }

    SECTION("a = dz2 already satisfies the precondition (d(z1)∧dz2 pulls back to 0 on {z2=0})") {
        auto a = dz(n, 1);
        auto corr = correction_form(a, ExponentVector{1, 0}, 1u << 1);
        CHECK(corr.is_zero());
        CHECK(vanishes_on(a - corr, DivisorSpec{{0, 1}}));
    }

    SECTION("precondition violation is reported with the witness") {
        auto a = FormQ::constant(n, ComplexQ(1)); // d(z1)∧1 = dz1 survives on {z2=0}
        try {
            correction_form(a, ExponentVector{1, 0}, 1u << 1);
            FAIL("expected precondition_error");
        } catch (const precondition_error& e) {
            CHECK(e.witness_index == 2);
        }
    }

    SECTION("sigma/tau overlap rejected") {
        CHECK_THROWS_AS(correction_form(dz(n, 0), ExponentVector{1, 0}, 1u << 0),
                        std::invalid_argument);
    }
}

TEST_CASE("correction form properties on generated instances") {
    // Instances are built to satisfy the precondition: components without any
    // tau-differential are multiplied by all tau variables; components with a
    // partial set of tau-differentials by the missing ones.
    Gen g(14);
    int tested = 0;
    for (int iter = 0; iter < 200 && tested < 100; ++iter) {
        const int n = g.uniform(3, 5);
        // sigma support and tau disjoint
        IndexSet tau = g.subset(n, 1);
        ExponentVector sigma(static_cast<std::size_t>(n), 0);
        bool have_sigma = false;
        for (int i = 0; i < n; ++i)
            if (!set_contains(tau, i) && g.uniform(0, 1)) {
                sigma[static_cast<std::size_t>(i)] = g.uniform(1, 3);
                have_sigma = true;
            }
        if (!have_sigma) continue;

        const int k = g.uniform(0, n - 1);
        auto raw = g.form(n, k);
        if (raw.is_zero()) continue;
        FormQ a(n, k);
        for (const auto& [K, p] : raw.components()) {
            PolyQ mono(n, ComplexQ(1));
            for (int i : set_to_indices(tau & ~K)) mono = mono * zvar(n, i);
            a.add_component(K, mono * p);
        }

        // precondition holds by construction; verify anyway
        auto dsigma = exterior_d(FormQ::from_poly(PolyQ::monomial(n, sigma, ComplexQ(1))));
        ExponentVector tau_mono(static_cast<std::size_t>(n), 0);
        for (int i : set_to_indices(tau)) tau_mono[static_cast<std::size_t>(i)] = 1;
        DivisorSpec ztau{tau_mono};
        REQUIRE(vanishes_on(wedge(dsigma, a), ztau));

        auto corr = correction_form(a, sigma, tau);
        CHECK(wedge(dsigma, corr).is_zero());                      // (i)
        DivisorSpec zsigma{sigma};
        CHECK(vanishes_on(corr, zsigma));                          // (ii)
        CHECK(vanishes_on(a - corr, ztau));                        // (iii)
        ++tested;
    }
    CHECK(tested >= 100);
}

TEST_CASE("verification report flags tampering") {
    Gen g(15);
    const int n = 3;
    IndexFamily I(0b011);

    SECTION("self-consistency") {
        auto a = g.form(n, 1);
        auto d = restriction_decomposition(a, I);
        CHECK(verify_decomposition(d, a, I).all_pass());
    }

    SECTION("tampered layer breaks reconstruction") {
        auto a = g.form(n, 1);
        auto d = restriction_decomposition(a, I);
        auto bad = d;
        auto& lvl = bad.layers.at(0);
        auto it = lvl.begin();
        it->second = it->second + dz(n, 0);
        auto rep = verify_decomposition(bad, a, I);
        CHECK_FALSE(rep.all_pass());
        bool recon_failed = false;
        for (const auto& c : rep.checks)
            if (c.name == "reconstruction" && !c.pass) {
                recon_failed = true;
                CHECK(c.witness.find("dz{1}") != std::string::npos);
            }
        CHECK(recon_failed);
    }

    SECTION("tampered tail breaks the membership check") {
        auto a = g.form(n, 0); // degree 0 so that the +constant tamper is well-formed
        auto d = restriction_decomposition(a, I);
        auto bad = d;
        bad.tail = bad.tail + FormQ::constant(n, ComplexQ(1));
        // compare against the correspondingly shifted original so only the
        // membership check can fail
        auto rep = verify_decomposition(bad, a + FormQ::constant(n, ComplexQ(1)), I);
        bool tail_failed = false;
        for (const auto& c : rep.checks)
            if (c.name == "tail vanishes on full divisor" && !c.pass) tail_failed = true;
        CHECK(tail_failed);
    }
}
