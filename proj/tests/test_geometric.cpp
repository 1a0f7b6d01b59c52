#include <gtest/gtest.h>

#include "farey/farey_geometric.hpp"
#include "test_support.hpp"

using namespace farey;

namespace {

const field& F2 = field::prime(2);
const field& F3 = field::prime(3);
const field& F5 = field::prime(5);

poly P(const field& F, const char* s) { return parse_poly(F, s); }
rational_function R(const field& F, const char* s) { return parse_rational(F, s); }
rational_function Rp(const poly& p) { return rational_function(p); }

pmat value(const scaled_pmat& m) {
    const auto n = m.normalized();
    EXPECT_EQ(n.shift, 0);
    return n.m;
}

// the worked six-step orbit of 1/(2t^3 + t^2 + 2 + r)
void check_worked_orbit(const rational_function& r) {
    const poly t = poly::t(F3);
    const rational_function D = Rp(P(F3, "2*t^3+t^2+2")) + r;
    const rational_function f = D.inverse();
    const auto orbit = geo_orbit_product(f, 6);
    const std::vector<std::pair<rational_function, std::int64_t>> expected{
        {f, 0},
        {Rp(t) / D, 1},
        {Rp(P(F3, "t^2")) / D, 2},
        {(Rp(P(F3, "t^2+2")) + r) / Rp(P(F3, "t^3")), -3},
        {(Rp(P(F3, "2")) + r) / Rp(P(F3, "t^2")), -2},
        {(Rp(P(F3, "2")) + r) / Rp(t), -1},
        {r, 0},
    };
    ASSERT_EQ(orbit.states.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(orbit.states[i].f, expected[i].first) << "step " << i;
        EXPECT_EQ(orbit.states[i].n, expected[i].second) << "step " << i;
    }
    const pmat closed{P(F3, "0"), P(F3, "1"), P(F3, "1"), P(F3, "2*t^3+t^2+2")};
    EXPECT_EQ(value(orbit.product), closed);
    EXPECT_EQ(value(orbit.product), geo_closed_form(cf_expand(f, 10), 6));
}

} // namespace

TEST(GeoStep, WorkedOrbit) {
    check_worked_orbit(rational_function::zero(F3));
    check_worked_orbit(R(F3, "1/t"));
    check_worked_orbit(R(F3, "(t+2)/(t^3+t+1)"));
}

TEST(GeoStep, WorkedOrbitInSeriesMode) {
    const auto f = series_from_rational(R(F3, "t/(2*t^4+t^3+2*t+1)"), -30);
    const auto orbit = geo_orbit_product(f, 6);
    EXPECT_TRUE(agree(orbit.states[6].f, series_from_rational(R(F3, "1/t"), -30)));
    EXPECT_EQ(orbit.states[6].n, 0);
    EXPECT_EQ(orbit.states[6].f.floor(), -30 + 6);
}

TEST(GeoStep, SmallExamples) {
    const auto s = geo_step(geo_state<rational_function>{R(F3, "2/t"), 0});
    EXPECT_TRUE(s.f.is_zero());
    EXPECT_EQ(s.n, -1);
    for (std::int64_t n : {-3, 0, 5}) {
        const auto z = geo_step(geo_state<rational_function>{rational_function::zero(F2), n});
        EXPECT_TRUE(z.f.is_zero());
        EXPECT_EQ(z.n, n + 1);
    }
    EXPECT_THROW(geo_step(geo_state<rational_function>{R(F2, "t"), 0}), domain_error);
    EXPECT_THROW(geo_step(geo_state<laurent_series>{laurent_series::zero(F2, -1), 0}), insufficient_precision);
}

TEST(GeoMatrix, Cases) {
    const pmat diag{poly::one(F3), poly(F3), poly(F3), poly::t(F3)};
    EXPECT_EQ(value(geo_matrix(geo_state<rational_function>{R(F3, "1/t^2"), 0})), diag);
    EXPECT_EQ(value(geo_matrix(geo_state<rational_function>{R(F3, "2/t"), 0})),
              (pmat{poly(F3), poly::one(F3), poly::t(F3), P(F3, "2*t")}));
    // n < 0 with [tf] = 0: [[t^-1, 0], [0, 1]]
    const auto m = geo_matrix(geo_state<rational_function>{R(F3, "1/t^2"), -1}).normalized();
    EXPECT_EQ(m.shift, -1);
    EXPECT_EQ(m.m, diag);
    // each step matrix inverts the step on the boundary point: M^-1 . f-ray lands on F(f)-ray,
    // checked through determinants: det is a unit times a power of t
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto f = testutil::random_rational_in_L(F3, 6, rng);
        const std::int64_t n = std::int64_t(rng() % 7) - 3;
        const auto g = geo_matrix(geo_state<rational_function>{f, n});
        const poly det = g.m.det();
        EXPECT_EQ(det.degree(), 1);
        EXPECT_EQ(det.coeff(0), 0);
    }
}

TEST(GeoOrbit, Acceleration) {
    std::mt19937_64 rng(2);
    for (const field* F : {&F2, &F3, &F5}) {
        for (int i = 0; i < 200; ++i) {
            const auto f = testutil::random_rational_in_L(*F, 10, rng);
            const auto orbit = geo_orbit_product(f, std::size_t(-2 * f.degree()));
            EXPECT_EQ(orbit.states.back().f, artin_step(f));
            EXPECT_EQ(orbit.states.back().n, 0);
        }
    }
}

TEST(GeoOrbit, LevelReturnsToZeroExactlyAtConvergents) {
    std::mt19937_64 rng(3);
    for (const field* F : {&F2, &F3}) {
        for (int i = 0; i < 100; ++i) {
            const auto f = testutil::random_nonzero_series_in_L(*F, -200, rng);
            const auto cf = cf_expand(f, 100);
            std::vector<std::size_t> returns, expected;
            std::size_t s = 0;
            for (std::size_t k = 1; k <= cf.depth(); ++k) {
                s += 2 * std::size_t(cf.A(k).degree());
                if (s <= 60) expected.push_back(s);
            }
            if (s < 60) continue;
            const auto orbit = geo_orbit_product(f, 60);
            for (std::size_t j = 1; j <= 60; ++j)
                if (orbit.states[j].n == 0) returns.push_back(j);
            EXPECT_EQ(returns, expected);
        }
    }
}

TEST(GeoOrbit, ClosedForms) {
    std::mt19937_64 rng(4);
    for (const field* F : {&F2, &F3, &F5}) {
        for (int i = 0; i < 200; ++i) {
            // rationals that may terminate early, and series that do not
            const bool series = i % 2;
            const auto r = testutil::random_rational_in_L(*F, series ? 60 : 12, rng);
            const auto len = std::size_t(1 + rng() % 60);
            if (series) {
                const auto f = testutil::random_nonzero_series_in_L(*F, -200, rng);
                const auto cf = cf_expand(f, 200);
                const auto orbit = geo_orbit_product(f, len);
                EXPECT_EQ(value(orbit.product), geo_closed_form(cf, std::int64_t(len)));
            } else {
                const auto cf = cf_expand(r, 200);
                const auto orbit = geo_orbit_product(r, len);
                EXPECT_EQ(value(orbit.product), geo_closed_form(cf, std::int64_t(len)));
            }
        }
    }
    EXPECT_EQ(value(geo_orbit_product(R(F2, "1/(t+1)"), 0).product), pmat::identity(F2));
}

TEST(GeoBound, Examples) {
    const auto f = R(F3, "t/(2*t^4+t^3+2*t+1)");
    const auto cf = cf_expand(f, 10);
    // i = deg A_1 lands on the next convergent
    const auto full = geo_intermediate_bound_at(f, cf, 0, 3);
    EXPECT_EQ(full.approximant, cf.convergent(1));
    EXPECT_EQ(full.error, (qpow{false, -cf.Q(1).degree() - cf.Q(2).degree()}));
    EXPECT_TRUE(full.holds());
    // i = 0 keeps only the leading term of A_1: strictly inside the bound
    const auto lead = geo_intermediate_bound_at(f, cf, 0, 0);
    EXPECT_EQ(lead.approximant, R(F3, "1/(2*t^3)"));
    EXPECT_EQ(lead.bound, (qpow{false, -3}));
    EXPECT_EQ(lead.error, (qpow{false, -4}));
    // l = 7 on the worked example sits at k = 1, i = 0
    const auto seven = geo_intermediate_bound(f, 7);
    EXPECT_EQ(seven.k, 1u);
    EXPECT_EQ(seven.i, 0);
    EXPECT_TRUE(seven.holds());
    EXPECT_EQ(seven.approximant, f); // A_2 = t is a monomial
    EXPECT_THROW(geo_intermediate_bound(f, 1), precondition_failed);
    EXPECT_EQ(geo_intermediate_bound(f, 6).approximant, cf.convergent(1));
}

TEST(GeoBound, HoldsOnRandomInputs) {
    std::mt19937_64 rng(5);
    for (const field* F : {&F2, &F3, &F5}) {
        for (int i = 0; i < 200; ++i) {
            const auto f = testutil::random_rational_in_L(*F, 20, rng);
            const auto cf = cf_expand(f, 100);
            for (std::size_t k = 0; k < cf.depth(); ++k)
                for (std::int64_t j = 0; j <= cf.A(k + 1).degree(); ++j) {
                    const auto b = geo_intermediate_bound_at(f, cf, k, j);
                    EXPECT_TRUE(b.holds());
                    if (j < cf.A(k + 1).degree()) { EXPECT_LT(b.error, b.bound); }
                }
        }
    }
}

TEST(MuG, Examples) {
    const cylinder L{{0}};
    EXPECT_EQ(mu_G(F2, L, 0), exact_rational(1, 4));
    EXPECT_EQ(mu_G(F3, L, 0), exact_rational(2, 6));
    EXPECT_EQ(mu_G(F3, cylinder{{1}}, 0), 0);
    for (const field* F : {&F2, &F3, &F5}) {
        exact_rational pos = 0, neg = 0;
        for (std::int64_t n = 0; n < 200; ++n) {
            pos += mu_G(*F, L, n);
            neg += mu_G(*F, L, -n - 1);
        }
        EXPECT_LT(abs(exact_rational(1, 2) - pos), exact_rational(1, 1000000));
        EXPECT_EQ(pos, neg);
        // cylinder measures add up
        exact_rational sum = 0;
        for (const auto& c : cylinders_of_L(*F, 3)) sum += haar(*F, c);
        EXPECT_EQ(sum, haar(*F, L));
    }
}
