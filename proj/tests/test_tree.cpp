#include <gtest/gtest.h>

#include <set>

#include "farey/tree.hpp"
#include "test_support.hpp"

using namespace farey;
using namespace farey::testutil;

namespace {

const field& F2 = field::prime(2);
const field& F3 = field::prime(3);

rational_function R(const field& F, const char* s) { return parse_rational(F, s); }

// random vertex: level in [-lo, hi], coset a Laurent polynomial above the level
vertex random_vertex(const field& F, std::mt19937_64& rng, int spread = 6) {
    std::uniform_int_distribution<int> lv(-spread, spread), top(-spread, spread);
    const std::int64_t N = lv(rng);
    const std::int64_t T = std::max<std::int64_t>(N + 1, top(rng));
    std::vector<elem> c(std::size_t(T - N));
    for (auto& x : c) x = random_elem(F, rng);
    return make_vertex(N, laurent_series::from_coeffs(F, T, std::move(c)));
}

// ball oracle: (N, x) is {|y - x| <= q^N}; the smallest common ball has
// level M and the path climbs M - N1 and descends M - N2
std::int64_t ball_distance(const vertex& u, const vertex& v) {
    std::int64_t M = std::max(u.level, v.level);
    const laurent_series diff = truncation(u.coset) - truncation(v.coset);
    if (!diff.window_is_zero()) M = std::max(M, diff.top());
    return 2 * M - u.level - v.level;
}

pmat random_sl2(const field& F, std::mt19937_64& rng, int steps = 3) {
    pmat g = pmat::identity(F);
    for (int i = 0; i < steps; ++i) {
        const poly a = random_poly(F, 2, rng);
        g = g * pmat{poly::one(F), a, poly(F), poly::one(F)} * pmat{poly(F), -poly::one(F), poly::one(F), poly(F)};
    }
    return g;
}

} // namespace

TEST(TreeVertex, Examples) {
    EXPECT_EQ(vertex_from_matrix(kmat::from(pmat::identity(F2))), base_vertex(F2));
    for (int m = -4; m <= 4; ++m) {
        const field& F = F3;
        const rational_function tm = m >= 0 ? rational_function(poly::monomial(F, 1, std::size_t(m)))
                                            : rational_function(poly::one(F), poly::monomial(F, 1, std::size_t(-m)));
        const kmat L{tm, rational_function::zero(F), rational_function::zero(F), rational_function(poly::one(F))};
        EXPECT_EQ(vertex_from_matrix(L), lambda(F, m));
    }
    // [[1, f], [0, 1]] Lambda_-n = (-n, f mod t^-n O)
    const rational_function f = R(F3, "1/(t^2+t+2)");
    for (int n = 0; n < 6; ++n) {
        const kmat g{rational_function(poly::one(F3), poly::monomial(F3, 1, std::size_t(n))), f,
                     rational_function::zero(F3), rational_function(poly::one(F3))};
        EXPECT_EQ(vertex_from_matrix(g), make_vertex(-n, series_from_rational(f, -n - 5)));
    }
}

TEST(TreeVertex, ClassIsInvariantUnderGL2O) {
    std::mt19937_64 rng(11);
    for (const field* F : {&F2, &F3}) {
        for (int it = 0; it < 100; ++it) {
            const vertex v = random_vertex(*F, rng);
            const kmat g = kmat::of(v);
            // right multiplication by GL_2(O) generators and a scalar
            const poly u = random_poly(*F, 3, rng);
            const rational_function uo(u, poly::monomial(*F, 1, 3)); // |u| <= 1
            const rational_function one(poly::one(*F)), zero = rational_function::zero(*F);
            const rational_function lam(random_poly_of_degree(*F, 2, rng), poly::monomial(*F, 1, 1));
            const kmat k1{one, uo, zero, one}, k2{zero, one, one, zero}, k3{one, zero, uo, one};
            const kmat s{lam, zero, zero, lam};
            EXPECT_EQ(vertex_from_matrix(g * k1), v);
            EXPECT_EQ(vertex_from_matrix(g * k2), v);
            EXPECT_EQ(vertex_from_matrix(g * k3), v);
            EXPECT_EQ(vertex_from_matrix(s * g * k1 * k2), v);
        }
    }
}

TEST(TreeDistance, LambdaAndBallOracle) {
    for (int n = -5; n <= 5; ++n)
        for (int m = -5; m <= 5; ++m) EXPECT_EQ(tree_distance(lambda(F2, n), lambda(F2, m)), std::abs(n - m));
    std::mt19937_64 rng(12);
    for (const field* F : {&F2, &F3, &F4()}) {
        for (int it = 0; it < 300; ++it) {
            const vertex u = random_vertex(*F, rng), v = random_vertex(*F, rng);
            EXPECT_EQ(tree_distance(u, v), ball_distance(u, v));
            EXPECT_EQ(tree_distance(u, v), tree_distance(v, u));
            EXPECT_EQ(tree_distance(u, v) == 0, u == v);
        }
    }
}

TEST(TreeDistance, GroupActsByIsometries) {
    std::mt19937_64 rng(13);
    for (const field* F : {&F2, &F3}) {
        for (int it = 0; it < 60; ++it) {
            const pmat g = random_sl2(*F, rng);
            const vertex u = random_vertex(*F, rng, 4), v = random_vertex(*F, rng, 4);
            EXPECT_EQ(tree_distance(act(g, u), act(g, v)), tree_distance(u, v));
        }
        // SL_2(F_q) fixes x_*
        const pmat w{poly(*F), -poly::one(*F), poly::one(*F), poly(*F)};
        EXPECT_EQ(act(w, base_vertex(*F)), base_vertex(*F));
    }
}

TEST(TreeNeighbors, RegularOfDegreeQPlusOne) {
    std::mt19937_64 rng(14);
    for (const field* F : {&F2, &F3, &F4()}) {
        for (int it = 0; it < 30; ++it) {
            const vertex v = random_vertex(*F, rng);
            const auto nb = neighbors(v);
            ASSERT_EQ(nb.size(), F->q() + 1);
            std::set<vertex> distinct(nb.begin(), nb.end());
            EXPECT_EQ(distinct.size(), nb.size());
            for (const auto& w : nb) {
                EXPECT_EQ(tree_distance(v, w), 1);
                const auto back = neighbors(w);
                EXPECT_NE(std::find(back.begin(), back.end(), v), back.end());
            }
        }
    }
}

TEST(TreeGeodesic, RaysAndBoundaryAction) {
    std::mt19937_64 rng(15);
    for (const field* F : {&F2, &F3}) {
        for (int it = 0; it < 40; ++it) {
            const laurent_series f = random_nonzero_series_in_L(*F, -60, rng);
            const vertex start = random_vertex(*F, rng, 3);
            const auto ray = geodesic_ray(boundary_point::at(f), start, 20);
            for (std::size_t i = 0; i < ray.size(); ++i)
                EXPECT_EQ(tree_distance(start, ray[i]), std::int64_t(i)); // geodesic
            EXPECT_EQ(ray.back(), geodesic_vertex(f, -ray.back().level)); // eventually on ]inf, f[
            const auto up = geodesic_ray(boundary_point::infinity(), start, 5);
            EXPECT_EQ(up.back(), make_vertex(start.level + 5, start.coset));

            // gamma maps the deep part of ]inf, f[ into shrinking balls around gamma(f)
            const pmat g = random_sl2(*F, rng, 2);
            const laurent_series gf = (laurent_series::from_poly(g.a) * f + laurent_series::from_poly(g.b)) /
                                      (laurent_series::from_poly(g.c) * f + laurent_series::from_poly(g.d));
            std::optional<std::int64_t> prev;
            for (std::int64_t j = 20; j < 26; ++j) {
                const vertex w = act(g, geodesic_vertex(f, j));
                if (prev) {
                    EXPECT_EQ(w.level, *prev - 1);
                }
                prev = w.level;
                EXPECT_TRUE((gf - w.coset).coarsened(w.level).window_is_zero());
            }
        }
    }
}

TEST(TreeBusemann, InfinityAndDeepRayOracle) {
    for (int n = -4; n <= 4; ++n)
        EXPECT_EQ(busemann(lambda(F2, 0), lambda(F2, n), boundary_point::infinity()), -n);
    std::mt19937_64 rng(16);
    for (const field* F : {&F2, &F3}) {
        for (int it = 0; it < 100; ++it) {
            const vertex x = random_vertex(*F, rng, 4), y = random_vertex(*F, rng, 4);
            const laurent_series f = random_series_in_L(*F, -40, rng);
            const vertex deep = geodesic_vertex(f, 30);
            EXPECT_EQ(busemann(x, y, boundary_point::at(f)), tree_distance(y, deep) - tree_distance(x, deep));
            const vertex high = lambda(*F, 30);
            EXPECT_EQ(busemann(x, y, boundary_point::infinity()), tree_distance(y, high) - tree_distance(x, high));
        }
    }
}

TEST(TreeFord, RelativeLevelMatchesMatrixRoute) {
    std::mt19937_64 rng(17);
    for (const field* F : {&F2, &F3}) {
        for (int it = 0; it < 100; ++it) {
            rational_function pq = random_rational_in_L(*F, 4, rng);
            const ford_sphere H = ford_sphere::at(pq);
            EXPECT_EQ(H.gamma.det(), pmat::identity(*F).det());
            EXPECT_EQ(rational_function(H.gamma.a, H.gamma.c), pq);
            const vertex v = random_vertex(*F, rng);
            EXPECT_EQ(H.relative_level(v), act(H.gamma.adjugate(), v).level);
        }
    }
}

TEST(TreeFord, FirstBallIsZero) {
    std::mt19937_64 rng(18);
    for (int it = 0; it < 20; ++it) {
        const auto cr = ford_crossings(random_nonzero_series_in_L(F3, -30, rng), 1);
        ASSERT_EQ(cr.size(), 1u);
        EXPECT_EQ(cr[0].ball.base, rational_function::zero(F3));
        EXPECT_EQ(cr[0].entry, 0);
    }
}

// the walk (membership + group action only) against the expansion
TEST(TreeFord, WalkMatchesConvergents) {
    std::mt19937_64 rng(19);
    for (const field* F : {&F2, &F3}) {
        for (int it = 0; it < 100; ++it) {
            const laurent_series f = random_nonzero_series_in_L(*F, -200, rng);
            const auto walk = ford_crossings(f, 15);
            const cf_expansion cf = cf_expand(f, 16);
            const auto pred = ford_crossings_from_cf(cf, 15);
            ASSERT_EQ(walk.size(), 15u);
            ASSERT_EQ(pred.size(), 15u);
            for (std::size_t k = 0; k < 15; ++k) {
                EXPECT_EQ(walk[k].ball.base, pred[k].ball.base) << k;
                EXPECT_EQ(walk[k].entry, pred[k].entry) << k;
                ASSERT_TRUE(walk[k].exit && pred[k].exit);
                EXPECT_EQ(*walk[k].exit, *pred[k].exit);
                EXPECT_EQ(*walk[k].exit - walk[k].entry, 2 * cf.A(std::int64_t(k) + 1).degree());
            }
        }
        // rational: the walk ends in the ball based at f
        const rational_function r = random_rational_in_L(*F, 6, rng);
        const auto walk = ford_crossings(r, 50);
        const cf_expansion cf = cf_expand(r, 50);
        ASSERT_EQ(walk.size(), cf.depth() + 1);
        EXPECT_EQ(walk.back().ball.base, r);
        EXPECT_FALSE(walk.back().exit.has_value());
    }
}

TEST(TreeHamenstadt, Example) {
    const rational_function f = R(F2, "t/(t^2+1)");
    const ford_sphere H = ford_sphere::at(R(F2, "1/t"));
    EXPECT_EQ(hamenstadt_distance(std::nullopt, f, H), (qpow{false, 1}));
}

TEST(TreeHamenstadt, ProductRelation) {
    std::mt19937_64 rng(20);
    for (const field* F : {&F2, &F3}) {
        for (int it = 0; it < 200; ++it) {
            const rational_function f = random_rational_in_L(*F, 6, rng);
            const rational_function pq = random_rational_in_L(*F, 4, rng);
            if (f == pq) continue;
            const ford_sphere H = ford_sphere::at(pq);
            const qpow d = hamenstadt_distance(std::nullopt, f, H);
            // |P/Q - f| d |Q|^2 = 1 by valuations
            EXPECT_EQ((pq - f).degree() + d.exponent + 2 * pq.den().degree(), 0);
        }
        // at infinity the tree computation is |u - v|
        for (int it = 0; it < 50; ++it) {
            const laurent_series u = random_series_in_L(*F, -40, rng), v = random_series_in_L(*F, -40, rng);
            if ((u - v).window_is_zero()) continue;
            const ford_sphere Hinf = ford_sphere::infinity(*F);
            const qpow exact = hamenstadt_distance(to_rational(truncation(u)), to_rational(truncation(v)), Hinf);
            EXPECT_EQ(hamenstadt_at_infinity_tree(u, v), exact);
            EXPECT_EQ(exact, (u - v).abs());
        }
    }
}

TEST(TreeTrichotomy, MatchesValuations) {
    std::mt19937_64 rng(21);
    int seen[3] = {0, 0, 0};
    for (const field* F : {&F2, &F3}) {
        for (int it = 0; it < 300; ++it) {
            const rational_function f = random_rational_in_L(*F, 8, rng);
            rational_function pq = random_rational_in_L(*F, 3, rng);
            if (it % 2 == 0) {
                // bias towards convergents and near misses
                const cf_expansion cf = cf_expand(f, 3);
                pq = cf.convergent(std::int64_t(std::min<std::size_t>(cf.depth(), 1 + it % 3)));
                if (it % 4 == 0 && !(pq + rational_function(poly::one(*F), pq.den() * pq.den() * poly::t(*F))).is_zero())
                    pq = pq + rational_function(poly::one(*F), pq.den() * poly::t(*F));
            }
            if (pq.degree() >= 0) continue;
            const incidence got = diophantine_trichotomy(f, pq);
            incidence want = incidence::intersects;
            if (f != pq) {
                const std::int64_t e = (f - pq).degree() + 2 * pq.den().degree();
                want = e < 0 ? incidence::intersects : e == 0 ? incidence::tangent : incidence::disjoint;
            }
            EXPECT_EQ(got, want) << format_rational(f) << " vs " << format_rational(pq);
            ++seen[int(want)];
        }
    }
    for (int s : seen) EXPECT_GT(s, 0);
}

TEST(TreeExport, SmallBall) {
    const auto t = build_tree_export(series_from_rational(R(F2, "1/(t^2+t+1)"), -20), 2);
    EXPECT_EQ(t.vertices.size(), 10u);
    EXPECT_EQ(t.edges.size(), 9u);
    std::set<std::string> ids;
    for (const auto& v : t.vertices) ids.insert(vertex_id(v));
    EXPECT_EQ(ids.size(), 10u);
    const std::string dot = export_dot(t);
    EXPECT_NE(dot.find("style=bold"), std::string::npos);
    EXPECT_NE(dot.find("cluster_0"), std::string::npos);
    EXPECT_NE(dot.find("\"v_0_0\""), std::string::npos);
    // geodesic edges: (2,0)-(1,0)-(0,0)-(-1,0)-(-2,1)
    EXPECT_EQ(std::count(t.edge_on_geodesic.begin(), t.edge_on_geodesic.end(), true), 4);
    const auto t3 = build_tree_export(series_from_rational(R(F3, "1/t"), -20), 3);
    EXPECT_EQ(t3.vertices.size(), 1u + 4u + 12u + 36u);
}

TEST(TreeExport, DepthZeroJsonAndDeterminism) {
    const auto f = series_from_rational(R(F3, "1/(t^2+2)"), -30);
    const auto t0 = build_tree_export(f, 0);
    EXPECT_EQ(t0.vertices.size(), 1u);
    const auto a = build_tree_export(f, 3), b = build_tree_export(f, 3);
    EXPECT_EQ(export_dot(a), export_dot(b));
    EXPECT_EQ(export_json(a), export_json(b));
    const auto j = nlohmann::json::parse(export_json(a));
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["vertices"].size(), a.vertices.size());
    EXPECT_EQ(j["edges"].size(), a.vertices.size() - 1);
    EXPECT_EQ(j["ford_balls"][0]["base"], "0");
}

TEST(TreeGeodesic, FundamentalRays) {
    const auto down = geodesic_ray(boundary_point::at(laurent_series::zero(F2)), base_vertex(F2), 6);
    const auto up = geodesic_ray(boundary_point::infinity(), base_vertex(F2), 6);
    for (int n = 0; n <= 6; ++n) {
        EXPECT_EQ(down[std::size_t(n)], lambda(F2, -n));
        EXPECT_EQ(up[std::size_t(n)], lambda(F2, n));
    }
}

TEST(TreeBusemann, Cocycle) {
    std::mt19937_64 rng(22);
    for (int it = 0; it < 100; ++it) {
        const vertex x = random_vertex(F3, rng), y = random_vertex(F3, rng), z = random_vertex(F3, rng);
        const auto w = it % 2 ? boundary_point::infinity() : boundary_point::at(random_series_in_L(F3, -30, rng));
        EXPECT_EQ(busemann(x, x, w), 0);
        EXPECT_EQ(busemann(x, y, w) + busemann(y, z, w), busemann(x, z, w));
    }
}

TEST(TreeFord, PeriodT) {
    // f = [0; t, t, t, ...] over F_2
    const laurent_series f = series_from_cf(F2, cf_spec_input{{}, {poly::t(F2)}}, -60);
    const auto cr = ford_crossings(f, 3);
    ASSERT_EQ(cr.size(), 3u);
    EXPECT_EQ(cr[0].ball.base, rational_function::zero(F2));
    EXPECT_EQ(cr[1].ball.base, R(F2, "1/t"));
    EXPECT_EQ(cr[2].ball.base, R(F2, "t/(t^2+1)"));
}

TEST(TreeTrichotomy, FirstBall) {
    // H_0 is crossed exactly when deg A_1 >= 1, which always holds in L
    std::mt19937_64 rng(23);
    for (int it = 0; it < 50; ++it) {
        const auto f = random_rational_in_L(F3, 6, rng);
        EXPECT_EQ(diophantine_trichotomy(f, rational_function::zero(F3)), incidence::intersects);
    }
    // t^-1 + t^-3 sits at distance q^-3 from 1/t; |Q|^-2 = q^-2 so the geodesic crosses H_{1/t}
    EXPECT_EQ(diophantine_trichotomy(R(F2, "(t^2+1)/t^3"), R(F2, "1/t")), incidence::intersects);
    // tangent: |f - 1/t| = q^-2
    EXPECT_EQ(diophantine_trichotomy(R(F2, "(t+1)/t^2"), R(F2, "1/t")), incidence::tangent);
    EXPECT_EQ(diophantine_trichotomy(R(F2, "1/(t+1)"), R(F2, "1/t")), incidence::tangent);
    EXPECT_EQ(diophantine_trichotomy(R(F2, "1/(t^2+t)"), R(F2, "1/t")), incidence::disjoint);
}

TEST(TreeHamenstadt, Ultrametric) {
    std::mt19937_64 rng(24);
    for (int it = 0; it < 100; ++it) {
        const ford_sphere H = ford_sphere::at(random_rational_in_L(F3, 3, rng));
        const auto a = random_rational_in_L(F3, 5, rng), b = random_rational_in_L(F3, 5, rng),
                   c = random_rational_in_L(F3, 5, rng);
        if (a == b || b == c || a == c || a == H.base || b == H.base || c == H.base) continue;
        const qpow ab = hamenstadt_distance(a, b, H), bc = hamenstadt_distance(b, c, H),
                   ac = hamenstadt_distance(a, c, H);
        EXPECT_TRUE(ac <= std::max(ab, bc));
    }
    EXPECT_THROW(hamenstadt_distance(R(F3, "1/t"), R(F3, "1/t"), ford_sphere::infinity(F3)), degenerate_configuration);
}
