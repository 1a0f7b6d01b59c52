#pragma once

// The Bruhat-Tits tree of SL_2(K), K = F_q((1/t)).
//
// A vertex is stored as (N, x): the class of the lattice spanned by the
// columns of [[t^N, x], [0, 1]], with x determined modulo t^N O. Equivalently
// it is the closed ball {y in K : |y - x| <= q^N}; the neighbors are the
// enclosing ball (N+1) and the q sub-balls (N-1). In this chart
//   x_* = (0, 0),   Lambda_n = (n, 0),   [[1, f], [0, 1]] Lambda_-n = (-n, f mod t^-n O),
// and the geodesic ]inf, f[ has vertices (-j, f mod t^-j O), j in Z.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "farey/cf.hpp"
#include "farey/matrix.hpp"

namespace farey {

struct vertex {
    std::int64_t level = 0;
    laurent_series coset; ///< floor == level

    const field& fld() const { return coset.fld(); }

    friend bool operator==(const vertex& a, const vertex& b) {
        return a.level == b.level && a.coset.window() == b.coset.window() &&
               (a.coset.window_is_zero() || a.coset.top() == b.coset.top());
    }
    friend bool operator<(const vertex& a, const vertex& b) {
        if (a.level != b.level) return a.level < b.level;
        const auto key = [](const vertex& v) {
            return std::make_pair(v.coset.window_is_zero() ? neg_inf : v.coset.top(), v.coset.window());
        };
        return key(a) < key(b);
    }
};

inline vertex make_vertex(std::int64_t level, const laurent_series& x) {
    if (x.floor() > level)
        throw insufficient_precision("vertex at level " + std::to_string(level) + " needs x above t^" +
                                         std::to_string(level),
                                     level);
    return {level, x.coarsened(level)};
}

inline vertex base_vertex(const field& F) { return {0, laurent_series::zero(F, 0)}; }
inline vertex lambda(const field& F, std::int64_t n) { return {n, laurent_series::zero(F, n)}; }

/// The coset representative as an exact rational (a Laurent polynomial).
inline rational_function coset_value(const vertex& v) { return to_rational(truncation(v.coset)); }

/// 2x2 matrix over K with exact rational entries.
struct kmat {
    rational_function a, b, c, d;

    static kmat from(const pmat& m) {
        return {rational_function(m.a), rational_function(m.b), rational_function(m.c), rational_function(m.d)};
    }
    static kmat of(const vertex& v) {
        const field& F = v.fld();
        const rational_function tn = v.level >= 0 ? rational_function(poly::monomial(F, 1, std::size_t(v.level)))
                                                  : rational_function(poly::one(F), poly::monomial(F, 1, std::size_t(-v.level)));
        return {tn, coset_value(v), rational_function::zero(F), rational_function(poly::one(F))};
    }
    rational_function det() const { return a * d - b * c; }
    friend kmat operator*(const kmat& x, const kmat& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    kmat inverse() const {
        const rational_function D = det();
        if (D.is_zero()) throw division_by_zero("singular matrix");
        const rational_function z = rational_function::zero(D.fld());
        return {d / D, (z - b) / D, (z - c) / D, a / D};
    }
};

/// Canonical (N, x) of the lattice class spanned by the columns of g.
inline vertex vertex_from_matrix(const kmat& g) {
    const rational_function D = g.det();
    if (D.is_zero()) throw domain_error("singular matrix does not span a lattice");
    // column operations over O bring the column with the larger bottom entry to (x, 1)
    const bool keep = !(g.d.abs() < g.c.abs());
    const rational_function& top = keep ? g.b : g.a;
    const rational_function& bottom = keep ? g.d : g.c;
    const std::int64_t N = D.degree() - 2 * bottom.degree();
    return {N, series_from_rational(top / bottom, N)};
}

inline vertex act(const kmat& g, const vertex& v) { return vertex_from_matrix(g * kmat::of(v)); }
inline vertex act(const pmat& g, const vertex& v) { return act(kmat::from(g), v); }

/// Distance from the elementary divisors of g_u^-1 g_v: 2 max deg(entries) - deg det.
inline std::int64_t tree_distance(const vertex& u, const vertex& v) {
    const kmat m = kmat::of(u).inverse() * kmat::of(v);
    degree_t top = neg_inf;
    for (const auto* e : {&m.a, &m.b, &m.c, &m.d}) top = std::max(top, e->degree());
    return 2 * top - m.det().degree();
}

inline std::vector<vertex> neighbors(const vertex& v) {
    const field& F = v.fld();
    std::vector<vertex> out{make_vertex(v.level + 1, v.coset)};
    for (std::uint32_t c = 0; c < F.q(); ++c)
        out.push_back(make_vertex(v.level - 1, truncation(v.coset) + laurent_series::monomial(F, elem(c), v.level)));
    return out;
}

// ---------------------------------------------------------------------------
// boundary points

struct boundary_point {
    std::optional<laurent_series> value; ///< empty = infinity

    static boundary_point infinity() { return {}; }
    static boundary_point at(const laurent_series& f) { return {f}; }
    static boundary_point at(const rational_function& f, std::int64_t floor) {
        return {series_from_rational(f, floor)};
    }
    bool is_infinity() const { return !value.has_value(); }
};

/// Vertex at parameter j on the geodesic ]inf, f[.
inline vertex geodesic_vertex(const laurent_series& f, std::int64_t j) { return make_vertex(-j, f); }
inline vertex geodesic_vertex(const rational_function& f, std::int64_t j) {
    return make_vertex(-j, series_from_rational(f, -j));
}

namespace detail {

// last geodesic parameter j whose vertex the data determines
inline std::int64_t walk_limit(const laurent_series& f) {
    return f.is_exact() ? std::numeric_limits<std::int64_t>::max() / 4 : -f.floor();
}
inline std::int64_t walk_limit(const rational_function&) { return std::numeric_limits<std::int64_t>::max() / 4; }

inline std::optional<rational_function> exact_value(const laurent_series& f) {
    if (f.is_exact()) return to_rational(f);
    return std::nullopt;
}
inline std::optional<rational_function> exact_value(const rational_function& f) { return f; }

inline std::optional<degree_t> known_degree(const laurent_series& f) { return f.degree_if_known(); }
inline std::optional<degree_t> known_degree(const rational_function& f) { return f.degree(); }

} // namespace detail

/// n+1 vertices from `from` towards the boundary point.
inline std::vector<vertex> geodesic_ray(const boundary_point& w, const vertex& from, std::size_t n) {
    std::vector<vertex> out{from};
    vertex v = from;
    for (std::size_t i = 0; i < n; ++i) {
        if (w.is_infinity()) {
            v = make_vertex(v.level + 1, v.coset);
        } else {
            const laurent_series diff = (*w.value - v.coset).coarsened(v.level);
            if (!diff.window_is_zero()) {
                v = make_vertex(v.level + 1, v.coset); // f is outside this ball: climb
            } else {
                v = make_vertex(v.level - 1, *w.value);
            }
        }
        out.push_back(v);
    }
    return out;
}

/// beta_w(x, y) = lim d(y, c) - d(x, c) along a ray c -> w.
inline std::int64_t busemann(const vertex& x, const vertex& y, const boundary_point& w) {
    if (w.is_infinity()) return x.level - y.level;
    const auto span = [&](const vertex& v) {
        // level of the smallest ball containing v and a point deep on the ray to w
        const laurent_series diff = (*w.value - v.coset).coarsened(v.level);
        const std::int64_t M = diff.window_is_zero() ? v.level : diff.top();
        return 2 * M - v.level;
    };
    return span(y) - span(x);
}

// ---------------------------------------------------------------------------
// Ford spheres

/// H_{P/Q} = gamma H_inf with gamma = [[P, R], [Q, S]] in SL_2(F_q[t]).
struct ford_sphere {
    bool at_infinity = false;
    rational_function base; ///< P/Q, Q monic (unused at infinity)
    pmat gamma;

    static ford_sphere infinity(const field& F) { return {true, rational_function::zero(F), pmat::identity(F)}; }

    static ford_sphere at(const rational_function& pq) {
        const poly& P = pq.num();
        const poly& Q = pq.den();
        // s P + r Q = 1  =>  [[P, -r], [Q, s]] has determinant 1
        const bezout bz = xgcd(P, Q);
        return {false, pq, {P, -bz.t, Q, bz.s}};
    }

    static ford_sphere from_gamma(const pmat& g) {
        const field& F = g.fld();
        if (g.c.is_zero()) {
            ford_sphere s = infinity(F);
            s.gamma = g;
            return s;
        }
        return {false, rational_function(g.a, g.c), g};
    }

    std::string str() const { return at_infinity ? "inf" : format_rational(base); }

    /// Level of gamma^-1 v: >= 0 inside the closed horoball, 0 on the sphere.
    std::int64_t relative_level(const vertex& v) const {
        const poly& P = gamma.a;
        const poly& Q = gamma.c;
        // bottom row of gamma^-1 [[t^N, x], [0, 1]] is (-Q t^N, P - Q x)
        const laurent_series rest = laurent_series::from_poly(P) - laurent_series::from_poly(Q) * v.coset;
        std::int64_t M = Q.is_zero() ? neg_inf : Q.degree() + v.level;
        if (!rest.window_is_zero()) M = std::max(M, rest.top());
        return v.level - 2 * M;
    }
    bool contains(const vertex& v) const { return relative_level(v) >= 0; }
    bool on_sphere(const vertex& v) const { return relative_level(v) == 0; }

    friend bool operator==(const ford_sphere& a, const ford_sphere& b) {
        return a.at_infinity == b.at_infinity && (a.at_infinity || a.base == b.base);
    }
};

struct ford_crossing {
    ford_sphere ball;
    std::int64_t entry = 0;              ///< geodesic parameter j of the entry vertex
    std::optional<std::int64_t> exit;    ///< empty when the geodesic ends at the base
};

/// Walks ]inf, f[ vertex by vertex and records the Ford balls it enters,
/// using only horoball membership and the group action. At an exit vertex w
/// on H_gamma, gamma^-1 w = (0, X) and the q other spheres through w are
/// based at gamma(X + a), a in F_q.
/// With `partial`, running out of precision ends the list instead of throwing.
template <class V>
std::vector<ford_crossing> ford_crossings(const V& f, std::size_t depth, bool partial = false) {
    const field& F = f.fld();
    if (auto d = detail::known_degree(f); d && *d >= 0) throw domain_error("ford_crossings expects f in L");
    std::vector<ford_crossing> out;
    ford_sphere current = ford_sphere::infinity(F);
    std::int64_t j = 0; // x_* lies on H_inf
    const std::int64_t limit = detail::walk_limit(f);
    const auto fx = detail::exact_value(f);
    while (out.size() < depth) {
        // leave the current ball
        while (true) {
            if (!current.at_infinity && fx && *fx == current.base) return out; // endpoint
            if (j + 1 > limit) {
                if (partial) return out;
                throw insufficient_precision("geodesic walk needs f below t^-" + std::to_string(j + 1), -(j + 1) - 1);
            }
            if (!current.contains(geodesic_vertex(f, j + 1))) break;
            ++j;
        }
        if (!out.empty()) out.back().exit = j;
        const vertex w = geodesic_vertex(f, j);
        const vertex next = geodesic_vertex(f, j + 1);
        const vertex local = act(current.gamma.adjugate(), w); // level 0, coset X mod O
        const poly X = to_rational(truncation(local.coset)).polynomial_part();
        std::optional<ford_sphere> entered;
        for (std::uint32_t a = 0; a < F.q() && !entered; ++a) {
            const poly Xa = X + poly::constant(F, elem(a));
            // gamma [[1, X + a], [0, 1]] [[0, -1], [1, 0]] sends inf to gamma(X + a)
            const pmat g = current.gamma * pmat{poly::one(F), Xa, poly(F), poly::one(F)} *
                           pmat{poly(F), -poly::one(F), poly::one(F), poly(F)};
            const ford_sphere cand = ford_sphere::from_gamma(g);
            if (cand.relative_level(next) >= 1) entered = cand;
        }
        if (!entered) throw precondition_failed("internal: no tangent Ford ball contains the next vertex");
        out.push_back({*entered, j, std::nullopt});
        current = *entered;
    }
    // close the last crossing when the data allows it
    try {
        if (!(fx && *fx == current.base)) {
            std::int64_t k = j;
            while (k + 1 <= limit && current.contains(geodesic_vertex(f, k + 1))) ++k;
            if (k + 1 <= limit) out.back().exit = k;
        }
    } catch (const insufficient_precision&) {
    }
    return out;
}


/// The same list predicted by the expansion: the k-th ball is based at
/// P_k/Q_k, entered at j = 2 deg Q_k and left at j = 2 deg Q_{k+1}.
inline std::vector<ford_crossing> ford_crossings_from_cf(const cf_expansion& cf, std::size_t depth) {
    std::vector<ford_crossing> out;
    for (std::size_t k = 0; k < depth && k <= cf.depth(); ++k) {
        const auto ki = std::int64_t(k);
        ford_crossing c{ford_sphere::at(cf.convergent(ki)), 2 * cf.Q(ki).degree(), std::nullopt};
        if (k < cf.depth()) c.exit = 2 * cf.Q(ki + 1).degree();
        else if (!cf.terminated()) break;
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hamenstadt distance and the trichotomy

/// d_{w,H}(u, v) for the Ford sphere H based at w: transport by gamma^-1 to
/// H_inf, where the distance is |u' - v'|. Points are exact rationals or inf.
inline qpow hamenstadt_distance(const std::optional<rational_function>& u, const std::optional<rational_function>& v,
                                const ford_sphere& H) {
    const pmat gi = H.gamma.adjugate();
    const auto image = [&](const std::optional<rational_function>& x) -> std::optional<rational_function> {
        const rational_function a(gi.a), b(gi.b), c(gi.c), d(gi.d);
        if (!x) {
            if (c.is_zero()) return std::nullopt;
            return a / c;
        }
        const rational_function den = c * *x + d;
        if (den.is_zero()) return std::nullopt;
        return (a * *x + b) / den;
    };
    const auto u1 = image(u), v1 = image(v);
    if (!u1 || !v1) throw degenerate_configuration("a point coincides with the base of the horosphere");
    if (*u1 == *v1) throw degenerate_configuration("u = v: the Gromov product is infinite");
    return (*u1 - *v1).abs();
}

/// Tree-side computation for the horosphere H_inf through x_*: the rays
/// from inf to u and v share the vertices above the branch level M, and the
/// distance is q^M.
inline qpow hamenstadt_at_infinity_tree(const laurent_series& u, const laurent_series& v, std::int64_t max_level = 256) {
    std::int64_t N = max_level;
    if (!(make_vertex(N, u) == make_vertex(N, v))) throw precondition_failed("rays do not meet below max_level");
    while (make_vertex(N - 1, u) == make_vertex(N - 1, v)) --N;
    // the rays part at level N: beta_inf(h, p) with h on level 0 and p on level N
    return qpow{false, N};
}

enum class incidence { intersects, tangent, disjoint };

inline const char* to_string(incidence i) {
    switch (i) {
    case incidence::intersects: return "intersects";
    case incidence::tangent: return "tangent";
    default: return "disjoint";
    }
}

/// Counts the vertices of ]inf, f[ on H_{P/Q}: two or more (or an endpoint
/// inside) = intersects, one = tangent, none = disjoint.
template <class V>
incidence diophantine_trichotomy(const V& f, const rational_function& pq) {
    const ford_sphere H = ford_sphere::at(pq);
    const std::int64_t dq = pq.den().degree();
    if (const auto fx = detail::exact_value(f); fx && *fx == pq) return incidence::intersects;
    // along the geodesic the relative level is at most j - 2 deg Q
    const std::int64_t limit = detail::walk_limit(f);
    int on = 0;
    std::int64_t prev = std::numeric_limits<std::int64_t>::min();
    for (std::int64_t j = 2 * dq - 1;; ++j) {
        if (j > limit) throw insufficient_precision("trichotomy needs f below t^-" + std::to_string(j), -j - 1);
        const std::int64_t r = H.relative_level(geodesic_vertex(f, j));
        if (r == 0) ++on;
        if (r < 0 && prev != std::numeric_limits<std::int64_t>::min() && r < prev) break; // leaving for good
        prev = r;
    }
    return on >= 2 ? incidence::intersects : on == 1 ? incidence::tangent : incidence::disjoint;
}


// ---------------------------------------------------------------------------
// export

namespace detail {

inline std::string coset_hex(const vertex& v) {
    if (v.coset.window_is_zero()) return "0";
    const bool wide = v.fld().q() > 16;
    std::ostringstream os;
    os << std::hex;
    for (elem c : v.coset.window()) {
        if (wide && c < 16) os << '0';
        os << unsigned(c);
    }
    // zeros between the last stored coefficient and the floor
    const std::int64_t low = v.coset.lowest();
    for (std::int64_t d = low - 1; d > v.level; --d) os << (wide ? "00" : "0");
    return os.str();
}

} // namespace detail

inline std::string vertex_id(const vertex& v) {
    return "v_" + std::to_string(v.level) + "_" + detail::coset_hex(v);
}

struct tree_export {
    std::vector<vertex> vertices; ///< breadth-first from x_*, children in (up, sub-balls by digit) order
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<bool> vertex_on_geodesic;
    std::vector<bool> edge_on_geodesic;
    std::vector<std::vector<std::size_t>> ford_membership; ///< per vertex: indices into `balls`
    std::vector<ford_crossing> balls;
};

/// Ball of radius `depth` around x_*, the geodesic ]inf, f[ marked, and
/// membership in the Ford balls that geodesic crosses.
template <class V>
tree_export build_tree_export(const V& f, std::size_t depth, std::size_t max_depth = 12) {
    if (depth > max_depth) throw precondition_failed("export depth " + std::to_string(depth) + " exceeds " + std::to_string(max_depth));
    tree_export out;
    const field& F = f.fld();
    std::map<vertex, std::size_t> index;
    out.vertices.push_back(base_vertex(F));
    index[out.vertices[0]] = 0;
    std::vector<std::size_t> frontier{0};
    for (std::size_t r = 0; r < depth; ++r) {
        std::vector<std::size_t> next;
        for (std::size_t vi : frontier) {
            for (const vertex& w : neighbors(out.vertices[vi])) {
                if (index.count(w)) continue;
                index[w] = out.vertices.size();
                out.vertices.push_back(w);
                out.edges.push_back({vi, out.vertices.size() - 1});
                next.push_back(out.vertices.size() - 1);
            }
        }
        frontier = std::move(next);
    }
    const auto on_geo = [&](const vertex& v) {
        try {
            return geodesic_vertex(f, -v.level) == v;
        } catch (const insufficient_precision&) {
            return false;
        }
    };
    for (const auto& v : out.vertices) out.vertex_on_geodesic.push_back(on_geo(v));
    for (const auto& [a, b] : out.edges) out.edge_on_geodesic.push_back(out.vertex_on_geodesic[a] && out.vertex_on_geodesic[b]);
    out.balls = ford_crossings(f, depth + 1, true);
    for (const auto& v : out.vertices) {
        std::vector<std::size_t> m;
        for (std::size_t k = 0; k < out.balls.size(); ++k)
            if (out.balls[k].ball.contains(v)) m.push_back(k);
        out.ford_membership.push_back(std::move(m));
    }
    return out;
}

inline std::string export_dot(const tree_export& t) {
    std::ostringstream os;
    os << "graph bruhat_tits {\n";
    for (std::size_t i = 0; i < t.vertices.size(); ++i) {
        const auto& v = t.vertices[i];
        os << "  \"" << vertex_id(v) << "\" [label=\"" << v.level << ":" << detail::coset_hex(v) << "\"";
        if (t.vertex_on_geodesic[i]) os << ", penwidth=2";
        os << "];\n";
    }
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
        os << "  \"" << vertex_id(t.vertices[t.edges[e].first]) << "\" -- \"" << vertex_id(t.vertices[t.edges[e].second])
           << "\"";
        if (t.edge_on_geodesic[e]) os << " [style=bold]";
        os << ";\n";
    }
    for (std::size_t k = 0; k < t.balls.size(); ++k) {
        os << "  // cluster_" << k << " base=" << t.balls[k].ball.str() << ":";
        for (std::size_t i = 0; i < t.vertices.size(); ++i)
            if (std::find(t.ford_membership[i].begin(), t.ford_membership[i].end(), k) != t.ford_membership[i].end())
                os << " " << vertex_id(t.vertices[i]);
        os << "\n";
    }
    os << "}\n";
    return os.str();
}

/// JSON form; the schema is described in docs/tree-export.md.
inline std::string export_json(const tree_export& t) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["q"] = t.vertices.front().fld().q();
    auto& vs = j["vertices"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < t.vertices.size(); ++i) {
        const auto& v = t.vertices[i];
        vs.push_back({{"id", vertex_id(v)},
                      {"level", v.level},
                      {"coset", format_rational(coset_value(v))},
                      {"geodesic", bool(t.vertex_on_geodesic[i])},
                      {"ford", t.ford_membership[i]}});
    }
    auto& es = j["edges"] = nlohmann::ordered_json::array();
    for (std::size_t e = 0; e < t.edges.size(); ++e)
        es.push_back({{"from", vertex_id(t.vertices[t.edges[e].first])},
                      {"to", vertex_id(t.vertices[t.edges[e].second])},
                      {"geodesic", bool(t.edge_on_geodesic[e])}});
    auto& bs = j["ford_balls"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < t.balls.size(); ++k) {
        nlohmann::ordered_json b{{"k", k}, {"base", t.balls[k].ball.str()}, {"entry", t.balls[k].entry}};
        b["exit"] = t.balls[k].exit ? nlohmann::ordered_json(*t.balls[k].exit) : nlohmann::ordered_json(nullptr);
        bs.push_back(std::move(b));
    }
    return j.dump(2) + "\n";
}

} // namespace farey
