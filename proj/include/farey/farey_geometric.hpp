#pragma once

// The geometric Farey map on L x Z: one unit of geodesic flow along the
// ray from the base vertex towards f.
//
//   F(f, n) = (tf - [tf], n + 1)            if deg f < -1 or n < 0
//   F(f, n) = ({1/(tf)}, -(n + 1))          if deg f = -1 and n >= 0

#include <cstdint>
#include <optional>
#include <vector>

#include "farey/cf.hpp"
#include "farey/matrix.hpp"
#include "farey/measure.hpp"

namespace farey {

template <class V>
struct geo_state {
    V f;
    std::int64_t n = 0;
};

/// t^shift * m. Entries stay polynomial; the n < 0 branch contributes t^-1.
struct scaled_pmat {
    std::int64_t shift = 0;
    pmat m;

    static scaled_pmat identity(const field& F) { return {0, pmat::identity(F)}; }

    friend scaled_pmat operator*(const scaled_pmat& x, const scaled_pmat& y) {
        return {x.shift + y.shift, x.m * y.m};
    }

    /// Cancels t^-1 against common factors of t in the entries; when the
    /// value has polynomial entries the result has shift 0.
    scaled_pmat normalized() const {
        scaled_pmat r = *this;
        const auto div_t = [](const poly& p) { return p.div_t_pow(1); };
        const auto t_divides = [](const poly& p) { return p.is_zero() || p.coeff(0) == 0; };
        while (r.shift < 0 && t_divides(r.m.a) && t_divides(r.m.b) && t_divides(r.m.c) && t_divides(r.m.d)) {
            r.m = {div_t(r.m.a), div_t(r.m.b), div_t(r.m.c), div_t(r.m.d)};
            ++r.shift;
        }
        if (r.shift > 0) {
            const std::size_t s = std::size_t(r.shift);
            r.m = {r.m.a.shifted(s), r.m.b.shifted(s), r.m.c.shifted(s), r.m.d.shifted(s)};
            r.shift = 0;
        }
        return r;
    }
};

namespace detail {

// coefficient of t^-1; decides the branch and fixes both matrices
inline elem coeff_m1(const rational_function& f) {
    return (rational_function(poly::t(f.fld())) * f).polynomial_part().coeff(0);
}
inline elem coeff_m1(const laurent_series& f) {
    if (!f.known(-1)) throw insufficient_precision("geometric Farey step needs the t^-1 coefficient", -2);
    return f.coeff(-1);
}

inline void require_geo_domain(const rational_function& f) {
    if (f.degree() >= 0) throw domain_error("geometric Farey map expects f in L");
}
inline void require_geo_domain(const laurent_series& f) {
    if (auto d = f.degree_if_known(); d && *d >= 0) throw domain_error("geometric Farey map expects f in L");
}

inline rational_function times_t_frac(const rational_function& f) {
    return (rational_function(poly::t(f.fld())) * f).fractional_part();
}
inline laurent_series times_t_frac(const laurent_series& f) { return f.shifted(1).fractional_part(); }

inline rational_function inv_t_frac(const rational_function& f) {
    return (rational_function(poly::t(f.fld())) * f).inverse().fractional_part();
}
inline laurent_series inv_t_frac(const laurent_series& f) {
    if (f.is_exact() && f.window().size() > 1)
        throw insufficient_precision("{1/(tf)} of an exact non-monomial is infinite; use rational mode");
    return f.shifted(1).inverse().fractional_part();
}

} // namespace detail

template <class V>
geo_state<V> geo_step(const geo_state<V>& s) {
    detail::require_geo_domain(s.f);
    if (s.n < 0 || detail::coeff_m1(s.f) == 0) return {detail::times_t_frac(s.f), s.n + 1};
    return {detail::inv_t_frac(s.f), -(s.n + 1)};
}

/// M(f, n): the step matrix, so that the ray after the step is the old ray
/// moved by M^-1.
template <class V>
scaled_pmat geo_matrix(const geo_state<V>& s) {
    detail::require_geo_domain(s.f);
    const field& F = s.f.fld();
    const poly zero(F), one = poly::one(F), t = poly::t(F);
    if (s.n < 0) {
        // t^-1 [[1, [tf]], [0, t]]
        return {-1, {one, poly::constant(F, detail::coeff_m1(s.f)), zero, t}};
    }
    const elem c = detail::coeff_m1(s.f);
    if (c == 0) return {0, {one, zero, zero, t}};
    // [1/(tf)] = c^-1
    return {0, {zero, one, t, t.scaled(F.inv(c))}};
}

template <class V>
struct geo_orbit {
    std::vector<geo_state<V>> states; ///< states[0] = (f, 0), ..., states[len]
    scaled_pmat product;              ///< M(states[0]) ... M(states[len-1])
};

template <class V>
geo_orbit<V> geo_orbit_product(const V& f, std::size_t len, std::int64_t n0 = 0) {
    geo_orbit<V> out{{geo_state<V>{f, n0}}, scaled_pmat::identity(f.fld())};
    for (std::size_t i = 0; i < len; ++i) {
        const auto& s = out.states.back();
        out.product = out.product * geo_matrix(s);
        out.states.push_back(geo_step(s));
    }
    return out;
}

/// Where orbit step l sits relative to the partial quotients. With
/// S_k = 2(deg A_1 + ... + deg A_k) and m = deg A_{k+1}:
///   first regime   l = S_k + i,      0 <= i < m
///   second regime  l = S_k + m + i,  0 <= i < m
struct geo_position {
    std::size_t k = 0;
    std::int64_t i = 0;
    bool second = false;
};

inline geo_position locate(const cf_expansion& cf, std::int64_t ell) {
    std::int64_t s = 0;
    for (std::size_t k = 0;; ++k) {
        if (k == cf.depth()) {
            if (cf.terminated()) return {k, ell - s, false};
            cf.require(k + 1);
        }
        const std::int64_t m = cf.A(k + 1).degree();
        if (ell < s + m) return {k, ell - s, false};
        if (ell < s + 2 * m) return {k, ell - s - m, true};
        s += 2 * m;
    }
}

/// a_m t^m + ... + a_{m-i} t^{m-i}
inline poly top_terms(const poly& A, std::int64_t i) {
    const std::int64_t m = A.degree();
    return A.high_part(std::size_t(std::max<std::int64_t>(0, m - i)));
}

/// The product of the first l step matrices predicted by the expansion.
inline pmat geo_closed_form(const cf_expansion& cf, std::int64_t ell) {
    const auto pos = locate(cf, ell);
    const auto k = std::int64_t(pos.k);
    const field& F = cf.fld();
    if (!pos.second) {
        const std::size_t ti = std::size_t(pos.i);
        return {cf.P(k - 1), cf.P(k).shifted(ti), cf.Q(k - 1), cf.Q(k).shifted(ti)};
    }
    const poly& A = cf.A(pos.k + 1);
    const std::size_t low = std::size_t(A.degree() - pos.i);
    const pmat right{poly(F), poly::one(F), poly::monomial(F, 1, low), top_terms(A, pos.i)};
    return cf.matrix(k) * right;
}

struct geo_bound {
    std::size_t k = 0;
    std::int64_t i = 0;
    rational_function approximant;
    qpow error;
    qpow bound; ///< q^-i / (|Q_k| |Q_{k+1}|)
    bool holds() const { return error <= bound; }
};

namespace detail {

inline qpow distance(const rational_function& f, const rational_function& g) { return (f - g).abs(); }
inline qpow distance(const laurent_series& f, const rational_function& g) {
    const laurent_series d = f - series_from_rational(g, f.floor());
    if (d.window_is_zero() && !d.is_exact())
        throw insufficient_precision("|f - approximant| lies below the precision floor", d.floor() - 1);
    return d.abs();
}

} // namespace detail

/// Intermediate approximation along the second regime, 0 <= i <= deg A_{k+1}.
template <class V>
geo_bound geo_intermediate_bound_at(const V& f, const cf_expansion& cf, std::size_t k, std::int64_t i) {
    cf.require(k + 1);
    const poly& A = cf.A(k + 1);
    if (i < 0 || i > A.degree()) throw precondition_failed("need 0 <= i <= deg A_{k+1}");
    const auto ki = std::int64_t(k);
    const poly T = top_terms(A, i);
    geo_bound out;
    out.k = k;
    out.i = i;
    out.approximant = rational_function(T * cf.P(ki) + cf.P(ki - 1), T * cf.Q(ki) + cf.Q(ki - 1));
    out.error = detail::distance(f, out.approximant);
    out.bound = qpow{false, -i - cf.Q(ki).degree() - cf.Q(ki + 1).degree()};
    return out;
}

/// Same, addressed by the orbit length l. l = S_{k+1} is read as the end of
/// the second regime of k (i = deg A_{k+1}).
template <class V>
geo_bound geo_intermediate_bound(const V& f, std::int64_t ell) {
    if (ell < 1) throw precondition_failed("orbit length must be positive");
    const cf_expansion cf = cf_expand(f, std::size_t(ell));
    const auto pos = locate(cf, ell);
    if (pos.second) return geo_intermediate_bound_at(f, cf, pos.k, pos.i);
    if (pos.i == 0 && pos.k >= 1) return geo_intermediate_bound_at(f, cf, pos.k - 1, cf.A(pos.k).degree());
    throw precondition_failed("orbit length " + std::to_string(ell) + " is not in the second regime");
}

} // namespace farey
