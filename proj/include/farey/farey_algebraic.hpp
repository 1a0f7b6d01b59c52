#pragma once

// The algebraic Farey maps F_h on O, for h in L with deg h = -1:
//
//   F_h(f) = f / (1 - [(1-h)/f] f)      deg f <= -1
//   F_h(f) = (1 - [(1-h)/f] f) / f      deg f = 0
//
// Writing f = 1/(A_1 + g) with g = {1/f}, the first branch is
// F_h(f) = 1/([h A_1] + g) and the second is F_h(f) = g. Iterating the
// first branch replaces A_1 by [h^i A_1], which yields the intermediate
// convergents (P_{k+1} - [h^i A_{k+1}] P_k) / (Q_{k+1} - [h^i A_{k+1}] Q_k).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "farey/cf.hpp"
#include "farey/matrix.hpp"
#include "farey/measure.hpp"

namespace farey {

class hparam {
public:
    explicit hparam(laurent_series h) : h_(std::move(h)) {
        if (!h_.known(-1)) throw insufficient_precision("h must be known at t^-1", -2);
        if (h_.window_is_zero() || h_.top() != -1) throw domain_error("h must have degree exactly -1");
    }

    static hparam t_inverse(const field& F) { return hparam(laurent_series::monomial(F, 1, -1)); }

    const field& fld() const { return h_.fld(); }
    const laurent_series& series() const { return h_; }
    std::int64_t floor() const { return h_.floor(); }

    /// [h X]; uses the coefficients of h at t^-1 .. t^-deg X.
    poly times_poly_part(const poly& X) const {
        const field& F = fld();
        const degree_t m = X.degree();
        if (m <= 0) return poly(F);
        if (h_.floor() > -m - 1)
            throw insufficient_precision("[hX] with deg X = " + std::to_string(m) + " needs h below t^-" +
                                             std::to_string(m),
                                         -m - 1);
        std::vector<elem> out(std::size_t(m), 0);
        for (degree_t j = 0; j < m; ++j) {
            elem acc = 0;
            for (degree_t d = 1; d <= m - j; ++d) acc = F.add(acc, F.mul(h_.coeff(-d), X.coeff(j + d)));
            out[std::size_t(j)] = acc;
        }
        return poly(F, std::move(out));
    }

    /// [h^i X] = [h [h^(i-1) X]].
    poly power_part(poly X, std::int64_t i) const {
        for (std::int64_t j = 0; j < i && !X.is_zero(); ++j) X = times_poly_part(X);
        return X;
    }

    /// h as a rational function, for exact (finite) h.
    std::optional<rational_function> as_rational() const {
        if (!h_.is_exact()) return std::nullopt;
        return to_rational(h_);
    }

    std::string str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < h_.window().size(); ++i) s += (i ? "," : "") + fld().format(h_.window()[i]);
        s += "]@t^-1";
        if (!h_.is_exact()) s += " floor " + std::to_string(h_.floor());
        return s;
    }

private:
    laurent_series h_;
};

namespace detail {

inline degree_t require_in_O(const rational_function& f) {
    const degree_t d = f.degree();
    if (d > 0) throw domain_error("algebraic Farey map expects f in O");
    return d;
}
inline degree_t require_in_O(const laurent_series& f) {
    const degree_t d = f.degree();
    if (d > 0) throw domain_error("algebraic Farey map expects f in O");
    return d;
}

} // namespace detail

/// [(1-h)/f], evaluated from the definition.
inline poly alg_coefficient(const rational_function& f, const hparam& h) {
    const field& F = f.fld();
    const degree_t d = detail::require_in_O(f);
    if (d == neg_inf) throw zero_input("[(1-h)/f] is undefined at f = 0");
    const rational_function one(poly::one(F));
    if (auto hr = h.as_rational()) return ((one - *hr) / f).polynomial_part();
    if (h.floor() > d - 1) throw insufficient_precision("h is too coarse for [(1-h)/f]", d - 1);
    const laurent_series inv = series_from_rational(f.inverse(), -1);
    return ((laurent_series::from_poly(poly::one(F)) - h.series()) * inv).polynomial_part();
}

inline poly alg_coefficient(const laurent_series& f, const hparam& h) {
    const field& F = f.fld();
    const degree_t d = detail::require_in_O(f);
    if (d == neg_inf) throw zero_input("[(1-h)/f] is undefined at f = 0");
    if (f.is_exact() && f.window().size() > 1) return alg_coefficient(to_rational(f), h);
    const laurent_series inv = f.inverse();
    return ((laurent_series::from_poly(poly::one(F)) - h.series()) * inv).polynomial_part();
}

/// F_h(f) by the defining formula.
inline rational_function alg_step(const rational_function& f, const hparam& h) {
    if (f.is_zero()) return f;
    const degree_t d = detail::require_in_O(f);
    const rational_function C(alg_coefficient(f, h));
    const rational_function w = rational_function(poly::one(f.fld())) - C * f;
    return d <= -1 ? f / w : w / f;
}

inline laurent_series alg_step(const laurent_series& f, const hparam& h) {
    if (f.is_zero()) return f;
    if (f.is_exact() && f.window().size() > 1)
        throw insufficient_precision("F_h of an exact non-monomial is an infinite series; use rational mode");
    const degree_t d = detail::require_in_O(f);
    const laurent_series C = laurent_series::from_poly(alg_coefficient(f, h));
    const laurent_series w = laurent_series::from_poly(poly::one(f.fld())) - C * f;
    return d <= -1 ? f / w : w / f;
}

/// F_h(f) through f = 1/(A_1 + g): 1/([h A_1] + g), or g when deg f = 0.
inline rational_function alg_step_nf(const rational_function& f, const hparam& h) {
    if (f.is_zero()) return f;
    const degree_t d = detail::require_in_O(f);
    const rational_function inv = f.inverse();
    const rational_function g = inv.fractional_part();
    if (d == 0) return g;
    return (rational_function(h.times_poly_part(inv.polynomial_part())) + g).inverse();
}

inline laurent_series alg_step_nf(const laurent_series& f, const hparam& h) {
    if (f.is_zero()) return f;
    if (f.is_exact() && f.window().size() > 1)
        throw insufficient_precision("F_h of an exact non-monomial is an infinite series; use rational mode");
    const degree_t d = detail::require_in_O(f);
    const laurent_series inv = f.inverse();
    const laurent_series g = inv.fractional_part();
    if (d == 0) return g;
    return (laurent_series::from_poly(h.times_poly_part(inv.polynomial_part())) + g).inverse();
}

/// M_h(f): [[1, 0], [C, 1]] for deg f < 0, [[0, 1], [1, C]] for deg f = 0,
/// with C = [(1-h)/f].
template <class V>
pmat alg_matrix(const V& f, const hparam& h) {
    const field& F = f.fld();
    const poly C = alg_coefficient(f, h);
    if (f.degree() < 0) return {poly::one(F), poly(F), C, poly::one(F)};
    return {poly(F), poly::one(F), poly::one(F), C};
}

template <class V>
struct alg_orbit {
    std::vector<V> states; ///< f, F_h(f), ..., F_h^len(f)
    pmat product;          ///< M_h(f) M_h(F_h f) ... M_h(F_h^(len-1) f)
};

/// Stops early (with fewer states) when the orbit reaches 0.
template <class V>
alg_orbit<V> alg_orbit_product(const V& f, const hparam& h, std::size_t len) {
    alg_orbit<V> out{{f}, pmat::identity(f.fld())};
    for (std::size_t i = 0; i < len && !out.states.back().is_zero(); ++i) {
        const V& s = out.states.back();
        out.product *= alg_matrix(s, h);
        out.states.push_back(alg_step(s, h));
    }
    return out;
}

/// Position of step l: l = sum_{j<=k} (deg A_j + 1) + i, 0 <= i <= deg A_{k+1}.
struct alg_position {
    std::size_t k = 0;
    std::int64_t i = 0;
};

inline alg_position alg_locate(const cf_expansion& cf, std::int64_t ell) {
    std::int64_t s = 0;
    for (std::size_t k = 0;; ++k) {
        if (ell == s && k == cf.depth() && cf.terminated()) return {k, 0};
        cf.require(k + 1);
        const std::int64_t m = cf.A(k + 1).degree();
        if (ell <= s + m) return {k, ell - s};
        s += m + 1;
    }
}

/// [[P_{k+1} - [h^i A_{k+1}] P_k, P_k], [Q_{k+1} - [h^i A_{k+1}] Q_k, Q_k]]
inline pmat alg_closed_form(const cf_expansion& cf, const hparam& h, std::int64_t ell) {
    const auto pos = alg_locate(cf, ell);
    const auto k = std::int64_t(pos.k);
    if (pos.i == 0) return cf.matrix(k); // [h^0 A] = A: back to P_{k-1}, Q_{k-1}
    const poly B = h.power_part(cf.A(pos.k + 1), pos.i);
    return {cf.P(k + 1) - B * cf.P(k), cf.P(k), cf.Q(k + 1) - B * cf.Q(k), cf.Q(k)};
}

struct intermediate_convergent {
    std::size_t k = 0;
    std::int64_t i = 0;
    poly B, U, V;
};

inline std::vector<intermediate_convergent> intermediate_convergents(const cf_expansion& cf, const hparam& h,
                                                                     std::size_t depth) {
    cf.require(std::min(depth, cf.terminated() ? cf.depth() : depth));
    std::vector<intermediate_convergent> out;
    for (std::size_t k = 0; k < depth && k < cf.depth(); ++k) {
        const auto ki = std::int64_t(k);
        poly X = cf.A(k + 1);
        const std::int64_t m = X.degree();
        for (std::int64_t i = 1; i <= m; ++i) {
            X = h.times_poly_part(X);
            out.push_back({k, i, X, cf.P(ki + 1) - X * cf.P(ki), cf.Q(ki + 1) - X * cf.Q(ki)});
        }
    }
    return out;
}

template <class V>
std::vector<intermediate_convergent> intermediate_convergents(const V& f, const hparam& h, std::size_t depth) {
    return intermediate_convergents(cf_expand(f, depth), h, depth);
}

/// |f - P/Q|, exact for rational f and certified for series.
inline qpow approx_error(const rational_function& f, const poly& U, const poly& V) {
    return (f - rational_function(U, V)).abs();
}

inline qpow approx_error(const laurent_series& f, const poly& U, const poly& V) {
    // |f - U/V| = |Vf - U| / |V|
    const laurent_series r = laurent_series::from_poly(V) * f - laurent_series::from_poly(U);
    if (r.window_is_zero() && !r.is_exact())
        throw insufficient_precision("|Vf - U| lies below the precision floor", f.floor() - 1);
    return r.abs() / V.abs();
}

struct modified_convergent_result {
    qpow lhs;        ///< |f - (P_{k+1} - B P_k)/(Q_{k+1} - B Q_k)|
    qpow rhs;        ///< |B| / |Q_{k+1}|^2
    bool degenerate; ///< deg(Q_{k+1} - B Q_k) < deg Q_{k+1} (only possible when |B| = |A_{k+1}|)
    bool holds() const { return lhs == rhs; }
};

template <class V>
modified_convergent_result modified_convergent_error(const V& f, const cf_expansion& cf, std::size_t k, const poly& B) {
    cf.require(k + 1);
    if (B.is_zero()) throw precondition_failed("B must be nonzero");
    if (B.degree() > cf.A(k + 1).degree()) throw precondition_failed("need |B| <= |A_{k+1}|");
    const auto ki = std::int64_t(k);
    const poly U = cf.P(ki + 1) - B * cf.P(ki), W = cf.Q(ki + 1) - B * cf.Q(ki);
    const degree_t dq = cf.Q(ki + 1).degree();
    if (W.is_zero()) throw degenerate_configuration("B = A_1 at k = 0 sends the approximant to infinity");
    return {approx_error(f, U, W), qpow{false, B.degree() - 2 * dq}, W.degree() < dq};
}

// ---------------------------------------------------------------------------
// roots of unit power series

/// Some w with w^s = gamma (mod u^N), where gamma[0] != 0 and series are
/// ascending in u. Writing s = p^a s' with p not dividing s', the p^a-th power
/// is a Frobenius twist u -> u^(p^a), so gamma must be supported on
/// exponents divisible by p^a; the s'-th root is then solved coefficient by
/// coefficient. Returns nullopt when no root exists.
inline std::optional<std::vector<elem>> unit_series_root(const field& F, std::vector<elem> gamma, std::int64_t s,
                                                         std::size_t N) {
    if (s < 1) throw precondition_failed("root order must be positive");
    gamma.resize(std::max(gamma.size(), N), 0);
    if (gamma[0] == 0) throw precondition_failed("series root needs a unit");
    std::int64_t P = 1, s1 = s;
    while (s1 % F.p() == 0) {
        s1 /= F.p();
        P *= F.p();
    }
    for (std::size_t j = 0; j < N; ++j)
        if (j % std::size_t(P) != 0 && gamma[j] != 0) return std::nullopt;
    const std::size_t N1 = (N + std::size_t(P) - 1) / std::size_t(P);
    std::vector<elem> y(N1);
    for (std::size_t j = 0; j < N1; ++j) {
        // the P-th power map is a bijection of F_q
        auto r = F.root(gamma[j * std::size_t(P)], P);
        y[j] = *r;
    }
    const auto w0 = F.root(y[0], s1);
    if (!w0) return std::nullopt;
    std::vector<elem> w(N1, 0);
    w[0] = *w0;
    const auto truncated_power = [&](const std::vector<elem>& a, std::int64_t e, std::size_t len) {
        std::vector<elem> r(len, 0), b = a;
        r[0] = 1;
        const auto mul = [&](const std::vector<elem>& x, const std::vector<elem>& z) {
            std::vector<elem> o(len, 0);
            for (std::size_t i = 0; i < len; ++i) {
                if (x[i] == 0) continue;
                for (std::size_t j = 0; i + j < len; ++j) o[i + j] = F.add(o[i + j], F.mul(x[i], z[j]));
            }
            return o;
        };
        while (e) {
            if (e & 1) r = mul(r, b);
            b = mul(b, b);
            e >>= 1;
        }
        return r;
    };
    // d/dw_j of coefficient j of w^s1 is s1 w0^(s1-1), a unit
    const elem slope = F.mul(F.from_int(s1), F.pow(w[0], s1 - 1));
    for (std::size_t j = 1; j < N1; ++j) {
        const elem c = truncated_power(w, s1, j + 1)[j];
        w[j] = F.div(F.sub(y[j], c), slope);
    }
    return w;
}

/// Some h with [h^i A] = B, given 1 <= i and deg B = deg A - i.
inline std::optional<hparam> solve_h_for(const poly& A, const poly& B, std::int64_t i) {
    const field& F = A.fld();
    const degree_t m = A.degree();
    if (i < 1 || B.degree() != m - i) throw precondition_failed("need deg B = deg A - i with i >= 1");
    // h = t^-1 w(u), u = t^-1: [h^i A] = t^(m-i) [w^i alpha]_{u-degree <= m-i}
    const std::size_t N = std::size_t(m - i + 1);
    std::vector<elem> alpha(N), beta(N);
    for (std::size_t j = 0; j < N; ++j) {
        alpha[j] = A.coeff(m - std::int64_t(j));
        beta[j] = B.coeff(m - i - std::int64_t(j));
    }
    // gamma = beta / alpha mod u^N
    std::vector<elem> gamma(N, 0);
    const elem inv0 = F.inv(alpha[0]);
    for (std::size_t j = 0; j < N; ++j) {
        elem acc = beta[j];
        for (std::size_t l = 1; l <= j; ++l) acc = F.sub(acc, F.mul(alpha[l], gamma[j - l]));
        gamma[j] = F.mul(acc, inv0);
    }
    const auto w = unit_series_root(F, gamma, i, N);
    if (!w) return std::nullopt;
    const hparam h(laurent_series::from_coeffs(F, -1, *w));
    if (h.power_part(A, i) != B) throw precondition_failed("internal: root does not reproduce B");
    return h;
}

struct classification {
    std::size_t k = 0;  ///< deg V = deg Q_{k+1}
    poly B;             ///< U/V = (P_{k+1} - B P_k)/(Q_{k+1} - B Q_k), |B| < |A_{k+1}|
    bool principal = false;
    qpow error;
    std::optional<hparam> h; ///< realizes B = [h^i A_{k+1}] when solvable
    std::int64_t i = 0;
};

/// Recognizes U/V with deg V = deg Q_{k+1} and |f - U/V| < 1/(|Q_{k+1}||Q_k|)
/// as an intermediate (or principal) convergent.
template <class Value>
classification classify_good_approx(const Value& f, const cf_expansion& cf, const poly& U, const poly& V) {
    if (V.is_zero()) throw zero_input("V = 0");
    const ostrowski_digits d = ostrowski_decompose(V, cf);
    if (d.n == 0) throw precondition_failed("deg V = 0 has no preceding convergent");
    classification out;
    out.k = d.n - 1;
    const auto k = std::int64_t(out.k);
    out.error = approx_error(f, U, V);
    const qpow limit{false, -cf.Q(k + 1).degree() - cf.Q(k).degree()};
    if (!(out.error < limit))
        throw precondition_failed("|f - U/V| = " + out.error.str() + " is not below " + limit.str());
    const field& F = cf.fld();
    // the bound forces every digit below B_{k+1} to vanish
    for (std::size_t j = 0; j < out.k; ++j)
        if (!d.B[j].is_zero()) throw precondition_failed("internal: lower Ostrowski digits survive the bound");
    out.B = d.B[out.k].scaled(F.neg(F.inv(d.a)));
    const poly W = cf.Q(k + 1) - out.B * cf.Q(k), Un = cf.P(k + 1) - out.B * cf.P(k);
    if (!(U * W == V * Un)) throw precondition_failed("U/V does not match the reconstructed convergent");
    out.principal = out.B.is_zero();
    if (!out.principal) {
        out.i = cf.A(out.k + 1).degree() - out.B.degree();
        out.h = solve_h_for(cf.A(out.k + 1), out.B, out.i);
    }
    return out;
}

template <class Value>
classification classify_good_approx(const Value& f, const poly& U, const poly& V) {
    // enough quotients to pass deg V
    cf_expansion cf = cf_expand(f, std::size_t(V.degree()) + 2);
    return classify_good_approx(f, cf, U, V);
}

// ---------------------------------------------------------------------------
// the map F_J: 1/G(f) if deg G(f) >= 0, else {1/f}, with G(f) = 1/f - 1/LT(f)

inline rational_function fj_G(const rational_function& f) {
    const field& F = f.fld();
    const degree_t d = f.degree();
    detail::require_in_L(d);
    const elem lc = F.div(f.num().lead(), f.den().lead());
    const rational_function inv_lt(poly::monomial(F, F.inv(lc), std::size_t(-d)));
    return f.inverse() - inv_lt;
}

inline rational_function fj_step(const rational_function& f) {
    const rational_function G = fj_G(f);
    if (G.degree() >= 0) return G.inverse();
    return artin_step(f);
}

inline laurent_series fj_step(const laurent_series& f) {
    if (f.is_exact() && f.window().size() > 1)
        throw insufficient_precision("F_J of an exact non-monomial is an infinite series; use rational mode");
    detail::require_in_L(f.degree());
    const laurent_series inv = f.inverse();
    const laurent_series G = inv - f.leading_term().inverse();
    const auto dg = G.degree_if_known();
    if (!dg) throw insufficient_precision("deg G(f) undetermined", G.floor() - 1);
    if (*dg >= 0) return G.inverse();
    return inv.fractional_part();
}

struct h_s_certificate {
    std::int64_t s = 0;
    hparam h;
    rational_function g; ///< 1 - f LT(1/f)
};

/// Some s and h with F_h^s(f) = F_J(f), checked by iterating F_h. Raises
/// no_root_certificate when h^s = g has no solution with deg h = -1 at the
/// precision that matters.
inline h_s_certificate find_h_s(const rational_function& f) {
    const field& F = f.fld();
    detail::require_in_L(f.degree());
    const rational_function inv = f.inverse();
    const poly A1 = inv.polynomial_part();
    const degree_t m = A1.degree();
    const rational_function g = rational_function(poly::one(F)) - f * rational_function(A1.leading_term());
    const rational_function target = fj_step(f);
    h_s_certificate out{0, hparam::t_inverse(F), g};
    const poly B = A1 - A1.leading_term();
    if (B.is_zero() || B.degree() < 0) {
        // deg G(f) < 0: F_J(f) = Psi(f) = F_h^(m+1)(f) for every h
        out.s = m + 1;
    } else {
        out.s = m - B.degree();
        auto h = solve_h_for(A1, B, out.s);
        if (!h)
            throw no_root_certificate("no h with deg h = -1 solves [h^" + std::to_string(out.s) + " A_1] = A_1 - LT(A_1) for A_1 = " +
                                      format_poly(A1));
        out.h = *h;
    }
    rational_function x = f;
    for (std::int64_t j = 0; j < out.s; ++j) x = alg_step(x, out.h);
    if (!(x == target)) throw precondition_failed("internal: F_h^s(f) != F_J(f)");
    return out;
}

// ---------------------------------------------------------------------------

/// q^2/(2q-1) mu(C n L) + q/(2q-1) mu(C n J_0). The empty cylinder is O.
inline exact_rational mu_A(const field& F, const cylinder& c) {
    const exact_rational q = F.q();
    if (c.coeffs.empty()) return exact_rational(1);
    const exact_rational w = c.coeffs[0] == 0 ? exact_rational(q * q / (2 * q - 1)) : exact_rational(q / (2 * q - 1));
    return w * haar(F, c);
}

} // namespace farey
