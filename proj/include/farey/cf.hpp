#pragma once

// The Artin map f -> {1/f} on the unit ball L = {|f| < 1}, continued
// fraction expansions and principal convergents.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "farey/laurent.hpp"
#include "farey/matrix.hpp"

namespace farey {

namespace detail {

inline void require_in_L(degree_t d) {
    if (d == neg_inf) throw zero_input("the Artin map is undefined at 0");
    if (d >= 0) throw domain_error("argument has degree " + std::to_string(d) + ", expected |f| < 1");
}

} // namespace detail

inline rational_function artin_step(const rational_function& f) {
    detail::require_in_L(f.degree());
    return f.inverse().fractional_part();
}

inline laurent_series artin_step(const laurent_series& f) {
    detail::require_in_L(f.degree());
    if (f.is_exact() && f.window().size() > 1)
        throw insufficient_precision("{1/f} of an exact non-monomial is an infinite series; use rational mode");
    return f.inverse().fractional_part();
}

enum class cf_stop { depth, terminated, precision };

/// Partial quotients A_1..A_n and convergents P_k/Q_k, k = -1..n, with
/// P_{-1} = 1, P_0 = 0, Q_{-1} = 0, Q_0 = 1.
class cf_expansion {
public:
    explicit cf_expansion(const field& F) : f_(&F), P_{poly::one(F), poly(F)}, Q_{poly(F), poly::one(F)} {}

    const field& fld() const { return *f_; }
    std::size_t depth() const { return A_.size(); }
    const std::vector<poly>& quotients() const { return A_; }
    /// A_k, 1 <= k <= depth().
    const poly& A(std::size_t k) const { return A_.at(k - 1); }
    const poly& P(std::int64_t k) const { return P_.at(std::size_t(k + 1)); }
    const poly& Q(std::int64_t k) const { return Q_.at(std::size_t(k + 1)); }
    rational_function convergent(std::int64_t k) const { return rational_function(P(k), Q(k)); }

    /// [[P_{k-1}, P_k], [Q_{k-1}, Q_k]]
    pmat matrix(std::int64_t k) const { return {P(k - 1), P(k), Q(k - 1), Q(k)}; }

    void push(const poly& a) {
        A_.push_back(a);
        const std::size_t n = P_.size();
        P_.push_back(a * P_[n - 1] + P_[n - 2]);
        Q_.push_back(a * Q_[n - 1] + Q_[n - 2]);
    }

    /// Why the expansion stopped.
    cf_stop stop = cf_stop::depth;
    bool terminated() const { return stop == cf_stop::terminated; }
    /// For stop == precision: no floor above this can certify another quotient.
    std::optional<std::int64_t> required_floor;

    /// Throws unless A_1..A_k are available.
    void require(std::size_t k) const {
        if (k <= depth()) return;
        if (stop == cf_stop::precision)
            throw insufficient_precision("only " + std::to_string(depth()) + " partial quotients are certified",
                                         required_floor);
        throw depth_exceeded("expansion has " + std::to_string(depth()) + " partial quotients, need " +
                             std::to_string(k));
    }

private:
    const field* f_;
    std::vector<poly> A_;
    std::vector<poly> P_, Q_;
};

/// Euclid on num/den.
inline cf_expansion cf_expand(const rational_function& f, std::size_t max_k) {
    const field& F = f.fld();
    if (f.degree() >= 0) throw domain_error("cf_expand expects |f| < 1");
    cf_expansion cf(F);
    poly num = f.num(), den = f.den();
    while (!num.is_zero()) {
        if (cf.depth() == max_k) {
            cf.stop = cf_stop::depth;
            return cf;
        }
        auto [a, r] = divmod(den, num);
        cf.push(a);
        den = std::move(num);
        num = std::move(r);
    }
    cf.stop = cf_stop::terminated;
    return cf;
}

/// The known window of s as an exact value.
inline laurent_series truncation(const laurent_series& s) {
    if (s.window_is_zero()) return laurent_series::zero(s.fld());
    return laurent_series::from_coeffs(s.fld(), s.top(), s.window());
}

/// Series mode. Runs Euclid on the truncation S of f and keeps the quotients
/// every completion of the window shares: A_1..A_j are certified exactly
/// when |f - S| < 1/|Q_j|^2, i.e. 2 deg Q_j <= -floor - 1.
inline cf_expansion cf_expand(const laurent_series& f, std::size_t max_k) {
    const field& F = f.fld();
    if (f.is_exact()) {
        if (f.window_is_zero()) return cf_expand(rational_function::zero(F), max_k);
        return cf_expand(to_rational(f), max_k);
    }
    const std::int64_t m = f.floor();
    if (f.window_is_zero()) {
        cf_expansion cf(F);
        cf.stop = cf_stop::precision;
        cf.required_floor = m - 1;
        return cf;
    }
    detail::require_in_L(f.degree());
    const cf_expansion s = cf_expand(to_rational(truncation(f)), max_k);
    cf_expansion cf(F);
    for (std::size_t j = 1; j <= s.depth(); ++j) {
        if (2 * s.Q(std::int64_t(j)).degree() > -m - 1) {
            cf.stop = cf_stop::precision;
            cf.required_floor = std::min<std::int64_t>(m - 1, -2 * (s.Q(std::int64_t(j) - 1).degree() + 1) - 1);
            return cf;
        }
        cf.push(s.A(j));
    }
    if (s.terminated()) {
        // the window ends in an exact convergent; the next quotient depends on the tail
        cf.stop = cf_stop::precision;
        cf.required_floor = std::min<std::int64_t>(m - 1, -2 * (s.Q(std::int64_t(s.depth())).degree() + 1) - 1);
    } else {
        cf.stop = cf_stop::depth;
    }
    return cf;
}

/// Reference route for series: iterate artin_step and read [1/f] directly.
inline cf_expansion cf_expand_iterated(laurent_series f, std::size_t max_k) {
    if (f.is_exact()) return cf_expand(f, max_k);
    cf_expansion cf(f.fld());
    while (cf.depth() < max_k) {
        if (f.is_zero()) {
            cf.stop = cf_stop::terminated;
            return cf;
        }
        try {
            detail::require_in_L(f.degree());
            const laurent_series inv = f.inverse();
            const poly a = inv.polynomial_part();
            cf.push(a);
            f = inv.fractional_part();
        } catch (const insufficient_precision& e) {
            cf.stop = cf_stop::precision;
            cf.required_floor = e.required_floor();
            return cf;
        }
    }
    cf.stop = f.is_zero() ? cf_stop::terminated : cf_stop::depth;
    return cf;
}

struct qf_identity {
    qpow lhs; ///< |{Q_k f}|
    qpow rhs; ///< 1/|Q_{k+1}|
    bool holds() const { return lhs == rhs; }
};

inline qf_identity check_qf_identity(const rational_function& f, const cf_expansion& cf, std::size_t k) {
    cf.require(k + 1);
    return {fractional_part(cf.Q(std::int64_t(k)), f).abs(), qpow{false, -cf.Q(std::int64_t(k + 1)).degree()}};
}

inline qf_identity check_qf_identity(const laurent_series& f, const cf_expansion& cf, std::size_t k) {
    cf.require(k + 1);
    return {fractional_part(cf.Q(std::int64_t(k)), f).abs(), qpow{false, -cf.Q(std::int64_t(k + 1)).degree()}};
}

/// P_1/Q_1, ..., P_n/Q_n: each satisfies |f - P/Q| < 1/|Q|^2.
template <class Value>
std::vector<rational_function> hurwitz_witnesses(const Value& f, std::size_t n) {
    const cf_expansion cf = cf_expand(f, n);
    cf.require(n);
    std::vector<rational_function> out;
    for (std::size_t k = 1; k <= n; ++k) out.push_back(cf.convergent(std::int64_t(k)));
    return out;
}

/// V = a Q_n + sum_{i<n} B_{i+1} Q_i with deg B_{i+1} < deg A_{i+1}, where
/// deg V = deg Q_n. `B[i]` holds B_{i+1}; `s` is the least i with
/// B_{i+1} != 0 (n when every B vanishes).
struct ostrowski_digits {
    elem a = 0;
    std::size_t n = 0;
    std::vector<poly> B;
    std::size_t s = 0;
};

inline ostrowski_digits ostrowski_decompose(const poly& V, const cf_expansion& cf) {
    const field& F = cf.fld();
    if (V.is_zero()) throw zero_input("cannot decompose V = 0");
    std::optional<std::size_t> n;
    for (std::size_t j = 0; j <= cf.depth(); ++j)
        if (cf.Q(std::int64_t(j)).degree() == V.degree()) n = j;
    if (!n) {
        if (V.degree() > cf.Q(std::int64_t(cf.depth())).degree())
            throw depth_exceeded("deg V = " + std::to_string(V.degree()) + " exceeds the available convergents");
        throw precondition_failed("deg V = " + std::to_string(V.degree()) + " is not a convergent denominator degree");
    }
    ostrowski_digits out;
    out.n = *n;
    out.a = F.div(V.lead(), cf.Q(std::int64_t(*n)).lead());
    poly rest = V - cf.Q(std::int64_t(*n)).scaled(out.a);
    out.B.assign(*n, poly(F));
    for (std::size_t i = *n; i-- > 0;) {
        auto [b, r] = divmod(rest, cf.Q(std::int64_t(i)));
        out.B[i] = std::move(b);
        rest = std::move(r);
    }
    out.s = *n;
    for (std::size_t i = 0; i < *n; ++i)
        if (!out.B[i].is_zero()) {
            out.s = i;
            break;
        }
    return out;
}

inline poly ostrowski_reconstruct(const ostrowski_digits& d, const cf_expansion& cf) {
    poly v = cf.Q(std::int64_t(d.n)).scaled(d.a);
    for (std::size_t i = 0; i < d.B.size(); ++i) v += d.B[i] * cf.Q(std::int64_t(i));
    return v;
}

} // namespace farey
