#pragma once

// The field K = F_q((1/t)) in two representations:
//
//   rational_function  exact P/Q, reduced, Q monic;
//   laurent_series     a window of coefficients known exactly above a
//                      precision floor m, i.e. a ball  c + t^m O.
//
// Precision floors follow fixed worst-case rules (see the operator
// comments); every coefficient a series reports above its floor is exact.
// Questions whose answer depends on unknown coefficients raise
// insufficient_precision instead of guessing.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "farey/errors.hpp"
#include "farey/poly.hpp"

namespace farey {

// ---------------------------------------------------------------------------
// rational functions

class rational_function {
public:
    rational_function() = default;
    explicit rational_function(const poly& p) : num_(p), den_(poly::one(p.fld())) {}
    rational_function(const poly& num, const poly& den) : num_(num), den_(den) { normalize(); }

    static rational_function zero(const field& F) { return rational_function(poly(F)); }

    const poly& num() const { return num_; }
    const poly& den() const { return den_; }
    const field& fld() const { return num_.fld(); }

    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.is_one(); }
    degree_t degree() const {
        return num_.is_zero() ? neg_inf : num_.degree() - den_.degree();
    }
    qpow abs() const { return qpow::of_degree(degree()); }

    /// [f]: the polynomial part.
    poly polynomial_part() const { return num_ / den_; }
    /// f - [f].
    rational_function fractional_part() const { return rational_function(num_ % den_, den_); }

    rational_function inverse() const {
        if (is_zero()) throw division_by_zero("inverse of the zero rational function");
        return rational_function(den_, num_);
    }

    friend rational_function operator+(const rational_function& a, const rational_function& b) {
        return rational_function(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend rational_function operator-(const rational_function& a, const rational_function& b) {
        return rational_function(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend rational_function operator*(const rational_function& a, const rational_function& b) {
        return rational_function(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend rational_function operator/(const rational_function& a, const rational_function& b) {
        return a * b.inverse();
    }
    rational_function operator-() const { return rational_function(-num_, den_); }

    friend bool operator==(const rational_function& a, const rational_function& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

private:
    void normalize() {
        if (den_.is_zero()) throw division_by_zero("rational function with zero denominator");
        if (num_.is_zero()) {
            den_ = poly::one(den_.fld());
            return;
        }
        poly g = gcd(num_, den_);
        if (!g.is_one()) {
            num_ = num_ / g;
            den_ = den_ / g;
        }
        const elem k = den_.fld().inv(den_.lead());
        num_ = num_.scaled(k);
        den_ = den_.scaled(k);
    }

    poly num_, den_;
};

inline std::string format_rational(const rational_function& r) {
    if (r.is_polynomial()) return format_poly(r.num());
    auto wrap = [](const poly& p) {
        const std::string s = format_poly(p);
        return (s.find('+') != std::string::npos || s.find('*') != std::string::npos) ? "(" + s + ")" : s;
    };
    return wrap(r.num()) + "/" + wrap(r.den());
}

/// Parses `P`, `P/Q`, `(P)/(Q)`.
inline rational_function parse_rational(const field& F, std::string_view text) {
    auto strip = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
        return s;
    };
    int depth = 0;
    std::size_t slash = std::string_view::npos;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '(') ++depth;
        else if (text[i] == ')') --depth;
        else if (text[i] == '/' && depth == 0) {
            if (slash != std::string_view::npos) throw parse_error("more than one '/' in rational");
            slash = i;
        }
        if (depth < 0) throw parse_error("unbalanced parentheses");
    }
    if (depth != 0) throw parse_error("unbalanced parentheses");
    if (slash == std::string_view::npos) return rational_function(parse_poly(F, strip(text)));
    const poly den = parse_poly(F, strip(text.substr(slash + 1)));
    if (den.is_zero()) throw parse_error("zero denominator");
    return rational_function(parse_poly(F, strip(text.substr(0, slash))), den);
}

// ---------------------------------------------------------------------------
// truncated Laurent series

class laurent_series {
public:
    /// Floor sentinel for values known exactly (finite Laurent polynomials).
    static constexpr std::int64_t exact = std::numeric_limits<std::int64_t>::min() / 4;

    laurent_series() = default;

    static laurent_series zero(const field& F, std::int64_t floor = exact) {
        laurent_series s;
        s.f_ = &F;
        s.floor_ = clamp_floor(floor);
        return s;
    }

    /// `coeffs[i]` is the coefficient of t^(top - i).
    static laurent_series from_coeffs(const field& F, degree_t top, std::vector<elem> coeffs,
                                      std::int64_t floor = exact) {
        laurent_series s;
        s.f_ = &F;
        s.top_ = top;
        s.c_ = std::move(coeffs);
        s.floor_ = clamp_floor(floor);
        s.normalize();
        return s;
    }

    static laurent_series from_poly(const poly& p, std::int64_t floor = exact) {
        std::vector<elem> c(p.coeffs().rbegin(), p.coeffs().rend());
        return from_coeffs(p.fld(), p.degree() == neg_inf ? 0 : p.degree(), std::move(c), floor);
    }

    static laurent_series monomial(const field& F, elem c, degree_t k) {
        return from_coeffs(F, k, {c});
    }

    const field& fld() const { return *f_; }
    std::int64_t floor() const { return floor_; }
    bool is_exact() const { return floor_ == exact; }

    /// True when no coefficient above the floor is nonzero.
    bool window_is_zero() const { return c_.empty(); }
    /// The value is exactly zero.
    bool is_zero() const { return c_.empty() && is_exact(); }

    bool known(degree_t d) const { return d > floor_; }

    elem coeff(degree_t d) const {
        if (!known(d))
            throw insufficient_precision("coefficient of t^" + std::to_string(d) + " lies below the floor " +
                                             std::to_string(floor_),
                                         d - 1);
        if (c_.empty() || d > top_ || d < lowest()) return 0;
        return c_[std::size_t(top_ - d)];
    }

    /// Degree of the highest nonzero coefficient, when certified.
    std::optional<degree_t> degree_if_known() const {
        if (!c_.empty()) return top_;
        if (is_exact()) return neg_inf;
        return std::nullopt;
    }

    degree_t degree() const {
        if (auto d = degree_if_known()) return *d;
        throw insufficient_precision("degree undetermined: every known coefficient down to floor " +
                                         std::to_string(floor_) + " is zero",
                                     floor_ - 1);
    }

    qpow abs() const { return qpow::of_degree(degree()); }

    /// Lowest stored degree (meaningful for nonzero windows).
    degree_t lowest() const { return top_ - degree_t(c_.size()) + 1; }
    degree_t top() const { return top_; }
    const std::vector<elem>& window() const { return c_; }

    /// Forgets every coefficient of degree <= m (m >= current floor).
    laurent_series coarsened(std::int64_t m) const {
        if (m <= floor_) return *this;
        laurent_series s = *this;
        s.floor_ = m;
        s.normalize();
        return s;
    }

    /// [f]; needs every coefficient of degree >= 0.
    poly polynomial_part() const {
        if (floor_ >= 0)
            throw insufficient_precision("polynomial part needs floor <= -1, have " + std::to_string(floor_), -1);
        poly r(*f_);
        if (c_.empty() || top_ < 0) return r;
        std::vector<elem> v(std::size_t(top_) + 1, 0);
        for (degree_t d = std::max<degree_t>(0, lowest()); d <= top_; ++d) v[std::size_t(d)] = coeff(d);
        return poly(*f_, std::move(v));
    }

    /// f - [f].
    laurent_series fractional_part() const {
        if (floor_ >= 0)
            throw insufficient_precision("fractional part needs floor <= -1, have " + std::to_string(floor_), -1);
        if (c_.empty() || top_ < 0) return *this;
        if (lowest() >= 0) return zero(*f_, floor_);
        laurent_series s = *this;
        s.c_.erase(s.c_.begin(), s.c_.begin() + std::ptrdiff_t(top_ + 1));
        s.top_ = -1;
        s.normalize();
        return s;
    }

    /// Leading term as an exact monomial.
    laurent_series leading_term() const {
        const degree_t d = degree();
        if (d == neg_inf) throw zero_input("leading term of zero");
        return monomial(*f_, c_.front(), d);
    }

    /// Multiplication by t^k.
    laurent_series shifted(std::int64_t k) const {
        laurent_series s = *this;
        s.top_ += k;
        if (!is_exact()) s.floor_ += k;
        return s;
    }

    laurent_series scaled(elem a) const {
        if (a == 0) return zero(*f_, floor_);
        laurent_series s = *this;
        for (auto& x : s.c_) x = f_->mul(x, a);
        return s;
    }

    laurent_series operator-() const { return scaled(f_->neg(1)); }

    // add/sub: floor = max(m_f, m_g)
    friend laurent_series operator+(const laurent_series& a, const laurent_series& b) {
        return combine(a, b, false);
    }
    friend laurent_series operator-(const laurent_series& a, const laurent_series& b) {
        return combine(a, b, true);
    }

    // mul: floor = max(deg a + m_b, deg b + m_a, m_a + m_b), the last term
    // mattering only when both windows vanish.
    friend laurent_series operator*(const laurent_series& a, const laurent_series& b) {
        const field& F = *a.f_;
        std::int64_t fl = exact;
        const bool az = a.c_.empty(), bz = b.c_.empty();
        if (!az) fl = std::max(fl, a.top_ + b.floor_);
        if (!bz) fl = std::max(fl, b.top_ + a.floor_);
        fl = std::max(fl, a.floor_ + b.floor_);
        fl = clamp_floor(fl);
        if (az || bz) return zero(F, fl);
        const degree_t top = a.top_ + b.top_;
        const degree_t low = std::max<degree_t>(a.lowest() + b.lowest(), fl + 1);
        if (low > top) return zero(F, fl);
        std::vector<elem> out(std::size_t(top - low + 1), 0);
        const std::size_t n = out.size();
        for (std::size_t i = 0; i < a.c_.size() && i < n; ++i) {
            const elem ai = a.c_[i];
            if (ai == 0) continue;
            const std::size_t jmax = std::min(b.c_.size(), n - i);
            for (std::size_t j = 0; j < jmax; ++j) out[i + j] = F.add(out[i + j], F.mul(ai, b.c_[j]));
        }
        return from_coeffs(F, top, std::move(out), fl);
    }

    /// 1/f with floor m_f - 2 deg f. For an exact non-monomial the series is
    /// infinite and `floor_request` must say where to stop.
    laurent_series inverse(std::optional<std::int64_t> floor_request = std::nullopt) const {
        const field& F = *f_;
        if (c_.empty()) {
            if (is_exact()) throw division_by_zero("inverse of zero series");
            throw insufficient_precision("inverse of a series whose known window is zero", floor_ - 1);
        }
        const degree_t d = top_;
        std::int64_t fl = is_exact() ? exact : floor_ - 2 * d;
        if (is_exact() && c_.size() == 1) {
            fl = exact;
        } else if (fl == exact && !floor_request) {
            throw insufficient_precision("exact inverse of a non-monomial needs an explicit floor");
        }
        if (floor_request) fl = std::max(fl, *floor_request);
        if (fl == exact) return monomial(F, F.inv(c_.front()), -d);
        const degree_t rtop = -d;
        if (rtop <= fl) return zero(F, fl);
        const std::size_t n = std::size_t(rtop - fl);
        std::vector<elem> g(n, 0);
        const elem inv0 = F.inv(c_.front());
        const elem neg_inv0 = F.neg(inv0);
        g[0] = inv0;
        for (std::size_t k = 1; k < n; ++k) {
            elem acc = 0;
            const std::size_t jmax = std::min(k, c_.size() - 1);
            for (std::size_t j = 1; j <= jmax; ++j) acc = F.add(acc, F.mul(c_[j], g[k - j]));
            g[k] = F.mul(neg_inv0, acc);
        }
        return from_coeffs(F, rtop, std::move(g), fl);
    }

    friend laurent_series operator/(const laurent_series& a, const laurent_series& b) {
        if (b.is_exact() && b.c_.size() > 1) {
            if (a.is_zero()) return a;
            if (a.is_exact())
                throw insufficient_precision("exact quotient by a non-monomial needs an explicit floor");
            if (b.c_.empty()) throw division_by_zero("division by zero series");
            // enough of 1/b that a's own floor is the bottleneck
            const std::int64_t target = a.floor_ - b.top_;
            const std::int64_t req = a.c_.empty() ? -b.top_ : target - a.top_;
            return a * b.inverse(std::min(req, target));
        }
        return a * b.inverse();
    }

    /// Structural equality (same floor, same window).
    friend bool operator==(const laurent_series& a, const laurent_series& b) {
        return a.floor_ == b.floor_ && a.c_ == b.c_ && (a.c_.empty() || a.top_ == b.top_);
    }

private:
    static std::int64_t clamp_floor(std::int64_t m) { return m <= exact / 2 ? exact : m; }

    void normalize() {
        // drop coefficients at or below the floor
        if (!c_.empty() && lowest() <= floor_) {
            const degree_t keep = top_ - floor_;
            c_.resize(keep > 0 ? std::size_t(keep) : 0);
        }
        std::size_t lead = 0;
        while (lead < c_.size() && c_[lead] == 0) ++lead;
        if (lead == c_.size()) {
            c_.clear();
            top_ = 0;
            return;
        }
        c_.erase(c_.begin(), c_.begin() + std::ptrdiff_t(lead));
        top_ -= degree_t(lead);
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    static laurent_series combine(const laurent_series& a, const laurent_series& b, bool subtract) {
        const field& F = *a.f_;
        const std::int64_t fl = std::max(a.floor_, b.floor_);
        if (a.c_.empty() && b.c_.empty()) return zero(F, fl);
        degree_t top = a.c_.empty() ? b.top_ : b.c_.empty() ? a.top_ : std::max(a.top_, b.top_);
        degree_t low = a.c_.empty() ? b.lowest() : b.c_.empty() ? a.lowest() : std::min(a.lowest(), b.lowest());
        low = std::max<degree_t>(low, fl + 1);
        if (low > top) return zero(F, fl);
        std::vector<elem> out(std::size_t(top - low + 1), 0);
        if (!a.c_.empty())
            for (std::size_t i = 0; i < a.c_.size(); ++i) {
                const degree_t d = a.top_ - degree_t(i);
                if (d < low) break;
                out[std::size_t(top - d)] = a.c_[i];
            }
        if (!b.c_.empty())
            for (std::size_t i = 0; i < b.c_.size(); ++i) {
                const degree_t d = b.top_ - degree_t(i);
                if (d < low) break;
                auto& slot = out[std::size_t(top - d)];
                slot = subtract ? F.sub(slot, b.c_[i]) : F.add(slot, b.c_[i]);
            }
        return from_coeffs(F, top, std::move(out), fl);
    }

    const field* f_ = nullptr;
    degree_t top_ = 0;
    std::vector<elem> c_;
    std::int64_t floor_ = exact;
};

/// True when a and b agree on every degree both of them know.
inline bool agree(const laurent_series& a, const laurent_series& b) {
    const std::int64_t fl = std::max(a.floor(), b.floor());
    return (a.coarsened(fl) - b.coarsened(fl)).window_is_zero();
}

/// num/den by formal long division, known down to degree floor+1.
inline laurent_series series_from_rational(const rational_function& r, std::int64_t floor) {
    const field& F = r.fld();
    if (r.is_zero()) return laurent_series::zero(F, floor);
    const auto& den = r.den();
    if (den.coeffs().size() == 1 || (den.degree() >= 0 && den == poly::monomial(F, den.lead(), std::size_t(den.degree())))) {
        // finite expansion
        const laurent_series n = laurent_series::from_poly(r.num());
        return n.shifted(-den.degree()).scaled(F.inv(den.lead())).coarsened(floor);
    }
    if (floor == laurent_series::exact)
        throw insufficient_precision("expansion of " + format_rational(r) + " is infinite; give a floor");
    const laurent_series n = laurent_series::from_poly(r.num());
    const laurent_series d = laurent_series::from_poly(den);
    // 1/den down to floor - deg num suffices for the product to reach floor
    const laurent_series inv = d.inverse(floor - r.num().degree());
    return (n * inv).coarsened(floor);
}

/// Exact series of a finite Laurent polynomial as a rational function.
inline rational_function to_rational(const laurent_series& s) {
    if (!s.is_exact()) throw precondition_failed("only exact series convert to rational functions");
    const field& F = s.fld();
    if (s.window_is_zero()) return rational_function::zero(F);
    const degree_t low = s.lowest();
    std::vector<elem> c(s.window().rbegin(), s.window().rend());
    poly p(F, std::move(c));
    if (low >= 0) return rational_function(p.shifted(std::size_t(low)));
    return rational_function(p, poly::monomial(F, 1, std::size_t(-low)));
}

/// {Q f} = Q f - [Q f].
inline laurent_series fractional_part(const poly& Q, const laurent_series& f) {
    const laurent_series qf = laurent_series::from_poly(Q) * f;
    if (qf.floor() >= 0)
        throw insufficient_precision("{Qf} needs Qf known through degree 0", f.floor() - qf.floor() - 1);
    return qf.fractional_part();
}

inline rational_function fractional_part(const poly& Q, const rational_function& f) {
    return (rational_function(Q) * f).fractional_part();
}

// ---------------------------------------------------------------------------
// elements given by their continued fraction

struct cf_spec_input {
    std::vector<poly> preperiod;
    std::vector<poly> period;

    void validate() const {
        for (const auto* seq : {&preperiod, &period})
            for (const auto& a : *seq)
                if (a.degree() < 1) throw domain_error("partial quotients must have degree >= 1");
    }
    bool finite() const { return period.empty(); }
    const poly& quotient(std::size_t i) const {
        if (i < preperiod.size()) return preperiod[i];
        return period[(i - preperiod.size()) % period.size()];
    }
};

/// 1/(A_1 + 1/(A_2 + ... 1/A_n)) for a finite list.
inline rational_function fold_continued_fraction(const field& F, const std::vector<poly>& quotients) {
    poly p0 = poly::one(F), p1(F); // P_{-1}, P_0
    poly q0(F), q1 = poly::one(F); // Q_{-1}, Q_0
    for (const auto& a : quotients) {
        p0 = std::exchange(p1, a * p1 + p0);
        q0 = std::exchange(q1, a * q1 + q0);
    }
    return rational_function(p1, q1);
}

inline rational_function rational_from_cf(const field& F, const cf_spec_input& spec) {
    spec.validate();
    if (!spec.finite()) throw domain_error("periodic continued fraction is not rational");
    return fold_continued_fraction(F, spec.preperiod);
}

/// The value of the continued fraction, known down to degree floor+1.
inline laurent_series series_from_cf(const field& F, const cf_spec_input& spec, std::int64_t floor) {
    spec.validate();
    if (spec.finite()) return series_from_rational(rational_from_cf(F, spec), floor);
    // |f - P_n/Q_n| = q^-(deg Q_n + deg Q_{n+1}); unroll until that is below q^floor
    std::vector<poly> quotients;
    degree_t dq = 0;
    for (std::size_t i = 0;; ++i) {
        const degree_t next = dq + spec.quotient(i).degree();
        if (dq + next >= -floor) break;
        quotients.push_back(spec.quotient(i));
        dq = next;
    }
    return series_from_rational(fold_continued_fraction(F, quotients), floor);
}

/// `A1;A2;...` partial-quotient lists.
inline std::vector<poly> parse_poly_list(const field& F, std::string_view text) {
    std::vector<poly> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(';', start), text.size());
        const auto piece = text.substr(start, end - start);
        if (piece.find_first_not_of(" \t") != std::string_view::npos) out.push_back(parse_poly(F, piece));
        start = end + 1;
    }
    return out;
}

} // namespace farey
