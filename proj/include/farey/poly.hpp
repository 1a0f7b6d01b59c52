#pragma once

// Dense univariate polynomials over F_q, the ring F_q[t].

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "farey/errors.hpp"
#include "farey/field.hpp"

namespace farey {

/// Degrees, with deg(0) represented by `neg_inf` (ordered below every
/// integer degree).
using degree_t = std::int64_t;
inline constexpr degree_t neg_inf = std::numeric_limits<degree_t>::min();

inline degree_t deg_add(degree_t a, degree_t b) {
    return (a == neg_inf || b == neg_inf) ? neg_inf : a + b;
}

/// An absolute value |x| = q^exponent, or |0| = 0.
struct qpow {
    bool zero = false;
    std::int64_t exponent = 0;

    static qpow of_degree(degree_t d) { return d == neg_inf ? qpow{true, 0} : qpow{false, d}; }
    static qpow nil() { return {true, 0}; }

    friend bool operator==(const qpow& a, const qpow& b) {
        return a.zero == b.zero && (a.zero || a.exponent == b.exponent);
    }
    friend bool operator<(const qpow& a, const qpow& b) {
        if (a.zero) return !b.zero;
        if (b.zero) return false;
        return a.exponent < b.exponent;
    }
    friend bool operator<=(const qpow& a, const qpow& b) { return !(b < a); }
    friend bool operator>(const qpow& a, const qpow& b) { return b < a; }
    friend qpow operator*(const qpow& a, const qpow& b) {
        if (a.zero || b.zero) return nil();
        return {false, a.exponent + b.exponent};
    }
    friend qpow operator/(const qpow& a, const qpow& b) {
        if (b.zero) throw division_by_zero("division by |0|");
        if (a.zero) return nil();
        return {false, a.exponent - b.exponent};
    }

    /// Symbolic form: `0`, `q^0`, `q^-4`.
    std::string str() const { return zero ? "0" : "q^" + std::to_string(exponent); }
};

class poly {
public:
    poly() = default;
    explicit poly(const field& f) : f_(&f) {}
    poly(const field& f, std::vector<elem> coeffs) : f_(&f), c_(std::move(coeffs)) { trim(); }

    static poly constant(const field& f, elem c) { return poly(f, {c}); }
    static poly one(const field& f) { return constant(f, 1); }
    static poly monomial(const field& f, elem c, std::size_t k) {
        std::vector<elem> v(k + 1, 0);
        v[k] = c;
        return poly(f, std::move(v));
    }
    static poly t(const field& f) { return monomial(f, 1, 1); }

    const field& fld() const { return *f_; }
    const field* field_ptr() const { return f_; }

    degree_t degree() const { return c_.empty() ? neg_inf : degree_t(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    bool is_one() const { return c_.size() == 1 && c_[0] == 1; }
    elem coeff(std::int64_t i) const {
        return (i < 0 || std::size_t(i) >= c_.size()) ? elem(0) : c_[std::size_t(i)];
    }
    elem lead() const { return c_.empty() ? elem(0) : c_.back(); }
    const std::vector<elem>& coeffs() const { return c_; }
    qpow abs() const { return qpow::of_degree(degree()); }

    poly operator-() const {
        poly r(*this);
        for (auto& x : r.c_) x = f_->neg(x);
        return r;
    }

    poly& operator+=(const poly& o) {
        if (c_.size() < o.c_.size()) c_.resize(o.c_.size(), 0);
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] = f_->add(c_[i], o.c_[i]);
        trim();
        return *this;
    }
    poly& operator-=(const poly& o) {
        if (c_.size() < o.c_.size()) c_.resize(o.c_.size(), 0);
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] = f_->sub(c_[i], o.c_[i]);
        trim();
        return *this;
    }
    friend poly operator+(poly a, const poly& b) { return a += b; }
    friend poly operator-(poly a, const poly& b) { return a -= b; }

    friend poly operator*(const poly& a, const poly& b) {
        poly r(*a.f_);
        if (a.is_zero() || b.is_zero()) return r;
        const field& F = *a.f_;
        r.c_.assign(a.c_.size() + b.c_.size() - 1, 0);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            const elem ai = a.c_[i];
            if (ai == 0) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                r.c_[i + j] = F.add(r.c_[i + j], F.mul(ai, b.c_[j]));
        }
        r.trim();
        return r;
    }
    poly& operator*=(const poly& o) { return *this = *this * o; }

    poly scaled(elem s) const {
        if (s == 0) return poly(*f_);
        poly r(*this);
        for (auto& x : r.c_) x = f_->mul(x, s);
        return r;
    }

    /// Multiplication by t^k, k >= 0.
    poly shifted(std::size_t k) const {
        if (is_zero()) return *this;
        poly r(*f_);
        r.c_.assign(k, 0);
        r.c_.insert(r.c_.end(), c_.begin(), c_.end());
        return r;
    }

    /// Terms of degree >= k, divided by t^k.
    poly div_t_pow(std::size_t k) const {
        if (k >= c_.size()) return poly(*f_);
        return poly(*f_, std::vector<elem>(c_.begin() + std::ptrdiff_t(k), c_.end()));
    }

    /// Terms of degree >= k (kept in place).
    poly high_part(std::size_t k) const {
        poly r(*this);
        for (std::size_t i = 0; i < std::min(k, r.c_.size()); ++i) r.c_[i] = 0;
        r.trim();
        return r;
    }

    poly leading_term() const {
        if (is_zero()) return *this;
        return monomial(*f_, lead(), c_.size() - 1);
    }

    poly monic() const {
        if (is_zero()) return *this;
        return scaled(f_->inv(lead()));
    }

    friend bool operator==(const poly& a, const poly& b) { return a.c_ == b.c_; }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    const field* f_ = nullptr;
    std::vector<elem> c_;
};

/// Division with remainder: a = quo*b + rem, deg rem < deg b.
inline std::pair<poly, poly> divmod(const poly& a, const poly& b) {
    if (b.is_zero()) throw division_by_zero("polynomial division by zero");
    const field& F = a.fld();
    if (a.degree() < b.degree()) return {poly(F), a};
    std::vector<elem> rem = a.coeffs();
    const auto& bc = b.coeffs();
    const std::size_t db = bc.size() - 1;
    const elem inv_lead = F.inv(bc.back());
    std::vector<elem> quo(rem.size() - db, 0);
    for (std::size_t k = rem.size(); k-- > db;) {
        const elem c = F.mul(rem[k], inv_lead);
        quo[k - db] = c;
        if (c == 0) continue;
        for (std::size_t j = 0; j <= db; ++j)
            rem[k - db + j] = F.sub(rem[k - db + j], F.mul(c, bc[j]));
    }
    rem.resize(db);
    return {poly(F, std::move(quo)), poly(F, std::move(rem))};
}

inline poly operator/(const poly& a, const poly& b) { return divmod(a, b).first; }
inline poly operator%(const poly& a, const poly& b) { return divmod(a, b).second; }

/// Monic gcd; gcd(0, 0) is 0.
inline poly gcd(poly a, poly b) {
    while (!b.is_zero()) {
        poly r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

struct bezout {
    poly g, s, t; ///< g = s*a + t*b, g monic
};

inline bezout xgcd(const poly& a, const poly& b) {
    const field& F = a.fld();
    poly r0 = a, r1 = b, s0 = poly::one(F), s1(F), t0(F), t1 = poly::one(F);
    while (!r1.is_zero()) {
        auto [qt, r] = divmod(r0, r1);
        r0 = std::exchange(r1, std::move(r));
        s0 = std::exchange(s1, s0 - qt * s1);
        t0 = std::exchange(t1, t0 - qt * t1);
    }
    if (r0.is_zero()) return {r0, s0, t0};
    const elem k = F.inv(r0.lead());
    return {r0.scaled(k), s0.scaled(k), t0.scaled(k)};
}

// ---------------------------------------------------------------------------
// Text form: terms `c*t^k`, `c*t`, `c` (or bare `t^k`, `t`) joined by `+`.

inline std::string format_poly(const poly& a, char var = 't') {
    if (a.is_zero()) return "0";
    const field& F = a.fld();
    std::string out;
    for (std::size_t k = a.coeffs().size(); k-- > 0;) {
        const elem c = a.coeffs()[k];
        if (c == 0) continue;
        if (!out.empty()) out += '+';
        const bool show_coeff = c != 1 || k == 0;
        if (show_coeff) out += F.format(c);
        if (k > 0) {
            if (show_coeff) out += '*';
            out += var;
            if (k > 1) out += '^' + std::to_string(k);
        }
    }
    return out;
}

namespace detail {

struct poly_scanner {
    const field& F;
    std::string_view s;
    std::size_t pos = 0;
    char var;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw parse_error(msg + " at offset " + std::to_string(pos) + " in \"" + std::string(s) + "\"");
    }
    std::uint64_t number() {
        skip();
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) fail("expected integer");
        std::uint64_t v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + std::uint64_t(s[pos] - '0');
            if (v > (1u << 30)) fail("integer too large");
            ++pos;
        }
        return v;
    }
    elem coefficient() {
        skip();
        if (eat('[')) {
            std::vector<std::uint32_t> d;
            do d.push_back(static_cast<std::uint32_t>(number()));
            while (eat(','));
            if (!eat(']')) fail("expected ']'");
            return F.from_digits(d);
        }
        const auto v = number();
        if (v >= F.p()) fail("coefficient " + std::to_string(v) + " is not below p = " + std::to_string(F.p()));
        // a bare integer is an element of the prime subfield, whose encoding is the integer itself
        return static_cast<elem>(v);
    }
    // Parses one term; returns (coefficient, exponent).
    std::pair<elem, std::size_t> term() {
        skip();
        elem c = 1;
        bool have_coeff = false;
        if (pos < s.size() && s[pos] != var) {
            c = coefficient();
            have_coeff = true;
            if (!eat('*')) return {c, 0};
        }
        skip();
        if (pos >= s.size() || s[pos] != var) {
            if (have_coeff) fail(std::string("expected '") + var + "'");
            fail("expected term");
        }
        ++pos;
        std::size_t k = 1;
        if (eat('^')) k = static_cast<std::size_t>(number());
        return {c, k};
    }
};

} // namespace detail

inline poly parse_poly(const field& F, std::string_view text, char var = 't') {
    detail::poly_scanner sc{F, text, 0, var};
    sc.skip();
    if (sc.pos >= text.size()) sc.fail("empty polynomial");
    std::vector<elem> c;
    do {
        auto [coef, k] = sc.term();
        if (c.size() <= k) c.resize(k + 1, 0);
        c[k] = F.add(c[k], coef);
    } while (sc.eat('+'));
    sc.skip();
    if (sc.pos != text.size()) sc.fail("unexpected character");
    return poly(F, std::move(c));
}

} // namespace farey
