#pragma once

// 2x2 matrices over F_q[t].

#include <string>

#include "farey/poly.hpp"

namespace farey {

struct pmat {
    poly a, b, c, d; // [[a, b], [c, d]]

    static pmat identity(const field& F) { return {poly::one(F), poly(F), poly(F), poly::one(F)}; }

    const field& fld() const { return a.fld(); }
    poly det() const { return a * d - b * c; }

    friend pmat operator*(const pmat& x, const pmat& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    pmat& operator*=(const pmat& y) { return *this = *this * y; }
    friend bool operator==(const pmat& x, const pmat& y) {
        return x.a == y.a && x.b == y.b && x.c == y.c && x.d == y.d;
    }
    pmat scaled(elem s) const { return {a.scaled(s), b.scaled(s), c.scaled(s), d.scaled(s)}; }

    /// Adjugate; equals the inverse when det = 1.
    pmat adjugate() const { return {d, -b, -c, a}; }
};

inline std::string format_pmat(const pmat& m) {
    return "[[" + format_poly(m.a) + ", " + format_poly(m.b) + "], [" + format_poly(m.c) + ", " +
           format_poly(m.d) + "]]";
}

} // namespace farey
