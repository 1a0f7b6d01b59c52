#pragma once

// Haar measure on K normalized so that mu(O) = 1, restricted to cylinder
// sets, and the two densities used by the Farey maps.

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "farey/laurent.hpp"

namespace farey {

using exact_rational = boost::multiprecision::cpp_rational;

inline exact_rational q_power(std::uint32_t q, std::int64_t k) {
    boost::multiprecision::cpp_int p = 1;
    for (std::int64_t i = 0; i < (k < 0 ? -k : k); ++i) p *= q;
    return k >= 0 ? exact_rational(p) : exact_rational(1) / exact_rational(p);
}

/// {f in O : coefficient of t^-j equals coeffs[j], j = 0..len-1}.
/// Cylinders inside L have coeffs[0] = 0.
struct cylinder {
    std::vector<elem> coeffs;

    std::size_t length() const { return coeffs.size(); }
    bool in_L() const { return !coeffs.empty() && coeffs[0] == 0; }

    bool contains(const laurent_series& f) const {
        for (std::size_t j = 0; j < coeffs.size(); ++j)
            if (f.coeff(-std::int64_t(j)) != coeffs[j]) return false;
        return true;
    }

    /// Every element of the cylinder agrees with this series down to t^{-(len-1)}.
    laurent_series as_series(const field& F) const {
        return laurent_series::from_coeffs(F, 0, coeffs, -std::int64_t(coeffs.size()));
    }

    friend bool operator<(const cylinder& a, const cylinder& b) { return a.coeffs < b.coeffs; }
    friend bool operator==(const cylinder& a, const cylinder& b) { return a.coeffs == b.coeffs; }
};

/// Depth-d cylinders of L: d fixed coefficients at t^-1 .. t^-d.
inline std::vector<cylinder> cylinders_of_L(const field& F, std::size_t d) {
    std::vector<cylinder> out{cylinder{{0}}};
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<cylinder> next;
        for (const auto& c : out)
            for (std::uint32_t a = 0; a < F.q(); ++a) {
                cylinder e = c;
                e.coeffs.push_back(elem(a));
                next.push_back(std::move(e));
            }
        out = std::move(next);
    }
    return out;
}

inline exact_rational haar(const field& F, const cylinder& c) { return q_power(F.q(), -std::int64_t(c.length())); }

/// Level weights of the invariant measure of the geometric map:
/// (q-1)/(2 q^n) for n >= 0 and (q-1)/(2 q^(-n-1)) for n < 0.
inline exact_rational geo_weight(const field& F, std::int64_t n) {
    const exact_rational base = exact_rational(F.q() - 1) / 2;
    return base * q_power(F.q(), n >= 0 ? -n : n + 1);
}

inline exact_rational mu_G(const field& F, const cylinder& c, std::int64_t n) {
    if (!c.in_L()) return 0;
    return geo_weight(F, n) * haar(F, c);
}

} // namespace farey
