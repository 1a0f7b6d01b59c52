#pragma once

// Finite fields F_q, q = p^e, with table-driven arithmetic.
//
// Elements are small integers 0..q-1 encoding the coefficient vector
// (c_0, ..., c_{e-1}) over Z/pZ as c_0 + c_1 p + ... + c_{e-1} p^{e-1}.
// For a prime field the encoding is the canonical residue itself.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "farey/errors.hpp"

namespace farey {

using elem = std::uint16_t;

struct field_spec {
    std::uint32_t p = 2;
    std::uint32_t e = 1;
    /// Monic irreducible modulus over F_p, ascending coefficients, length e+1.
    /// Empty when e == 1.
    std::vector<std::uint32_t> modulus;

    std::uint32_t q() const {
        std::uint32_t r = 1;
        for (std::uint32_t i = 0; i < e; ++i) r *= p;
        return r;
    }
};

namespace detail {

inline bool is_prime(std::uint32_t n) {
    if (n < 2) return false;
    for (std::uint32_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Dense polynomials over Z/pZ used only while building extension fields.
using zp_poly = std::vector<std::uint32_t>;

inline void zp_trim(zp_poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::uint32_t zp_inv(std::uint32_t a, std::uint32_t p) {
    std::uint64_t r = 1, b = a % p;
    for (std::uint32_t k = p - 2; k; k >>= 1) {
        if (k & 1) r = r * b % p;
        b = b * b % p;
    }
    return static_cast<std::uint32_t>(r);
}

inline zp_poly zp_mod(zp_poly a, const zp_poly& m, std::uint32_t p) {
    zp_trim(a);
    const std::size_t dm = m.size() - 1;
    const std::uint32_t inv_lead = zp_inv(m.back(), p);
    while (a.size() > dm) {
        const std::uint64_t f = std::uint64_t(a.back()) * inv_lead % p;
        const std::size_t shift = a.size() - 1 - dm;
        for (std::size_t i = 0; i <= dm; ++i)
            a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + p - f * m[i] % p) % p);
        zp_trim(a);
    }
    return a;
}

// Exhaustive search for a monic factor of degree 1..deg/2.
inline bool zp_irreducible(const zp_poly& m, std::uint32_t p) {
    const std::size_t deg = m.size() - 1;
    for (std::size_t d = 1; 2 * d <= deg; ++d) {
        zp_poly cand(d + 1, 0);
        cand[d] = 1;
        std::uint64_t count = 1;
        for (std::size_t i = 0; i < d; ++i) count *= p;
        for (std::uint64_t idx = 0; idx < count; ++idx) {
            std::uint64_t v = idx;
            for (std::size_t i = 0; i < d; ++i) {
                cand[i] = static_cast<std::uint32_t>(v % p);
                v /= p;
            }
            if (zp_mod(m, cand, p).empty()) return false;
        }
    }
    return true;
}

} // namespace detail

/// Immutable arithmetic context for F_q. Obtain instances through
/// `field::get`; they live for the whole program and are shared freely.
class field {
public:
    static constexpr std::uint32_t max_order = 256;

    static const field& get(const field_spec& spec) {
        static std::mutex mu;
        static std::map<std::vector<std::uint32_t>, std::unique_ptr<field>> registry;
        std::vector<std::uint32_t> key{spec.p, spec.e};
        key.insert(key.end(), spec.modulus.begin(), spec.modulus.end());
        std::lock_guard lock(mu);
        auto it = registry.find(key);
        if (it == registry.end())
            it = registry.emplace(key, std::unique_ptr<field>(new field(spec))).first;
        return *it->second;
    }

    static const field& prime(std::uint32_t p) { return get(field_spec{p, 1, {}}); }

    std::uint32_t p() const { return spec_.p; }
    std::uint32_t e() const { return spec_.e; }
    std::uint32_t q() const { return q_; }
    const field_spec& spec() const { return spec_; }

    elem zero() const { return 0; }
    elem one() const { return 1; }

    elem add(elem a, elem b) const { return add_[idx(a, b)]; }
    elem sub(elem a, elem b) const { return add_[idx(a, neg_[b])]; }
    elem neg(elem a) const { return neg_[a]; }
    elem mul(elem a, elem b) const { return mul_[idx(a, b)]; }
    elem inv(elem a) const {
        if (a == 0) throw division_by_zero("inverse of zero in F_" + std::to_string(q_));
        return inv_[a];
    }
    elem div(elem a, elem b) const { return mul(a, inv(b)); }
    elem pow(elem a, std::int64_t k) const {
        if (k < 0) return pow(inv(a), -k);
        elem r = 1;
        while (k) {
            if (k & 1) r = mul(r, a);
            a = mul(a, a);
            k >>= 1;
        }
        return r;
    }

    /// Image of an integer under Z -> F_p -> F_q.
    elem from_int(std::int64_t v) const {
        const std::int64_t p = spec_.p;
        return static_cast<elem>(((v % p) + p) % p);
    }

    std::vector<std::uint32_t> digits(elem a) const {
        std::vector<std::uint32_t> d(spec_.e);
        std::uint32_t v = a;
        for (auto& x : d) {
            x = v % spec_.p;
            v /= spec_.p;
        }
        return d;
    }

    elem from_digits(const std::vector<std::uint32_t>& d) const {
        if (d.size() != spec_.e)
            throw parse_error("extension element needs " + std::to_string(spec_.e) + " coordinates");
        std::uint32_t v = 0;
        for (std::size_t i = d.size(); i-- > 0;) {
            if (d[i] >= spec_.p)
                throw parse_error("coefficient " + std::to_string(d[i]) + " is not below p = " +
                                  std::to_string(spec_.p));
            v = v * spec_.p + d[i];
        }
        return static_cast<elem>(v);
    }

    /// Integer for prime fields, `[c0,...,c_{e-1}]` otherwise.
    std::string format(elem a) const {
        if (spec_.e == 1) return std::to_string(a);
        std::ostringstream os;
        os << '[';
        auto d = digits(a);
        for (std::size_t i = 0; i < d.size(); ++i) os << (i ? "," : "") << d[i];
        os << ']';
        return os.str();
    }

    /// Some x with x^k = a, if one exists (exhaustive search).
    std::optional<elem> root(elem a, std::int64_t k) const {
        for (std::uint32_t x = 0; x < q_; ++x)
            if (pow(static_cast<elem>(x), k) == a) return static_cast<elem>(x);
        return std::nullopt;
    }

private:
    explicit field(const field_spec& spec) : spec_(spec) {
        if (!detail::is_prime(spec.p)) throw domain_error(std::to_string(spec.p) + " is not prime");
        if (spec.e == 0) throw domain_error("extension degree must be at least 1");
        if (spec.e > 1) {
            if (spec.modulus.size() != spec.e + 1 || spec.modulus.back() != 1)
                throw domain_error("extension modulus must be monic of degree e");
            for (auto c : spec.modulus)
                if (c >= spec.p) throw domain_error("modulus coefficient not reduced mod p");
            if (!detail::zp_irreducible(spec.modulus, spec.p))
                throw domain_error("modulus is reducible over F_" + std::to_string(spec.p));
        } else if (!spec.modulus.empty()) {
            throw domain_error("prime fields take no modulus");
        }
        std::uint64_t qq = 1;
        for (std::uint32_t i = 0; i < spec.e; ++i) {
            qq *= spec.p;
            if (qq > max_order) throw domain_error("field order exceeds " + std::to_string(max_order));
        }
        q_ = static_cast<std::uint32_t>(qq);
        add_.resize(std::size_t(q_) * q_);
        mul_.resize(std::size_t(q_) * q_);
        neg_.resize(q_);
        inv_.assign(q_, 0);
        const std::uint32_t p = spec.p;
        for (std::uint32_t a = 0; a < q_; ++a) {
            auto da = digits(static_cast<elem>(a));
            std::vector<std::uint32_t> dn(spec.e);
            for (std::uint32_t i = 0; i < spec.e; ++i) dn[i] = (p - da[i]) % p;
            neg_[a] = from_digits(dn);
            for (std::uint32_t b = 0; b < q_; ++b) {
                auto db = digits(static_cast<elem>(b));
                std::vector<std::uint32_t> ds(spec.e);
                for (std::uint32_t i = 0; i < spec.e; ++i) ds[i] = (da[i] + db[i]) % p;
                add_[idx(a, b)] = from_digits(ds);
                detail::zp_poly prod(2 * spec.e, 0);
                for (std::uint32_t i = 0; i < spec.e; ++i)
                    for (std::uint32_t j = 0; j < spec.e; ++j)
                        prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
                if (spec.e > 1) prod = detail::zp_mod(prod, spec.modulus, p);
                prod.resize(spec.e, 0);
                mul_[idx(a, b)] = from_digits(prod);
            }
        }
        for (std::uint32_t a = 1; a < q_; ++a)
            for (std::uint32_t b = 1; b < q_; ++b)
                if (mul_[idx(a, b)] == 1) {
                    inv_[a] = static_cast<elem>(b);
                    break;
                }
    }

    std::size_t idx(std::uint32_t a, std::uint32_t b) const { return std::size_t(a) * q_ + b; }

    field_spec spec_;
    std::uint32_t q_ = 0;
    std::vector<elem> add_, mul_, neg_, inv_;
};

} // namespace farey
