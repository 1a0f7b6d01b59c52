#include <gtest/gtest.h>

#include "farey/laurent.hpp"
#include "test_support.hpp"

using namespace farey;

namespace {

const field& F2 = field::prime(2);
const field& F3 = field::prime(3);
const field& F5 = field::prime(5);

poly P(const field& F, const char* s) { return parse_poly(F, s); }
rational_function R(const field& F, const std::string& s) { return parse_rational(F, s); }

// Multiply-back oracle: s * den - num vanishes above the floor of the product.
bool multiplies_back(const laurent_series& s, const rational_function& r) {
    const laurent_series prod = s * laurent_series::from_poly(r.den());
    return (prod - laurent_series::from_poly(r.num())).window_is_zero();
}

} // namespace

TEST(Series, FromRationalExamples) {
    const auto s = series_from_rational(R(F2, "1/(t+1)"), -4);
    EXPECT_EQ(s.floor(), -4);
    EXPECT_EQ(s.top(), -1);
    EXPECT_EQ(s.window(), (std::vector<elem>{1, 1, 1}));
    EXPECT_TRUE(multiplies_back(s, R(F2, "1/(t+1)")));

    const auto p = series_from_rational(R(F3, "2*t^2+1"), -7);
    EXPECT_EQ(p.polynomial_part(), P(F3, "2*t^2+1"));
    EXPECT_TRUE(p.fractional_part().window_is_zero());

    const auto r = R(F3, "1/(2*t^3+t^2+2)");
    const auto c = series_from_rational(r, -8);
    EXPECT_EQ(c.degree(), -3);
    EXPECT_EQ(c.coeff(-3), 2);
    EXPECT_TRUE(multiplies_back(c, r));
}

TEST(Series, ArithmeticContracts) {
    const auto a = series_from_rational(R(F3, "1/(t+2)"), -10);
    const auto b = series_from_rational(R(F3, "t/(t^2+1)"), -6);
    EXPECT_EQ((a + b).floor(), -6);
    EXPECT_EQ((a - b).floor(), -6);
    // mul: max(deg a + m_b, deg b + m_a) = max(-1-6, -1-10)
    EXPECT_EQ((a * b).floor(), -7);

    const auto s = series_from_rational(R(F2, "t+1"), -12);
    const auto inv = s.inverse();
    EXPECT_EQ(inv.floor(), -12 - 2 * 1);
    EXPECT_EQ(inv.degree(), -1);
    for (degree_t d = -1; d > inv.floor(); --d) EXPECT_EQ(inv.coeff(d), 1) << d;
}

TEST(Series, InverseMultipliesBackToOne) {
    std::mt19937_64 rng(5);
    for (const field* F : {&F2, &F3, &F5}) {
        for (int i = 0; i < 200; ++i) {
            auto f = testutil::random_nonzero_series_in_L(*F, -30, rng).shifted(std::int64_t(rng() % 7));
            const auto prod = f * f.inverse();
            EXPECT_TRUE(agree(prod, laurent_series::from_poly(poly::one(*F)))) << i;
        }
    }
}

TEST(Series, ErrorsInsteadOfGuessing) {
    const auto z = laurent_series::zero(F3, -5);
    EXPECT_THROW(z.degree(), insufficient_precision);
    EXPECT_THROW(z.inverse(), insufficient_precision);
    EXPECT_THROW(laurent_series::zero(F3).inverse(), division_by_zero);
    const auto shallow = series_from_rational(R(F3, "t^2/(t+1)"), 0);
    EXPECT_THROW(shallow.polynomial_part(), insufficient_precision);
    EXPECT_THROW(shallow.coeff(0), insufficient_precision);
    try {
        z.degree();
    } catch (const insufficient_precision& e) {
        ASSERT_TRUE(e.required_floor().has_value());
        EXPECT_LT(*e.required_floor(), -5);
    }
}

TEST(Series, PolynomialAndFractionalParts) {
    // 2t^3 + t^2 + 2 + t^-1
    const auto f = laurent_series::from_coeffs(F3, 3, {2, 1, 0, 2, 1}, -9);
    EXPECT_EQ(f.polynomial_part(), P(F3, "2*t^3+t^2+2"));
    const auto g = f.fractional_part();
    EXPECT_EQ(g.degree(), -1);
    EXPECT_EQ(g.polynomial_part(), poly(F3));

    const auto inL = series_from_rational(R(F5, "1/(t^2+3)"), -10);
    EXPECT_TRUE(inL.polynomial_part().is_zero());

    const auto h = R(F2, "t/(t^2+1)");
    EXPECT_EQ(fractional_part(P(F2, "t"), h), R(F2, "1/(t^2+1)"));
    EXPECT_EQ(fractional_part(poly::one(F2), h), h);
    const auto hs = fractional_part(P(F2, "t"), series_from_rational(h, -20));
    EXPECT_TRUE(agree(hs, series_from_rational(R(F2, "1/(t^2+1)"), -20)));
}

TEST(Series, UltrametricInequality) {
    std::mt19937_64 rng(17);
    for (const field* F : {&F2, &F3, &F5}) {
        for (int i = 0; i < 10000 / 3; ++i) {
            const auto f = testutil::random_nonzero_series_in_L(*F, -12, rng).shifted(std::int64_t(rng() % 5));
            const auto g = testutil::random_nonzero_series_in_L(*F, -12, rng).shifted(std::int64_t(rng() % 5));
            const auto s = f + g;
            const qpow bound = std::max(f.abs(), g.abs(), [](const qpow& a, const qpow& b) { return a < b; });
            if (!(f.abs() == g.abs())) {
                EXPECT_EQ(s.abs(), bound);
            } else if (!s.window_is_zero()) {
                EXPECT_LE(s.abs(), bound);
            }
        }
    }
}

// Random compositions of up to 10 operations evaluated twice: exactly with
// rational functions, and with truncated series. Every coefficient the series
// route claims to know must match the exact value.
TEST(Series, PrecisionSoundness) {
    std::mt19937_64 rng(23);
    for (const field* F : {&F2, &F3, &F5}) {
        for (int trial = 0; trial < 200; ++trial) {
            const std::int64_t floor = -40;
            rational_function exact = testutil::random_rational_in_L(*F, 4, rng);
            laurent_series approx = series_from_rational(exact, floor);
            const int ops = 1 + int(rng() % 10);
            for (int k = 0; k < ops; ++k) {
                const rational_function other = testutil::random_rational_in_L(*F, 4, rng);
                const laurent_series other_s = series_from_rational(other, floor - int(rng() % 5));
                switch (rng() % 4) {
                case 0: exact = exact + other; approx = approx + other_s; break;
                case 1: exact = exact - other; approx = approx - other_s; break;
                case 2: exact = exact * other; approx = approx * other_s; break;
                case 3:
                    if (other.is_zero()) break;
                    exact = exact / other; approx = approx / other_s; break;
                }
                if (exact.is_zero() || approx.window_is_zero()) break;
            }
            if (approx.floor() > 20) continue;
            const auto reference = series_from_rational(exact, approx.floor());
            EXPECT_TRUE(agree(approx, reference)) << "trial " << trial;
        }
    }
}

TEST(Series, FromContinuedFraction) {
    cf_spec_input one{{P(F2, "t")}, {}};
    EXPECT_EQ(rational_from_cf(F2, one), R(F2, "1/t"));
    EXPECT_TRUE(agree(series_from_cf(F2, one, -30), series_from_rational(R(F2, "1/t"), -30)));

    cf_spec_input periodic{{}, {P(F2, "t")}};
    const auto f = series_from_cf(F2, periodic, -40);
    EXPECT_EQ(f.floor(), -40);
    // f = 1/(t + f)  <=>  f^2 + t f + 1 = 0
    const auto residual = f * f + laurent_series::from_poly(P(F2, "t")) * f + laurent_series::from_poly(poly::one(F2));
    EXPECT_TRUE(residual.window_is_zero());
    EXPECT_LE(residual.floor(), -38);

    cf_spec_input two{{P(F3, "2*t^3+t^2+2"), P(F3, "t")}, {}};
    EXPECT_EQ(rational_from_cf(F3, two), rational_function(P(F3, "t"), P(F3, "2*t^4+t^3+2*t+1")));

    cf_spec_input bad{{P(F3, "2")}, {}};
    EXPECT_THROW(bad.validate(), domain_error);
}

TEST(Rational, ParseAndFormat) {
    const auto r = R(F3, "1/(2*t^3+t^2+2)");
    EXPECT_EQ(r.den(), P(F3, "t^3+2*t^2+1"));
    EXPECT_EQ(r.num(), P(F3, "2"));
    EXPECT_EQ(R(F3, format_rational(r)), r);
    EXPECT_EQ(R(F2, "(t^2+1)/(t+1)"), R(F2, "t+1"));
    EXPECT_THROW(R(F2, "1/0"), parse_error);
    EXPECT_THROW(R(F2, "1/(t"), parse_error);
}
