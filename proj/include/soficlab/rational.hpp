#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace soficlab {

// Exact rationals with unbounded numerator and denominator, so that products
// of per-coordinate agreement fractions never overflow.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

Rational ratio(std::int64_t num, std::int64_t den);
Rational ratio(const BigInt& num, const BigInt& den);

// "p/q" in lowest terms; zero is "0/1".
std::string to_string(const Rational& r);

// Accepts "p/q" or a bare integer "p".
Rational parse_rational(std::string_view text);

Rational rational_min(const Rational& a, const Rational& b);
Rational rational_max(const Rational& a, const Rational& b);

}  // namespace soficlab
