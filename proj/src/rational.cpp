#include "soficlab/rational.hpp"

#include <cctype>

#include "soficlab/errors.hpp"

namespace soficlab {

Rational ratio(std::int64_t num, std::int64_t den) { return ratio(BigInt(num), BigInt(den)); }

Rational ratio(const BigInt& num, const BigInt& den) {
  if (den == 0) fail(ErrorCode::InvalidArgument, "zero denominator");
  return Rational(num, den);
}

std::string to_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

namespace {

BigInt parse_integer(std::string_view s, std::string_view whole) {
  std::size_t i = 0;
  bool negative = false;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
    negative = s[i] == '-';
    ++i;
  }
  if (i == s.size()) fail(ErrorCode::InvalidArgument, "malformed rational '" + std::string(whole) + "'");
  BigInt value = 0;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i])))
      fail(ErrorCode::InvalidArgument, "malformed rational '" + std::string(whole) + "'");
    value = value * 10 + (s[i] - '0');
  }
  return negative ? BigInt(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text, text));
  BigInt num = parse_integer(text.substr(0, slash), text);
  BigInt den = parse_integer(text.substr(slash + 1), text);
  return ratio(num, den);
}

Rational rational_min(const Rational& a, const Rational& b) { return a < b ? a : b; }
Rational rational_max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace soficlab
