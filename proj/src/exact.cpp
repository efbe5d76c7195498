#include "spip/exact.hpp"

#include <limits>
#include <stdexcept>

namespace spip {

BigInt floor_div(const BigInt& num, const BigInt& den) {
  if (den == 0) throw std::domain_error("floor_div: zero denominator");
  BigInt q = num / den;  // truncates toward zero
  BigInt r = num - q * den;
  if (r != 0 && ((r < 0) != (den < 0))) --q;
  return q;
}

BigInt floor(const Rational& q) { return floor_div(numerator(q), denominator(q)); }

BigInt ceil(const Rational& q) { return -floor(-q); }

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

// GMP reads a leading 0 as an octal prefix.
std::string strip_zeros(std::string_view digits) {
  const auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? std::string("0") : std::string(digits.substr(first));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

BigInt parse_bigint(std::string_view text) {
  text = trim(text);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (!all_digits(text)) throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  BigInt z{strip_zeros(text)};
  return negative ? BigInt(-z) : z;
}

Rational parse_rational(std::string_view text) {
  std::string_view s = trim(text);
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    BigInt p = parse_bigint(s.substr(0, slash));
    std::string_view qs = trim(s.substr(slash + 1));
    if (!all_digits(qs)) throw std::invalid_argument("bad denominator in '" + std::string(s) + "'");
    BigInt q{strip_zeros(qs)};
    if (q == 0) throw std::invalid_argument("zero denominator in '" + std::string(s) + "'");
    return Rational(p, q);
  }
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    bool negative = !whole.empty() && whole.front() == '-';
    if (!whole.empty() && (whole.front() == '-' || whole.front() == '+')) whole.remove_prefix(1);
    if (whole.empty()) whole = "0";
    if (!all_digits(whole) || (!frac.empty() && !all_digits(frac)))
      throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    BigInt digits{strip_zeros(std::string(whole) + std::string(frac))};
    Rational r(digits, scale);
    return negative ? Rational(-r) : r;
  }
  return Rational(parse_bigint(s));
}

std::string to_string(const Rational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

std::string to_string(const BigInt& z) { return z.str(); }

std::optional<std::int64_t> to_int64(const BigInt& z) {
  if (z > std::numeric_limits<std::int64_t>::max() || z < std::numeric_limits<std::int64_t>::min())
    return std::nullopt;
  return z.convert_to<std::int64_t>();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace spip
