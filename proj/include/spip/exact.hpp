#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Core>
#include <Eigen/LU>

namespace spip {

/// Exact rational scalar. Always reduced with a positive denominator.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
/// Arbitrary precision integer for counts and common denominators.
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

template <class Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
template <class Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

using Matrix2q = Matrix2<Rational>;
using Vector2q = Vector2<Rational>;

inline BigInt numerator(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator(const Rational& q) { return boost::multiprecision::denominator(q); }

/// Mathematical floor (toward -inf).
BigInt floor(const Rational& q);
BigInt ceil(const Rational& q);

/// floor(num / den) for den != 0, rounding toward -inf.
BigInt floor_div(const BigInt& num, const BigInt& den);

/// Accepts "p/q", "p", or a finite decimal such as "-0.25". Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form; integers keep an explicit "/1".
std::string to_string(const Rational& q);
std::string to_string(const BigInt& z);

BigInt parse_bigint(std::string_view text);

/// Returns the value when it fits in int64.
std::optional<std::int64_t> to_int64(const BigInt& z);

double to_double(const Rational& q);

}  // namespace spip
