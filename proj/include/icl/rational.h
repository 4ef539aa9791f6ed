// Exact rational numbers for probabilities.

#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace icl {

using Rational = boost::multiprecision::cpp_rational;

// Parses decimal ("0.7") and fraction ("7/10") literals exactly.
// Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

// "7/10", "1", "0".
std::string to_fraction_string(const Rational& r);

// Finite decimal representation when one exists, otherwise rounded to
// `digits` places.
std::string to_decimal_string(const Rational& r, int digits = 12);

bool within(const Rational& a, const Rational& b, const Rational& tolerance);

}  // namespace icl
