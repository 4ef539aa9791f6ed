#include "icl/rational.h"

#include <cctype>
#include <stdexcept>

namespace icl {

namespace {

using Int = boost::multiprecision::cpp_int;

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Rational parse_decimal(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (dot != std::string_view::npos && frac.empty()) {
    throw std::invalid_argument("malformed number '" + std::string(s) + "'");
  }
  if (whole.empty() && frac.empty()) throw std::invalid_argument("empty number");
  if (!whole.empty() && !all_digits(whole)) {
    throw std::invalid_argument("malformed number '" + std::string(s) + "'");
  }
  if (!frac.empty() && !all_digits(frac)) {
    throw std::invalid_argument("malformed number '" + std::string(s) + "'");
  }
  Int numerator = whole.empty() ? Int(0) : Int(std::string(whole));
  Int denominator = 1;
  for (char c : frac) {
    numerator = numerator * 10 + (c - '0');
    denominator *= 10;
  }
  Rational r(numerator, denominator);
  return negative ? Rational(-r) : r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  Rational num = parse_decimal(text.substr(0, slash));
  Rational den = parse_decimal(text.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

std::string to_fraction_string(const Rational& r) {
  const Int num = boost::multiprecision::numerator(r);
  const Int den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string to_decimal_string(const Rational& r, int digits) {
  Int num = boost::multiprecision::numerator(r);
  const Int den = boost::multiprecision::denominator(r);
  std::string out;
  if (num < 0) {
    out += '-';
    num = -num;
  }
  out += Int(num / den).str();
  Int rem = num % den;
  if (rem == 0) return out;
  out += '.';
  for (int i = 0; i < digits && rem != 0; ++i) {
    rem *= 10;
    out += static_cast<char>('0' + static_cast<int>(rem / den));
    rem %= den;
  }
  return out;
}

bool within(const Rational& a, const Rational& b, const Rational& tolerance) {
  Rational d = a - b;
  if (d < 0) d = -d;
  return d <= tolerance;
}

}  // namespace icl
