#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pss {

// Arbitrary-precision rational used for all first-order data and LP results.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

namespace detail {

inline BigInt parse_integer(std::string_view s, std::string_view whole) {
  if (s.empty()) throw std::invalid_argument("malformed rational '" + std::string(whole) + "'");
  std::size_t pos = 0;
  if (s[0] == '-' || s[0] == '+') pos = 1;
  if (pos == s.size()) throw std::invalid_argument("malformed rational '" + std::string(whole) + "'");
  for (std::size_t k = pos; k < s.size(); ++k) {
    if (s[k] < '0' || s[k] > '9') {
      throw std::invalid_argument("malformed rational '" + std::string(whole) + "'");
    }
  }
  BigInt v(std::string(s.substr(pos)));
  return s[0] == '-' ? BigInt(-v) : v;
}

}  // namespace detail

// Accepts "p", "p/q" and finite decimal literals such as "3.5" (read exactly).
inline Rational parse_rational(std::string_view text) {
  auto first = text.find_first_not_of(" \t");
  auto last = text.find_last_not_of(" \t");
  if (first == std::string_view::npos) throw std::invalid_argument("empty rational");
  std::string_view s = text.substr(first, last - first + 1);

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    BigInt num = detail::parse_integer(s.substr(0, slash), text);
    BigInt den = detail::parse_integer(s.substr(slash + 1), text);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    bool negative = !s.empty() && s[0] == '-';
    std::string_view int_part = s.substr(0, dot);
    std::string_view frac_part = s.substr(dot + 1);
    if (int_part == "-" || int_part == "+" || int_part.empty()) int_part = "0";
    BigInt ip = detail::parse_integer(int_part, text);
    if (ip < 0) ip = -ip;
    BigInt scale = 1;
    BigInt fp = 0;
    if (!frac_part.empty()) {
      fp = detail::parse_integer(frac_part, text);
      if (frac_part[0] == '-' || frac_part[0] == '+') {
        throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
      }
      for (std::size_t k = 0; k < frac_part.size(); ++k) scale *= 10;
    }
    Rational r = Rational(ip) + Rational(fp, scale);
    return negative ? Rational(-r) : r;
  }
  return Rational(detail::parse_integer(s, text));
}

}  // namespace pss
