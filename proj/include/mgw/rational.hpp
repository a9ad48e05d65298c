#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace mgw {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Accepts "a/b", "a", or a plain decimal such as "0.25" or "1e-3".
Rational parse_rational(std::string_view text);
// Exact value of the shortest decimal that round-trips to x.
Rational rational_from_double(double x);
std::string format_rational(const Rational& q);

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline long double to_long_double(const Rational& q) { return q.convert_to<long double>(); }

}  // namespace mgw
