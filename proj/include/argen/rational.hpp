#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <string_view>

namespace argen {

// All probability arithmetic in this library is exact. Probabilities and
// masses are arbitrary-precision rationals; floats appear only in
// display-only decimal renderings.
using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Parses "p/q" or "p" (optional leading '-', q > 0 after sign
// normalization). Throws std::invalid_argument on anything else.
Rat parse_rational(std::string_view text);

// Canonical exact rendering: "p/q", or just "p" when the denominator is 1.
std::string fraction_string(const Rat& value);

// Decimal rendering at 6 significant digits. Display-only.
std::string decimal_string(const Rat& value);

// 2^exponent; exponent may be negative.
Rat pow2(int exponent);

}  // namespace argen
