#include "argen/rational.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>

namespace argen {

namespace {

BigInt parse_integer(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer in rational");
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') i = 1;
  if (i == text.size()) throw std::invalid_argument("sign without digits in rational");
  for (std::size_t j = i; j < text.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(text[j])))
      throw std::invalid_argument("bad digit in rational: '" + std::string(text) + "'");
  }
  return BigInt(std::string(text));
}

}  // namespace

Rat parse_rational(std::string_view text) {
  const std::size_t slash = text.find('/');
  if (slash == std::string_view::npos) {
    return Rat(parse_integer(text));
  }
  const BigInt num = parse_integer(text.substr(0, slash));
  const BigInt den = parse_integer(text.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator: '" + std::string(text) + "'");
  return Rat(num, den);
}

std::string fraction_string(const Rat& value) {
  return value.str();
}

std::string decimal_string(const Rat& value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value.convert_to<double>());
  return buf;
}

Rat pow2(int exponent) {
  if (exponent >= 0) return Rat(BigInt(1) << exponent);
  return Rat(BigInt(1), BigInt(1) << -exponent);
}

}  // namespace argen
