#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>

#include "efx/errors.hpp"

namespace efx {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Parses "p/q", "p", or "-p/q". Decimal notation is rejected so that all
// numeric I/O stays exact end to end.
Rational parse_rational(const std::string& text);

// "p/q" when q != 1, otherwise just "p".
std::string rational_to_string(const Rational& r);

// Smallest integer >= r.
BigInt rational_ceil(const Rational& r);

inline BigInt pow2(int e) {
  BigInt x = 1;
  return x << e;
}

}  // namespace efx
