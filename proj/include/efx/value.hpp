#pragma once

#include <string>

#include "efx/rational.hpp"

namespace efx {

// An exact utility: a rational base plus a rational coefficient of a symbolic
// infinitesimal. Good g carries the infinitesimal 2^g, so distinct bundles
// always compare unequal and every tie in base value is broken
// deterministically. Comparison is lexicographic on (base, tag); addition and
// scalar multiplication act componentwise.
struct Value {
  Rational base;
  Rational tag;

  Value() = default;
  Value(Rational b, Rational t) : base(std::move(b)), tag(std::move(t)) {}

  Value& operator+=(const Value& o) {
    base += o.base;
    tag += o.tag;
    return *this;
  }
  Value& operator-=(const Value& o) {
    base -= o.base;
    tag -= o.tag;
    return *this;
  }
  friend Value operator+(Value a, const Value& b) { return a += b; }
  friend Value operator-(Value a, const Value& b) { return a -= b; }
  friend Value operator*(const Rational& c, const Value& v) {
    return Value(c * v.base, c * v.tag);
  }

  friend bool operator==(const Value& a, const Value& b) {
    return a.base == b.base && a.tag == b.tag;
  }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
  friend bool operator<(const Value& a, const Value& b) {
    if (a.base != b.base) return a.base < b.base;
    return a.tag < b.tag;
  }
  friend bool operator>(const Value& a, const Value& b) { return b < a; }
  friend bool operator<=(const Value& a, const Value& b) { return !(b < a); }
  friend bool operator>=(const Value& a, const Value& b) { return !(a < b); }

  std::string str() const {
    return rational_to_string(base) + " + " + rational_to_string(tag) + "*eps";
  }
};

inline Value zero_value() { return Value(Rational(0), Rational(0)); }

}  // namespace efx
