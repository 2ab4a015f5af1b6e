#include "efx/rational.hpp"

#include <cctype>

namespace efx {

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw input_error("empty rational");
  if (text.find('.') != std::string::npos)
    throw input_error("decimal values are not supported, use p/q: '" + text +
                      "'");
  auto slash = text.find('/');
  auto check_int = [&](const std::string& s) {
    if (s.empty()) throw input_error("malformed rational: '" + text + "'");
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw input_error("malformed rational: '" + text + "'");
    for (; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i])))
        throw input_error("malformed rational: '" + text + "'");
  };
  if (slash == std::string::npos) {
    check_int(text);
    return Rational(BigInt(text));
  }
  std::string p = text.substr(0, slash);
  std::string q = text.substr(slash + 1);
  check_int(p);
  check_int(q);
  BigInt den(q);
  if (den == 0) throw input_error("zero denominator: '" + text + "'");
  return Rational(BigInt(p), den);
}

std::string rational_to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

BigInt rational_ceil(const Rational& r) {
  BigInt num = numerator(r);
  BigInt den = denominator(r);  // always > 0
  BigInt q = num / den;
  if (q * den < num) ++q;
  return q;
}

}  // namespace efx
