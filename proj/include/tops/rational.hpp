#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace tops {

// Exact rational with 64-bit numerator/denominator, canonical form
// (den > 0, reduced). Values whose exact representation would overflow are
// simply not representable; parsing returns nullopt for those and the
// caller falls back to string comparison.
struct Rational {
  long long num = 0;
  long long den = 1;

  friend bool operator==(const Rational&, const Rational&) = default;
};

// Parses an integer, finite decimal ("3.25", ".5"), or fraction "a/b"
// (optional spaces around '/', optional signs, b != 0) into canonical form.
std::optional<Rational> parse_rational(std::string_view text);

// |a - b| <= 1/10^9, computed in exact integer arithmetic where the
// intermediate products fit 128 bits, long double otherwise.
bool rational_within_nano(const Rational& a, const Rational& b);

}  // namespace tops
