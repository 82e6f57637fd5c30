#include "tops/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

namespace tops {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Accumulates digits with overflow detection.
bool append_digit(long long& value, char c) {
  if (value > (INT64_MAX - (c - '0')) / 10) return false;
  value = value * 10 + (c - '0');
  return true;
}

std::optional<Rational> make_canonical(long long num, long long den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    if (num == INT64_MIN || den == INT64_MIN) return std::nullopt;
    num = -num;
    den = -den;
  }
  long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
  return Rational{num, den};
}

// [+-]? digits [. digits]?  or  [+-]? . digits
std::optional<Rational> parse_decimal(std::string_view s, size_t& pos) {
  bool negative = false;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    negative = (s[pos] == '-');
    ++pos;
  }
  long long mantissa = 0;
  long long den = 1;
  size_t int_digits = 0, frac_digits = 0;
  bool saw_dot = false;
  while (pos < s.size() && is_digit(s[pos])) {
    if (!append_digit(mantissa, s[pos])) return std::nullopt;
    ++int_digits;
    ++pos;
  }
  if (pos < s.size() && s[pos] == '.') {
    saw_dot = true;
    ++pos;
    while (pos < s.size() && is_digit(s[pos])) {
      if (!append_digit(mantissa, s[pos])) return std::nullopt;
      if (den > INT64_MAX / 10) return std::nullopt;
      den *= 10;
      ++frac_digits;
      ++pos;
    }
  }
  if (int_digits + frac_digits == 0) return std::nullopt;
  if (saw_dot && frac_digits == 0) return std::nullopt;
  return make_canonical(negative ? -mantissa : mantissa, den);
}

void skip_spaces(std::string_view s, size_t& pos) {
  while (pos < s.size() && s[pos] == ' ') ++pos;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  size_t pos = 0;
  auto first = parse_decimal(text, pos);
  if (!first) return std::nullopt;
  if (pos == text.size()) return first;

  // fraction form: the first part must be an integer (no '.'), then "/int"
  size_t slash_scan = pos;
  skip_spaces(text, slash_scan);
  if (slash_scan >= text.size() || text[slash_scan] != '/') return std::nullopt;
  if (text.substr(0, pos).find('.') != std::string_view::npos) return std::nullopt;
  size_t rhs = slash_scan + 1;
  skip_spaces(text, rhs);
  auto second = parse_decimal(text, rhs);
  if (!second || rhs != text.size()) return std::nullopt;
  if (second->den != 1 || second->num == 0) return std::nullopt;  // integer, nonzero
  if (first->den != 1) return std::nullopt;
  return make_canonical(first->num, second->num);
}

bool rational_within_nano(const Rational& a, const Rational& b) {
  // |a.num/a.den - b.num/b.den| <= 1/1e9
  // <=>  1e9 * |a.num*b.den - b.num*a.den| <= a.den*b.den
  using i128 = __int128;
  i128 cross = i128(a.num) * b.den - i128(b.num) * a.den;
  if (cross < 0) cross = -cross;
  i128 rhs = i128(a.den) * b.den;
  constexpr i128 kNano = 1000000000;
  // cross * 1e9 can overflow 128 bits only when cross > ~1.7e29
  constexpr i128 kSafe = i128(1) << 96;
  if (cross < kSafe) return cross * kNano <= rhs;
  long double va = static_cast<long double>(a.num) / static_cast<long double>(a.den);
  long double vb = static_cast<long double>(b.num) / static_cast<long double>(b.den);
  return std::fabs(va - vb) <= 1e-9L;
}

}  // namespace tops
