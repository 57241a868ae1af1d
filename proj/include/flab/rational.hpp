#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace flab {

using Rational = mpq_class;
using Vec = std::vector<Rational>;

// Accepts "p/q", "p", and optional surrounding whitespace; result is canonical.
Rational parse_rational(std::string_view text);
std::string format_rational(const Rational& r);

Vec zeros(std::size_t n);
Vec unit_vector(std::size_t n, std::size_t i);
bool is_zero(const Vec& v);
Rational dot(const Vec& a, const Vec& b);
Rational l1_norm(const Vec& v);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& v, const Rational& s);
std::string format_vec(const Vec& v);

// Lexicographic order on equal-length vectors; shorter sorts first otherwise.
std::strong_ordering lex_compare(const Vec& a, const Vec& b);

struct VecLess {
  bool operator()(const Vec& a, const Vec& b) const { return lex_compare(a, b) < 0; }
};

// Scale a nonzero rational vector to the primitive integer vector with the same direction.
Vec primitive_integer(const Vec& v);

// 2^n as an exact rational.
Rational pow2(int n);

}  // namespace flab
