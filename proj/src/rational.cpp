#include "flab/rational.hpp"

#include <algorithm>
#include <cctype>

#include "flab/error.hpp"

namespace flab {

Rational parse_rational(std::string_view text) {
  auto first = text.find_first_not_of(" \t\n");
  auto last = text.find_last_not_of(" \t\n");
  if (first == std::string_view::npos) throw Error(ErrorKind::ParseError, "empty rational");
  std::string s(text.substr(first, last - first + 1));
  if (s.front() == '+') s.erase(0, 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    bool ok = std::isdigit(static_cast<unsigned char>(c)) || c == '/' || (c == '-' && i == 0);
    if (!ok) throw Error(ErrorKind::ParseError, "bad rational '" + std::string(text) + "'");
  }
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string den = s.substr(slash + 1);
    if (den.empty() || den.find_first_not_of("0123456789") != std::string::npos ||
        den.find_first_not_of('0') == std::string::npos || slash == 0 || s.substr(0, slash) == "-")
      throw Error(ErrorKind::ParseError, "bad rational '" + std::string(text) + "'");
  } else if (s.empty() || s == "-") {
    throw Error(ErrorKind::ParseError, "bad rational '" + std::string(text) + "'");
  }
  Rational r;
  if (r.set_str(s, 10) != 0) throw Error(ErrorKind::ParseError, "bad rational '" + std::string(text) + "'");
  r.canonicalize();
  return r;
}

std::string format_rational(const Rational& r) { return r.get_str(); }

Vec zeros(std::size_t n) { return Vec(n, Rational(0)); }

Vec unit_vector(std::size_t n, std::size_t i) {
  Vec v = zeros(n);
  v[i] = 1;
  return v;
}

bool is_zero(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& r) { return sgn(r) == 0; });
}

Rational dot(const Vec& a, const Vec& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Rational l1_norm(const Vec& v) {
  Rational s = 0;
  for (const auto& x : v) s += abs(x);
  return s;
}

Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec scale(const Vec& v, const Rational& s) {
  Vec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] * s;
  return r;
}

std::string format_vec(const Vec& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_rational(v[i]);
  }
  return out + ")";
}

std::strong_ordering lex_compare(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return a.size() <=> b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    int c = cmp(a[i], b[i]);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

Vec primitive_integer(const Vec& v) {
  mpz_class l = 1;
  for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  mpz_class g = 0;
  for (const auto& x : v) {
    mpz_class n = x.get_num() * (l / x.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
  }
  if (g == 0) return v;
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = Rational(v[i].get_num() * (l / v[i].get_den()) / g);
  return out;
}

Rational pow2(int n) {
  mpz_class z = 1;
  z <<= static_cast<unsigned>(n < 0 ? -n : n);
  return n < 0 ? Rational(mpz_class(1), z) : Rational(z);
}

}  // namespace flab
