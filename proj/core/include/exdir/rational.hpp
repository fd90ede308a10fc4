#pragma once

#include <cassert>
#include <cstdint>
#include <numeric>
#include <string>

#include "exdir/errors.hpp"

namespace exdir {

// Exact rational on int64 with __int128 cross-multiplication, so threshold
// comparisons like congestion <= psi/phi never hit float ties. Always kept
// normalized with positive denominator.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  Rational() = default;
  Rational(int64_t n) : num(n), den(1) {}  // NOLINT: implicit by design
  Rational(int64_t n, int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw ContractViolation("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  // Parses "p/q" or "p". Rejects floats by construction.
  static Rational parse(const std::string& s) {
    size_t slash = s.find('/');
    try {
      size_t pos = 0;
      if (slash == std::string::npos) {
        int64_t n = std::stoll(s, &pos);
        if (pos != s.size()) throw ParseError("bad rational: " + s);
        return Rational(n);
      }
      int64_t n = std::stoll(s.substr(0, slash), &pos);
      if (pos != slash) throw ParseError("bad rational: " + s);
      int64_t d = std::stoll(s.substr(slash + 1), &pos);
      if (pos != s.size() - slash - 1) throw ParseError("bad rational: " + s);
      return Rational(n, d);
    } catch (const std::invalid_argument&) {
      throw ParseError("bad rational: " + s);
    } catch (const std::out_of_range&) {
      throw ParseError("rational out of range: " + s);
    }
  }
};

inline Rational operator+(Rational a, Rational b) {
  return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
}
inline Rational operator-(Rational a, Rational b) {
  return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
}
inline Rational operator*(Rational a, Rational b) { return Rational(a.num * b.num, a.den * b.den); }
inline Rational operator/(Rational a, Rational b) {
  if (b.num == 0) throw ContractViolation("rational division by zero");
  return Rational(a.num * b.den, a.den * b.num);
}

inline bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
inline bool operator!=(Rational a, Rational b) { return !(a == b); }
inline bool operator<(Rational a, Rational b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}
inline bool operator>(Rational a, Rational b) { return b < a; }
inline bool operator<=(Rational a, Rational b) { return !(b < a); }
inline bool operator>=(Rational a, Rational b) { return !(a < b); }

// a <= r, for integer counts against rational thresholds.
inline bool le_rational(int64_t a, Rational r) {
  return static_cast<__int128>(a) * r.den <= static_cast<__int128>(r.num);
}

inline int64_t ceil_of(Rational r) {
  int64_t q = r.num / r.den;
  if (r.num % r.den != 0 && r.num > 0) ++q;
  return q;
}

inline int64_t floor_of(Rational r) {
  int64_t q = r.num / r.den;
  if (r.num % r.den != 0 && r.num < 0) --q;
  return q;
}

}  // namespace exdir
