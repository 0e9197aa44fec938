#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace carnot {

// Exact scalar used throughout: arbitrary-precision rational.
using Rat = mpq_class;
using Int = mpz_class;

// Parses "p/q" or "p" (base 10). Throws on malformed input or zero denominator.
inline Rat parse_rat(const std::string& s) {
  Rat q;
  if (s.empty() || mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0)
    throw std::invalid_argument("malformed rational: '" + s + "'");
  if (sgn(q.get_den()) == 0)
    throw std::invalid_argument("zero denominator in rational: '" + s + "'");
  q.canonicalize();
  return q;
}

inline std::string rat_str(const Rat& q) { return q.get_str(); }

inline Rat rat_pow(Rat base, unsigned long e) {
  Rat r(1);
  while (e) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

// 2^e as an exact rational, e may be negative.
inline Rat rat_pow2(long e) {
  Rat r;
  if (e >= 0) {
    mpz_ui_pow_ui(r.get_num_mpz_t(), 2, static_cast<unsigned long>(e));
  } else {
    r = 1;
    mpz_ui_pow_ui(r.get_den_mpz_t(), 2, static_cast<unsigned long>(-e));
  }
  r.canonicalize();
  return r;
}

// Largest multiple of 2^-bits that is <= v. Requires v finite.
inline Rat dyadic_floor(double v, int bits) {
  Rat x(v);  // exact binary-to-rational conversion
  Rat scale = rat_pow2(bits);
  Rat scaled = x * scale;
  Int fl;
  mpz_fdiv_q(fl.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  return Rat(fl) / scale;
}

template <class S>
inline S scalar_cast(const Rat& q);

template <>
inline Rat scalar_cast<Rat>(const Rat& q) {
  return q;
}

template <>
inline double scalar_cast<double>(const Rat& q) {
  return q.get_d();
}

}  // namespace carnot
