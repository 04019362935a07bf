#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace opilab {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
// Runtime-precision float; digits are set with set_working_digits().
using Real = boost::multiprecision::mpfr_float;

inline constexpr unsigned kDefaultDigits = 60;

void set_working_digits(unsigned digits);
unsigned working_digits();

BigInt binomial(long n, long k);
Rational binomial_q(long n, long k);
BigInt factorial(long n);

double to_double(const Rational& q);
double to_double(const Real& x);
Real to_real(const Rational& q);

Rational pow_q(const Rational& base, long e);

// "3/7", "0.25" or "2" to an exact rational.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);

// Bounded uniform draw in [0, bound) from a 64-bit generator, without the
// implementation-defined behaviour of std::uniform_int_distribution.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    std::uint64_t v = rng();
    if (v < limit) return v % bound;
  }
}

// Sorted random k-subset of [0, n).
template <class Rng>
std::vector<std::uint32_t> random_subset(Rng& rng, std::uint32_t n, std::uint32_t k) {
  std::vector<std::uint32_t> pool(n);
  for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
  for (std::uint32_t i = 0; i < k; ++i) {
    auto j = i + static_cast<std::uint32_t>(uniform_below(rng, n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Lexicographic successor of a k-subset bitmask (Gosper's hack).
inline std::uint64_t next_combination(std::uint64_t v) {
  std::uint64_t t = v | (v - 1);
  return (t + 1) | (((~t & -~t) - 1) >> (__builtin_ctzll(v) + 1));
}

}  // namespace opilab
