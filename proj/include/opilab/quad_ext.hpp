#pragma once

#include <string>

#include "opilab/numeric.hpp"

namespace opilab {

// Exact a + b r in Q(r) with r = sqrt(r_sq) > 0. When r_sq is the square of a
// rational, b r is folded into a so equality stays componentwise.
class QuadExtScalar {
 public:
  QuadExtScalar() = default;
  QuadExtScalar(Rational a, Rational b, Rational r_sq);
  static QuadExtScalar rational(Rational a, const Rational& r_sq) { return {std::move(a), 0, r_sq}; }
  static QuadExtScalar root(const Rational& r_sq) { return {0, 1, r_sq}; }

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  const Rational& r_sq() const { return r_sq_; }
  bool is_zero() const { return a_ == 0 && b_ == 0; }
  bool is_rational() const { return b_ == 0; }

  QuadExtScalar conjugate() const { return {a_, -b_, r_sq_}; }
  // a^2 - b^2 r_sq, the field norm.
  Rational norm() const { return a_ * a_ - b_ * b_ * r_sq_; }
  Real to_real() const;
  double to_double() const;
  std::string to_string() const;

  QuadExtScalar operator-() const { return {-a_, -b_, r_sq_}; }
  QuadExtScalar& operator+=(const QuadExtScalar& o);
  QuadExtScalar& operator-=(const QuadExtScalar& o);
  QuadExtScalar& operator*=(const QuadExtScalar& o);
  QuadExtScalar& operator/=(const QuadExtScalar& o);
  QuadExtScalar& operator*=(const Rational& c);

  friend QuadExtScalar operator+(QuadExtScalar x, const QuadExtScalar& y) { return x += y; }
  friend QuadExtScalar operator-(QuadExtScalar x, const QuadExtScalar& y) { return x -= y; }
  friend QuadExtScalar operator*(QuadExtScalar x, const QuadExtScalar& y) { return x *= y; }
  friend QuadExtScalar operator/(QuadExtScalar x, const QuadExtScalar& y) { return x /= y; }
  friend QuadExtScalar operator*(QuadExtScalar x, const Rational& c) { return x *= c; }
  friend QuadExtScalar operator*(const Rational& c, QuadExtScalar x) { return x *= c; }
  friend bool operator==(const QuadExtScalar& x, const QuadExtScalar& y);
  friend bool operator!=(const QuadExtScalar& x, const QuadExtScalar& y) { return !(x == y); }

 private:
  void adopt(const QuadExtScalar& o);
  void normalize();

  Rational a_ = 0;
  Rational b_ = 0;
  Rational r_sq_ = 1;
  bool square_ = true;  // r_sq is a rational square (b_ then always 0)
  Rational root_ = 1;
};

QuadExtScalar pow(const QuadExtScalar& x, int e);

}  // namespace opilab
