#include "opilab/quad_ext.hpp"

#include <gmp.h>

#include "opilab/errors.hpp"

namespace opilab {

namespace {

bool rational_sqrt(const Rational& q, Rational& out) {
  if (q < 0) return false;
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (!mpz_perfect_square_p(num.backend().data()) || !mpz_perfect_square_p(den.backend().data())) return false;
  BigInt sn, sd;
  mpz_sqrt(sn.backend().data(), num.backend().data());
  mpz_sqrt(sd.backend().data(), den.backend().data());
  out = Rational(sn, sd);
  return true;
}

}  // namespace

QuadExtScalar::QuadExtScalar(Rational a, Rational b, Rational r_sq)
    : a_(std::move(a)), b_(std::move(b)), r_sq_(std::move(r_sq)) {
  if (r_sq_ <= 0) throw DomainError("QuadExtScalar: r_sq must be positive");
  square_ = rational_sqrt(r_sq_, root_);
  normalize();
}

void QuadExtScalar::normalize() {
  if (square_ && b_ != 0) {
    a_ += b_ * root_;
    b_ = 0;
  }
}

// Pure rationals combine with any field; two irrational parts must share r_sq.
void QuadExtScalar::adopt(const QuadExtScalar& o) {
  if (r_sq_ == o.r_sq_) return;
  if (o.b_ == 0 && o.square_ == square_) return;
  if (b_ == 0) {
    r_sq_ = o.r_sq_;
    square_ = o.square_;
    root_ = o.root_;
    return;
  }
  if (o.b_ == 0) return;
  throw DomainError("QuadExtScalar: mixing different quadratic fields");
}

QuadExtScalar& QuadExtScalar::operator+=(const QuadExtScalar& o) {
  adopt(o);
  a_ += o.a_;
  b_ += o.b_;
  return *this;
}

QuadExtScalar& QuadExtScalar::operator-=(const QuadExtScalar& o) {
  adopt(o);
  a_ -= o.a_;
  b_ -= o.b_;
  return *this;
}

QuadExtScalar& QuadExtScalar::operator*=(const QuadExtScalar& o) {
  adopt(o);
  const Rational a = a_ * o.a_ + b_ * o.b_ * r_sq_;
  const Rational b = a_ * o.b_ + b_ * o.a_;
  a_ = a;
  b_ = b;
  return *this;
}

QuadExtScalar& QuadExtScalar::operator/=(const QuadExtScalar& o) {
  const Rational n = o.norm();
  if (n == 0) throw DomainError("QuadExtScalar: division by zero");
  *this *= o.conjugate();
  a_ /= n;
  b_ /= n;
  return *this;
}

QuadExtScalar& QuadExtScalar::operator*=(const Rational& c) {
  a_ *= c;
  b_ *= c;
  return *this;
}

bool operator==(const QuadExtScalar& x, const QuadExtScalar& y) {
  if (x.a_ != y.a_ || x.b_ != y.b_) return false;
  return x.b_ == 0 || x.r_sq_ == y.r_sq_;
}

Real QuadExtScalar::to_real() const {
  Real v = opilab::to_real(a_);
  if (b_ != 0) v += opilab::to_real(b_) * sqrt(opilab::to_real(r_sq_));
  return v;
}

double QuadExtScalar::to_double() const { return opilab::to_double(to_real()); }

std::string QuadExtScalar::to_string() const {
  if (b_ == 0) return opilab::to_string(a_);
  return opilab::to_string(a_) + " + " + opilab::to_string(b_) + " sqrt(" + opilab::to_string(r_sq_) + ")";
}

QuadExtScalar pow(const QuadExtScalar& x, int e) {
  if (e < 0) return pow(QuadExtScalar::rational(1, x.r_sq()) / x, -e);
  QuadExtScalar out = QuadExtScalar::rational(1, x.r_sq()), base = x;
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

}  // namespace opilab
