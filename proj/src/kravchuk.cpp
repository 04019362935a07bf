#include "opilab/kravchuk.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "opilab/errors.hpp"

namespace opilab {

// ---------------------------------------------------------------------------
// Polynomial helpers

Poly poly_trim(Poly p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
  if (p.empty()) p.push_back(0);
  return p;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return poly_trim(std::move(out));
}

Poly poly_sub(const Poly& a, const Poly& b) { return poly_add(a, poly_scale(b, -1)); }

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return poly_trim(std::move(out));
}

Poly poly_scale(const Poly& a, const Rational& c) {
  Poly out(a);
  for (auto& v : out) v *= c;
  return poly_trim(std::move(out));
}

Rational poly_eval(const Poly& p, const Rational& x) {
  Rational acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Real poly_eval(const Poly& p, const Real& x) {
  Real acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + to_real(*it);
  return acc;
}

int poly_degree(const Poly& p) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
    if (p[i] != 0) return i;
  return -1;
}

namespace {

using IntPoly = std::vector<BigInt>;

IntPoly int_mul(const IntPoly& a, const IntPoly& b) {
  IntPoly out(a.size() + b.size() - 1, BigInt(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Scale to integer coefficients with the same sign pattern.
IntPoly clear_denominators(const Poly& p) {
  BigInt l = 1;
  for (const auto& c : p) l = boost::multiprecision::lcm(l, BigInt(boost::multiprecision::denominator(c)));
  IntPoly out;
  out.reserve(p.size());
  for (const auto& c : p) out.push_back(BigInt(boost::multiprecision::numerator(c)) * (l / boost::multiprecision::denominator(c)));
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

// Sign of P(u / 2^k) via homogeneous Horner.
int sign_at(const IntPoly& c, const BigInt& u, unsigned k) {
  const std::size_t d = c.size() - 1;
  BigInt acc = c[d];
  for (std::size_t i = d; i-- > 0;) acc = acc * u + (c[i] << static_cast<unsigned>(k * (d - i)));
  return acc > 0 ? 1 : (acc < 0 ? -1 : 0);
}

void require_rho(const Rational& rho) {
  if (rho <= 0 || rho >= 1) throw DomainError("rho must lie in (0, 1)");
}

}  // namespace

// ---------------------------------------------------------------------------
// Families

std::vector<Rational> binomial_weights(int m, const Rational& rho) {
  std::vector<Rational> w(m + 1);
  for (int x = 0; x <= m; ++x) w[x] = binomial_q(m, x) * pow_q(rho, x) * pow_q(1 - rho, m - x);
  return w;
}

Rational inner_product(const Poly& a, const Poly& b, const std::vector<Rational>& weights) {
  Rational acc = 0;
  for (std::size_t x = 0; x < weights.size(); ++x) {
    Rational xv(static_cast<long>(x));
    acc += weights[x] * poly_eval(a, xv) * poly_eval(b, xv);
  }
  return acc;
}

namespace {

// l! K_l for l = 0..L as integer polynomials, from
// l! K_l(x) = sum_j (-1)^j C(l, j) [x]_j [m - x]_{l - j}.
std::vector<IntPoly> scaled_closed_forms(int m, int L) {
  std::vector<IntPoly> fx(L + 1), fm(L + 1);
  fx[0] = fm[0] = IntPoly{1};
  for (int j = 1; j <= L; ++j) {
    fx[j] = int_mul(fx[j - 1], IntPoly{BigInt(-(j - 1)), BigInt(1)});
    fm[j] = int_mul(fm[j - 1], IntPoly{BigInt(m - (j - 1)), BigInt(-1)});
  }
  std::vector<IntPoly> out(L + 1);
  for (int l = 0; l <= L; ++l) {
    IntPoly acc(l + 1, BigInt(0));
    for (int j = 0; j <= l; ++j) {
      IntPoly term = int_mul(fx[j], fm[l - j]);
      BigInt c = binomial(l, j);
      if (j & 1) c = -c;
      for (std::size_t i = 0; i < term.size(); ++i) acc[i] += c * term[i];
    }
    out[l] = std::move(acc);
  }
  return out;
}

Poly from_scaled(const IntPoly& p, const BigInt& den) {
  Poly out;
  out.reserve(p.size());
  for (const auto& c : p) out.emplace_back(c, den);
  return poly_trim(std::move(out));
}

}  // namespace

Poly kravchuk_closed_form(int m, int ell) {
  if (m < 0 || ell < 0 || ell > m) throw DomainError("closed form needs 0 <= l <= m");
  auto all = scaled_closed_forms(m, ell);
  return from_scaled(all[ell], factorial(ell));
}

KravchukFamily build_family_gram_schmidt(int m, const Rational& rho, int ell_max) {
  require_rho(rho);
  if (m < 1) throw DomainError("m must be positive");
  if (ell_max < 0 || ell_max > m) throw DomainError("degree_max must lie in [0, m]");
  const auto w = binomial_weights(m, rho);
  KravchukFamily fam{m, rho, ell_max, {}, {}};
  std::vector<Poly> monic;
  std::vector<Rational> monic_norm;
  for (int l = 0; l <= ell_max; ++l) {
    Poly p(l + 1, Rational(0));
    p[l] = 1;
    Poly xl = p;
    for (int j = 0; j < l; ++j) p = poly_sub(p, poly_scale(monic[j], inner_product(xl, monic[j], w) / monic_norm[j]));
    monic_norm.push_back(inner_product(p, p, w));
    monic.push_back(p);
    const Rational scale = Rational(l % 2 ? -1 : 1) / (Rational(factorial(l)) * pow_q(rho, l));
    fam.coeffs.push_back(poly_scale(p, scale));
    fam.norms.push_back(monic_norm.back() * scale * scale);
  }
  return fam;
}

KravchukFamily build_family(int m, const Rational& rho, int ell_max) {
  require_rho(rho);
  if (m < 1) throw DomainError("m must be positive");
  if (ell_max < 0 || ell_max > m) throw DomainError("degree_max must lie in [0, m]");
  if (rho != Rational(1, 2)) return build_family_gram_schmidt(m, rho, ell_max);
  KravchukFamily fam{m, rho, ell_max, {}, {}};
  auto scaled = scaled_closed_forms(m, ell_max);
  for (int l = 0; l <= ell_max; ++l) {
    fam.coeffs.push_back(from_scaled(scaled[l], factorial(l)));
    fam.norms.push_back(binomial_q(m, l));
  }
  return fam;
}

Poly three_term_step(const KravchukFamily& fam, int ell) {
  if (fam.rho != Rational(1, 2)) throw DomainError("three-term step is stated for rho = 1/2");
  if (ell < 1 || ell > fam.degree_max) throw DomainError("three-term step needs 1 <= l <= degree_max");
  const Poly lin{Rational(fam.m), Rational(-2)};
  Poly next = poly_sub(poly_mul(lin, fam[ell]), poly_scale(fam[ell - 1], fam.m - ell + 1));
  return poly_scale(next, Rational(1, ell + 1));
}

// ---------------------------------------------------------------------------
// Tridiagonal form

namespace {

Rational det_rational(std::vector<std::vector<Rational>> a) {
  const std::size_t k = a.size();
  Rational det = 1;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    while (piv < k && a[piv][c] == 0) ++piv;
    if (piv == k) return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < k; ++r) {
      if (a[r][c] == 0) continue;
      const Rational f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

// Newton divided differences through (xs[i], ys[i]), expanded to monomials.
Poly interpolate(const std::vector<Rational>& xs, std::vector<Rational> ys) {
  const std::size_t n = xs.size();
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = n - 1; i >= j; --i) {
      ys[i] = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - j]);
      if (i == j) break;
    }
  Poly out{ys[n - 1]};
  for (std::size_t i = n - 1; i-- > 0;) {
    out = poly_mul(out, Poly{-xs[i], Rational(1)});
    out[0] += ys[i];
  }
  return poly_trim(out);
}

}  // namespace

Poly tridiagonal_char_poly(int m, int ell) {
  if (ell < 0 || ell + 1 > m) throw DomainError("need 0 <= l and l + 1 <= m");
  const int k = ell + 1;
  std::vector<Rational> xs, ys;
  for (int pt = 0; pt <= k; ++pt) {
    const Rational x(pt);
    // Similar to the symmetric form: sub-diagonal carries k(m+1-k)/2, super-diagonal 1/2.
    std::vector<std::vector<Rational>> a(k, std::vector<Rational>(k, Rational(0)));
    for (int i = 0; i < k; ++i) {
      a[i][i] = x - Rational(m, 2);
      if (i >= 1) {
        a[i][i - 1] = -Rational(i * (m + 1 - i), 2);
        a[i - 1][i] = -Rational(1, 2);
      }
    }
    xs.push_back(x);
    ys.push_back(det_rational(std::move(a)));
  }
  return interpolate(xs, ys);
}

bool char_poly_identity_check(int m, int ell) {
  const Poly det = tridiagonal_char_poly(m, ell);
  const int d = ell + 1;
  Rational scale = Rational(factorial(d)) * pow_q(Rational(-2), -d);
  const Poly monic = poly_scale(kravchuk_closed_form(m, d), scale);
  return det == monic;
}

TridiagonalForm make_tridiagonal(int m, int ell) {
  if (ell < 0 || ell > m) throw DomainError("tridiagonal form needs 0 <= l <= m");
  TridiagonalForm a{m, ell, std::vector<double>(ell + 1, 0.0), {}};
  for (int k = 1; k <= ell; ++k) a.offdiag.push_back(std::sqrt(static_cast<double>(k) * (m + 1 - k)));
  return a;
}

double lambda_max(const TridiagonalForm& a) {
  if (a.ell == 0) return 0.0;
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(a.diag.data(), static_cast<Eigen::Index>(a.diag.size()));
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(a.offdiag.data(), static_cast<Eigen::Index>(a.offdiag.size()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

// ---------------------------------------------------------------------------
// Roots

double RootEnclosure::value() const { return to_double(Rational((lo + hi) / 2)); }
Real RootEnclosure::value_real() const { return to_real(Rational((lo + hi) / 2)); }

namespace {

// Eigenvalues of the Jacobi matrix of the monic Bin(m, rho) recurrence
// x p_k = p_{k+1} + a_k p_k + b_k p_{k-1}.
std::vector<double> approximate_roots(int m, const Rational& rho, int ell) {
  const double r = to_double(rho);
  Eigen::VectorXd d(ell), e(std::max(ell - 1, 0));
  for (int k = 0; k < ell; ++k) d[k] = k * (1 - r) + (m - k) * r;
  for (int k = 1; k < ell; ++k) e[k - 1] = std::sqrt(k * (m - k + 1.0) * r * (1 - r));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + ell);
  std::sort(out.begin(), out.end());
  return out;
}

BigInt dyadic(double x, unsigned k) {
  BigInt out;
  mpz_set_d(out.backend().data(), std::ldexp(x, static_cast<int>(k)));
  return out;
}

Rational from_dyadic(const BigInt& u, unsigned k) { return Rational(u, BigInt(1) << k); }

}  // namespace

std::vector<RootEnclosure> isolate_roots(const KravchukFamily& fam, int ell, double precision) {
  if (ell < 1 || ell > fam.degree_max) throw DomainError("root isolation needs 1 <= l <= degree_max");
  if (!(precision > 0)) throw DomainError("precision must be positive");
  const unsigned k = static_cast<unsigned>(std::max(64.0, std::ceil(-std::log2(precision)) + 8));
  const IntPoly P = clear_denominators(fam[ell]);
  const auto approx = approximate_roots(fam.m, fam.rho, ell);

  std::vector<BigInt> ends;
  ends.push_back(dyadic(approx.front() - 1.0, k));
  for (int i = 0; i + 1 < ell; ++i) ends.push_back(dyadic(0.5 * (approx[i] + approx[i + 1]), k));
  ends.push_back(dyadic(approx.back() + 1.0, k));
  std::vector<int> signs;
  for (auto& u : ends) {
    int s = sign_at(P, u, k);
    if (s == 0) s = sign_at(P, ++u, k);
    if (s == 0) throw BracketingFailure("probe landed on a root twice");
    signs.push_back(s);
  }

  const BigInt target = std::max(BigInt(1), dyadic(precision, k));
  std::vector<RootEnclosure> out;
  for (int i = 0; i < ell; ++i) {
    BigInt lo = ends[i], hi = ends[i + 1];
    const int s_lo = signs[i];
    if (s_lo == signs[i + 1]) {
      throw BracketingFailure("no sign change around approximate root " + std::to_string(approx[i]) + " of K_" +
                              std::to_string(ell));
    }
    // Rational roots such as m/2 are tried first so they come out exact.
    const BigInt half_grid = dyadic(std::round(approx[i] * 2.0) / 2.0, k);
    if (half_grid > lo && half_grid < hi && sign_at(P, half_grid, k) == 0) {
      const Rational r = from_dyadic(half_grid, k);
      out.push_back({r, r, true});
      continue;
    }
    bool exact = false;
    while (hi - lo > target) {
      BigInt mid = (lo + hi) >> 1;
      const int s = sign_at(P, mid, k);
      if (s == 0) {
        lo = hi = mid;
        exact = true;
        break;
      }
      (s == s_lo ? lo : hi) = mid;
    }
    out.push_back({from_dyadic(lo, k), from_dyadic(hi, k), exact});
  }
  return out;
}

double largest_root(const KravchukFamily& fam, int ell, double precision) {
  return isolate_roots(fam, ell, precision).back().value();
}

double smallest_root(const KravchukFamily& fam, int ell, double precision) {
  return isolate_roots(fam, ell, precision).front().value();
}

// ---------------------------------------------------------------------------
// Principal representation

std::vector<Real> representation_moments(const PrincipalRepresentation& rep, int order) {
  std::vector<Real> out(order + 1, Real(0));
  for (std::size_t i = 0; i < rep.support.size(); ++i) {
    Real w = rep.masses[i];
    for (int j = 0; j <= order; ++j) {
      out[j] += w;
      w *= rep.support[i];
    }
  }
  return out;
}

PrincipalRepresentation principal_representation(int m, const Rational& rho, int ell) {
  if (ell < 1 || 2 * ell > m) throw DomainError("principal representation needs 1 <= l <= m/2");
  const auto fam = build_family(m, rho, ell);
  PrincipalRepresentation rep;
  rep.m = m;
  rep.rho = rho;
  rep.ell = ell;
  rep.order = 2 * ell - 1;
  rep.brackets = isolate_roots(fam, ell, 1e-30);
  for (const auto& b : rep.brackets) {
    const Real z = b.value_real();
    Real s = 0;
    for (int k = 0; k <= ell; ++k) {
      const Real v = poly_eval(fam[k], z);
      s += v * v / to_real(fam.norms[k]);
    }
    rep.support.push_back(z);
    rep.masses.push_back(1 / s);
  }

  Real total = 0;
  for (const auto& q : rep.masses) {
    if (q <= 0) throw IdentityViolation("non-positive mass in principal representation");
    total += q;
  }
  if (abs(total - 1) > 1e-10) throw IdentityViolation("principal representation masses do not sum to 1");
  const auto got = representation_moments(rep, rep.order);
  const auto want = binomial_moments(m, rho, rep.order);
  for (int j = 0; j <= rep.order; ++j) {
    const Real w = to_real(want[j]);
    if (abs(got[j] - w) > 1e-8 * abs(w)) throw IdentityViolation("principal representation moment mismatch");
  }
  return rep;
}

InterlacingReport interlacing_check(const PrincipalRepresentation& rep, const SatisfactionProfile& prof) {
  if (prof.m != rep.m) throw DomainError("profile and representation have different m");
  if (!profile_moments_match(prof, rep.rho, rep.order)) {
    throw DomainError("interlacing needs matching moments up to order 2l - 1");
  }
  const double total = static_cast<double>(prof.total);
  auto cdf_x = [&](double z) {
    std::uint64_t c = 0;
    for (int t = 0; t <= prof.m && t <= z + 1e-12; ++t) c += prof.histogram[t];
    return static_cast<double>(c) / total;
  };

  InterlacingReport rep_out;
  rep_out.min_slack = 1.0;
  const double tol = 1e-10;
  double cdf_z = 0;
  for (int j = 1; j <= rep.ell; ++j) {
    const double zj = to_double(rep.support[j - 1]);
    cdf_z += to_double(rep.masses[j - 1]);
    InterlacingRow row;
    row.j = j;
    row.cdf_x_at_zj = cdf_x(zj);
    row.cdf_z_at_zj = std::min(cdf_z, 1.0);
    row.cdf_x_at_next = j < rep.ell ? cdf_x(to_double(rep.support[j])) : 1.0;
    row.left_slack = row.cdf_z_at_zj - row.cdf_x_at_zj;
    row.right_slack = row.cdf_x_at_next - row.cdf_z_at_zj;
    rep_out.min_slack = std::min({rep_out.min_slack, row.left_slack, row.right_slack});
    if (row.left_slack < -tol || row.right_slack < -tol) rep_out.holds = false;
    rep_out.rows.push_back(row);
  }
  rep_out.max_support = prof.best_count;
  rep_out.top_root = to_double(rep.support.back());
  rep_out.reaches_top_root = rep_out.max_support >= rep_out.top_root - 1e-9;
  return rep_out;
}

// ---------------------------------------------------------------------------
// KKT optimum

Real expected_T(int m, const std::vector<Real>& u) {
  if (u.empty()) throw DomainError("weights must be nonempty");
  const int ell = static_cast<int>(u.size()) - 1;
  if (ell > m) throw DomainError("weight vector longer than m + 1");
  const auto fam = build_family(m, Rational(1, 2), ell);
  Real num = 0, den = 0;
  for (int t = 0; t <= m; ++t) {
    Real x = 0;
    const Rational tv(t);
    for (int k = 0; k <= ell; ++k) x += u[k] * to_real(poly_eval(fam[k], tv));
    const Real w = to_real(binomial_q(m, t)) * x * x;
    num += t * w;
    den += w;
  }
  if (den == 0) throw DomainError("weights give X_u identically zero on [0, m]");
  return num / den;
}

KktResult kkt_optimum(int m, int ell) {
  if (ell < 0 || ell + 1 > m) throw DomainError("KKT optimum needs 0 <= l and l + 1 <= m");
  const auto fam = build_family(m, Rational(1, 2), ell + 1);
  const Poly& K = fam[ell + 1];
  const auto roots = isolate_roots(fam, ell + 1, 1e-30);
  const RootEnclosure& b = roots.front();

  // Newton polish inside the certified bracket.
  const Poly dK = [&] {
    Poly d;
    for (std::size_t i = 1; i < K.size(); ++i) d.push_back(K[i] * static_cast<long>(i));
    return poly_trim(d.empty() ? Poly{Rational(0)} : d);
  }();
  Real z = b.value_real();
  if (!b.exact) {
    const Real lo = to_real(b.lo), hi = to_real(b.hi);
    for (int it = 0; it < 8; ++it) {
      const Real step = poly_eval(K, z) / poly_eval(dK, z);
      const Real next = z - step;
      if (next < lo || next > hi) break;
      z = next;
    }
  }

  // Synthetic division K(t) = (t - z) Q(t) + rem.
  const int d = static_cast<int>(K.size()) - 1;
  std::vector<Real> q(d);
  Real acc = to_real(K[d]);
  for (int i = d - 1; i >= 0; --i) {
    q[i] = acc;
    acc = to_real(K[i]) + z * acc;
  }
  const Real rem = acc;
  Real scale = 0;
  for (int i = 0; i <= d; ++i) scale += abs(to_real(K[i])) * pow(abs(z), i);
  if (abs(rem) > 1e-25 * scale) throw IdentityViolation("division remainder exceeds root tolerance");

  KktResult res;
  res.m = m;
  res.ell = ell;
  res.z_min = z;
  res.remainder = rem;
  // Expand Q in the Kravchuk basis using exact node values of K_k.
  const auto w = binomial_weights(m, Rational(1, 2));
  std::vector<Real> qv(m + 1);
  for (int t = 0; t <= m; ++t) {
    Real v = 0;
    for (int i = d - 1; i >= 0; --i) v = v * t + q[i];
    qv[t] = v;
  }
  for (int k = 0; k <= ell; ++k) {
    Real s = 0;
    for (int t = 0; t <= m; ++t) s += to_real(w[t]) * qv[t] * to_real(poly_eval(fam[k], Rational(t)));
    res.u.push_back(s / to_real(fam.norms[k]));
  }
  // X_u is defined up to scale; fix u_0 = 1.
  if (res.u[0] != 0) {
    const Real u0 = res.u[0];
    for (auto& v : res.u) v /= u0;
  }
  Real num = 0, den = 0;
  for (int t = 0; t <= m; ++t) {
    const Real wt = to_real(binomial_q(m, t)) * qv[t] * qv[t];
    num += t * wt;
    den += wt;
  }
  res.expected_T = num / den;
  return res;
}

// ---------------------------------------------------------------------------
// JSON

namespace {
nlohmann::json rational_pair(const Rational& q) {
  return nlohmann::json::array({boost::multiprecision::numerator(q).str(), boost::multiprecision::denominator(q).str()});
}
Rational pair_rational(const nlohmann::json& j) {
  return Rational(BigInt(j.at(0).get<std::string>()), BigInt(j.at(1).get<std::string>()));
}
}  // namespace

nlohmann::json family_to_json(const KravchukFamily& fam) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& p : fam.coeffs) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : p) row.push_back(rational_pair(c));
    coeffs.push_back(row);
  }
  nlohmann::json norms = nlohmann::json::array();
  for (const auto& n : fam.norms) norms.push_back(rational_pair(n));
  return {{"m", fam.m}, {"rho", rational_pair(fam.rho)}, {"degree_max", fam.degree_max}, {"coeffs", coeffs}, {"norms", norms}};
}

KravchukFamily family_from_json(const nlohmann::json& j) {
  try {
    KravchukFamily fam;
    fam.m = j.at("m").get<int>();
    fam.rho = pair_rational(j.at("rho"));
    fam.degree_max = j.at("degree_max").get<int>();
    for (const auto& row : j.at("coeffs")) {
      Poly p;
      for (const auto& c : row) p.push_back(pair_rational(c));
      fam.coeffs.push_back(std::move(p));
    }
    for (const auto& n : j.at("norms")) fam.norms.push_back(pair_rational(n));
    if (static_cast<int>(fam.coeffs.size()) != fam.degree_max + 1) throw DomainError("coefficient count mismatch");
    return fam;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed family JSON: ") + e.what());
  }
}

}  // namespace opilab
