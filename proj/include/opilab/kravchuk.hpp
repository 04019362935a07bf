#pragma once

#include <vector>

#include "json.hpp"

#include "opilab/codes.hpp"
#include "opilab/numeric.hpp"

namespace opilab {

// Dense polynomial, coefficient of x^i at index i.
using Poly = std::vector<Rational>;

Poly poly_trim(Poly p);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_sub(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, const Rational& c);
Rational poly_eval(const Poly& p, const Rational& x);
Real poly_eval(const Poly& p, const Real& x);
int poly_degree(const Poly& p);

/// Orthogonal polynomials for Bin(m, rho), normalised so that K_l(0) = C(m, l)
/// and the leading coefficient is (-1/rho)^l / l!. At rho = 1/2 these are the
/// classical Kravchuk polynomials with generating function (1+z)^(m-x) (1-z)^x.
struct KravchukFamily {
  int m = 0;
  Rational rho;
  int degree_max = 0;
  std::vector<Poly> coeffs;     // K_0 .. K_degree_max
  std::vector<Rational> norms;  // E_{x ~ Bin(m, rho)} K_l(x)^2

  const Poly& operator[](int l) const { return coeffs.at(static_cast<std::size_t>(l)); }
};

KravchukFamily build_family(int m, const Rational& rho, int ell_max);
// Classical Gram-Schmidt on 1, x, x^2, ... under the Bin(m, rho) weight.
KravchukFamily build_family_gram_schmidt(int m, const Rational& rho, int ell_max);
// Sum_j (-1)^j C(x, j) C(m - x, l - j) as a polynomial in x.
Poly kravchuk_closed_form(int m, int ell);
// Bin(m, rho) point masses, index x = 0..m.
std::vector<Rational> binomial_weights(int m, const Rational& rho);
Rational inner_product(const Poly& a, const Poly& b, const std::vector<Rational>& weights);

// K_{l+1} from K_l and K_{l-1} by the balanced three-term recurrence.
Poly three_term_step(const KravchukFamily& family, int ell);

// det((x - m/2) I - A/2) for the (l+1)-square tridiagonal A, compared with the
// monic k_{l+1} = (l+1)! (-2)^{-(l+1)} K_{l+1}.
Poly tridiagonal_char_poly(int m, int ell);
bool char_poly_identity_check(int m, int ell);

struct TridiagonalForm {
  int m = 0;
  int ell = 0;
  std::vector<double> diag;     // zeros, length l + 1
  std::vector<double> offdiag;  // sqrt(k (m + 1 - k)) for k = 1..l
};

TridiagonalForm make_tridiagonal(int m, int ell);
double lambda_max(const TridiagonalForm& a);

struct RootEnclosure {
  Rational lo;
  Rational hi;
  bool exact = false;  // lo == hi is a rational root

  double value() const;
  Real value_real() const;
};

// All real roots of K_l, increasing, each enclosed in an interval of width <= precision.
std::vector<RootEnclosure> isolate_roots(const KravchukFamily& family, int ell, double precision);
double largest_root(const KravchukFamily& family, int ell, double precision = 1e-12);
double smallest_root(const KravchukFamily& family, int ell, double precision = 1e-12);

struct PrincipalRepresentation {
  int m = 0;
  Rational rho;
  int ell = 0;
  int order = 0;                     // 2 l - 1
  std::vector<Real> support;         // z_1 < ... < z_l
  std::vector<RootEnclosure> brackets;
  std::vector<Real> masses;
};

PrincipalRepresentation principal_representation(int m, const Rational& rho, int ell);
// sum_k q_k z_k^j for j = 0..order
std::vector<Real> representation_moments(const PrincipalRepresentation& rep, int order);

struct InterlacingRow {
  int j = 0;
  double cdf_x_at_zj = 0;       // P(X <= z_j)
  double cdf_z_at_zj = 0;       // P(Z <= z_j)
  double cdf_x_at_next = 0;     // P(X <= z_{j+1}), 1 for j = l
  double left_slack = 0;
  double right_slack = 0;
};

struct InterlacingReport {
  bool holds = true;
  double min_slack = 0;
  // Largest satisfied count versus z_l; supp X reaches z_l for genuine instances.
  double max_support = 0;
  double top_root = 0;
  bool reaches_top_root = true;
  std::vector<InterlacingRow> rows;
};

InterlacingReport interlacing_check(const PrincipalRepresentation& rep, const SatisfactionProfile& profile);

struct KktResult {
  int m = 0;
  int ell = 0;
  std::vector<Real> u;          // X_u(t) = sum_k u_k K_k(t)
  Real expected_T;
  Real z_min;                   // smallest root of K_{l+1}
  Real remainder;
};

KktResult kkt_optimum(int m, int ell);
// E T under P(t) proportional to C(m, t) X_u(t)^2.
Real expected_T(int m, const std::vector<Real>& u);

nlohmann::json family_to_json(const KravchukFamily& family);
KravchukFamily family_from_json(const nlohmann::json& j);

}  // namespace opilab
