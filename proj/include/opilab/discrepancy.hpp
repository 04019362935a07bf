#pragma once

#include <complex>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "opilab/codes.hpp"
#include "opilab/numeric.hpp"
#include "opilab/quad_ext.hpp"

namespace opilab {

// r^2 = (1 - rho) / rho.
Rational r_squared(const Rational& rho);
// r for members of S_i, -1/r otherwise.
QuadExtScalar g_value(bool in_set, const Rational& rho);
// (1 - 2 rho) / sqrt(rho (1 - rho)), so that g^2 = 1 + beta g.
QuadExtScalar beta_value(const Rational& rho);
QuadExtScalar beta_abs_value(const Rational& rho);
// sqrt(rho (1 - rho)) = rho r.
QuadExtScalar sqrt_rho_one_minus_rho(const Rational& rho);

int satisfied_count(const MdsCode& code, const InputLists& lists, const Word& x);

// Sum over k-subsets of prod g_i(<b_i, x>).
QuadExtScalar q_k_direct(const MdsCode& code, const InputLists& lists, const Word& x, int k);

// q_k depends on x only through the satisfied count a. Entry [a][k] is the
// k-th elementary symmetric polynomial of {r (a times), -1/r (m - a times)}.
std::vector<std::vector<QuadExtScalar>> q_by_count(int m, const Rational& rho);
// Same with g replaced by f = +-1 (integer valued, rho-free).
std::vector<std::vector<BigInt>> qf_by_count(int m);

struct ExpectedQ {
  std::vector<QuadExtScalar> exact;           // t = 0..m, direct enumeration of x
  std::vector<std::complex<double>> fourier;  // dual-code route, empty if skipped
  bool fourier_checked = false;
  double max_imag = 0;
  double max_rel_residual = 0;
};

// E_x[q_t(x)] for t = 0..m, by enumeration and by the dual-code Fourier sum.
// Throws IdentityViolation when the routes disagree beyond 1e-9.
ExpectedQ expected_q_uniform(const MdsCode& code, const InputLists& lists, bool fourier_side = true);
QuadExtScalar expected_q_t_uniform(const MdsCode& code, const InputLists& lists, int t);
// 1/p sum_x g_i(x) e_p(x y) for y = 0..p-1.
std::vector<std::complex<double>> g_spectrum(const std::vector<Elem>& set, std::uint32_t p, const Rational& rho);

// Histogram expectations. prof.histogram[a] counts x with a satisfied constraints.
QuadExtScalar expected_product(const SatisfactionProfile& prof, const Rational& rho, const std::vector<int>& ks);
Rational expected_product_f(const SatisfactionProfile& prof, const std::vector<int>& ks);

// Tuples (T_1..T_r), |T_i| = k_i, whose odd-multiplicity set is exactly [t].
BigInt count_N(const std::vector<int>& ks, int t, int m);        // pairwise recursion
BigInt count_N_brute(const std::vector<int>& ks, int t, int m);  // subset enumeration
BigInt count_N_closed_zero(const std::vector<int>& ks, int m);   // Kravchuk sum at t = 0

QuadExtScalar count_N_rho(int k, int kp, int t, int m, const Rational& rho);
QuadExtScalar count_N_tilde(int k, int kp, int t, int m, const Rational& rho);
// Pairs (T, T') with T^T' in [t] in T|T', weighted beta^(t - |T^T'|).
QuadExtScalar count_N_rho_brute(int k, int kp, int t, int m, const Rational& rho);
QuadExtScalar triple_count(int k, int kp, int t, int m, const Rational& rho);

enum class CountKind { N, N_rho, N_rho_triple, N_tilde };

struct CountTable {
  CountKind kind = CountKind::N_rho;
  int m = 0;
  Rational rho;
  std::map<std::tuple<int, int, int>, QuadExtScalar> values;  // (k, k', t)

  const QuadExtScalar& at(int k, int kp, int t) const { return values.at({k, kp, t}); }
};

CountTable make_count_table(CountKind kind, int m, const Rational& rho, int k_max);

enum class WeightMode { binomial, rational_test };

struct SamplerSpec {
  int ell = 0;
  int sigma = 0;
  WeightMode mode = WeightMode::rational_test;
  std::vector<Real> weights;               // u_k, k = 0..ell (binomial mode)
  std::vector<Rational> rational_weights;  // u_k, k = 0..ell (rational_test mode)

  // u_k = C(m, k)^(-1/2) on [ell - sigma, ell].
  static SamplerSpec binomial_window(int m, int ell, int sigma);
  // User rationals on the window; all ones when u is empty.
  static SamplerSpec rational_test(int ell, int sigma, std::vector<Rational> u = {});
  // Arbitrary real weights u_0..u_ell, e.g. from kkt_optimum.
  static SamplerSpec from_real(std::vector<Real> u);

  int window_lo() const { return ell - sigma; }
  Real u(int k) const;
  // w_k = C(m, k)^(1/2) u_k.
  std::vector<Real> w(int m) const;
};

int default_sigma(int ell);

struct PuResult {
  Real direct;     // E_{P_u}[s] by enumeration
  Real expanded;   // via the weight-t expansion
  Real q1_direct;  // E_{P_u}[q_1]
  Real q1_expanded;
  bool exact = false;  // rational_test mode: both routes in Q(r)
  QuadExtScalar direct_exact;
  QuadExtScalar expanded_exact;
  double rel_residual = 0;
  bool agree = false;
  // Weight-t contributions to numerator and denominator for t >= d_perp.
  std::vector<double> correction_num;
  std::vector<double> correction_den;
  bool corrections_absent = true;
};

// Throws IdentityViolation when direct and expanded values disagree.
PuResult expected_satisfaction_Pu(const MdsCode& code, const InputLists& lists, const SamplerSpec& spec);

// <w, (A + beta D) w> / <w, w> with A the (ell+1)-square tridiagonal and D = diag(k).
Real quadratic_form_value(int m, const std::vector<Real>& w, const Real& beta = Real(0));
// rho + sqrt(rho(1-rho))/m times the form above.
Real quadratic_form_satisfaction(int m, const Rational& rho, const std::vector<Real>& w);

struct Step0Sums {
  Rational denominator;
  Real numerator;          // from triple counts
  Real numerator_direct;   // from the square-root sums
  double asymptotic = 0;   // beta a + 2 sqrt(a (1 - a)), a = ell / m
  double rel_gap = 0;      // |numerator / (sigma m) - asymptotic| / asymptotic
};

Step0Sums step0_sums(int m, int ell, int sigma, const Rational& rho);

struct Step1Report {
  int m = 0, ell = 0, sigma = 0, t = 0;
  Rational rho;
  double reference = 0;   // N_tilde(ell, ell - [t odd]; t) / C(m, ell)
  double max_ratio = 0;
  double c_min = 0;       // max_ratio^(1/sigma), at least 0
  double ratio_at_ell = 0;
  bool bounded = true;
};

Step1Report step1_inequality_check(int m, int ell, int sigma, int t, const Rational& rho);

struct Step2Report {
  int m = 0;
  double mu = 0, delta = 0;
  int ell = 0;
  int t_lo = 0, t_hi = 0;
  double max_rate = 0;
  int argmax_t = 0;
  double exponent_E = 0;
  double slack = 0;
  bool within_slack = false;
  bool argmax_at_start = false;
  bool identity_holds = false;
};

Step2Report step2_rate_check(int m, double mu, double delta, double slack = -1);
// (1/m) log(N(ell, ell - [t odd]; t) / C(m, ell)) at rho = 1/2.
double finite_rate(int m, int ell, int t);

struct IdentityReport {
  std::string identity;
  nlohmann::json instance;
  std::string mode;
  double max_abs_residual = 0;
  bool pass = false;
};

nlohmann::json to_json(const IdentityReport& r);

}  // namespace opilab
