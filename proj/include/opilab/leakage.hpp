#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "opilab/codes.hpp"
#include "opilab/numeric.hpp"

namespace opilab {

using Complex = std::complex<double>;

struct IndicatorSpectrum {
  std::vector<Elem> set;
  std::uint32_t p = 0;
  std::vector<Complex> coeffs;  // 1/p sum_{x in S} e_p(x z), z = 0..p-1
  double rho = 0;

  double max_nonzero_abs() const;
  double parseval() const;
};

IndicatorSpectrum dft_indicator(const std::vector<Elem>& set, std::uint32_t p);

// |sin(rho pi)| / (p sin(pi / p)), the value of an interval of size rho p at z = +-1.
double arc_bound(const Rational& rho, std::uint32_t p);

struct ArcReport {
  std::uint32_t p = 0;
  Rational rho;
  double interval_max = 0;    // max over intervals and z != 0
  double random_max = 0;      // max over the random sets and z != 0
  double asymptotic = 0;      // |sin(rho pi)| / pi
  double c = 0;               // p^2 (interval_max - asymptotic)
  int random_sets = 0;
  bool attained_by_interval = false;
  bool holds = false;
};

ArcReport arc_extremal_check(std::uint32_t p, const Rational& rho, int random_sets = 1000, std::uint64_t seed = 1);

enum class BucketKind { single, cyclic, random };

BucketKind parse_bucket_kind(const std::string& name);
std::string to_string(BucketKind kind);

struct BucketParams {
  double lambda = 0;       // random: target intersection density at t = d_perp
  double eps = 0.05;       // random: slack in the exponent of J
  std::uint64_t seed = 1;  // random: PRNG seed, streams derived per bucket index
  std::uint64_t max_buckets = 100000;
};

struct BucketFamily {
  BucketKind kind = BucketKind::single;
  int m = 0;
  int n = 0;
  std::vector<std::vector<int>> buckets;  // each of size 2n - m, sorted
  double lambda_target = 0;
  std::uint64_t seed = 0;
  double eps = 0;
  // Random kind: the closed-form J, the union-bound J, and buckets added until the
  // exhaustive check passed.
  std::uint64_t J_formula = 0;
  std::uint64_t J_union = 0;
  std::uint64_t augmented = 0;

  std::size_t J() const { return buckets.size(); }
  int bucket_size() const { return 2 * n - m; }
};

BucketFamily make_buckets(BucketKind kind, int m, int n, const BucketParams& params = {});

// sum_{k >= ceil(lambda m)} C(2n - m, k) C(2(m - n), n + 1 - k).
BigInt n_lambda(int m, int n, int min_intersection);
// Count of d_perp-sets D with |D & B| >= min_intersection for a fixed bucket.
BigInt n_lambda_exhaustive(int m, int n, int min_intersection);
// Probability that a random bucket meets a fixed d_perp-set in >= L points.
double bucket_hit_prob(int m, int n, int min_intersection);

enum class CoverageMode { exhaustive, formula, audited };
std::string to_string(CoverageMode mode);

struct CoverageReport {
  int t = 0;
  int min_intersection = 0;  // min over t-sets D of max_j |D & B_j|
  double lambda = 0;         // min_intersection / m
  CoverageMode mode = CoverageMode::exhaustive;
  bool certified = false;
  std::uint64_t sets_checked = 0;
};

CoverageReport certify_coverage(const BucketFamily& family, int t, std::uint64_t exhaustive_limit = 1'000'000,
                                std::uint64_t audit_draws = 100'000, std::uint64_t seed = 1);

// J rho^(n-m) (rho / (1 - rho))^(t/2) (A / rho)^L with A the exact arc value.
double step3_bound_value(double rho, double arc, int m, int n, int t, double J, int L);

struct Step3Result {
  std::uint32_t p = 0;
  int m = 0, n = 0, t = 0;
  double lhs_abs = 0;
  double bound = 0;
  double ratio = 0;
  BucketKind kind = BucketKind::single;
  double lambda = 0;
  std::size_t J = 0;
  bool certified = false;
  CoverageMode mode = CoverageMode::exhaustive;
};

// Throws DomainError when the buckets cannot be certified at t.
double step3_bound(const MdsCode& code, const InputLists& lists, const BucketFamily& buckets, int t);
Step3Result step3_evaluate(const MdsCode& code, const InputLists& lists, const BucketFamily& buckets, int t);
nlohmann::json to_json(const Step3Result& r);

// sum_{y in C_t^perp} prod_i 1_{S_i}^(y_i).
Complex per_transcript_sum(const MdsCode& code, const InputLists& lists, int t);
// All weights at once, index t = 0..m.
std::vector<Complex> per_transcript_sums(const MdsCode& code, const InputLists& lists);

// Total variation between the joint leakage of a uniform codeword through the
// per-party partitions {S_i, F_p \ S_i} and the product of its marginals, via
// the dual-code sum over y != 0.
double tv_proxy(const MdsCode& code, const std::vector<std::vector<Elem>>& leakage_sets);

struct ChainCheck {
  // |sum|, sum_j |sum_{Y_j}|, Cauchy-Schwarz over Y_j, the same over all of
  // C^perp, and J rho^n (A / rho)^L. Each entry bounds the previous one.
  std::vector<double> levels;
  double max_projection_residual = 0;  // |sum_y prod_{L_j} |.|^2 - prod ||.||^2|
  int min_intersection = 0;
  bool holds = false;
};

// The Cauchy-Schwarz chain for one bucket family and weight t, every line by enumeration.
ChainCheck cauchy_schwarz_chain(const MdsCode& code, const InputLists& lists, const BucketFamily& buckets, int t);

// Smallest 2 mu where min_lambda G(mu, lambda) reaches 0, minimising over lambda by golden section.
double balanced_llr_rate(double tol = 1e-9);

}  // namespace opilab
