#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "opilab/numeric.hpp"

namespace opilab {

using Elem = std::uint32_t;
using Word = std::vector<Elem>;
using Matrix = std::vector<Word>;  // row-major

class FieldCtx {
 public:
  explicit FieldCtx(std::uint64_t p);

  std::uint32_t p() const { return p_; }
  Elem add(Elem a, Elem b) const { return static_cast<Elem>((std::uint64_t{a} + b) % p_); }
  Elem sub(Elem a, Elem b) const { return static_cast<Elem>((std::uint64_t{a} + p_ - b) % p_); }
  Elem neg(Elem a) const { return a == 0 ? 0 : p_ - a; }
  Elem mul(Elem a, Elem b) const { return static_cast<Elem>((std::uint64_t{a} * b) % p_); }
  Elem pow(Elem a, std::uint64_t e) const;
  Elem inv(Elem a) const;

  static bool is_prime(std::uint64_t n);

 private:
  std::uint32_t p_;
};

struct MdsCode {
  FieldCtx ctx;
  int m = 0;
  int n = 0;
  Matrix B;                                // m rows, n columns
  std::optional<std::vector<Elem>> eval_points;
  Matrix dual_basis;                       // m - n vectors of length m
  bool dual_distance_verified = false;     // min dual weight enumerated and equal to n + 1

  int dual_distance() const { return n + 1; }
  Word encode(const Word& x) const;
};

// Reed-Solomon code with B[i][j] = a_i^j.
MdsCode make_rs_code(const FieldCtx& ctx, int m, int n, const std::vector<Elem>& eval_points);
// Consecutive points 0..m-1.
MdsCode make_rs_code(const FieldCtx& ctx, int m, int n);
// Any generator matrix; MDS property is verified (exhaustively when m <= 12).
MdsCode make_code_from_generator(const FieldCtx& ctx, const Matrix& B, std::uint64_t seed = 1);

// True when each k-row submatrix of `rows` (each row of length k) is invertible.
bool every_k_rows_invertible(const FieldCtx& ctx, const Matrix& rows, std::uint64_t seed = 1);
Elem determinant(const FieldCtx& ctx, Matrix a);

struct InputLists {
  std::uint32_t p = 0;
  std::vector<std::vector<Elem>> sets;  // sorted
  Rational rho;

  int m() const { return static_cast<int>(sets.size()); }
  std::uint32_t set_size() const { return sets.empty() ? 0 : static_cast<std::uint32_t>(sets[0].size()); }
  // membership[i][v] == 1 iff v in S_i
  std::vector<std::vector<std::uint8_t>> membership() const;
};

InputLists make_lists(std::uint32_t p, std::vector<std::vector<Elem>> sets);

struct SatisfactionProfile {
  int m = 0;
  std::vector<std::uint64_t> histogram;  // index t = number of satisfied constraints
  Word best_x;
  int best_count = 0;
  std::uint64_t total = 0;                // p^n

  Rational s_max() const { return Rational(best_count, m); }
};

std::vector<Word> enumerate_dual(const MdsCode& code);
std::vector<Word> enumerate_dual_by_weight(const MdsCode& code, int t);
SatisfactionProfile brute_force_opi(const MdsCode& code, const InputLists& lists);

// j-th moments of m s(x) for j = 0..order, exact.
std::vector<Rational> profile_moments(const SatisfactionProfile& profile, int order);
std::vector<Rational> binomial_moments(int m, const Rational& rho, int order);
bool profile_moments_match(const SatisfactionProfile& profile, const Rational& rho, int order);
bool moments_match_check(const MdsCode& code, const InputLists& lists, int order);

int hamming_weight(const Word& w);

nlohmann::json code_to_json(const MdsCode& code);
MdsCode code_from_json(const nlohmann::json& j);
nlohmann::json lists_to_json(const InputLists& lists);
InputLists lists_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const SatisfactionProfile& profile);

}  // namespace opilab
