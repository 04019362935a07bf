#include "opilab/codes.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "opilab/config.hpp"
#include "opilab/errors.hpp"

namespace opilab {

// ---------------------------------------------------------------------------
// Field

bool FieldCtx::is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

FieldCtx::FieldCtx(std::uint64_t p) {
  if (p > UINT32_MAX) throw DomainError("field size must fit in 32 bits");
  if (!is_prime(p)) throw DomainError("p = " + std::to_string(p) + " is not prime");
  p_ = static_cast<std::uint32_t>(p);
}

Elem FieldCtx::pow(Elem a, std::uint64_t e) const {
  std::uint64_t out = 1 % p_, b = a % p_;
  while (e > 0) {
    if (e & 1) out = out * b % p_;
    b = b * b % p_;
    e >>= 1;
  }
  return static_cast<Elem>(out);
}

Elem FieldCtx::inv(Elem a) const {
  if (a % p_ == 0) throw DomainError("inverse of zero");
  return pow(a, p_ - 2);
}

// ---------------------------------------------------------------------------
// Linear algebra over F_p

Elem determinant(const FieldCtx& f, Matrix a) {
  const std::size_t k = a.size();
  Elem det = 1;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    while (piv < k && a[piv][c] == 0) ++piv;
    if (piv == k) return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = f.neg(det);
    }
    det = f.mul(det, a[c][c]);
    const Elem iv = f.inv(a[c][c]);
    for (std::size_t r = c + 1; r < k; ++r) {
      if (a[r][c] == 0) continue;
      const Elem factor = f.mul(a[r][c], iv);
      for (std::size_t j = c; j < k; ++j) a[r][j] = f.sub(a[r][j], f.mul(factor, a[c][j]));
    }
  }
  return det;
}

namespace {

// Basis of {y : M y = 0} for M with `cols` columns.
Matrix nullspace(const FieldCtx& f, Matrix a, std::size_t cols) {
  const std::size_t rows = a.size();
  std::vector<int> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[r]);
    const Elem iv = f.inv(a[r][c]);
    for (auto& v : a[r]) v = f.mul(v, iv);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == 0) continue;
      const Elem factor = a[i][c];
      for (std::size_t j = 0; j < cols; ++j) a[i][j] = f.sub(a[i][j], f.mul(factor, a[r][j]));
    }
    pivot_col.push_back(static_cast<int>(c));
    ++r;
  }
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivot_col) is_pivot[c] = true;
  Matrix basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    Word y(cols, 0);
    y[free] = 1;
    for (std::size_t i = 0; i < pivot_col.size(); ++i) y[pivot_col[i]] = f.neg(a[i][free]);
    basis.push_back(std::move(y));
  }
  return basis;
}

template <class Visit>
void for_each_subset(int m, int k, Visit&& visit) {
  if (k == 0) {
    visit(std::uint64_t{0});
    return;
  }
  const std::uint64_t end = std::uint64_t{1} << m;
  for (std::uint64_t s = (std::uint64_t{1} << k) - 1; s < end; s = next_combination(s)) {
    if (!visit(s)) return;
  }
}

Matrix select_rows(const Matrix& rows, std::uint64_t mask) {
  Matrix out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (mask >> i & 1) out.push_back(rows[i]);
  }
  return out;
}

// Odometer over F_p^dim in lexicographic order, maintaining acc = sum_j x_j gen[j].
template <class Visit>
void enumerate_span(const FieldCtx& f, const Matrix& gen, std::size_t len, Visit&& visit) {
  const std::size_t dim = gen.size();
  Word x(dim, 0), acc(len, 0);
  for (;;) {
    visit(x, acc);
    std::size_t j = dim;
    for (;;) {
      if (j == 0) return;
      --j;
      for (std::size_t i = 0; i < len; ++i) acc[i] = f.add(acc[i], gen[j][i]);
      if (++x[j] < f.p()) break;
      x[j] = 0;
    }
  }
}

}  // namespace

bool every_k_rows_invertible(const FieldCtx& f, const Matrix& rows, std::uint64_t seed) {
  const int m = static_cast<int>(rows.size());
  if (m == 0) return true;
  const int k = static_cast<int>(rows[0].size());
  if (k == 0) return true;
  if (k > m) return false;
  if (m <= 12) {
    bool ok = true;
    for_each_subset(m, k, [&](std::uint64_t mask) {
      ok = determinant(f, select_rows(rows, mask)) != 0;
      return ok;
    });
    return ok;
  }
  std::mt19937_64 rng(seed);
  for (int s = 0; s < 200; ++s) {
    std::vector<std::uint32_t> pick = random_subset(rng, static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(k));
    Matrix sub;
    for (auto i : pick) sub.push_back(rows[i]);
    if (determinant(f, sub) == 0) return false;
  }
  return true;
}

Word MdsCode::encode(const Word& x) const {
  Word out(m, 0);
  for (int i = 0; i < m; ++i) {
    std::uint64_t acc = 0;
    for (int j = 0; j < n; ++j) acc += std::uint64_t{B[i][j]} * x[j] % ctx.p();
    out[i] = static_cast<Elem>(acc % ctx.p());
  }
  return out;
}

int hamming_weight(const Word& w) {
  return static_cast<int>(std::count_if(w.begin(), w.end(), [](Elem v) { return v != 0; }));
}

namespace {

void finish_code(MdsCode& code, std::uint64_t seed) {
  const FieldCtx& f = code.ctx;
  const int m = code.m, n = code.n;
  if (n >= 2 && n <= m - 2) {
    const std::uint64_t need = static_cast<std::uint64_t>(std::max(m - n + 1, n - 1));
    if (f.p() < need) throw DomainError("no [m, n] MDS code exists over this field (p < max(m-n+1, n-1))");
  }
  if (!every_k_rows_invertible(f, code.B, seed)) throw DomainError("generator matrix is not MDS");

  Matrix bt(n, Word(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) bt[j][i] = code.B[i][j];
  code.dual_basis = nullspace(f, bt, static_cast<std::size_t>(m));
  if (static_cast<int>(code.dual_basis.size()) != m - n) throw DomainError("generator matrix does not have full column rank");

  if (m > n) {
    Matrix dual_gen(m, Word(m - n));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m - n; ++j) dual_gen[i][j] = code.dual_basis[j][i];
    if (!every_k_rows_invertible(f, dual_gen, seed + 1)) throw IdentityViolation("dual code failed the MDS check");
  }

  const std::uint64_t dual_size = saturating_pow(f.p(), static_cast<unsigned>(m - n));
  if (dual_size <= 100'000) {
    int min_weight = m + 1;
    enumerate_span(f, code.dual_basis, static_cast<std::size_t>(m), [&](const Word& c, const Word& y) {
      if (std::any_of(c.begin(), c.end(), [](Elem v) { return v != 0; })) min_weight = std::min(min_weight, hamming_weight(y));
    });
    if (min_weight != n + 1) throw IdentityViolation("dual minimum distance differs from n + 1");
    code.dual_distance_verified = true;
  }
}

}  // namespace

MdsCode make_rs_code(const FieldCtx& ctx, int m, int n, const std::vector<Elem>& eval_points) {
  if (n < 1) throw DomainError("dimension must be at least 1");
  if (n > m) throw DomainError("dimension n exceeds length m");
  if (static_cast<std::uint64_t>(m) > ctx.p()) throw DomainError("length m exceeds field size p");
  if (static_cast<int>(eval_points.size()) != m) throw DomainError("need exactly m evaluation points");
  std::set<Elem> seen;
  for (Elem a : eval_points) {
    if (a >= ctx.p()) throw DomainError("evaluation point outside [0, p)");
    if (!seen.insert(a).second) throw DomainError("duplicate evaluation point " + std::to_string(a));
  }
  MdsCode code{ctx, m, n, Matrix(m, Word(n)), eval_points, {}, false};
  for (int i = 0; i < m; ++i) {
    Elem v = 1;
    for (int j = 0; j < n; ++j) {
      code.B[i][j] = v;
      v = ctx.mul(v, eval_points[i]);
    }
  }
  finish_code(code, 1);
  return code;
}

MdsCode make_rs_code(const FieldCtx& ctx, int m, int n) {
  std::vector<Elem> points(static_cast<std::size_t>(std::max(m, 0)));
  for (int i = 0; i < m; ++i) points[i] = static_cast<Elem>(i);
  return make_rs_code(ctx, m, n, points);
}

MdsCode make_code_from_generator(const FieldCtx& ctx, const Matrix& B, std::uint64_t seed) {
  if (B.empty() || B[0].empty()) throw DomainError("empty generator matrix");
  const int m = static_cast<int>(B.size()), n = static_cast<int>(B[0].size());
  if (n > m) throw DomainError("dimension n exceeds length m");
  for (const auto& row : B) {
    if (static_cast<int>(row.size()) != n) throw DomainError("ragged generator matrix");
    for (Elem v : row)
      if (v >= ctx.p()) throw DomainError("generator entry outside [0, p)");
  }
  MdsCode code{ctx, m, n, B, std::nullopt, {}, false};
  finish_code(code, seed);
  return code;
}

// ---------------------------------------------------------------------------
// Lists

InputLists make_lists(std::uint32_t p, std::vector<std::vector<Elem>> sets) {
  if (sets.empty()) throw DomainError("need at least one constraint set");
  const std::size_t size = sets[0].size();
  if (size == 0) throw DomainError("constraint sets must be nonempty (rho > 0)");
  for (auto& s : sets) {
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw DomainError("constraint set has repeated elements");
    if (!s.empty() && s.back() >= p) throw DomainError("constraint element outside [0, p)");
    if (s.size() != size) throw DomainError("constraint sets must share a common size");
  }
  return InputLists{p, std::move(sets), Rational(static_cast<long>(size), static_cast<long>(p))};
}

std::vector<std::vector<std::uint8_t>> InputLists::membership() const {
  std::vector<std::vector<std::uint8_t>> out(sets.size(), std::vector<std::uint8_t>(p, 0));
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (Elem v : sets[i]) out[i][v] = 1;
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration

std::vector<Word> enumerate_dual(const MdsCode& code) {
  require_budget(saturating_pow(code.ctx.p(), static_cast<unsigned>(code.m - code.n)), "dual enumeration");
  std::vector<Word> out;
  enumerate_span(code.ctx, code.dual_basis, static_cast<std::size_t>(code.m),
                 [&](const Word&, const Word& y) { out.push_back(y); });
  return out;
}

std::vector<Word> enumerate_dual_by_weight(const MdsCode& code, int t) {
  require_budget(saturating_pow(code.ctx.p(), static_cast<unsigned>(code.m - code.n)), "dual enumeration");
  std::vector<Word> out;
  enumerate_span(code.ctx, code.dual_basis, static_cast<std::size_t>(code.m), [&](const Word&, const Word& y) {
    if (hamming_weight(y) == t) out.push_back(y);
  });
  return out;
}

SatisfactionProfile brute_force_opi(const MdsCode& code, const InputLists& lists) {
  if (lists.m() != code.m) throw DomainError("number of lists differs from code length");
  if (lists.p != code.ctx.p()) throw DomainError("lists and code use different fields");
  const std::uint64_t total = saturating_pow(code.ctx.p(), static_cast<unsigned>(code.n));
  require_budget(total, "solution enumeration");

  Matrix cols(code.n, Word(code.m));
  for (int i = 0; i < code.m; ++i)
    for (int j = 0; j < code.n; ++j) cols[j][i] = code.B[i][j];
  const auto member = lists.membership();

  SatisfactionProfile prof;
  prof.m = code.m;
  prof.total = total;
  prof.histogram.assign(code.m + 1, 0);
  prof.best_count = -1;
  enumerate_span(code.ctx, cols, static_cast<std::size_t>(code.m), [&](const Word& x, const Word& bx) {
    int sat = 0;
    for (int i = 0; i < code.m; ++i) sat += member[i][bx[i]];
    ++prof.histogram[sat];
    if (sat > prof.best_count) {
      prof.best_count = sat;
      prof.best_x = x;
    }
  });
  return prof;
}

std::vector<Rational> profile_moments(const SatisfactionProfile& prof, int order) {
  std::vector<Rational> out(order + 1, 0);
  for (int t = 0; t <= prof.m; ++t) {
    if (prof.histogram[t] == 0) continue;
    Rational w(BigInt(prof.histogram[t]));
    for (int j = 0; j <= order; ++j) {
      out[j] += w;
      w *= t;
    }
  }
  for (auto& v : out) v /= Rational(BigInt(prof.total));
  return out;
}

std::vector<Rational> binomial_moments(int m, const Rational& rho, int order) {
  std::vector<Rational> out(order + 1, 0);
  for (int t = 0; t <= m; ++t) {
    Rational w = binomial_q(m, t) * pow_q(rho, t) * pow_q(1 - rho, m - t);
    for (int j = 0; j <= order; ++j) {
      out[j] += w;
      w *= t;
    }
  }
  return out;
}

bool profile_moments_match(const SatisfactionProfile& prof, const Rational& rho, int order) {
  return profile_moments(prof, order) == binomial_moments(prof.m, rho, order);
}

bool moments_match_check(const MdsCode& code, const InputLists& lists, int order) {
  if (order < 0) throw DomainError("moment order must be nonnegative");
  return profile_moments_match(brute_force_opi(code, lists), lists.rho, order);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json code_to_json(const MdsCode& code) {
  nlohmann::json j{{"p", code.ctx.p()}, {"m", code.m}, {"n", code.n}};
  if (code.eval_points) {
    j["eval_points"] = *code.eval_points;
  } else {
    j["generator"] = code.B;
  }
  return j;
}

MdsCode code_from_json(const nlohmann::json& j) {
  try {
    FieldCtx ctx(j.at("p").get<std::uint64_t>());
    if (j.contains("generator")) return make_code_from_generator(ctx, j.at("generator").get<Matrix>());
    const int m = j.at("m").get<int>(), n = j.at("n").get<int>();
    if (j.contains("eval_points")) return make_rs_code(ctx, m, n, j.at("eval_points").get<std::vector<Elem>>());
    return make_rs_code(ctx, m, n);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed code JSON: ") + e.what());
  }
}

nlohmann::json lists_to_json(const InputLists& lists) { return {{"p", lists.p}, {"sets", lists.sets}}; }

InputLists lists_from_json(const nlohmann::json& j) {
  try {
    const auto p = j.at("p").get<std::uint64_t>();
    if (!FieldCtx::is_prime(p) || p > UINT32_MAX) throw DomainError("lists JSON: p is not a supported prime");
    return make_lists(static_cast<std::uint32_t>(p), j.at("sets").get<std::vector<std::vector<Elem>>>());
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed lists JSON: ") + e.what());
  }
}

nlohmann::json profile_to_json(const SatisfactionProfile& prof) {
  return {{"m", prof.m},
          {"histogram", prof.histogram},
          {"best_x", prof.best_x},
          {"s_max", to_string(prof.s_max())},
          {"s_max_value", to_double(prof.s_max())}};
}

}  // namespace opilab
