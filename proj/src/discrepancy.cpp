#include "opilab/discrepancy.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "opilab/config.hpp"
#include "opilab/errors.hpp"
#include "opilab/kravchuk.hpp"
#include "opilab/rates.hpp"

namespace opilab {

namespace {

void require_rho(const Rational& rho) {
  if (rho <= 0 || rho >= 1) throw DomainError("rho must lie in (0, 1)");
}

// C(n, h/2), zero unless h is even and 0 <= h/2 <= n.
BigInt binom_half(long n, long h) {
  if (h < 0 || h % 2 != 0 || n < 0) return 0;
  return binomial(n, h / 2);
}

QuadExtScalar qone(const Rational& rho) { return QuadExtScalar::rational(1, r_squared(rho)); }

QuadExtScalar n_rho_impl(int k, int kp, int t, int m, const Rational& rho, const QuadExtScalar& beta) {
  const Rational rs = r_squared(rho);
  QuadExtScalar sum = QuadExtScalar::rational(0, rs);
  if (k < 0 || kp < 0 || t < 0 || t > m) return sum;
  QuadExtScalar bj = qone(rho);
  for (int j = 0; j <= t; ++j) {
    const BigInt c = binomial(t, j) * binom_half(t - j, t + k - kp - j) * binom_half(m - t, k + kp - t - j);
    if (c != 0) sum += bj * Rational(c);
    bj *= beta;
  }
  return sum;
}

std::vector<std::complex<double>> to_complex_spectrum(const std::vector<std::complex<long double>>& v) {
  std::vector<std::complex<double>> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = {static_cast<double>(v[i].real()), static_cast<double>(v[i].imag())};
  return out;
}

ExpectedQ expected_q_from_profile(const MdsCode& code, const InputLists& lists, const SatisfactionProfile& prof,
                                  bool fourier_side) {
  const int m = code.m;
  const auto Q = q_by_count(m, lists.rho);
  const Rational rs = r_squared(lists.rho);
  ExpectedQ out;
  out.exact.assign(static_cast<std::size_t>(m) + 1, QuadExtScalar::rational(0, rs));
  const Rational inv_total(1, BigInt(prof.total));
  for (int a = 0; a <= m; ++a) {
    const auto h = prof.histogram[static_cast<std::size_t>(a)];
    if (h == 0) continue;
    const Rational wgt = Rational(BigInt(h)) * inv_total;
    for (int t = 0; t <= m; ++t) out.exact[t] += Q[a][t] * wgt;
  }
  for (int t = 1; t < std::min(code.dual_distance(), m + 1); ++t) {
    if (!out.exact[t].is_zero())
      throw IdentityViolation("E[q_t] nonzero below the dual distance at t = " + std::to_string(t));
  }
  if (!fourier_side) return out;

  std::vector<std::vector<std::complex<double>>> spec(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) spec[i] = g_spectrum(lists.sets[i], lists.p, lists.rho);
  std::vector<std::complex<long double>> acc(static_cast<std::size_t>(m) + 1, 0.0L);
  for (const Word& y : enumerate_dual(code)) {
    std::complex<long double> prod = 1.0L;
    int w = 0;
    for (int i = 0; i < m; ++i) {
      if (y[i] == 0) continue;
      ++w;
      const auto& c = spec[i][y[i]];
      prod *= std::complex<long double>(c.real(), c.imag());
    }
    acc[w] += prod;
  }
  out.fourier = to_complex_spectrum(acc);
  out.fourier_checked = true;
  for (int t = 0; t <= m; ++t) {
    const double ex = out.exact[t].to_double();
    const double scale = std::max(1.0, std::abs(ex));
    const double im = std::abs(out.fourier[t].imag());
    const double rel = std::abs(out.fourier[t].real() - ex) / scale;
    out.max_imag = std::max(out.max_imag, im / scale);
    out.max_rel_residual = std::max(out.max_rel_residual, rel);
  }
  if (out.max_imag > 1e-9 || out.max_rel_residual > 1e-9) {
    std::ostringstream os;
    os << "dual-code Fourier sum disagrees with enumeration (imag " << out.max_imag << ", rel "
       << out.max_rel_residual << ")";
    throw IdentityViolation(os.str());
  }
  return out;
}

}  // namespace

Rational r_squared(const Rational& rho) {
  require_rho(rho);
  return (1 - rho) / rho;
}

QuadExtScalar g_value(bool in_set, const Rational& rho) {
  const Rational rs = r_squared(rho);
  return in_set ? QuadExtScalar(0, 1, rs) : QuadExtScalar(0, -1 / rs, rs);
}

QuadExtScalar beta_value(const Rational& rho) {
  const Rational rs = r_squared(rho);
  return {0, (1 - 2 * rho) / (1 - rho), rs};
}

QuadExtScalar beta_abs_value(const Rational& rho) {
  const Rational rs = r_squared(rho);
  return {0, abs((1 - 2 * rho) / (1 - rho)), rs};
}

QuadExtScalar sqrt_rho_one_minus_rho(const Rational& rho) { return {0, rho, r_squared(rho)}; }

int satisfied_count(const MdsCode& code, const InputLists& lists, const Word& x) {
  const Word y = code.encode(x);
  const auto mem = lists.membership();
  int a = 0;
  for (int i = 0; i < code.m; ++i) a += mem[i][y[i]];
  return a;
}

QuadExtScalar q_k_direct(const MdsCode& code, const InputLists& lists, const Word& x, int k) {
  const int m = code.m;
  const Rational rs = r_squared(lists.rho);
  if (k < 0 || k > m) return QuadExtScalar::rational(0, rs);
  if (m > 63) throw DomainError("q_k_direct: m too large for subset masks");
  const BigInt count = binomial(m, k);
  require_budget(count > BigInt(UINT64_MAX) ? UINT64_MAX : static_cast<std::uint64_t>(count), "q_k_direct subsets");
  const Word y = code.encode(x);
  const auto mem = lists.membership();
  std::vector<QuadExtScalar> g;
  g.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) g.push_back(g_value(mem[i][y[i]] != 0, lists.rho));
  QuadExtScalar sum = QuadExtScalar::rational(0, rs);
  if (k == 0) return qone(lists.rho);
  const std::uint64_t end = m == 64 ? 0 : (std::uint64_t{1} << m);
  for (std::uint64_t mask = (std::uint64_t{1} << k) - 1; mask < end; mask = next_combination(mask)) {
    QuadExtScalar prod = qone(lists.rho);
    for (std::uint64_t v = mask; v; v &= v - 1) prod *= g[static_cast<std::size_t>(std::countr_zero(v))];
    sum += prod;
    if (k == m) break;
  }
  return sum;
}

std::vector<std::vector<QuadExtScalar>> q_by_count(int m, const Rational& rho) {
  const Rational rs = r_squared(rho);
  const QuadExtScalar yes = g_value(true, rho), no = g_value(false, rho);
  std::vector<std::vector<QuadExtScalar>> out(static_cast<std::size_t>(m) + 1);
  for (int a = 0; a <= m; ++a) {
    std::vector<QuadExtScalar> e(static_cast<std::size_t>(m) + 1, QuadExtScalar::rational(0, rs));
    e[0] = qone(rho);
    for (int i = 0; i < m; ++i) {
      const QuadExtScalar& v = i < a ? yes : no;
      for (int k = i + 1; k >= 1; --k) e[k] += v * e[k - 1];
    }
    out[a] = std::move(e);
  }
  return out;
}

std::vector<std::vector<BigInt>> qf_by_count(int m) {
  std::vector<std::vector<BigInt>> out(static_cast<std::size_t>(m) + 1);
  for (int a = 0; a <= m; ++a) {
    std::vector<BigInt> e(static_cast<std::size_t>(m) + 1, 0);
    e[0] = 1;
    for (int i = 0; i < m; ++i) {
      const int v = i < a ? 1 : -1;
      for (int k = i + 1; k >= 1; --k) e[k] += v * e[k - 1];
    }
    out[a] = std::move(e);
  }
  return out;
}

std::vector<std::complex<double>> g_spectrum(const std::vector<Elem>& set, std::uint32_t p, const Rational& rho) {
  const double r = std::sqrt(to_double(r_squared(rho)));
  std::vector<double> g(p, -1.0 / r);
  for (Elem s : set) g[s] = r;
  std::vector<std::complex<double>> out(p);
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  for (std::uint32_t y = 0; y < p; ++y) {
    std::complex<long double> acc = 0.0L;
    for (std::uint32_t x = 0; x < p; ++x) {
      const long double ang = two_pi * static_cast<long double>((std::uint64_t{x} * y) % p) / p;
      acc += static_cast<long double>(g[x]) * std::complex<long double>(std::cos(ang), std::sin(ang));
    }
    acc /= static_cast<long double>(p);
    out[y] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
  }
  return out;
}

ExpectedQ expected_q_uniform(const MdsCode& code, const InputLists& lists, bool fourier_side) {
  return expected_q_from_profile(code, lists, brute_force_opi(code, lists), fourier_side);
}

QuadExtScalar expected_q_t_uniform(const MdsCode& code, const InputLists& lists, int t) {
  if (t < 0 || t > code.m) throw DomainError("expected_q_t_uniform: t out of range");
  return expected_q_uniform(code, lists, true).exact[t];
}

QuadExtScalar expected_product(const SatisfactionProfile& prof, const Rational& rho, const std::vector<int>& ks) {
  const int m = prof.m;
  const auto Q = q_by_count(m, rho);
  QuadExtScalar sum = QuadExtScalar::rational(0, r_squared(rho));
  for (int a = 0; a <= m; ++a) {
    const auto h = prof.histogram[static_cast<std::size_t>(a)];
    if (h == 0) continue;
    QuadExtScalar prod = qone(rho);
    for (int k : ks) {
      if (k < 0 || k > m) return QuadExtScalar::rational(0, r_squared(rho));
      prod *= Q[a][k];
    }
    sum += prod * Rational(BigInt(h));
  }
  return sum * Rational(1, BigInt(prof.total));
}

Rational expected_product_f(const SatisfactionProfile& prof, const std::vector<int>& ks) {
  const int m = prof.m;
  const auto Q = qf_by_count(m);
  BigInt sum = 0;
  for (int a = 0; a <= m; ++a) {
    const auto h = prof.histogram[static_cast<std::size_t>(a)];
    if (h == 0) continue;
    BigInt prod = 1;
    for (int k : ks) {
      if (k < 0 || k > m) return 0;
      prod *= Q[a][k];
    }
    sum += prod * BigInt(h);
  }
  return Rational(sum, BigInt(prof.total));
}

BigInt count_N(const std::vector<int>& ks, int t, int m) {
  if (t < 0 || t > m) return 0;
  // dist[s]: tuples so far whose odd-multiplicity set is a fixed s-set.
  std::vector<BigInt> dist(static_cast<std::size_t>(m) + 1, 0);
  dist[0] = 1;
  for (int k : ks) {
    if (k < 0 || k > m) return 0;
    std::vector<BigInt> next(dist.size(), 0);
    for (int s = 0; s <= m; ++s) {
      if (dist[s] == 0) continue;
      for (int u = 0; u <= m; ++u) next[u] += dist[s] * binom_half(u, u + s - k) * binom_half(m - u, s + k - u);
    }
    dist = std::move(next);
  }
  return dist[t];
}

BigInt count_N_brute(const std::vector<int>& ks, int t, int m) {
  if (m > 63) throw DomainError("count_N_brute: m too large");
  if (t < 0 || t > m) return 0;
  BigInt total = 1;
  std::vector<std::vector<std::uint64_t>> subsets;
  for (int k : ks) {
    if (k < 0 || k > m) return 0;
    total *= binomial(m, k);
    std::vector<std::uint64_t> list;
    if (k == 0) {
      list.push_back(0);
    } else {
      const std::uint64_t end = std::uint64_t{1} << m;
      for (std::uint64_t v = (std::uint64_t{1} << k) - 1; v < end; v = next_combination(v)) {
        list.push_back(v);
        if (k == m) break;
      }
    }
    subsets.push_back(std::move(list));
  }
  require_budget(total > BigInt(UINT64_MAX) ? UINT64_MAX : static_cast<std::uint64_t>(total), "count_N_brute");
  const std::uint64_t target = (std::uint64_t{1} << t) - 1;
  std::uint64_t count = 0;
  auto rec = [&](auto&& self, std::size_t level, std::uint64_t acc) -> void {
    if (level == subsets.size()) {
      count += acc == target;
      return;
    }
    for (std::uint64_t v : subsets[level]) self(self, level + 1, acc ^ v);
  };
  rec(rec, 0, 0);
  return BigInt(count);
}

BigInt count_N_closed_zero(const std::vector<int>& ks, int m) {
  std::vector<Poly> polys;
  for (int k : ks) {
    if (k < 0 || k > m) return 0;
    polys.push_back(kravchuk_closed_form(m, k));
  }
  Rational sum = 0;
  for (int t = 0; t <= m; ++t) {
    Rational prod = Rational(binomial(m, t));
    for (const Poly& pk : polys) prod *= poly_eval(pk, Rational(t));
    sum += prod;
  }
  sum /= Rational(BigInt(1) << m);
  if (denominator(sum) != 1) throw IdentityViolation("count_N_closed_zero: non-integral Kravchuk sum");
  return numerator(sum);
}

QuadExtScalar count_N_rho(int k, int kp, int t, int m, const Rational& rho) {
  return n_rho_impl(k, kp, t, m, rho, beta_value(rho));
}

QuadExtScalar count_N_tilde(int k, int kp, int t, int m, const Rational& rho) {
  return n_rho_impl(k, kp, t, m, rho, beta_abs_value(rho));
}

QuadExtScalar count_N_rho_brute(int k, int kp, int t, int m, const Rational& rho) {
  if (m > 63) throw DomainError("count_N_rho_brute: m too large");
  const Rational rs = r_squared(rho);
  QuadExtScalar sum = QuadExtScalar::rational(0, rs);
  if (k < 0 || kp < 0 || k > m || kp > m || t < 0 || t > m) return sum;
  const BigInt pairs = binomial(m, k) * binomial(m, kp);
  require_budget(pairs > BigInt(UINT64_MAX) ? UINT64_MAX : static_cast<std::uint64_t>(pairs), "count_N_rho_brute");
  auto subsets = [m](int k) {
    std::vector<std::uint64_t> list;
    if (k == 0) return std::vector<std::uint64_t>{0};
    for (std::uint64_t v = (std::uint64_t{1} << k) - 1; v < (std::uint64_t{1} << m); v = next_combination(v)) {
      list.push_back(v);
      if (k == m) break;
    }
    return list;
  };
  const auto A = subsets(k), B = subsets(kp);
  const std::uint64_t U = (std::uint64_t{1} << t) - 1;
  std::vector<std::uint64_t> by_excess(static_cast<std::size_t>(t) + 1, 0);
  for (std::uint64_t a : A) {
    for (std::uint64_t b : B) {
      const std::uint64_t d = a ^ b;
      if ((d & ~U) != 0 || (U & ~(a | b)) != 0) continue;
      ++by_excess[static_cast<std::size_t>(t - std::popcount(d))];
    }
  }
  const QuadExtScalar beta = beta_value(rho);
  for (int j = 0; j <= t; ++j) {
    if (by_excess[j] != 0) sum += pow(beta, j) * Rational(BigInt(by_excess[j]));
  }
  return sum;
}

QuadExtScalar triple_count(int k, int kp, int t, int m, const Rational& rho) {
  QuadExtScalar out = count_N_rho(k + 1, kp, t, m, rho) * Rational(k + 1);
  out += beta_value(rho) * count_N_rho(k, kp, t, m, rho) * Rational(k);
  if (k >= 1) out += count_N_rho(k - 1, kp, t, m, rho) * Rational(m - k + 1);
  return out;
}

CountTable make_count_table(CountKind kind, int m, const Rational& rho, int k_max) {
  CountTable table;
  table.kind = kind;
  table.m = m;
  table.rho = rho;
  const Rational rs = r_squared(rho);
  for (int k = 0; k <= k_max; ++k) {
    for (int kp = 0; kp <= k_max; ++kp) {
      for (int t = 0; t <= m; ++t) {
        QuadExtScalar v;
        switch (kind) {
          case CountKind::N: v = QuadExtScalar::rational(Rational(count_N({k, kp}, t, m)), rs); break;
          case CountKind::N_rho: v = count_N_rho(k, kp, t, m, rho); break;
          case CountKind::N_rho_triple: v = triple_count(k, kp, t, m, rho); break;
          case CountKind::N_tilde: v = count_N_tilde(k, kp, t, m, rho); break;
        }
        table.values.emplace(std::make_tuple(k, kp, t), std::move(v));
      }
    }
  }
  return table;
}

int default_sigma(int ell) { return std::min(2, ell); }

SamplerSpec SamplerSpec::binomial_window(int m, int ell, int sigma) {
  if (sigma < 0 || sigma > ell || ell > m) throw DomainError("SamplerSpec: need 0 <= sigma <= ell <= m");
  SamplerSpec s;
  s.ell = ell;
  s.sigma = sigma;
  s.mode = WeightMode::binomial;
  s.weights.assign(static_cast<std::size_t>(ell) + 1, Real(0));
  for (int k = ell - sigma; k <= ell; ++k) s.weights[k] = 1 / sqrt(to_real(Rational(binomial(m, k))));
  return s;
}

SamplerSpec SamplerSpec::rational_test(int ell, int sigma, std::vector<Rational> u) {
  if (sigma < 0 || sigma > ell) throw DomainError("SamplerSpec: need 0 <= sigma <= ell");
  SamplerSpec s;
  s.ell = ell;
  s.sigma = sigma;
  s.mode = WeightMode::rational_test;
  s.rational_weights.assign(static_cast<std::size_t>(ell) + 1, Rational(0));
  if (u.empty()) u.assign(static_cast<std::size_t>(sigma) + 1, Rational(1));
  if (u.size() == static_cast<std::size_t>(ell) + 1) {
    for (int k = 0; k < ell - sigma; ++k)
      if (u[k] != 0) throw DomainError("SamplerSpec: weight outside the window");
    s.rational_weights = std::move(u);
  } else if (u.size() == static_cast<std::size_t>(sigma) + 1) {
    for (int j = 0; j <= sigma; ++j) s.rational_weights[ell - sigma + j] = u[j];
  } else {
    throw DomainError("SamplerSpec: expected sigma + 1 or ell + 1 weights");
  }
  return s;
}

SamplerSpec SamplerSpec::from_real(std::vector<Real> u) {
  if (u.empty()) throw DomainError("SamplerSpec: empty weights");
  SamplerSpec s;
  s.ell = static_cast<int>(u.size()) - 1;
  s.sigma = s.ell;
  s.mode = WeightMode::binomial;
  s.weights = std::move(u);
  return s;
}

Real SamplerSpec::u(int k) const {
  if (k < 0 || k > ell) return Real(0);
  return mode == WeightMode::binomial ? weights[k] : to_real(rational_weights[k]);
}

std::vector<Real> SamplerSpec::w(int m) const {
  std::vector<Real> out(static_cast<std::size_t>(ell) + 1);
  for (int k = 0; k <= ell; ++k) out[k] = sqrt(to_real(Rational(binomial(m, k)))) * u(k);
  return out;
}

PuResult expected_satisfaction_Pu(const MdsCode& code, const InputLists& lists, const SamplerSpec& spec) {
  const int m = code.m;
  const int ell = spec.ell;
  if (ell > m) throw DomainError("expected_satisfaction_Pu: ell > m");
  const Rational& rho = lists.rho;
  const Rational rs = r_squared(rho);
  const SatisfactionProfile prof = brute_force_opi(code, lists);
  const bool fourier = saturating_pow(code.ctx.p(), static_cast<unsigned>(m - code.n)) <= enumeration_budget();
  const ExpectedQ eq = expected_q_from_profile(code, lists, prof, fourier);
  const auto Q = q_by_count(m, rho);
  const QuadExtScalar srr = sqrt_rho_one_minus_rho(rho);
  const int dperp = code.dual_distance();

  // Exact counts needed by the expansion, shared by both modes.
  std::vector<std::vector<std::vector<QuadExtScalar>>> n_tab(ell + 1), tr_tab(ell + 1);
  for (int k = 0; k <= ell; ++k) {
    n_tab[k].resize(ell + 1);
    tr_tab[k].resize(ell + 1);
    for (int kp = 0; kp <= ell; ++kp) {
      for (int t = 0; t <= m; ++t) {
        n_tab[k][kp].push_back(count_N_rho(k, kp, t, m, rho));
        tr_tab[k][kp].push_back(triple_count(k, kp, t, m, rho));
      }
    }
  }

  PuResult res;
  res.correction_num.assign(static_cast<std::size_t>(m) + 1, 0.0);
  res.correction_den.assign(static_cast<std::size_t>(m) + 1, 0.0);
  for (int t = dperp; t <= m; ++t) {
    if (eq.exact[t].is_zero()) continue;
    for (int k = spec.window_lo(); k <= ell; ++k)
      for (int kp = spec.window_lo(); kp <= ell; ++kp)
        if (!n_tab[k][kp][t].is_zero() || !tr_tab[k][kp][t].is_zero()) res.corrections_absent = false;
  }

  if (spec.mode == WeightMode::rational_test) {
    const auto& u = spec.rational_weights;
    QuadExtScalar num = QuadExtScalar::rational(0, rs), q1num = num, den = num;
    for (int a = 0; a <= m; ++a) {
      const auto h = prof.histogram[static_cast<std::size_t>(a)];
      if (h == 0) continue;
      QuadExtScalar W = QuadExtScalar::rational(0, rs);
      for (int k = 0; k <= ell; ++k)
        if (u[k] != 0) W += Q[a][k] * u[k];
      const QuadExtScalar W2h = W * W * Rational(BigInt(h));
      den += W2h;
      num += W2h * Rational(a);
      q1num += W2h * Q[a][1 <= m ? 1 : 0];
    }
    if (den.is_zero()) throw DomainError("expected_satisfaction_Pu: sampler weights vanish on every x");
    QuadExtScalar enum_ = QuadExtScalar::rational(0, rs), eden = enum_;
    for (int t = 0; t <= m; ++t) {
      if (eq.exact[t].is_zero()) continue;
      QuadExtScalar cn = QuadExtScalar::rational(0, rs), cd = cn;
      for (int k = 0; k <= ell; ++k) {
        if (u[k] == 0) continue;
        for (int kp = 0; kp <= ell; ++kp) {
          if (u[kp] == 0) continue;
          const Rational uu = u[k] * u[kp];
          cn += tr_tab[k][kp][t] * uu;
          cd += n_tab[k][kp][t] * uu;
        }
      }
      enum_ += eq.exact[t] * cn;
      eden += eq.exact[t] * cd;
      if (t >= dperp) {
        res.correction_num[t] = (eq.exact[t] * cn).to_double();
        res.correction_den[t] = (eq.exact[t] * cd).to_double();
      }
    }
    res.exact = true;
    const QuadExtScalar q1e = enum_ / eden;
    res.direct_exact = num / den * Rational(1, m);
    res.expanded_exact = QuadExtScalar::rational(rho, rs) + srr * q1e * Rational(1, m);
    res.direct = res.direct_exact.to_real();
    res.expanded = res.expanded_exact.to_real();
    res.q1_direct = (q1num / den).to_real();
    res.q1_expanded = q1e.to_real();
    res.agree = res.direct_exact == res.expanded_exact && q1num / den == q1e;
  } else {
    std::vector<Real> u(static_cast<std::size_t>(ell) + 1);
    for (int k = 0; k <= ell; ++k) u[k] = spec.u(k);
    Real num = 0, q1num = 0, den = 0;
    for (int a = 0; a <= m; ++a) {
      const auto h = prof.histogram[static_cast<std::size_t>(a)];
      if (h == 0) continue;
      Real W = 0;
      for (int k = 0; k <= ell; ++k)
        if (u[k] != 0) W += Q[a][k].to_real() * u[k];
      const Real W2h = W * W * Real(h);
      den += W2h;
      num += W2h * a;
      q1num += W2h * Q[a][1].to_real();
    }
    if (den == 0) throw DomainError("expected_satisfaction_Pu: sampler weights vanish on every x");
    Real enum_ = 0, eden = 0;
    for (int t = 0; t <= m; ++t) {
      if (eq.exact[t].is_zero()) continue;
      Real cn = 0, cd = 0;
      for (int k = 0; k <= ell; ++k) {
        if (u[k] == 0) continue;
        for (int kp = 0; kp <= ell; ++kp) {
          if (u[kp] == 0) continue;
          const Real uu = u[k] * u[kp];
          if (!tr_tab[k][kp][t].is_zero()) cn += tr_tab[k][kp][t].to_real() * uu;
          if (!n_tab[k][kp][t].is_zero()) cd += n_tab[k][kp][t].to_real() * uu;
        }
      }
      const Real e = eq.exact[t].to_real();
      enum_ += e * cn;
      eden += e * cd;
      if (t >= dperp) {
        res.correction_num[t] = to_double(e * cn);
        res.correction_den[t] = to_double(e * cd);
      }
    }
    res.q1_direct = q1num / den;
    res.q1_expanded = enum_ / eden;
    res.direct = num / den / m;
    res.expanded = to_real(rho) + srr.to_real() * res.q1_expanded / m;
  }
  const Real diff = abs(res.direct - res.expanded);
  const Real scale = abs(res.direct) > 0 ? abs(res.direct) : Real(1);
  res.rel_residual = to_double(diff / scale);
  if (!res.exact) res.agree = res.rel_residual <= 1e-9;
  if (!res.agree) {
    std::ostringstream os;
    os << "expected_satisfaction_Pu: direct " << to_double(res.direct) << " vs expanded " << to_double(res.expanded);
    throw IdentityViolation(os.str());
  }
  return res;
}

Real quadratic_form_value(int m, const std::vector<Real>& w, const Real& beta) {
  Real num = 0, den = 0;
  const int ell = static_cast<int>(w.size()) - 1;
  for (int k = 0; k <= ell; ++k) {
    den += w[k] * w[k];
    num += beta * k * w[k] * w[k];
    if (k < ell) num += 2 * w[k] * w[k + 1] * sqrt(Real((k + 1) * static_cast<long>(m - k)));
  }
  if (den == 0) throw DomainError("quadratic_form_value: zero vector");
  return num / den;
}

Real quadratic_form_satisfaction(int m, const Rational& rho, const std::vector<Real>& w) {
  return to_real(rho) + sqrt_rho_one_minus_rho(rho).to_real() * quadratic_form_value(m, w, beta_value(rho).to_real()) / m;
}

Step0Sums step0_sums(int m, int ell, int sigma, const Rational& rho) {
  if (ell > m || sigma < 0 || sigma > ell) throw DomainError("step0_sums: need 0 <= sigma <= ell <= m");
  Step0Sums out;
  std::vector<Real> inv_root(static_cast<std::size_t>(ell) + 1);
  for (int k = ell - sigma; k <= ell; ++k) inv_root[k] = 1 / sqrt(to_real(Rational(binomial(m, k))));
  for (int k = ell - sigma; k <= ell; ++k) {
    for (int kp = ell - sigma; kp <= ell; ++kp) {
      const QuadExtScalar n = count_N_rho(k, kp, 0, m, rho);
      if (k == kp) {
        out.denominator += n.a() / Rational(binomial(m, k));
      } else if (!n.is_zero()) {
        throw IdentityViolation("step0_sums: off-diagonal N_rho(k, k'; 0) nonzero");
      }
      const QuadExtScalar tr = triple_count(k, kp, 0, m, rho);
      if (!tr.is_zero()) out.numerator += tr.to_real() * inv_root[k] * inv_root[kp];
    }
  }
  const Real beta = beta_value(rho).to_real();
  Real direct = beta * (2 * ell - sigma) * (sigma + 1) / 2;
  for (int k = ell - sigma; k <= ell - 1; ++k) direct += sqrt(Real((k + 1) * static_cast<long>(m - k)));
  for (int k = ell - sigma + 1; k <= ell; ++k) direct += sqrt(Real(k * static_cast<long>(m - k + 1)));
  out.numerator_direct = direct;
  const double a = static_cast<double>(ell) / m;
  out.asymptotic = to_double(beta) * a + 2 * std::sqrt(a * (1 - a));
  if (sigma > 0) {
    const double v = to_double(out.numerator) / (static_cast<double>(sigma) * m);
    out.rel_gap = std::abs(v - out.asymptotic) / std::abs(out.asymptotic);
  }
  return out;
}

Step1Report step1_inequality_check(int m, int ell, int sigma, int t, const Rational& rho) {
  if (ell > m || sigma < 0 || sigma > ell || t < 0 || t > 2 * ell) throw DomainError("step1_inequality_check: bad arguments");
  Step1Report rep;
  rep.m = m;
  rep.ell = ell;
  rep.sigma = sigma;
  rep.t = t;
  rep.rho = rho;
  const Real ref = count_N_tilde(ell, ell - (t % 2), t, m, rho).to_real() / to_real(Rational(binomial(m, ell)));
  rep.reference = to_double(ref);
  if (!(ref > 0)) {
    rep.bounded = false;
    return rep;
  }
  Real best = -1;
  for (int k = ell - sigma; k <= ell; ++k) {
    for (int kp = ell - sigma; kp <= ell; ++kp) {
      const Real v = count_N_rho(k, kp, t, m, rho).to_real() /
                     sqrt(to_real(Rational(binomial(m, k) * binomial(m, kp)))) / ref;
      if (k == ell && kp == ell) rep.ratio_at_ell = to_double(v);
      if (v > best) best = v;
    }
  }
  rep.max_ratio = to_double(best);
  if (sigma == 0) {
    rep.c_min = rep.max_ratio <= 1 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    rep.c_min = rep.max_ratio > 0 ? std::pow(rep.max_ratio, 1.0 / sigma) : 0.0;
  }
  rep.bounded = std::isfinite(rep.max_ratio) && std::isfinite(rep.c_min);
  return rep;
}

double finite_rate(int m, int ell, int t) {
  const BigInt n = count_N({ell, ell - (t % 2)}, t, m);
  if (n == 0) return -std::numeric_limits<double>::infinity();
  return to_double(log(to_real(Rational(n, binomial(m, ell))))) / m;
}

Step2Report step2_rate_check(int m, double mu, double delta, double slack) {
  if (m <= 1 || mu <= 0 || delta < 0 || mu + delta >= 0.5 + 1e-12) throw DomainError("step2_rate_check: bad arguments");
  Step2Report rep;
  rep.m = m;
  rep.mu = mu;
  rep.delta = delta;
  rep.ell = static_cast<int>(std::floor((mu + delta) * m + 1e-9));
  rep.t_lo = static_cast<int>(std::ceil(2 * mu * m - 1e-9));
  rep.t_hi = std::min(2 * rep.ell, static_cast<int>(std::floor(2 * (mu + delta) * m + 1e-9)));
  rep.slack = slack >= 0 ? slack : 5.0 * std::log(m) / m;
  rep.exponent_E = exponent_E(mu, delta);
  rep.max_rate = -std::numeric_limits<double>::infinity();
  rep.identity_holds = true;
  for (int t = rep.t_lo; t <= rep.t_hi; ++t) {
    const double r = finite_rate(m, rep.ell, t);
    if (r > rep.max_rate) {
      rep.max_rate = r;
      rep.argmax_t = t;
    }
    if (t % 2 == 0) {
      const Rational lhs(count_N({rep.ell, rep.ell}, t, m), binomial(m, rep.ell));
      const Rational rhs(binomial(rep.ell, t / 2) * binomial(m - rep.ell, t / 2), binomial(m, t));
      if (lhs != rhs) rep.identity_holds = false;
    }
  }
  rep.within_slack = rep.max_rate <= rep.exponent_E + rep.slack;
  rep.argmax_at_start = rep.argmax_t == rep.t_lo;
  return rep;
}

nlohmann::json to_json(const IdentityReport& r) {
  return {{"identity", r.identity},
          {"instance", r.instance},
          {"mode", r.mode},
          {"max_abs_residual", r.max_abs_residual},
          {"status", r.pass ? "pass" : "fail"}};
}

}  // namespace opilab
