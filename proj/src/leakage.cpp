#include "opilab/leakage.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "opilab/config.hpp"
#include "opilab/errors.hpp"
#include "opilab/rates.hpp"

namespace opilab {

namespace {

constexpr double kPi = std::numbers::pi;

// Unit roots e_p(k) for k = 0..p-1.
std::vector<std::complex<long double>> unit_roots(std::uint32_t p) {
  std::vector<std::complex<long double>> w(p);
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  for (std::uint32_t k = 0; k < p; ++k) {
    const long double a = two_pi * k / p;
    w[k] = {std::cos(a), std::sin(a)};
  }
  return w;
}

std::vector<Complex> spectrum_with(const std::vector<Elem>& set, std::uint32_t p,
                                   const std::vector<std::complex<long double>>& w) {
  std::vector<Complex> out(p);
  for (std::uint32_t z = 0; z < p; ++z) {
    std::complex<long double> acc = 0.0L;
    for (Elem x : set) acc += w[(std::uint64_t{x} * z) % p];
    acc /= static_cast<long double>(p);
    out[z] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
  }
  return out;
}

std::uint64_t mask_of(const std::vector<int>& b) {
  std::uint64_t v = 0;
  for (int i : b) v |= std::uint64_t{1} << i;
  return v;
}

std::uint64_t saturate(const BigInt& v) { return v > BigInt(UINT64_MAX) ? UINT64_MAX : static_cast<std::uint64_t>(v); }

template <class F>
void for_each_subset(int m, int k, F&& f) {
  if (k == 0) {
    f(std::uint64_t{0});
    return;
  }
  const std::uint64_t end = std::uint64_t{1} << m;
  for (std::uint64_t v = (std::uint64_t{1} << k) - 1; v < end; v = next_combination(v)) {
    f(v);
    if (k == m) break;
  }
}

int max_intersection(std::uint64_t d, const std::vector<std::uint64_t>& masks) {
  int best = 0;
  for (std::uint64_t b : masks) best = std::max(best, std::popcount(d & b));
  return best;
}

std::vector<std::uint64_t> masks_of(const BucketFamily& f) {
  std::vector<std::uint64_t> out;
  out.reserve(f.buckets.size());
  for (const auto& b : f.buckets) out.push_back(mask_of(b));
  return out;
}

std::vector<int> draw_bucket(std::uint64_t seed, std::uint64_t index, int m, int size) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  const auto pick = random_subset(rng, static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(size));
  return {pick.begin(), pick.end()};
}

double uniform_rho(const InputLists& lists) {
  const auto s = lists.set_size();
  for (const auto& set : lists.sets)
    if (set.size() != s) throw DomainError("leakage bounds need equal list sizes");
  return to_double(lists.rho);
}

}  // namespace

double IndicatorSpectrum::max_nonzero_abs() const {
  double best = 0;
  for (std::size_t z = 1; z < coeffs.size(); ++z) best = std::max(best, std::abs(coeffs[z]));
  return best;
}

double IndicatorSpectrum::parseval() const {
  double s = 0;
  for (const auto& c : coeffs) s += std::norm(c);
  return s;
}

IndicatorSpectrum dft_indicator(const std::vector<Elem>& set, std::uint32_t p) {
  if (!FieldCtx::is_prime(p)) throw DomainError("dft_indicator: p must be prime");
  for (Elem x : set)
    if (x >= p) throw DomainError("dft_indicator: element out of range");
  IndicatorSpectrum s;
  s.set = set;
  s.p = p;
  s.rho = static_cast<double>(set.size()) / p;
  s.coeffs = spectrum_with(set, p, unit_roots(p));
  return s;
}

double arc_bound(const Rational& rho, std::uint32_t p) {
  const Rational s = rho * p;
  if (denominator(s) != 1 || rho < 0 || rho > 1) throw DomainError("arc_bound: rho p must be an integer in [0, p]");
  const double r = to_double(rho);
  return std::abs(std::sin(r * kPi)) / (p * std::sin(kPi / p));
}

ArcReport arc_extremal_check(std::uint32_t p, const Rational& rho, int random_sets, std::uint64_t seed) {
  if (!FieldCtx::is_prime(p)) throw DomainError("arc_extremal_check: p must be prime");
  const double arc = arc_bound(rho, p);
  const auto s = static_cast<std::uint32_t>(numerator(Rational(rho * p)));
  const auto w = unit_roots(p);
  ArcReport rep;
  rep.p = p;
  rep.rho = rho;
  rep.random_sets = random_sets;
  rep.asymptotic = std::abs(std::sin(to_double(rho) * kPi)) / kPi;
  auto max_abs = [&](const std::vector<Elem>& set) {
    const auto c = spectrum_with(set, p, w);
    double best = 0;
    for (std::uint32_t z = 1; z < p; ++z) best = std::max(best, std::abs(c[z]));
    return best;
  };
  for (std::uint32_t a = 0; a < p; ++a) {
    std::vector<Elem> iv;
    for (std::uint32_t j = 0; j < s; ++j) iv.push_back((a + j) % p);
    std::sort(iv.begin(), iv.end());
    rep.interval_max = std::max(rep.interval_max, max_abs(iv));
  }
  std::vector<Elem> base(s);
  for (std::uint32_t j = 0; j < s; ++j) base[j] = j;
  const auto c0 = spectrum_with(base, p, w);
  rep.attained_by_interval = p > 1 && std::abs(std::abs(c0[1]) - arc) <= 1e-12 && std::abs(rep.interval_max - arc) <= 1e-12;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < random_sets; ++i) rep.random_max = std::max(rep.random_max, max_abs(random_subset(rng, p, s)));
  rep.c = static_cast<double>(p) * p * (rep.interval_max - rep.asymptotic);
  rep.holds = rep.attained_by_interval && rep.random_max <= rep.interval_max + 1e-12;
  return rep;
}

BucketKind parse_bucket_kind(const std::string& name) {
  if (name == "single") return BucketKind::single;
  if (name == "cyclic") return BucketKind::cyclic;
  if (name == "random") return BucketKind::random;
  throw DomainError("unknown bucket kind: " + name);
}

std::string to_string(BucketKind kind) {
  switch (kind) {
    case BucketKind::single: return "single";
    case BucketKind::cyclic: return "cyclic";
    case BucketKind::random: return "random";
  }
  return "";
}

std::string to_string(CoverageMode mode) {
  switch (mode) {
    case CoverageMode::exhaustive: return "exhaustive";
    case CoverageMode::formula: return "formula";
    case CoverageMode::audited: return "audited";
  }
  return "";
}

BigInt n_lambda(int m, int n, int min_intersection) {
  const int b = 2 * n - m;
  BigInt sum = 0;
  for (int k = std::max(0, min_intersection); k <= b; ++k) sum += binomial(b, k) * binomial(2L * (m - n), n + 1 - k);
  return sum;
}

BigInt n_lambda_exhaustive(int m, int n, int min_intersection) {
  if (m > 63 || 2 * n <= m || n >= m) throw DomainError("n_lambda_exhaustive: need m <= 63 and m < 2n < 2m");
  require_budget(saturate(binomial(m, n + 1)), "n_lambda_exhaustive");
  const std::uint64_t B = (std::uint64_t{1} << (2 * n - m)) - 1;
  std::uint64_t count = 0;
  for_each_subset(m, n + 1, [&](std::uint64_t d) { count += std::popcount(d & B) >= min_intersection; });
  return BigInt(count);
}

double bucket_hit_prob(int m, int n, int min_intersection) {
  return to_double(Rational(n_lambda(m, n, min_intersection), binomial(m, n + 1)));
}

BucketFamily make_buckets(BucketKind kind, int m, int n, const BucketParams& params) {
  if (n >= m || 2 * n <= m) throw DomainError("make_buckets: need m < 2n < 2m");
  if (m > 63) throw DomainError("make_buckets: m must be at most 63");
  BucketFamily f;
  f.kind = kind;
  f.m = m;
  f.n = n;
  const int b = 2 * n - m;
  const int dperp = n + 1;
  switch (kind) {
    case BucketKind::single: {
      std::vector<int> one(static_cast<std::size_t>(b));
      for (int i = 0; i < b; ++i) one[i] = i;
      f.buckets.push_back(one);
      f.lambda_target = std::max(0, dperp + b - m) / static_cast<double>(m);
      break;
    }
    case BucketKind::cyclic: {
      for (int j = 0; j < m; ++j) {
        std::vector<int> bj;
        for (int i = 0; i < b; ++i) bj.push_back((j + i) % m);
        std::sort(bj.begin(), bj.end());
        f.buckets.push_back(bj);
      }
      f.lambda_target = static_cast<double>(dperp) * b / (static_cast<double>(m) * m);
      break;
    }
    case BucketKind::random: {
      const double mu = n / (2.0 * m);
      const auto [lo, hi] = lambda_range(mu);
      const double lam = params.lambda;
      if (lam < lo - 1e-12 || lam > hi + 1e-12) throw DomainError("make_buckets: lambda outside the feasible range");
      const int L = static_cast<int>(std::ceil(lam * m - 1e-9));
      if (L > std::min(b, dperp)) throw DomainError("make_buckets: lambda m exceeds the bucket size");
      f.lambda_target = lam;
      f.seed = params.seed;
      f.eps = params.eps;
      const double a = 4 * mu - 1;
      const double expo = -a * entropy(std::clamp(lam / a, 0.0, 1.0)) -
                          (2 - 4 * mu) * entropy(std::clamp((2 * mu - lam) / (2 - 4 * mu), 0.0, 1.0)) +
                          entropy(2 * mu) + params.eps;
      const double jf = std::ceil(std::exp(m * expo));
      f.J_formula = jf >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(std::max(1.0, jf));
      const double gamma = bucket_hit_prob(m, n, L);
      if (gamma <= 0) throw DomainError("make_buckets: no bucket can reach the target intersection");
      if (gamma >= 1) {
        f.J_union = 1;
      } else {
        const double ju = std::ceil(to_double(log(to_real(Rational(binomial(m, dperp))))) / -std::log1p(-gamma));
        f.J_union = ju >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(std::max(1.0, ju));
      }
      const std::uint64_t J = std::min(std::max(f.J_formula, f.J_union), params.max_buckets);
      for (std::uint64_t j = 0; j < J; ++j) f.buckets.push_back(draw_bucket(params.seed, j, m, b));
      // Exhaustive repair: keep drawing from the same stream until every d_perp-set is covered.
      if (binomial(m, dperp) <= BigInt(1'000'000)) {
        const auto masks = masks_of(f);
        std::vector<std::uint64_t> uncovered;
        for_each_subset(m, dperp, [&](std::uint64_t d) {
          if (max_intersection(d, masks) < L) uncovered.push_back(d);
        });
        std::uint64_t j = J;
        while (!uncovered.empty() && f.buckets.size() < params.max_buckets) {
          auto bj = draw_bucket(params.seed, j++, m, b);
          const std::uint64_t bm = mask_of(bj);
          f.buckets.push_back(std::move(bj));
          ++f.augmented;
          std::erase_if(uncovered, [&](std::uint64_t d) { return std::popcount(d & bm) >= L; });
        }
      }
      break;
    }
  }
  return f;
}

CoverageReport certify_coverage(const BucketFamily& family, int t, std::uint64_t exhaustive_limit,
                                std::uint64_t audit_draws, std::uint64_t seed) {
  const int m = family.m;
  if (t < 0 || t > m) throw DomainError("certify_coverage: t out of range");
  CoverageReport rep;
  rep.t = t;
  const auto masks = masks_of(family);
  const int b = family.bucket_size();
  if (binomial(m, t) <= BigInt(exhaustive_limit)) {
    int worst = std::numeric_limits<int>::max();
    for_each_subset(m, t, [&](std::uint64_t d) {
      worst = std::min(worst, max_intersection(d, masks));
      ++rep.sets_checked;
    });
    rep.min_intersection = worst;
    rep.mode = CoverageMode::exhaustive;
    rep.certified = true;
  } else if (family.kind == BucketKind::single) {
    rep.min_intersection = std::max(0, t + b - m);
    rep.mode = CoverageMode::formula;
    rep.certified = true;
  } else if (family.kind == BucketKind::cyclic) {
    rep.min_intersection = (t * b + m - 1) / m;
    rep.mode = CoverageMode::formula;
    rep.certified = true;
  } else {
    std::mt19937_64 rng(seed);
    int worst = std::numeric_limits<int>::max();
    for (std::uint64_t i = 0; i < audit_draws; ++i) {
      std::uint64_t d = 0;
      for (auto v : random_subset(rng, static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(t))) d |= std::uint64_t{1} << v;
      worst = std::min(worst, max_intersection(d, masks));
    }
    rep.sets_checked = audit_draws;
    rep.min_intersection = worst;
    rep.mode = CoverageMode::audited;
    rep.certified = false;
  }
  rep.lambda = static_cast<double>(rep.min_intersection) / m;
  return rep;
}

double step3_bound_value(double rho, double arc, int m, int n, int t, double J, int L) {
  if (rho <= 0 || rho >= 1) throw DomainError("step3_bound_value: rho must lie in (0, 1)");
  const double log_b = std::log(J) + (n - m) * std::log(rho) + 0.5 * t * std::log(rho / (1 - rho)) +
                       L * std::log(arc / rho);
  return std::exp(log_b);
}

std::vector<Complex> per_transcript_sums(const MdsCode& code, const InputLists& lists) {
  const int m = code.m;
  require_budget(saturating_pow(code.ctx.p(), static_cast<unsigned>(m - code.n)), "dual-code enumeration");
  const auto w = unit_roots(code.ctx.p());
  std::vector<std::vector<Complex>> spec;
  for (int i = 0; i < m; ++i) spec.push_back(spectrum_with(lists.sets[i], lists.p, w));
  std::vector<std::complex<long double>> acc(static_cast<std::size_t>(m) + 1, 0.0L);
  for (const Word& y : enumerate_dual(code)) {
    std::complex<long double> prod = 1.0L;
    int wt = 0;
    for (int i = 0; i < m; ++i) {
      wt += y[i] != 0;
      const Complex c = spec[i][y[i]];
      prod *= std::complex<long double>(c.real(), c.imag());
    }
    acc[wt] += prod;
  }
  std::vector<Complex> out(acc.size());
  for (std::size_t t = 0; t < acc.size(); ++t) out[t] = {static_cast<double>(acc[t].real()), static_cast<double>(acc[t].imag())};
  return out;
}

Complex per_transcript_sum(const MdsCode& code, const InputLists& lists, int t) {
  if (t < 0 || t > code.m) throw DomainError("per_transcript_sum: t out of range");
  return per_transcript_sums(code, lists)[t];
}

Step3Result step3_evaluate(const MdsCode& code, const InputLists& lists, const BucketFamily& buckets, int t) {
  if (buckets.m != code.m || buckets.n != code.n) throw DomainError("step3: bucket family built for another code");
  const double rho = uniform_rho(lists);
  const auto cov = certify_coverage(buckets, t);
  if (!cov.certified) throw DomainError("step3: buckets could not be certified at t = " + std::to_string(t));
  Step3Result r;
  r.p = code.ctx.p();
  r.m = code.m;
  r.n = code.n;
  r.t = t;
  r.kind = buckets.kind;
  r.J = buckets.J();
  r.lambda = cov.lambda;
  r.certified = cov.certified;
  r.mode = cov.mode;
  const Complex sum = per_transcript_sum(code, lists, t);
  r.lhs_abs = std::pow(rho, 0.5 * t - code.m) * std::pow(1 - rho, -0.5 * t) * std::abs(sum);
  r.bound = step3_bound_value(rho, arc_bound(lists.rho, lists.p), code.m, code.n, t, static_cast<double>(r.J),
                              cov.min_intersection);
  r.ratio = r.bound > 0 ? r.lhs_abs / r.bound : std::numeric_limits<double>::infinity();
  return r;
}

double step3_bound(const MdsCode& code, const InputLists& lists, const BucketFamily& buckets, int t) {
  return step3_evaluate(code, lists, buckets, t).bound;
}

nlohmann::json to_json(const Step3Result& r) {
  return {{"p", r.p},         {"m", r.m},         {"n", r.n},
          {"t", r.t},         {"lhs_abs", r.lhs_abs}, {"bound", r.bound},
          {"ratio", r.ratio}, {"bucket_kind", to_string(r.kind)}, {"lambda", r.lambda},
          {"J", r.J},         {"certified", r.certified}, {"coverage_mode", to_string(r.mode)}};
}

double tv_proxy(const MdsCode& code, const std::vector<std::vector<Elem>>& leakage_sets) {
  const int m = code.m;
  const std::uint32_t p = code.ctx.p();
  if (static_cast<int>(leakage_sets.size()) != m) throw DomainError("tv_proxy: one leakage set per party");
  if (m > 16) throw DomainError("tv_proxy: m must be at most 16");
  const std::uint64_t duals = saturating_pow(p, static_cast<unsigned>(m - code.n));
  require_budget(duals > (UINT64_MAX >> m) ? UINT64_MAX : duals << m, "tv_proxy transcripts");
  const auto w = unit_roots(p);
  std::vector<std::array<std::vector<Complex>, 2>> spec(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::vector<std::uint8_t> in(p, 0);
    for (Elem v : leakage_sets[i]) {
      if (v >= p) throw DomainError("tv_proxy: element out of range");
      in[v] = 1;
    }
    std::vector<Elem> comp;
    for (Elem v = 0; v < p; ++v)
      if (!in[v]) comp.push_back(v);
    spec[i][0] = spectrum_with(leakage_sets[i], p, w);
    spec[i][1] = spectrum_with(comp, p, w);
  }
  auto dual = enumerate_dual(code);
  std::erase_if(dual, [](const Word& y) { return hamming_weight(y) == 0; });
  long double total = 0;
  for (std::uint64_t leak = 0; leak < (std::uint64_t{1} << m); ++leak) {
    std::complex<long double> acc = 0.0L;
    for (const Word& y : dual) {
      std::complex<long double> prod = 1.0L;
      for (int i = 0; i < m; ++i) {
        const Complex c = spec[i][(leak >> i) & 1][y[i]];
        prod *= std::complex<long double>(c.real(), c.imag());
      }
      acc += prod;
    }
    total += std::abs(acc);
  }
  return static_cast<double>(total / 2);
}

ChainCheck cauchy_schwarz_chain(const MdsCode& code, const InputLists& lists, const BucketFamily& buckets, int t) {
  const int m = code.m;
  const int k = m - code.n;
  const double rho = uniform_rho(lists);
  const auto cov = certify_coverage(buckets, t);
  if (!cov.certified) throw DomainError("cauchy_schwarz_chain: uncertified buckets");
  const int L = cov.min_intersection;
  const auto w = unit_roots(code.ctx.p());
  std::vector<std::vector<Complex>> spec;
  std::vector<double> norm2;
  for (int i = 0; i < m; ++i) {
    spec.push_back(spectrum_with(lists.sets[i], lists.p, w));
    double s = 0;
    for (const auto& c : spec.back()) s += std::norm(c);
    norm2.push_back(s);
  }
  const auto dual = enumerate_dual(code);
  const auto masks = masks_of(buckets);
  const std::size_t J = buckets.J();
  std::vector<Complex> part(J, 0.0);
  std::vector<double> sumL(J, 0), sumR(J, 0), fullL(J, 0), fullR(J, 0), maxB(J, 0);
  std::vector<std::uint64_t> Lmask(J), Rmask(J);
  for (std::size_t j = 0; j < J; ++j) {
    int taken = 0;
    for (int i = 0; i < m; ++i) {
      if ((masks[j] >> i) & 1) continue;
      (taken++ < k ? Lmask[j] : Rmask[j]) |= std::uint64_t{1} << i;
    }
  }
  Complex total = 0.0;
  for (const Word& y : dual) {
    std::uint64_t supp = 0;
    for (int i = 0; i < m; ++i)
      if (y[i] != 0) supp |= std::uint64_t{1} << i;
    auto prod_sq = [&](std::uint64_t set) {
      double v = 1;
      for (int i = 0; i < m; ++i)
        if ((set >> i) & 1) v *= std::norm(spec[i][y[i]]);
      return v;
    };
    for (std::size_t j = 0; j < J; ++j) {
      fullL[j] += prod_sq(Lmask[j]);
      fullR[j] += prod_sq(Rmask[j]);
    }
    if (std::popcount(supp) != t) continue;
    std::size_t owner = J;
    for (std::size_t j = 0; j < J; ++j) {
      if (std::popcount(supp & masks[j]) >= L) {
        owner = j;
        break;
      }
    }
    if (owner == J) throw IdentityViolation("cauchy_schwarz_chain: dual word outside every bucket");
    Complex prod = 1.0;
    for (int i = 0; i < m; ++i) prod *= spec[i][y[i]];
    total += prod;
    part[owner] += prod;
    sumL[owner] += prod_sq(Lmask[owner]);
    sumR[owner] += prod_sq(Rmask[owner]);
    maxB[owner] = std::max(maxB[owner], std::sqrt(prod_sq(masks[owner])));
  }
  ChainCheck out;
  out.min_intersection = L;
  double l1 = 0, l2 = 0, l3 = 0;
  for (std::size_t j = 0; j < J; ++j) {
    l1 += std::abs(part[j]);
    l2 += std::sqrt(sumL[j]) * std::sqrt(sumR[j]) * maxB[j];
    l3 += std::sqrt(fullL[j]) * std::sqrt(fullR[j]) * maxB[j];
    double pl = 1, pr = 1;
    for (int i = 0; i < m; ++i) {
      if ((Lmask[j] >> i) & 1) pl *= norm2[i];
      if ((Rmask[j] >> i) & 1) pr *= norm2[i];
    }
    out.max_projection_residual = std::max({out.max_projection_residual, std::abs(fullL[j] - pl), std::abs(fullR[j] - pr)});
  }
  const double arc = arc_bound(lists.rho, lists.p);
  const double final_bound = static_cast<double>(J) * std::pow(rho, code.n) * std::pow(arc / rho, L);
  out.levels = {std::abs(total), l1, l2, l3, final_bound};
  const double tol = 1e-12;
  out.holds = out.max_projection_residual <= 1e-10;
  for (std::size_t i = 1; i < out.levels.size(); ++i)
    out.holds = out.holds && out.levels[i - 1] <= out.levels[i] * (1 + 1e-9) + tol;
  return out;
}

double balanced_llr_rate(double tol) {
  auto min_g = [](double mu) {
    auto [lo, hi] = lambda_range(mu);
    auto g = [mu](double l) { return exponent_G(mu, l); };
    // G is convex in lambda: golden section.
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double a = lo, b = hi, c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = g(c), fd = g(d);
    while (b - a > 1e-13) {
      if (fc < fd) {
        b = d; d = c; fd = fc; c = b - phi * (b - a); fc = g(c);
      } else {
        a = c; c = d; fc = fd; d = a + phi * (b - a); fd = g(d);
      }
    }
    return std::min({g(lo), g(hi), g((a + b) / 2)});
  };
  double lo = 0.26, hi = 0.49;
  if (!(min_g(lo) >= 0 && min_g(hi) < 0)) throw BracketingFailure("balanced_llr_rate: no sign change");
  while (hi - lo > tol) {
    const double mid = (lo + hi) / 2;
    (min_g(mid) >= 0 ? lo : hi) = mid;
  }
  return lo + hi;
}

}  // namespace opilab
