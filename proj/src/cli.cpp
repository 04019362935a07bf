#include "opilab/cli.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "opilab/codes.hpp"
#include "opilab/config.hpp"
#include "opilab/discrepancy.hpp"
#include "opilab/errors.hpp"
#include "opilab/kravchuk.hpp"
#include "opilab/leakage.hpp"
#include "opilab/numeric.hpp"
#include "opilab/rates.hpp"

namespace opilab {
namespace {

using nlohmann::json;

// Step-3 inequality is asserted as lhs <= kSlackFactor * bound.
constexpr double kSlackFactor = 4.0;
constexpr double kFloatTol = 1e-9;
// Stream index offset for the per-family draws inside the checks.
constexpr std::uint64_t kCheckStream = 1u << 20;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Collects identity reports; remembers the context of the first failure.
class Checks {
 public:
  Checks(std::string suite, bool inject) : suite_(std::move(suite)), inject_(inject) {}

  void set_context(json ctx) { context_ = std::move(ctx); }

  void add(const std::string& identity, json instance, const std::string& mode, double residual, bool pass,
           const std::string& error = {}) {
    if (inject_ && !injected_) {
      pass = false;
      injected_ = true;
    }
    IdentityReport r{identity, std::move(instance), mode, residual, pass};
    json j = to_json(r);
    j["max_abs_residual"] = finite_or_null(residual);
    if (!error.empty()) j["error"] = error;
    if (!pass && replay_.is_null()) {
      replay_ = context_;
      replay_["suite"] = suite_;
      replay_["identity"] = identity;
      replay_["inject_fault"] = inject_;
    }
    (pass ? passed_ : failed_) += 1;
    reports_.push_back(std::move(j));
  }

  // Runs f, turning an IdentityViolation into a failed report.
  template <class F>
  void guard(const std::string& identity, const json& instance, F&& f) {
    try {
      f();
    } catch (const IdentityViolation& e) {
      add(identity, instance, "exception", std::numeric_limits<double>::infinity(), false, e.what());
    }
  }

  json report() const {
    return {{"checks", reports_}, {"passed", passed_}, {"failed", failed_}, {"pass", failed_ == 0},
            {"replay", replay_}};
  }
  bool ok() const { return failed_ == 0; }

 private:
  std::string suite_;
  bool inject_;
  bool injected_ = false;
  json context_ = json::object();
  json replay_ = nullptr;
  json reports_ = json::array();
  int passed_ = 0;
  int failed_ = 0;
};

MdsCode code_from_config(const RunConfig& cfg) {
  if (cfg.m < 1 || cfg.n < 1 || cfg.n > cfg.m) throw DomainError("need 1 <= n <= m");
  FieldCtx ctx(cfg.p);
  if (cfg.points.empty()) return make_rs_code(ctx, cfg.m, cfg.n);
  if (static_cast<int>(cfg.points.size()) != cfg.m) throw DomainError("--points must list exactly m values");
  return make_rs_code(ctx, cfg.m, cfg.n, std::vector<Elem>(cfg.points.begin(), cfg.points.end()));
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DomainError("malformed JSON in " + path + ": " + e.what());
  }
}

std::uint32_t default_size(const RunConfig& cfg) {
  if (!(cfg.rho > 0 && cfg.rho < 1)) throw DomainError("--rho must lie in (0, 1)");
  const auto s = static_cast<long>(std::floor(cfg.rho * cfg.p + 1e-9));
  return static_cast<std::uint32_t>(std::clamp<long>(s, 1, static_cast<long>(cfg.p) - 1));
}

InputLists seeded_lists(std::uint32_t p, int m, std::uint32_t size, std::uint64_t seed, std::uint64_t index) {
  auto rng = stream(seed, index);
  std::vector<std::vector<Elem>> sets;
  for (int i = 0; i < m; ++i) sets.push_back(random_subset(rng, p, size));
  return make_lists(p, std::move(sets));
}

InputLists interval_lists(std::uint32_t p, int m, std::uint32_t size) {
  std::vector<Elem> iv;
  for (Elem v = 0; v < size; ++v) iv.push_back(v);
  return make_lists(p, std::vector<std::vector<Elem>>(static_cast<std::size_t>(m), iv));
}

void check_compatible(const MdsCode& code, const InputLists& lists) {
  if (lists.p != code.ctx.p()) throw DomainError("lists are over a different field");
  if (lists.m() != code.m) throw DomainError("lists must have one set per evaluation point");
  for (const auto& s : lists.sets)
    if (s.size() != lists.set_size()) throw DomainError("all lists must have the same size");
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// ---- suites -------------------------------------------------------------

void kravchuk_checks(Checks& c, int m_max) {
  for (int m = 1; m <= m_max; ++m) {
    for (const Rational& rho : {Rational(1, 2), Rational(1, 3)}) {
      const json inst = {{"m", m}, {"rho", to_string(rho)}};
      c.set_context({{"kind", "kravchuk"}, {"m", m}, {"rho", to_string(rho)}});
      const auto fam = build_family(m, rho, m);
      const auto w = binomial_weights(m, rho);
      double off = 0;
      bool ok = true;
      for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= i; ++j) {
          const Rational ip = inner_product(fam[i], fam[j], w);
          if (i == j) {
            ok = ok && ip == fam.norms[i];
          } else {
            ok = ok && ip == 0;
            off = std::max(off, std::abs(to_double(ip)));
          }
        }
      c.add("kravchuk_orthogonality", inst, "exact", off, ok);
      const auto gs = build_family_gram_schmidt(m, rho, m);
      bool same = true;
      for (int l = 0; l <= m; ++l) same = same && gs[l] == fam[l];
      c.add("gram_schmidt_agreement", inst, "exact", same ? 0 : 1, same);
      if (rho == Rational(1, 2)) {
        bool closed = true;
        for (int l = 0; l <= m; ++l) closed = closed && kravchuk_closed_form(m, l) == fam[l];
        c.add("closed_form_agreement", inst, "exact", closed ? 0 : 1, closed);
        bool chars = true;
        for (int l = 0; l < m; ++l) chars = chars && char_poly_identity_check(m, l);
        c.add("char_poly_identity", inst, "exact", chars ? 0 : 1, chars);
      }
      for (int l = 1; 2 * l <= m; ++l) {
        const auto rep = principal_representation(m, rho, l);
        const auto got = representation_moments(rep, 2 * l - 1);
        const auto want = binomial_moments(m, rho, 2 * l - 1);
        double res = 0;
        for (int j = 0; j <= 2 * l - 1; ++j)
          res = std::max(res, to_double(Real(abs(got[j] - to_real(want[j])))) / std::max(1.0, to_double(want[j])));
        c.add("principal_representation_moments", {{"m", m}, {"rho", to_string(rho)}, {"ell", l}}, "real", res,
              res <= 1e-20);
      }
    }
  }
}

void moments_checks(Checks& c, const MdsCode& code, const InputLists& lists, const json& inst) {
  const auto prof = brute_force_opi(code, lists);
  const auto got = profile_moments(prof, code.n);
  const auto want = binomial_moments(code.m, lists.rho, code.n);
  double res = 0;
  for (int j = 0; j <= code.n; ++j) res = std::max(res, std::abs(to_double(Rational(got[j] - want[j]))));
  c.add("moments_match_order_n", inst, "exact", res, profile_moments_match(prof, lists.rho, code.n));
  const int ell = (code.n + 1) / 2;
  if (ell >= 1 && ell <= code.m / 2) {
    const auto rep = principal_representation(code.m, lists.rho, ell);
    const auto il = interlacing_check(rep, prof);
    c.add("cms_interlacing", inst, "real", std::max(0.0, -il.min_slack), il.holds);
    c.add("s_max_above_top_root", inst, "real", std::max(0.0, il.top_root - prof.best_count),
          prof.best_count >= il.top_root - kFloatTol);
  }
}

void discrepancy_checks(Checks& c, const MdsCode& code, const InputLists& lists, const json& inst,
                        std::mt19937_64& rng) {
  const int m = code.m;
  const int dperp = code.dual_distance();
  c.guard("key_fourier_two_routes", inst, [&] {
    const auto eq = expected_q_uniform(code, lists);
    double below = 0;
    bool zero = true;
    for (int t = 1; t < dperp && t <= m; ++t) {
      zero = zero && eq.exact[t].is_zero();
      below = std::max(below, std::abs(eq.exact[t].to_double()));
    }
    c.add("expected_q_zero_below_dperp", inst, "exact", below, zero);
    if (eq.fourier_checked)
      c.add("key_fourier_two_routes", inst, "float", eq.max_rel_residual,
            eq.max_rel_residual <= kFloatTol && eq.max_imag <= kFloatTol);
  });

  const auto table = q_by_count(m, lists.rho);
  bool pointwise = true;
  for (int trial = 0; trial < 3; ++trial) {
    Word x(static_cast<std::size_t>(code.n));
    for (auto& v : x) v = static_cast<Elem>(uniform_below(rng, code.ctx.p()));
    const int a = satisfied_count(code, lists, x);
    for (int k = 0; k <= m; ++k) pointwise = pointwise && q_k_direct(code, lists, x, k) == table[a][k];
  }
  c.add("q_k_elementary_symmetric", inst, "exact", pointwise ? 0 : 1, pointwise);

  const int ell = std::max(1, std::min(m, (code.n + 1) / 2));
  const int sigma = default_sigma(ell);
  std::vector<Rational> u;
  for (int k = 0; k <= sigma; ++k) {
    const auto num = static_cast<long>(uniform_below(rng, 7)) - 3;
    const auto den = static_cast<long>(uniform_below(rng, 4)) + 1;
    u.emplace_back(num == 0 ? 1 : num, den);
  }
  const json pu_inst = {{"family", inst}, {"ell", ell}, {"sigma", sigma}};
  c.guard("master_expansion_rational", pu_inst, [&] {
    const auto r = expected_satisfaction_Pu(code, lists, SamplerSpec::rational_test(ell, sigma, u));
    c.add("master_expansion_rational", pu_inst, "exact", r.rel_residual,
          r.exact && r.agree && r.direct_exact == r.expanded_exact);
  });
  c.guard("master_expansion_binomial", pu_inst, [&] {
    const auto r = expected_satisfaction_Pu(code, lists, SamplerSpec::binomial_window(m, ell, sigma));
    c.add("master_expansion_binomial", pu_inst, "real", r.rel_residual, r.agree);
  });
}

void count_checks(Checks& c, int m_full, const Rational& rho) {
  const int m = std::min(m_full, 6);
  const json inst = {{"m", m}, {"rho", to_string(rho)}};
  c.set_context({{"kind", "counts"}, {"m", m_full}, {"rho", to_string(rho)}});
  bool n_ok = true, rho_ok = true;
  for (int k = 0; k <= m; ++k)
    for (int kp = 0; kp <= m; ++kp)
      for (int t = 0; t <= m; ++t) {
        n_ok = n_ok && count_N({k, kp}, t, m) == count_N_brute({k, kp}, t, m);
        rho_ok = rho_ok && count_N_rho(k, kp, t, m, rho) == count_N_rho_brute(k, kp, t, m, rho);
      }
  c.add("pair_count_recursion", inst, "exact", n_ok ? 0 : 1, n_ok);
  c.add("weighted_pair_count", inst, "exact", rho_ok ? 0 : 1, rho_ok);
}

void fourier_checks(Checks& c, const MdsCode& code, const InputLists& lists, const json& inst) {
  const std::uint32_t p = code.ctx.p();
  double dc = 0, parseval = 0, g_dc = 0, g_parseval = 0;
  for (const auto& set : lists.sets) {
    const auto spec = dft_indicator(set, p);
    dc = std::max(dc, std::abs(spec.coeffs[0] - Complex(spec.rho, 0)));
    parseval = std::max(parseval, std::abs(spec.parseval() - spec.rho));
    const auto g = g_spectrum(set, p, lists.rho);
    double norm = 0;
    for (const auto& v : g) norm += std::norm(v);
    g_dc = std::max(g_dc, std::abs(g[0]));
    g_parseval = std::max(g_parseval, std::abs(norm - 1));
  }
  c.add("indicator_dc", inst, "float", dc, dc <= 1e-12);
  c.add("indicator_parseval", inst, "float", parseval, parseval <= 1e-10);
  c.add("g_mean_zero_unit_norm", inst, "float", std::max(g_dc, g_parseval), std::max(g_dc, g_parseval) <= 1e-10);

  const auto eq = expected_q_uniform(code, lists, false);
  const auto sums = per_transcript_sums(code, lists);
  const double rho = to_double(lists.rho);
  double scale_res = 0, imag = 0;
  for (int t = 0; t <= code.m; ++t) {
    const double scaled = std::pow(rho, 0.5 * t - code.m) * std::pow(1 - rho, -0.5 * t) * sums[t].real();
    scale_res = std::max(scale_res, rel_diff(scaled, eq.exact[t].to_double()));
    imag = std::max(imag, std::abs(sums[t].imag()));
  }
  c.add("per_transcript_scaling", inst, "float", scale_res, scale_res <= kFloatTol);
  c.add("transcript_sums_real", inst, "float", imag, imag <= kFloatTol);
}

void leakage_checks(Checks& c, const MdsCode& code, const InputLists& lists, const json& inst, std::uint64_t seed) {
  const std::uint32_t p = code.ctx.p();
  const auto arc = arc_extremal_check(p, lists.rho, 200, seed);
  c.add("arc_extremal", inst, "float", std::max(0.0, arc.random_max - arc.interval_max), arc.holds);
  if (code.m <= 16) {
    std::vector<std::vector<Elem>> full(static_cast<std::size_t>(code.m));
    for (auto& s : full)
      for (Elem v = 0; v < p; ++v) s.push_back(v);
    const double tv = tv_proxy(code, full);
    c.add("tv_proxy_full_sets", inst, "float", tv, std::abs(tv) <= kFloatTol);
    const double tv_lists = tv_proxy(code, lists.sets);
    c.add("tv_proxy_nonnegative", inst, "float", std::max(0.0, -tv_lists), tv_lists >= 0);
  }
  if (!(code.m < 2 * code.n && code.n < code.m)) {
    c.add("bucket_inequalities", inst, "skipped", 0, true);
    return;
  }
  for (auto kind : {BucketKind::single, BucketKind::cyclic}) {
    const auto fam = make_buckets(kind, code.m, code.n);
    for (int t = code.dual_distance(); t <= code.m; ++t) {
      const json ti = {{"family", inst}, {"buckets", to_string(kind)}, {"t", t}};
      const auto r = step3_evaluate(code, lists, fam, t);
      c.add("step3_inequality", ti, "float", r.ratio, r.lhs_abs <= kSlackFactor * r.bound);
      c.guard("cauchy_schwarz_chain", ti, [&] {
        const auto chain = cauchy_schwarz_chain(code, lists, fam, t);
        c.add("cauchy_schwarz_chain", ti, "float", chain.max_projection_residual,
              chain.holds && chain.max_projection_residual <= 1e-10);
      });
    }
  }
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"kravchuk", "moments", "discrepancy", "fourier", "leakage", "all"};
  return names;
}

bool wants(const std::string& suite, const char* name) { return suite == "all" || suite == name; }

void instance_checks(Checks& c, const std::string& suite, const MdsCode& code, const InputLists& lists,
                     const json& inst, std::uint64_t seed, std::mt19937_64& rng) {
  c.set_context({{"code", code_to_json(code)}, {"lists", lists_to_json(lists)}, {"seed", seed}, {"family", inst["family"]}});
  if (wants(suite, "moments")) moments_checks(c, code, lists, inst);
  if (wants(suite, "discrepancy")) discrepancy_checks(c, code, lists, inst, rng);
  if (wants(suite, "fourier")) fourier_checks(c, code, lists, inst);
  if (wants(suite, "leakage")) leakage_checks(c, code, lists, inst, seed);
}

// ---- commands ------------------------------------------------------------

json cmd_thresholds(const RunConfig& cfg) {
  const auto kind = parse_bound_kind(cfg.bound);
  const auto r = thresholds(cfg.rho, kind);
  auto witness = [](const Witness& w) { return json{{"delta", w.delta}, {"lambda", w.lambda}, {"gamma", w.gamma}}; };
  json j = {{"rho", cfg.rho}, {"bound", to_string(kind)}};
  j["status"] = r.finite1 ? "finite" : "no finite threshold";
  j["two_mu0"] = r.finite0 ? json(r.two_mu0) : json(nullptr);
  j["two_mu1"] = r.finite1 ? json(r.two_mu1) : json(nullptr);
  j["witness"] = {{"two_mu0", r.finite0 ? witness(r.witness0) : json(nullptr)},
                  {"two_mu1", r.finite1 ? witness(r.witness1) : json(nullptr)}};
  return j;
}

std::string cmd_curve(const RunConfig& cfg) {
  if (cfg.grid < 2) throw DomainError("--grid must be at least 2");
  return to_csv(curve_series(cfg.figure, cfg.grid));
}

json scl_benchmark(const InputLists& lists, int m, int n) {
  const double rho = to_double(lists.rho);
  if (!(rho > 0 && rho < 1)) return nullptr;
  return scl(rho, static_cast<double>(n) / (2.0 * m));
}

struct Loaded {
  MdsCode code;
  InputLists lists;
  json replay;  // the file's suite/identity fields when it is a replay file
};

Loaded load_instance(const RunConfig& cfg, std::uint64_t family_index) {
  if (cfg.lists_path.empty()) {
    auto code = code_from_config(cfg);
    auto lists = seeded_lists(cfg.p, cfg.m, default_size(cfg), cfg.seed, family_index);
    return {std::move(code), std::move(lists), nullptr};
  }
  const json j = read_json_file(cfg.lists_path);
  if (!j.is_object()) throw DomainError("lists file must hold a JSON object");
  json replay = nullptr;
  if (j.contains("suite")) replay = j;
  std::optional<MdsCode> code;
  if (j.contains("code")) code = code_from_json(j["code"]);
  if (!j.contains("lists") && replay.is_object()) {
    // Code-free replay (kravchuk and count identities)
    return {code_from_config(cfg), InputLists{}, replay};
  }
  InputLists lists = lists_from_json(j.contains("lists") ? j["lists"] : j);
  if (!code) code = code_from_config(cfg);
  check_compatible(*code, lists);
  return {std::move(*code), std::move(lists), replay};
}

json replay_checks(const json& replay, const Loaded& inst) {
  const std::string suite = replay.value("suite", "");
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw DomainError("replay file names an unknown suite");
  const std::uint64_t seed = replay.value("seed", std::uint64_t{1});
  Checks c(suite, replay.value("inject_fault", false));
  const std::string kind = replay.value("kind", "");
  if (kind == "kravchuk") {
    kravchuk_checks(c, replay.at("m").get<int>());
  } else if (kind == "counts") {
    count_checks(c, replay.at("m").get<int>(), parse_rational(replay.at("rho").get<std::string>()));
  } else {
    const std::uint64_t family = replay.value("family", std::uint64_t{0});
    auto rng = stream(seed, kCheckStream + family);
    instance_checks(c, suite, inst.code, inst.lists, {{"family", family}}, seed, rng);
  }
  json j = c.report();
  j["suite"] = suite;
  j["identity"] = replay.value("identity", "");
  return j;
}

json cmd_oracle(const RunConfig& cfg) {
  if (cfg.search > 0) {
    if (!cfg.lists_path.empty()) throw DomainError("--search draws its own lists; drop --lists");
    const auto code = code_from_config(cfg);
    const auto size = default_size(cfg);
    int worst = code.m + 1, best = -1;
    std::uint64_t argmin = 0;
    double mean = 0;
    InputLists worst_lists;
    for (std::uint64_t i = 0; i < cfg.search; ++i) {
      const auto lists = seeded_lists(cfg.p, cfg.m, size, cfg.seed, i);
      const auto prof = brute_force_opi(code, lists);
      mean += static_cast<double>(prof.best_count) / code.m;
      best = std::max(best, prof.best_count);
      if (prof.best_count < worst) {
        worst = prof.best_count;
        argmin = i;
        worst_lists = lists;
      }
    }
    const Rational rho(size, cfg.p);
    return {{"mode", "worst_case_search"},
            {"p", cfg.p},
            {"m", cfg.m},
            {"n", cfg.n},
            {"families", cfg.search},
            {"list_size", size},
            {"rho", to_string(rho)},
            {"seed", cfg.seed},
            {"min_s_max", to_string(Rational(worst, code.m))},
            {"min_s_max_value", static_cast<double>(worst) / code.m},
            {"argmin_family", argmin},
            {"max_s_max_value", static_cast<double>(best) / code.m},
            {"mean_s_max", mean / static_cast<double>(cfg.search)},
            {"scl", scl_benchmark(worst_lists, code.m, code.n)},
            {"worst_lists", lists_to_json(worst_lists)}};
  }
  const auto inst = load_instance(cfg, 0);
  if (inst.replay.is_object()) return replay_checks(inst.replay, inst);
  const auto prof = brute_force_opi(inst.code, inst.lists);
  json j = profile_to_json(prof);
  j["mode"] = "single";
  j["best_count"] = prof.best_count;
  j["rho"] = to_string(inst.lists.rho);
  j["scl"] = scl_benchmark(inst.lists, inst.code.m, inst.code.n);
  j["code"] = code_to_json(inst.code);
  j["lists"] = lists_to_json(inst.lists);
  return j;
}

json cmd_leakage(const RunConfig& cfg) {
  const auto inst = load_instance(cfg, 0);
  const auto& code = inst.code;
  const int t = cfg.t.value_or(code.dual_distance());
  const auto kind = parse_bucket_kind(cfg.buckets);
  BucketParams params;
  params.lambda = cfg.lambda;
  params.eps = cfg.eps;
  params.seed = cfg.seed;
  if (kind == BucketKind::random && cfg.lambda <= 0) throw DomainError("random buckets need --lambda");
  const auto fam = make_buckets(kind, code.m, code.n, params);
  const auto r = step3_evaluate(code, inst.lists, fam, t);
  json j = to_json(r);
  j["slack_factor"] = kSlackFactor;
  j["within_slack"] = r.lhs_abs <= kSlackFactor * r.bound;
  j["rho"] = to_string(inst.lists.rho);
  if (kind == BucketKind::random) {
    j["J_formula"] = fam.J_formula;
    j["J_union"] = fam.J_union;
    j["augmented"] = fam.augmented;
    j["lambda_target"] = fam.lambda_target;
  }
  return j;
}

void emit(const RunConfig& cfg, const std::string& payload, std::ostream& out) {
  if (cfg.out.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw DomainError("cannot write " + cfg.out);
  f << payload;
  if (!f) throw DomainError("write failed for " + cfg.out);
}

std::string replay_path(const RunConfig& cfg) {
  if (!cfg.replay.empty()) return cfg.replay;
  if (!cfg.out.empty()) return cfg.out + ".replay.json";
  return "opilab-replay-" + cfg.suite + "-" + std::to_string(cfg.seed) + ".json";
}

// Restores process-wide settings changed by a run.
struct SettingsGuard {
  unsigned digits = working_digits();
  ~SettingsGuard() {
    clear_budget_override();
    set_working_digits(digits);
  }
};

}  // namespace

nlohmann::json verify_report(const RunConfig& cfg) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), cfg.suite) == names.end())
    throw DomainError("unknown suite: " + cfg.suite);
  if (cfg.instances < 0) throw DomainError("--instances must be non-negative");
  Checks c(cfg.suite, cfg.inject_fault);
  json j = {{"suite", cfg.suite}, {"seed", cfg.seed}};
  if (wants(cfg.suite, "kravchuk")) kravchuk_checks(c, cfg.m_given ? cfg.m : 12);
  if (cfg.suite != "kravchuk") {
    const auto code = code_from_config(cfg);
    j["code"] = code_to_json(code);
    std::vector<InputLists> families;
    if (!cfg.lists_path.empty()) {
      families.push_back(load_instance(cfg, 0).lists);
    } else {
      families.push_back(interval_lists(cfg.p, cfg.m, default_size(cfg)));
      for (int i = 0; i < cfg.instances; ++i) {
        auto rng = stream(cfg.seed, static_cast<std::uint64_t>(i));
        const auto size = 1 + static_cast<std::uint32_t>(uniform_below(rng, cfg.p - 1));
        families.push_back(seeded_lists(cfg.p, cfg.m, size, cfg.seed, static_cast<std::uint64_t>(i)));
      }
    }
    if (wants(cfg.suite, "discrepancy")) count_checks(c, cfg.m, families.front().rho);
    for (std::size_t f = 0; f < families.size(); ++f) {
      check_compatible(code, families[f]);
      auto rng = stream(cfg.seed, kCheckStream + f);
      instance_checks(c, cfg.suite, code, families[f], {{"family", f}}, cfg.seed, rng);
    }
    j["families"] = families.size();
  }
  j.update(c.report());
  return j;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Exact and rate computations for optimal polynomial intersection", "opilab"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all");

  std::string points_csv;
  app.add_option("--rho", cfg.rho, "List density rho");
  app.add_option("--bound", cfg.bound, "Bound kind")->check(CLI::IsMember({"green", "avg", "best", "biased"}));
  app.add_option("--figure", cfg.figure, "Figure number")->check(CLI::Range(1, 4));
  app.add_option("--grid", cfg.grid, "Grid size");
  app.add_option("--p", cfg.p, "Field size (prime)");
  app.add_option("--m", cfg.m, "Number of evaluation points");
  app.add_option("--n", cfg.n, "Code dimension");
  app.add_option("--points", points_csv, "Evaluation points, comma separated");
  app.add_option("--lists", cfg.lists_path, "Lists JSON (or a replay file)");
  app.add_option("--t", cfg.t, "Dual weight t");
  app.add_option("--buckets", cfg.buckets, "Bucket family")->check(CLI::IsMember({"single", "cyclic", "random"}));
  app.add_option("--lambda", cfg.lambda, "Target intersection density (random buckets)");
  app.add_option("--eps", cfg.eps, "Exponent slack for the random-bucket count");
  app.add_option("--seed", cfg.seed, "PRNG seed");
  app.add_option("--budget", cfg.budget, "Enumeration budget");
  app.add_option("--precision", cfg.precision, "Working digits for extended precision");
  app.add_option("--out", cfg.out, "Output file (default stdout)");
  app.add_option("--suite", cfg.suite, "Verification suite")->check(CLI::IsMember(suite_names()));
  app.add_option("--instances", cfg.instances, "Seeded list families per verify run");
  app.add_option("--search", cfg.search, "Oracle worst-case search over this many families");
  app.add_option("--replay", cfg.replay, "Replay file path written on verify failure");
  app.add_flag("--inject-fault", cfg.inject_fault)->group("");

  for (const char* name : {"thresholds", "curve", "verify", "oracle", "leakage"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
    sub->callback([&cfg, name] { cfg.command = name; });
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }
  cfg.rho_given = app.count("--rho") > 0;
  cfg.m_given = app.count("--m") > 0;

  SettingsGuard guard;
  try {
    if (!points_csv.empty()) {
      std::stringstream ss(points_csv);
      std::string item;
      while (std::getline(ss, item, ',')) cfg.points.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    }
    if (cfg.budget) set_budget_override(*cfg.budget);
    set_working_digits(cfg.precision);

    if (cfg.command == "thresholds") {
      emit(cfg, cmd_thresholds(cfg).dump(2) + "\n", out);
      return kExitPass;
    }
    if (cfg.command == "curve") {
      emit(cfg, cmd_curve(cfg), out);
      return kExitPass;
    }
    if (cfg.command == "verify") {
      json report = verify_report(cfg);
      const bool pass = report["pass"].get<bool>();
      if (!pass) {
        const auto path = replay_path(cfg);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw DomainError("cannot write replay file " + path);
        f << report["replay"].dump(2) << "\n";
        report["replay_path"] = path;
        err << "identity violation; replay written to " << path << "\n";
      }
      emit(cfg, report.dump(2) + "\n", out);
      return pass ? kExitPass : kExitViolation;
    }
    if (cfg.command == "oracle") {
      const json j = cmd_oracle(cfg);
      emit(cfg, j.dump(2) + "\n", out);
      return j.contains("pass") && !j["pass"].get<bool>() ? kExitViolation : kExitPass;
    }
    if (cfg.command == "leakage") {
      const json j = cmd_leakage(cfg);
      emit(cfg, j.dump(2) + "\n", out);
      return j["within_slack"].get<bool>() ? kExitPass : kExitViolation;
    }
    err << "no command\n";
    return kExitUsage;
  } catch (const IdentityViolation& e) {
    err << "identity violation: " << e.what() << "\n";
    return kExitViolation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace opilab
