#include "opilab/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "opilab/errors.hpp"

namespace opilab {

namespace {

constexpr double kSnap = 1e-12;
const double kLog2 = std::log(2.0);
const double kLog2OverPi = std::log(2.0 / M_PI);
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double xlogx(double x) { return x <= 1e-300 ? 0.0 : x * std::log(x); }

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

bool balanced(BoundKind k) { return k != BoundKind::biased; }

// Derivative of the gamma objective; decreasing in gamma.
double objective_slope(double mu, double delta, double tau, double rho, double gamma) {
  const double y = gamma / (2 * (mu + tau));
  const double den = 1 - 2 * mu - 2 * tau;
  const double x = den > 1e-15 ? (delta - tau - gamma / 2) / den : 0.5;
  return std::log(beta_abs(rho) / 2) + std::log((1 - y) / y) - 0.5 * std::log((1 - x) / x);
}

double s_rho(double mu, double delta, double tau, double rho) {
  return exponent_E_rho(mu, delta, tau, rho).value + exponent_F_rho(mu, delta, tau, rho);
}

// First index of a true predicate on the grid, checking the true set is a suffix.
int first_true_suffix(const std::vector<bool>& v, const char* what) {
  int k = -1;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] && k < 0) k = static_cast<int>(i);
    if (!v[i] && k >= 0)
      throw IdentityViolation(std::string(what) + ": feasibility is not monotone on the scan grid");
  }
  return k;
}

}  // namespace

BoundKind parse_bound_kind(const std::string& name) {
  if (name == "green") return BoundKind::green;
  if (name == "avg") return BoundKind::avg;
  if (name == "best") return BoundKind::best;
  if (name == "biased") return BoundKind::biased;
  throw DomainError("unknown bound kind '" + name + "' (expected green, avg, best or biased)");
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::green: return "green";
    case BoundKind::avg: return "avg";
    case BoundKind::best: return "best";
    case BoundKind::biased: return "biased";
  }
  return "?";
}

double RatePoint::x() const { return (delta - tau - gamma / 2) / (1 - 2 * (mu + tau)); }
double RatePoint::y() const { return gamma / (2 * (mu + tau)); }

double scl(double rho, double mu) {
  require(rho > 0 && rho < 1, "scl: rho must lie in (0, 1)");
  require(mu >= -kSnap && mu <= 1 + kSnap, "scl: mu must lie in [0, 1]");
  mu = std::clamp(mu, 0.0, 1.0);
  if (mu + rho >= 1) return 1.0;
  const double s = std::sqrt(mu * (1 - rho)) + std::sqrt(rho * (1 - mu));
  return s * s;
}

double entropy(double x) {
  if (!(x >= -kSnap && x <= 1 + kSnap)) throw DomainError("entropy argument " + fmt(x) + " outside [0, 1]");
  x = std::clamp(x, 0.0, 1.0);
  return -xlogx(x) - xlogx(1 - x);
}

double exponent_E(double mu, double delta) {
  require(mu > 0 && mu <= 0.5, "exponent_E: mu must lie in (0, 1/2]");
  require(delta >= -kSnap && delta <= 0.5 - mu + kSnap, "exponent_E: delta must lie in [0, 1/2 - mu]");
  delta = std::clamp(delta, 0.0, 0.5 - mu);
  const double a = mu + delta, b = 1 - mu - delta;
  return a * entropy(mu / a) + b * entropy(mu / b) - entropy(2 * mu);
}

double exponent_F(double mu) { return (1 - 2 * mu) * kLog2 + 2 * mu * (4 * mu - 1) * kLog2OverPi; }

double exponent_F_green(double mu) { return (1 - 2 * mu) * kLog2 + (6 * mu - 2) * kLog2OverPi; }

double exponent_G(double mu, double lambda) {
  require(mu > 0.25 && mu < 0.5, "exponent_G: mu must lie in (1/4, 1/2)");
  return (1 - 2 * mu) * kLog2 + entropy(2 * mu) - (4 * mu - 1) * entropy(lambda / (4 * mu - 1)) -
         (2 - 4 * mu) * entropy((2 * mu - lambda) / (2 - 4 * mu)) + lambda * kLog2OverPi;
}

std::pair<double, double> lambda_range(double mu) {
  require(mu > 0.25 && mu < 0.5, "lambda_range: mu must lie in (1/4, 1/2)");
  return {std::max(0.0, 6 * mu - 2), 4 * mu - 1};
}

double lambda_star(double mu) {
  require(mu > 0.25 && mu < 0.5, "lambda_star: mu must lie in (1/4, 1/2)");
  const double c = 1 - 2 / M_PI;
  const double A = 2 / M_PI + c * (6 * mu - 1);
  const double disc = A * A - 8 * c * mu * (4 * mu - 1);
  if (disc < 0) throw DomainError("lambda_star: negative discriminant at mu = " + fmt(mu));
  return (A - std::sqrt(disc)) / (2 * c);
}

double beta_abs(double rho) {
  require(rho > 0 && rho < 1, "rho must lie in (0, 1)");
  return std::abs(1 - 2 * rho) / std::sqrt(rho * (1 - rho));
}

double e_rho_objective(double mu, double delta, double tau, double rho, double gamma) {
  // Domain is checked on gamma itself; x and y are then clamped, since x loses
  // relative accuracy as 1 - 2 mu - 2 tau -> 0.
  const double lo = std::max(0.0, 2 * (delta + tau + 2 * mu - 1));
  const double hi = std::min(2 * (mu + tau), 2 * (delta - tau));
  if (!(gamma >= lo - kSnap && gamma <= hi + kSnap))
    throw DomainError("e_rho_objective: gamma " + fmt(gamma) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
  const double b = beta_abs(rho);
  double v = 2 * (mu + tau) * kLog2 - entropy(mu + delta);
  if (gamma > 0) {
    if (b == 0) return -std::numeric_limits<double>::infinity();
    v += gamma * std::log(b / 2);
  }
  v += 2 * (mu + tau) * entropy(std::clamp(gamma / (2 * (mu + tau)), 0.0, 1.0));
  const double den = 1 - 2 * mu - 2 * tau;
  if (den > 1e-15) v += den * entropy(std::clamp((delta - tau - gamma / 2) / den, 0.0, 1.0));
  return v;
}

double stationarity_residual(double mu, double delta, double tau, double rho, double gamma) {
  const RatePoint pt{rho, mu, delta, 0, tau, gamma};
  const double x = pt.x(), y = pt.y();
  return std::abs(1 - beta_abs(rho) / 2 * ((1 - y) / y) * std::sqrt(x / (1 - x)));
}

ERhoResult exponent_E_rho(double mu, double delta, double tau, double rho) {
  require(rho > 0 && rho < 1, "exponent_E_rho: rho must lie in (0, 1)");
  require(mu > 0 && mu <= 0.5, "exponent_E_rho: mu must lie in (0, 1/2]");
  require(delta >= -kSnap && mu + delta <= 1 + kSnap, "exponent_E_rho: need delta >= 0 and mu + delta <= 1");
  require(tau >= -kSnap && tau <= delta + kSnap, "exponent_E_rho: tau must lie in [0, delta]");
  require(mu + tau <= 0.5 + kSnap, "exponent_E_rho: need mu + tau <= 1/2");
  delta = std::max(delta, 0.0);
  tau = std::clamp(tau, 0.0, delta);

  ERhoResult r;
  r.gamma_lo = std::max(0.0, 2 * (delta + tau + 2 * mu - 1));
  r.gamma_hi = std::min(2 * (mu + tau), 2 * (delta - tau));
  if (r.gamma_lo > r.gamma_hi + kSnap) {
    r.empty_interval = true;
    r.value = e_rho_objective(mu, delta, tau, rho, 0.0);
    return r;
  }
  r.gamma_hi = std::max(r.gamma_hi, r.gamma_lo);
  const double lo = r.gamma_lo, hi = r.gamma_hi;
  auto obj = [&](double g) { return e_rho_objective(mu, delta, tau, rho, g); };
  if (beta_abs(rho) == 0 || hi - lo < 1e-15) {
    r.gamma_star = lo;
    r.value = obj(lo);
    return r;
  }

  // Scan, golden section on the bracketing cells, then the stationarity root.
  constexpr int kScan = 256;
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double v = obj(lo + (hi - lo) * i / kScan);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / kScan;
  double b = lo + (hi - lo) * std::min(best + 1, kScan) / kScan;
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = obj(c), fd = obj(d);
  while (b - a > 1e-10) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = obj(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = obj(c);
    }
  }
  double g = (a + b) / 2;
  const double eps = 1e-9 * (hi - lo);
  const double cell_lo = std::max(lo, g - (hi - lo) / kScan), cell_hi = std::min(hi, g + (hi - lo) / kScan);
  auto slope = [&](double x) { return objective_slope(mu, delta, tau, rho, x); };
  if (g - lo > eps && hi - g > eps) {
    double sl = std::max(cell_lo, lo + eps), sh = std::min(cell_hi, hi - eps);
    if (slope(sl) > 0 && slope(sh) < 0) {
      for (int it = 0; it < 200 && sh - sl > 1e-15; ++it) {
        const double mid = (sl + sh) / 2;
        (slope(mid) > 0 ? sl : sh) = mid;
      }
      g = (sl + sh) / 2;
    }
    r.interior = true;
    r.stationarity_residual = stationarity_residual(mu, delta, tau, rho, g);
  } else {
    g = g - lo <= eps ? lo : hi;
  }
  r.gamma_star = g;
  r.value = obj(g);
  return r;
}

double exponent_F_rho(double mu, double /*delta*/, double tau, double rho) {
  require(rho > 0 && rho < 1, "exponent_F_rho: rho must lie in (0, 1)");
  const double s = std::abs(std::sin(rho * M_PI)) / (rho * M_PI);
  return (2 * mu - 1) * std::log(rho) + (mu + tau) * std::log(rho / (1 - rho)) +
         2 * (mu + tau) * (4 * mu - 1) * std::log(s);
}

double delta_cap(double mu, double rho, BoundKind kind) { return balanced(kind) ? 0.5 - mu : 1 - rho - mu; }

double exponent_sum(double mu, double delta, double rho, BoundKind kind) {
  switch (kind) {
    case BoundKind::green: return exponent_E(mu, delta) + exponent_F_green(mu);
    case BoundKind::avg: return exponent_E(mu, delta) + exponent_F(mu);
    case BoundKind::best: return exponent_E(mu, delta) + exponent_G(mu, lambda_star(mu));
    case BoundKind::biased:
      return exponent_E_rho(mu, delta, 0, rho).value + exponent_F_rho(mu, delta, 0, rho);
  }
  return 0;
}

bool feasible(double mu, double delta, double rho, BoundKind kind, double margin) {
  require(mu > 0 && mu <= 0.5, "feasible: mu must lie in (0, 1/2]");
  require(rho > 0 && rho < 1, "feasible: rho must lie in (0, 1)");
  const double cap = delta_cap(mu, rho, kind);
  require(delta >= -kSnap && delta <= cap + kSnap, "feasible: delta must lie in [0, " + fmt(cap) + "]");
  // Bucket arguments need 2n > m.
  if (mu <= 0.25) return false;
  require(kind != BoundKind::best || mu < 0.5, "feasible: the best bound needs mu < 1/2");
  return exponent_sum(mu, std::max(delta, 0.0), rho, kind) < -margin;
}

double delta_max(double mu, double rho, BoundKind kind) {
  const double cap = delta_cap(mu, rho, kind);
  if (cap <= 0 || mu <= 0.25) return 0;
  constexpr int kScan = 256;
  std::vector<bool> ok(kScan + 1);
  for (int i = 0; i <= kScan; ++i) ok[i] = feasible(mu, cap * i / kScan, rho, kind);
  // Feasible deltas must form a prefix [0, delta_max].
  int k = 0;
  while (k <= kScan && ok[k]) ++k;
  for (int i = k; i <= kScan; ++i)
    if (ok[i]) throw IdentityViolation("delta_max: feasible set in delta is not an interval at mu = " + fmt(mu));
  if (k > kScan) return cap;
  if (k == 0) return 0;
  double lo = cap * (k - 1) / kScan, hi = cap * k / kScan;
  while (hi - lo > 1e-7) {
    const double mid = (lo + hi) / 2;
    (feasible(mu, mid, rho, kind) ? lo : hi) = mid;
  }
  return lo;
}

ThresholdResult thresholds(double rho, BoundKind kind) {
  require(rho > 0 && rho < 1, "thresholds: rho must lie in (0, 1)");
  if (balanced(kind) && std::abs(rho - 0.5) > 1e-12)
    throw DomainError("thresholds: the " + to_string(kind) + " bound is for rho = 1/2");
  ThresholdResult res;
  res.rho = rho;
  res.bound_kind = kind;
  const double mu_lo = 0.25;
  const double mu_hi = (balanced(kind) ? 0.5 : std::min(0.5, 1 - rho)) - 1e-10;
  if (mu_hi <= mu_lo) {
    res.two_mu0 = res.two_mu1 = kNaN;
    return res;
  }
  constexpr int kScan = 400;
  auto mu_at = [&](int i) { return mu_lo + (mu_hi - mu_lo) * i / kScan; };

  auto solve = [&](const std::function<bool(double)>& pred, const char* what, bool& finite) {
    std::vector<bool> ok(kScan + 1);
    for (int i = 0; i <= kScan; ++i) ok[i] = pred(mu_at(i));
    const int k = first_true_suffix(ok, what);
    if (k < 0) {
      finite = false;
      return kNaN;
    }
    finite = true;
    if (k == 0) return 2 * mu_at(0);
    double lo = mu_at(k - 1), hi = mu_at(k);
    while (hi - lo > 1e-9) {
      const double mid = (lo + hi) / 2;
      (pred(mid) ? hi : lo) = mid;
    }
    return 2 * hi;
  };
  auto witness = [&](double two_mu, double delta_of_mu(double, double, BoundKind)) {
    Witness w;
    if (std::isnan(two_mu)) return w;
    const double mu = two_mu / 2;
    w.delta = std::max(0.0, delta_of_mu(mu, rho, kind));
    if (kind == BoundKind::best && mu < 0.5) w.lambda = lambda_star(mu);
    if (kind == BoundKind::biased) w.gamma = exponent_E_rho(mu, w.delta, 0, rho).gamma_star;
    return w;
  };

  res.two_mu0 = solve([&](double mu) { return feasible(mu, 0, rho, kind); }, "improvement threshold", res.finite0);
  res.two_mu1 = solve([&](double mu) { return feasible(mu, delta_cap(mu, rho, kind), rho, kind); },
                      "saturation threshold", res.finite1);
  res.witness0 = witness(res.two_mu0, [](double, double, BoundKind) { return 0.0; });
  res.witness1 = witness(res.two_mu1, delta_cap);
  return res;
}

double rho_max_biased(double tol) {
  // Feasibility first appears at the window edge mu = 1 - rho, where delta = 0 and
  // E_rho reduces to 2 mu log 2 - H(mu).
  auto edge = [](double rho) {
    const double mu = 1 - rho;
    return 2 * mu * kLog2 - entropy(mu) + exponent_F_rho(mu, 0, 0, rho) + kFeasMargin;
  };
  double lo = 0.5, hi = 0.75 - 1e-9;
  if (!(edge(lo) < 0 && edge(hi) >= 0)) throw BracketingFailure("rho_max_biased: edge function does not change sign");
  while (hi - lo > tol) {
    const double mid = (lo + hi) / 2;
    (edge(mid) < 0 ? lo : hi) = mid;
  }
  return lo;
}

double f_rho(double rho, double x) {
  require(rho > 0 && rho < 1, "f_rho: rho must lie in (0, 1)");
  require(x >= -kSnap && x <= 1 + kSnap, "f_rho: x must lie in [0, 1]");
  x = std::clamp(x, 0.0, 1.0);
  // (|beta| sqrt(x/(1-x)) + 2)^2 (rho/(1-rho)) x (1-x), written to stay finite at x = 1.
  const double s = beta_abs(rho) * std::sqrt(x) + 2 * std::sqrt(1 - x);
  return s * s * rho / (1 - rho) * x;
}

double g_rho(double rho, double mu) { return (1 - mu) * (1 - 2 * rho) / (1 - 2 * mu) + rho; }

double mu_bar(double rho) { return 0.31 + (rho - 0.5) / 12; }

double f_bar(double rho) {
  const double mb = mu_bar(rho);
  const double s = std::abs(std::sin(rho * M_PI) / (rho * M_PI));
  return std::pow(s, 2 * (4 * mb - 1)) * f_rho(rho, g_rho(rho, mb));
}

double tau_derivative_exp(double mu, double delta, double tau, double rho, double h) {
  const double top = std::min(delta, 0.5 - mu);
  const double a = std::max(0.0, tau - h), b = std::min(top, tau + h);
  require(b > a, "tau_derivative_exp: empty tau interval");
  return std::exp((s_rho(mu, delta, b, rho) - s_rho(mu, delta, a, rho)) / (b - a));
}

double tau_star(double mu, double delta, double rho, int grid) {
  const double top = std::min(delta, 0.5 - mu);
  if (top <= 0) return 0;
  double best_tau = 0, best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double tau = top * i / grid;
    const double v = s_rho(mu, delta, tau, rho);
    if (v > best_v) {
      best_v = v;
      best_tau = tau;
    }
  }
  return best_tau;
}

TauStarReport tau_star_analysis(double rho, int grid) {
  require(rho > 0 && rho < 1, "tau_star_analysis: rho must lie in (0, 1)");
  require(grid >= 3, "tau_star_analysis: grid must have at least 3 points");
  TauStarReport r;
  r.rho = rho;
  double best = -1;
  for (int i = 0; i < grid; ++i) {
    const double x = static_cast<double>(i) / (grid - 1);
    const double f = f_rho(rho, x);
    r.x.push_back(x);
    r.f.push_back(f);
    if (f > best) {
      best = f;
      r.argmax = x;
    }
  }
  r.expected_argmax = rho <= 0.5 ? 1 - rho : rho;
  r.value_at_expected = f_rho(rho, r.expected_argmax);
  r.argmax_certified = std::abs(r.argmax - r.expected_argmax) <= 1.0 / (grid - 1) + 1e-15 &&
                       r.value_at_expected >= best - 1e-12 &&
                       (rho > 0.5 || std::abs(r.value_at_expected - 1) <= 1e-10);
  r.mu_bar = mu_bar(rho);
  r.g_at_mu_bar = g_rho(rho, r.mu_bar);
  r.f_bar = f_bar(rho);
  return r;
}

std::vector<double> default_figure_rhos(int figure) {
  if (figure == 3) return {0.4, 0.6};
  if (figure == 4) return {0.2, 0.3, 0.4, 0.5, 0.56, 0.6, 0.65};
  return {};
}

Table curve_series(int figure, int grid, const std::vector<double>& rhos_in) {
  require(grid >= 2, "curve_series: grid must have at least 2 points");
  Table t;
  auto lin = [&](double a, double b, int i) { return a + (b - a) * i / (grid - 1); };
  switch (figure) {
    case 1: {
      t.columns = {"two_mu", "scl", "green", "avg", "best"};
      for (int i = 0; i < grid; ++i) {
        const double two_mu = lin(0, 1, i), mu = two_mu / 2;
        std::vector<double> row{two_mu, scl(0.5, mu)};
        for (auto kind : {BoundKind::green, BoundKind::avg, BoundKind::best}) {
          const double d = mu > 0.25 && mu < 0.5 ? delta_max(mu, 0.5, kind) : 0.0;
          row.push_back(scl(0.5, mu + d));
        }
        t.rows.push_back(row);
      }
      break;
    }
    case 2: {
      t.columns = {"rho", "two_mu0_biased", "two_mu1_biased_raw", "two_mu1_biased_repaired"};
      double running = std::numeric_limits<double>::infinity();
      for (int i = 0; i < grid; ++i) {
        const double rho = lin(0.05, 0.95, i);
        const auto th = thresholds(rho, BoundKind::biased);
        // Without a finite threshold the bound never beats SCL_rho, which reaches 1 at 2 mu = 2 (1 - rho).
        const double fallback = std::min(1.0, 2 * (1 - rho));
        const double t0 = th.finite0 ? th.two_mu0 : fallback;
        const double t1 = th.finite1 ? th.two_mu1 : fallback;
        running = std::min(running, t1);
        t.rows.push_back({rho, t0, t1, running});
      }
      break;
    }
    case 3: {
      t.columns = {"rho", "two_mu", "scl_rho", "improved", "delta_star", "tau_star", "gamma_star"};
      const auto rhos = rhos_in.empty() ? default_figure_rhos(3) : rhos_in;
      for (double rho : rhos) {
        for (int i = 0; i < grid; ++i) {
          const double two_mu = lin(0, 1, i), mu = two_mu / 2;
          const double base = scl(rho, mu);
          double d = 0, ts = 0, gs = 0;
          if (mu > 0.25 && delta_cap(mu, rho, BoundKind::biased) > 0) {
            d = delta_max(mu, rho, BoundKind::biased);
            if (d > 0) {
              ts = tau_star(mu, d, rho);
              gs = exponent_E_rho(mu, d, ts, rho).gamma_star;
            }
          }
          t.rows.push_back({rho, two_mu, base, scl(rho, mu + d), d, ts, gs});
        }
      }
      break;
    }
    case 4: {
      t.columns = {"x_or_rho", "f_bar"};
      for (int i = 0; i < grid; ++i) {
        const double rho = lin(0.5, 0.67, i);
        t.rows.push_back({rho, f_bar(rho)});
      }
      break;
    }
    default: throw DomainError("figure must be 1, 2, 3 or 4");
  }
  return t;
}

std::vector<std::pair<double, Table>> figure4_rho_tables(int grid, const std::vector<double>& rhos_in) {
  require(grid >= 2, "figure4_rho_tables: grid must have at least 2 points");
  std::vector<std::pair<double, Table>> out;
  for (double rho : rhos_in.empty() ? default_figure_rhos(4) : rhos_in) {
    Table t;
    t.columns = {"x_or_rho", "f_rho_at_x"};
    for (int i = 0; i < grid; ++i) {
      const double x = static_cast<double>(i) / (grid - 1);
      t.rows.push_back({x, f_rho(rho, x)});
    }
    out.emplace_back(rho, std::move(t));
  }
  return out;
}

std::string to_csv(const Table& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
    os << '\n';
  }
  return os.str();
}

}  // namespace opilab
