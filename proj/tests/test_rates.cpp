#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "opilab/errors.hpp"
#include "opilab/rates.hpp"

using namespace opilab;

namespace {

double H(double x) { return x <= 0 || x >= 1 ? 0.0 : -x * std::log(x) - (1 - x) * std::log(1 - x); }

// Dense-grid maximisation of the gamma objective, written out from its definition.
double e_rho_grid(double mu, double delta, double tau, double rho, int n = 200000) {
  const double beta = std::abs(1 - 2 * rho) / std::sqrt(rho * (1 - rho));
  const double lo = std::max(0.0, 2 * (delta + tau + 2 * mu - 1));
  const double hi = std::min(2 * (mu + tau), 2 * (delta - tau));
  const double den = 1 - 2 * mu - 2 * tau;
  double best = -1e300;
  for (int i = 0; i <= n; ++i) {
    const double g = lo + (hi - lo) * i / n;
    const double v = (g > 0 ? g * std::log(beta / 2) : 0.0) + 2 * (mu + tau) * H(g / (2 * (mu + tau))) +
                     den * H((delta - tau - g / 2) / den);
    best = std::max(best, v);
  }
  return 2 * (mu + tau) * std::log(2.0) - H(mu + delta) + best;
}

}  // namespace

TEST_CASE("semicircle law") {
  CHECK(scl(0.5, 0.5) == 1.0);
  CHECK(scl(0.3, 0.0) == doctest::Approx(0.3));
  for (double mu : {0.05, 0.2, 0.33, 0.45}) CHECK(scl(0.5, mu) == doctest::Approx(0.5 + std::sqrt(mu * (1 - mu))).epsilon(1e-14));
  // Continuity at mu + rho = 1.
  CHECK(scl(0.4, 0.6 - 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
  for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double s = 0; s <= 1 - rho + 1e-12; s += 0.01) {
      const double chain = rho + (1 - 2 * rho) * s + 2 * std::sqrt(rho * (1 - rho) * s * (1 - s));
      CHECK(std::abs(chain - scl(rho, std::min(s, 1 - rho))) <= 1e-12);
    }
  CHECK_THROWS_AS(scl(0.0, 0.2), DomainError);
  CHECK_THROWS_AS(scl(0.5, 1.5), DomainError);
}

TEST_CASE("binary entropy") {
  CHECK(entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(entropy(0.0) == 0.0);
  CHECK(entropy(1.0) == 0.0);
  CHECK(entropy(0.11) == doctest::Approx(0.3465153369).epsilon(1e-9));
  CHECK(entropy(1 + 1e-13) == 0.0);
  CHECK_THROWS_AS(entropy(-1e-6), DomainError);
  CHECK_THROWS_AS(entropy(1.001), DomainError);
  CHECK_THROWS_AS(entropy(std::nan("")), DomainError);
}

TEST_CASE("balanced exponent E") {
  for (double mu : {0.1, 0.26, 0.35, 0.49}) {
    CHECK(std::abs(exponent_E(mu, 0.5 - mu)) <= 1e-14);
    CHECK(exponent_E(mu, 0) == doctest::Approx((1 - mu) * H(mu / (1 - mu)) - H(2 * mu)).epsilon(1e-13));
    // E is non-positive and increases to 0 at the cap.
    double prev = exponent_E(mu, 0);
    CHECK(prev < 0);
    for (int i = 1; i <= 100; ++i) {
      const double e = exponent_E(mu, (0.5 - mu) * i / 100);
      CHECK(e <= 1e-15);
      CHECK(e > prev);
      prev = e;
    }
  }
  CHECK_THROWS_AS(exponent_E(0.3, 0.3), DomainError);
}

TEST_CASE("F, F_green and G") {
  CHECK(exponent_F(0.5) == doctest::Approx(std::log(2 / M_PI)).epsilon(1e-14));
  CHECK(exponent_F_green(0.39) < 0);
  CHECK(exponent_F_green(0.389) > 0);
  for (double mu = 0.26; mu < 0.5; mu += 0.01) CHECK((exponent_F_green(mu) < 0) == (mu > 0.3898));
  for (double mu : {0.30, 0.35, 0.40}) CHECK(std::abs(exponent_F(mu) - exponent_G(mu, 2 * mu * (4 * mu - 1))) <= 1e-12);
  CHECK_THROWS_AS(exponent_G(0.3, 0.5), DomainError);
  CHECK_THROWS_AS(exponent_G(0.2, 0.0), DomainError);
}

TEST_CASE("lambda star minimises G") {
  for (double mu = 0.255; mu < 0.5; mu += 0.01) {
    const double ls = lambda_star(mu);
    CHECK(ls >= 2 * mu * (4 * mu - 1) - 1e-15);
    auto [lo, hi] = lambda_range(mu);
    // Five-point stencil; lambda* approaches the interval end as mu -> 1/2.
    const double h = std::min(1e-4, 1e-3 * std::min(ls - lo, hi - ls));
    auto g = [&](double d) { return exponent_G(mu, ls + d); };
    const double slope = (g(-2 * h) - 8 * g(-h) + 8 * g(h) - g(2 * h)) / (12 * h);
    CHECK(std::abs(slope) <= 1e-8);
    for (int i = 0; i <= 400; ++i) CHECK(exponent_G(mu, ls) <= exponent_G(mu, lo + (hi - lo) * i / 400) + 1e-14);
  }
  for (double mu : {0.32, 0.36, 0.40}) CHECK(exponent_G(mu, lambda_star(mu)) <= exponent_F(mu));
}

TEST_CASE("biased exponent E_rho") {
  for (double mu : {0.27, 0.33, 0.45})
    for (double delta : {0.0, 0.02, 0.1, 0.5 - mu}) {
      if (delta > 0.5 - mu) continue;
      auto r = exponent_E_rho(mu, delta, 0, 0.5);
      CHECK(r.gamma_star == 0);
      CHECK(std::abs(r.value - exponent_E(mu, delta)) <= 1e-9);
    }
  // tau = delta collapses the gamma interval to {0}.
  auto edge = exponent_E_rho(0.3, 0.1, 0.1, 0.4);
  CHECK(edge.gamma_star == 0);
  CHECK(edge.value == doctest::Approx(0.8 * std::log(2.0) - H(0.4)).epsilon(1e-12));

  auto r = exponent_E_rho(0.35, 0.2, 0, 0.4);
  CHECK(r.gamma_star > 0);
  CHECK(r.interior);
  CHECK(r.stationarity_residual < 1e-6);
  for (auto [mu, delta, tau, rho] : std::vector<std::array<double, 4>>{
           {0.35, 0.2, 0, 0.4}, {0.3, 0.3, 0.05, 0.3}, {0.4, 0.15, 0.02, 0.6}, {0.28, 0.05, 0, 0.65}, {0.45, 0.05, 0.01, 0.2}}) {
    auto res = exponent_E_rho(mu, delta, tau, rho);
    CHECK(res.value >= e_rho_grid(mu, delta, tau, rho) - 1e-12);
    CHECK(res.value == doctest::Approx(e_rho_grid(mu, delta, tau, rho)).epsilon(1e-8));
  }
  CHECK_THROWS_AS(exponent_E_rho(0.35, 0.1, 0.2, 0.4), DomainError);
  CHECK_THROWS_AS(exponent_E_rho(0.4, 0.2, 0.15, 0.3), DomainError);
  CHECK_THROWS_AS(e_rho_objective(0.35, 0.2, 0, 0.4, 0.5), DomainError);
}

TEST_CASE("biased exponent F_rho") {
  for (double mu : {0.3, 0.35, 0.45}) CHECK(std::abs(exponent_F_rho(mu, 0.1, 0, 0.5) - exponent_F(mu)) <= 1e-9);
  // Hand evaluation: 0.3 log(1/0.4) + 0.35 log(2/3) + 0.28 log(sin(0.4 pi) / (0.4 pi)).
  const double want = 0.3 * std::log(2.5) + 0.35 * std::log(2.0 / 3.0) + 0.28 * std::log(std::sin(0.4 * M_PI) / (0.4 * M_PI));
  const double got = exponent_F_rho(0.35, 0, 0, 0.4);
  CHECK(std::isfinite(got));
  CHECK(got == doctest::Approx(want).epsilon(1e-14));
  CHECK(got == doctest::Approx(0.05496).epsilon(1e-3));
  // Slope in tau is the constant log(rho/(1-rho)) + 2(4 mu - 1) log|sin(rho pi)/(rho pi)| < 0.
  CHECK(exponent_F_rho(0.35, 0.2, 0.1, 0.4) < exponent_F_rho(0.35, 0.2, 0.0, 0.4));
}

TEST_CASE("tau monotonicity certificate for rho <= 1/2") {
  for (double rho : {0.2, 0.3, 0.4, 0.45})
    for (double mu : {0.28, 0.33, 0.4})
      for (double frac : {0.3, 0.7}) {
        const double delta = frac * (1 - rho - mu);
        const double top = std::min(delta, 0.5 - mu);
        for (int i = 1; i < 8; ++i) CHECK(tau_derivative_exp(mu, delta, top * i / 8, rho) < 1);
      }
}

TEST_CASE("feasibility predicate") {
  CHECK(feasible(0.38, 0.5 - 0.38, 0.5, BoundKind::best));
  CHECK_FALSE(feasible(0.37, 0.5 - 0.37, 0.5, BoundKind::best));
  CHECK_FALSE(feasible(0.35, 0.5 - 0.35, 0.5, BoundKind::best));
  CHECK(feasible(0.40, 0.5 - 0.40, 0.5, BoundKind::green));
  for (double mu = 0.251; mu < 0.3; mu += 0.002)
    for (int i = 0; i <= 10; ++i) CHECK_FALSE(feasible(mu, (0.3 - mu) * i / 10, 0.70, BoundKind::biased));
  CHECK_FALSE(feasible(0.2, 0.1, 0.5, BoundKind::avg));
  CHECK_THROWS_AS(feasible(0.3, 0.3, 0.5, BoundKind::avg), DomainError);
}

TEST_CASE("delta_max") {
  CHECK(delta_max(0.7496 / 2 + 0.002, 0.5, BoundKind::best) == doctest::Approx(0.5 - (0.7496 / 2 + 0.002)));
  CHECK(delta_max(0.6225 / 2 - 0.002, 0.5, BoundKind::best) == 0.0);
  const double d = delta_max(0.35, 0.5, BoundKind::best);
  CHECK(d > 0);
  CHECK(d < 0.15);
  CHECK(d == doctest::Approx(0.0329479).epsilon(1e-5));
  CHECK(feasible(0.35, d, 0.5, BoundKind::best));
  CHECK_FALSE(feasible(0.35, d + 1e-6, 0.5, BoundKind::best));
  CHECK(delta_max(0.35, 0.5, BoundKind::avg) < d);
}

TEST_CASE("thresholds at rho = 1/2") {
  auto best = thresholds(0.5, BoundKind::best);
  CHECK(best.finite0);
  CHECK(best.finite1);
  CHECK(best.two_mu0 <= 0.6225);
  CHECK(best.two_mu1 <= 0.7496);
  CHECK(best.two_mu0 == doctest::Approx(0.6225).epsilon(0.0005 / 0.6225));
  CHECK(best.two_mu1 == doctest::Approx(0.7496).epsilon(0.0005 / 0.7496));
  CHECK(best.witness1.lambda == doctest::Approx(lambda_star(best.two_mu1 / 2)));

  auto avg = thresholds(0.5, BoundKind::avg);
  CHECK(std::abs(avg.two_mu0 - 0.6265) <= 0.0005);
  CHECK(std::abs(avg.two_mu1 - 0.7526) <= 0.0005);
  auto green = thresholds(0.5, BoundKind::green);
  CHECK(std::abs(green.two_mu1 - 0.78) <= 0.001);

  for (const auto& th : {best, avg, green}) {
    CHECK(th.two_mu0 <= th.two_mu1);
    const double mu1 = th.two_mu1 / 2;
    CHECK(feasible(mu1 + 1e-6, 0.5 - mu1 - 1e-6, 0.5, th.bound_kind));
    CHECK_FALSE(feasible(mu1 - 1e-6, 0.5 - mu1 + 1e-6, 0.5, th.bound_kind));
  }
  CHECK_THROWS_AS(thresholds(0.4, BoundKind::avg), DomainError);
}

TEST_CASE("biased thresholds and the maximal density") {
  auto lo = thresholds(0.4, BoundKind::biased);
  CHECK(lo.finite0);
  CHECK(lo.witness1.gamma > 0);
  CHECK(std::isnan(thresholds(0.7, BoundKind::biased).two_mu0));
  CHECK(thresholds(0.66, BoundKind::biased).finite1);
  CHECK_FALSE(thresholds(0.67, BoundKind::biased).finite0);
  CHECK(rho_max_biased() == doctest::Approx(0.668).epsilon(0.001 / 0.668));
  // Matches the balanced bound at rho = 1/2.
  auto half = thresholds(0.5, BoundKind::biased);
  auto avg = thresholds(0.5, BoundKind::avg);
  CHECK(half.two_mu0 == doctest::Approx(avg.two_mu0).epsilon(1e-6));
  CHECK(half.two_mu1 == doctest::Approx(avg.two_mu1).epsilon(1e-6));
}

TEST_CASE("biased curve near rho = 1/2 matches the avg curve") {
  for (double two_mu = 0.52; two_mu < 1; two_mu += 0.02) {
    const double mu = two_mu / 2;
    const double rho = 0.5 + 1e-6;
    const double biased = scl(rho, mu + delta_max(mu, rho, BoundKind::biased));
    const double avg = scl(0.5, mu + delta_max(mu, 0.5, BoundKind::avg));
    CHECK(std::abs(biased - avg) <= 1e-3);
  }
}

TEST_CASE("tau star analysis") {
  auto r3 = tau_star_analysis(0.3);
  CHECK(std::abs(f_rho(0.3, 0.7) - 1) <= 1e-10);
  CHECK(r3.argmax == doctest::Approx(0.7));
  CHECK(r3.argmax_certified);
  auto r6 = tau_star_analysis(0.6);
  CHECK(r6.argmax == doctest::Approx(0.6));
  CHECK(r6.argmax_certified);
  for (double x = 0; x <= 1; x += 0.05) CHECK(f_rho(0.5, x) == doctest::Approx(4 * x * (1 - x)));
  CHECK(tau_star_analysis(0.5).value_at_expected == doctest::Approx(1.0));

  double best = 0, at = 0;
  for (int i = 0; i <= 1700; ++i) {
    const double rho = 0.5 + 0.17 * i / 1700;
    if (f_bar(rho) > best) {
      best = f_bar(rho);
      at = rho;
    }
  }
  CHECK(best == doctest::Approx(0.9927).epsilon(1e-4 / 0.9927));
  CHECK(best < 1);
  CHECK(std::abs(at - 0.56) <= 0.01);
  // The mu_bar line lies below the computed improvement threshold.
  for (double rho : {0.5, 0.55, 0.6, 0.65, 0.66}) CHECK(mu_bar(rho) <= thresholds(rho, BoundKind::biased).two_mu0 / 2);
}

TEST_CASE("figure 1 series") {
  auto t = curve_series(1, 101);
  REQUIRE(t.columns == std::vector<std::string>{"two_mu", "scl", "green", "avg", "best"});
  REQUIRE(t.rows.size() == 101);
  const auto& r90 = t.rows[90];
  CHECK(r90[0] == doctest::Approx(0.9));
  for (int c = 2; c <= 4; ++c) CHECK(r90[c] == 1.0);
  const auto& r50 = t.rows[50];
  for (int c = 1; c <= 4; ++c) CHECK(r50[c] == doctest::Approx(scl(0.5, 0.25)));
  for (const auto& row : t.rows) {
    CHECK(row[4] >= row[3] - 1e-12);  // best improves on avg
    CHECK(row[3] >= row[1] - 1e-12);
  }
}

TEST_CASE("figure 2 series and monotone repair") {
  auto t = curve_series(2, 91);
  REQUIRE(t.columns.size() == 4);
  bool bump = false;
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    const auto& a = t.rows[i - 1];
    const auto& b = t.rows[i];
    CHECK(b[3] <= a[3]);
    CHECK(b[3] <= b[2]);
    if (b[0] <= 0.668 && b[2] > a[2]) bump = true;
  }
  CHECK(bump);
  for (const auto& row : t.rows) CHECK(row[1] <= row[2] + 1e-12);
}

TEST_CASE("figure 3 and figure 4 series") {
  auto t = curve_series(3, 51);
  REQUIRE(t.rows.size() == 102);
  bool some_gamma = false;
  for (const auto& row : t.rows) {
    CHECK(row[5] == 0.0);
    CHECK(row[3] >= row[2] - 1e-12);
    if (row[6] > 0) some_gamma = true;
  }
  CHECK(some_gamma);
  auto f4 = curve_series(4, 18);
  CHECK(f4.columns == std::vector<std::string>{"x_or_rho", "f_bar"});
  auto per = figure4_rho_tables(11);
  CHECK(per.size() == default_figure_rhos(4).size());
  CHECK(per[0].second.columns == std::vector<std::string>{"x_or_rho", "f_rho_at_x"});
  CHECK_THROWS_AS(curve_series(5, 10), DomainError);
}

TEST_CASE("CSV output") {
  Table t{{"a", "b"}, {{1.0 / 3, 2}, {1e-12, -0.5}}};
  CHECK(to_csv(t) == "a,b\n0.3333333333,2\n1e-12,-0.5\n");
}

TEST_CASE("bound kind names") {
  for (auto k : {BoundKind::green, BoundKind::avg, BoundKind::best, BoundKind::biased}) CHECK(parse_bound_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_bound_kind("worst"), DomainError);
}
