#pragma once

#include <string>
#include <vector>

namespace opilab {

// Strict inequalities in the exponent conditions are certified with this margin.
inline constexpr double kFeasMargin = 1e-9;

enum class BoundKind { green, avg, best, biased };

BoundKind parse_bound_kind(const std::string& name);
std::string to_string(BoundKind kind);

// Parameters at which the exponent functions are evaluated. Rate is r = 2 mu.
struct RatePoint {
  double rho = 0.5;
  double mu = 0.25;
  double delta = 0;
  double lambda = 0;
  double tau = 0;
  double gamma = 0;

  static RatePoint from_rate(double rate, double rho) { return RatePoint{rho, rate / 2}; }
  double rate() const { return 2 * mu; }
  // Arguments of H in the biased exponent.
  double x() const;
  double y() const;
};

double scl(double rho, double mu);
// Binary entropy in nats. Arguments within 1e-12 of [0, 1] are snapped.
double entropy(double x);

double exponent_E(double mu, double delta);
double exponent_F(double mu);
double exponent_F_green(double mu);
double exponent_G(double mu, double lambda);
// Feasible lambda for G: both entropy arguments in [0, 1].
std::pair<double, double> lambda_range(double mu);
double lambda_star(double mu);

struct ERhoResult {
  double value = 0;
  double gamma_star = 0;
  double gamma_lo = 0;
  double gamma_hi = 0;
  bool interior = false;        // gamma_star strictly inside [gamma_lo, gamma_hi]
  bool empty_interval = false;  // value is then the gamma = 0 endpoint
  double stationarity_residual = 0;  // |1 - (|beta|/2)((1-y)/y) sqrt(x/(1-x))| when interior
};

// |1 - 2 rho| / sqrt(rho (1 - rho))
double beta_abs(double rho);
// The objective maximised over gamma, including the gamma-free terms.
double e_rho_objective(double mu, double delta, double tau, double rho, double gamma);
double stationarity_residual(double mu, double delta, double tau, double rho, double gamma);
ERhoResult exponent_E_rho(double mu, double delta, double tau, double rho);
double exponent_F_rho(double mu, double delta, double tau, double rho);

// Largest delta for the bound: 1/2 - mu for balanced kinds, 1 - rho - mu for biased.
double delta_cap(double mu, double rho, BoundKind kind);
// E + F for the chosen bound (biased evaluated at tau = 0).
double exponent_sum(double mu, double delta, double rho, BoundKind kind);
bool feasible(double mu, double delta, double rho, BoundKind kind, double margin = kFeasMargin);
double delta_max(double mu, double rho, BoundKind kind);

struct Witness {
  double delta = 0;
  double lambda = 0;
  double gamma = 0;
};

struct ThresholdResult {
  double rho = 0.5;
  BoundKind bound_kind = BoundKind::avg;
  bool finite0 = false;
  bool finite1 = false;
  double two_mu0 = 0;  // NaN when not finite
  double two_mu1 = 0;
  Witness witness0;
  Witness witness1;
};

ThresholdResult thresholds(double rho, BoundKind kind);
// Density beyond which the biased bound never improves on SCL_rho.
double rho_max_biased(double tol = 1e-9);

double f_rho(double rho, double x);
double g_rho(double rho, double mu);
double mu_bar(double rho);
double f_bar(double rho);

// exp(d[E_rho + F_rho]/dtau) by a central difference along (tau, gamma*(tau)).
double tau_derivative_exp(double mu, double delta, double tau, double rho, double h = 1e-6);
// Argmax of E_rho + F_rho over tau in [0, min(delta, 1/2 - mu)] by scan.
double tau_star(double mu, double delta, double rho, int grid = 64);

struct TauStarReport {
  double rho = 0;
  std::vector<double> x;
  std::vector<double> f;         // f_rho on the grid
  double argmax = 0;             // grid argmax
  double expected_argmax = 0;    // 1 - rho for rho <= 1/2, rho otherwise
  double value_at_expected = 0;
  bool argmax_certified = false;
  double mu_bar = 0;
  double g_at_mu_bar = 0;
  double f_bar = 0;
};

TauStarReport tau_star_analysis(double rho, int grid = 2001);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Figure 1: two_mu, scl, green, avg, best.
// Figure 2: rho, two_mu0_biased, two_mu1_biased_raw, two_mu1_biased_repaired.
// Figure 3: rho, two_mu, scl_rho, improved, delta_star, tau_star, gamma_star.
// Figure 4: x_or_rho, f_bar.
Table curve_series(int figure, int grid, const std::vector<double>& rhos = {});
// Per-rho f_rho curves for figure 4, columns x_or_rho, f_rho_at_x.
std::vector<std::pair<double, Table>> figure4_rho_tables(int grid, const std::vector<double>& rhos = {});
std::vector<double> default_figure_rhos(int figure);

std::string to_csv(const Table& table);

}  // namespace opilab
