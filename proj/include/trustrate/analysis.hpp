#pragma once

#include <cstdint>
#include <vector>

namespace trustrate::analysis {

/// Solves exp(-x^2 a / ((1+x)(2+x))) = b in closed form:
/// g = (-3 ln b + sqrt((ln b)^2 - 8 a ln b)) / (2a + 2 ln b).
double g(double alpha, double beta);

struct HijackParams {
  double rho = 0.5;       // fraction of a ring needed to hijack one poll
  double theta = 0.01;    // fraction of polls the adversary wants hijacked
  double epsilon = 9.313225746154785e-10;  // 2^-30
  double m_polls = 1e6;   // polls per period
  double n_users = 1e6;
  double n_req = 100;
  double apathy = 0.0;    // a in [0, 1)
};

/// Minimum adversary-controlled user fraction:
/// gamma = rho / (1 + g(rho*n_req, theta/(1+g(theta*M, epsilon)))).
double hijack_cost(const HijackParams& p);

/// Apathy-adjusted cost: gamma' = gamma*(a-1)/(gamma*a - 1).
double hijack_cost_apathy(double gamma, double a);

/// Average reviews per user per period: c = M*n_req*(1-gamma)/n.
double reviewer_bandwidth(const HijackParams& p, double gamma);

/// Users an adversary needs against a c-reviews-per-user baseline:
/// ceil((rho/(1-rho)) * kappa), kappa = n*c/M.
std::uint64_t baseline_cost(const HijackParams& p, double c);

struct TableRow {
  double n_req;
  double rho;
  double gamma;
  std::uint64_t users_needed;  // round(gamma * n)
  double c;
  std::uint64_t baseline;
};

/// The six-row comparison table: n_req in {50,100,200} x rho in {0.5,0.3}.
std::vector<TableRow> cost_table(const HijackParams& base);

/// Fraction of simulated polls where an adversary controlling
/// adversary_fraction of users exceeds rho of the ring. Deterministic per
/// seed; rings drawn hypergeometrically from the user pool.
double monte_carlo_hijack(const HijackParams& p, double adversary_fraction,
                          int trials, std::uint64_t seed);

}  // namespace trustrate::analysis
