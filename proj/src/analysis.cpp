#include "trustrate/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "trustrate/group.hpp"

namespace trustrate::analysis {

double g(double alpha, double beta) {
  if (alpha <= 0.0 || beta <= 0.0 || beta >= 1.0)
    throw std::invalid_argument("need alpha > 0 and 0 < beta < 1");
  const double lb = std::log(beta);
  const double denom = 2.0 * alpha + 2.0 * lb;
  if (denom == 0.0) throw std::invalid_argument("degenerate parameters");
  return (-3.0 * lb + std::sqrt(lb * lb - 8.0 * alpha * lb)) / denom;
}

double hijack_cost(const HijackParams& p) {
  if (p.rho <= 0.0 || p.rho >= 1.0 || p.theta <= 0.0 || p.theta >= 1.0 ||
      p.epsilon <= 0.0 || p.epsilon >= 1.0 || p.n_req > p.n_users)
    throw std::invalid_argument("hijack parameter domain");
  const double inner = g(p.theta * p.m_polls, p.epsilon);
  const double outer = g(p.rho * p.n_req, p.theta / (1.0 + inner));
  return p.rho / (1.0 + outer);
}

double hijack_cost_apathy(double gamma, double a) {
  if (a < 0.0 || a >= 1.0 || gamma <= 0.0 || gamma >= 1.0)
    throw std::invalid_argument("apathy domain");
  return gamma * (a - 1.0) / (gamma * a - 1.0);
}

double reviewer_bandwidth(const HijackParams& p, double gamma) {
  return p.m_polls * p.n_req * (1.0 - gamma) / p.n_users;
}

std::uint64_t baseline_cost(const HijackParams& p, double c) {
  const double kappa = p.n_users * c / p.m_polls;
  return static_cast<std::uint64_t>(
      std::ceil((p.rho / (1.0 - p.rho)) * kappa));
}

std::vector<TableRow> cost_table(const HijackParams& base) {
  std::vector<TableRow> rows;
  for (const double rho : {0.5, 0.3}) {
    for (const double n_req : {50.0, 100.0, 200.0}) {
      HijackParams p = base;
      p.rho = rho;
      p.n_req = n_req;
      const double gamma = hijack_cost(p);
      const double c = reviewer_bandwidth(p, gamma);
      TableRow row;
      row.n_req = n_req;
      row.rho = rho;
      row.gamma = gamma;
      row.users_needed =
          static_cast<std::uint64_t>(std::llround(gamma * p.n_users));
      row.c = c;
      row.baseline = baseline_cost(p, c);
      rows.push_back(row);
    }
  }
  return rows;
}

double monte_carlo_hijack(const HijackParams& p, double adversary_fraction,
                          int trials, std::uint64_t seed) {
  if (adversary_fraction < 0.0 || adversary_fraction > 1.0)
    throw std::invalid_argument("adversary fraction domain");
  group::SeededRng rng(seed);
  const auto n = static_cast<std::uint64_t>(p.n_users);
  const auto ring = static_cast<std::uint64_t>(p.n_req);
  const auto controlled =
      static_cast<std::uint64_t>(adversary_fraction * p.n_users);
  std::uint64_t hijacked = 0;
  std::uint64_t polls = 0;
  for (int t = 0; t < trials; ++t) {
    const auto m = static_cast<std::uint64_t>(p.m_polls);
    for (std::uint64_t poll = 0; poll < m; ++poll) {
      // Draw the ring without replacement from the user pool.
      std::uint64_t bad = 0;
      std::uint64_t remaining_bad = controlled;
      std::uint64_t remaining = n;
      for (std::uint64_t k = 0; k < ring; ++k) {
        if (rng.next_below(remaining) < remaining_bad) {
          ++bad;
          --remaining_bad;
        }
        --remaining;
      }
      if (static_cast<double>(bad) > p.rho * static_cast<double>(ring))
        ++hijacked;
      ++polls;
    }
  }
  return polls == 0 ? 0.0
                    : static_cast<double>(hijacked) / static_cast<double>(polls);
}

}  // namespace trustrate::analysis
