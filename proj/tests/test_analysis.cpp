#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trustrate/analysis.hpp"

using namespace trustrate;

namespace {

// Independent oracle: bisection on exp(-x^2 a / ((1+x)(2+x))) = b.
double g_oracle(double alpha, double beta) {
  auto f = [&](double x) {
    return std::exp(-x * x * alpha / ((1.0 + x) * (2.0 + x))) - beta;
  };
  double lo = 1e-12, hi = 1.0;
  while (f(hi) > 0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

constexpr double kEps30 = 9.313225746154785e-10;  // 2^-30

}  // namespace

TEST_CASE("g matches the bisection oracle to 1e-9 relative") {
  for (auto [alpha, beta] : std::initializer_list<std::pair<double, double>>{
           {1e4, kEps30}, {25.0, 0.009365}, {10.0, 0.5}, {100.0, 1e-3},
           {1e4, 1e-2}, {50.0, 0.1}}) {
    const double closed = analysis::g(alpha, beta);
    const double oracle = g_oracle(alpha, beta);
    CHECK(std::abs(closed - oracle) / oracle < 1e-9);
    // And the defining equation holds.
    const double back =
        std::exp(-closed * closed * alpha / ((1.0 + closed) * (2.0 + closed)));
    CHECK(std::abs(back - beta) / beta < 1e-9);
  }
  CHECK(analysis::g(1e4, kEps30) == doctest::Approx(0.06776).epsilon(1e-3));
  CHECK(analysis::g(25.0, 0.009365) == doctest::Approx(1.1051).epsilon(1e-3));
  CHECK_THROWS(analysis::g(0.0, 0.5));
  CHECK_THROWS(analysis::g(10.0, 1.5));
}

TEST_CASE("g decreases in alpha at fixed beta") {
  // The closed form requires alpha > -ln(beta) (positive denominator).
  double prev = 10.0;
  for (double alpha : {10.0, 100.0, 1000.0, 10000.0}) {
    const double v = analysis::g(alpha, 0.01);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("cost table reproduces the published comparison") {
  analysis::HijackParams base;
  const auto rows = analysis::cost_table(base);
  REQUIRE(rows.size() == 6);

  struct Expect {
    double n_req, rho;
    std::uint64_t users;
    double c;
    std::uint64_t baseline;
  };
  // Rows: rho=0.5 x n_req {50,100,200}, then rho=0.3.
  const Expect expect[6] = {
      {50, 0.5, 237521, 38.1, 39},  {100, 0.5, 305977, 69.4, 70},
      {200, 0.5, 358413, 128.3, 129}, {50, 0.3, 105398, 44.7, 20},
      {100, 0.3, 154328, 84.5, 37}, {200, 0.3, 192730, 161.5, 70},
  };
  for (int i = 0; i < 6; ++i) {
    CHECK(rows[i].n_req == expect[i].n_req);
    CHECK(rows[i].rho == expect[i].rho);
    CHECK(std::llabs(static_cast<long long>(rows[i].users_needed) -
                     static_cast<long long>(expect[i].users)) <= 1);
    CHECK(rows[i].c == doctest::Approx(expect[i].c).epsilon(0.1 / expect[i].c));
    CHECK(rows[i].baseline == expect[i].baseline);
  }

  // gamma strictly increasing in n_req at fixed rho.
  CHECK(rows[0].users_needed < rows[1].users_needed);
  CHECK(rows[1].users_needed < rows[2].users_needed);
  CHECK(rows[3].users_needed < rows[4].users_needed);
  CHECK(rows[4].users_needed < rows[5].users_needed);
}

TEST_CASE("apathy adjustment") {
  CHECK(analysis::hijack_cost_apathy(0.237521, 0.0) ==
        doctest::Approx(0.237521));
  CHECK(analysis::hijack_cost_apathy(0.237521, 0.5) ==
        doctest::Approx(0.1348).epsilon(1e-3));
  for (double gamma : {0.1, 0.3, 0.5}) {
    double prev = gamma;
    for (double a : {0.1, 0.3, 0.6, 0.9}) {
      const double gp = analysis::hijack_cost_apathy(gamma, a);
      CHECK(gp < prev);
      prev = gp;
    }
  }
  CHECK_THROWS(analysis::hijack_cost_apathy(0.5, 1.0));
}

TEST_CASE("baseline limiting case: everyone reviews everything") {
  analysis::HijackParams p;
  p.rho = 0.5;
  // c = M means kappa = n.
  const double c = p.m_polls;
  CHECK(analysis::baseline_cost(p, c) ==
        static_cast<std::uint64_t>(p.n_users));
}

TEST_CASE("monte carlo hijack frequency respects the bound at small scale") {
  analysis::HijackParams p;
  p.m_polls = 500;
  p.n_users = 10000;
  p.n_req = 100;
  p.theta = 0.05;
  p.epsilon = 1e-4;
  p.rho = 0.5;
  const double gamma = analysis::hijack_cost(p);

  CHECK(analysis::monte_carlo_hijack(p, 0.0, 1, 1) == 0.0);

  // At the computed cost the hijacked fraction stays at or below theta.
  const double at_gamma = analysis::monte_carlo_hijack(p, gamma, 1, 2);
  CHECK(at_gamma <= p.theta);

  // The bound is not vacuous: double the adversary and theta is blown.
  const double at_2gamma =
      analysis::monte_carlo_hijack(p, std::min(1.0, 2.0 * gamma), 1, 3);
  CHECK(at_2gamma >= p.theta);

  // Deterministic per seed.
  CHECK(analysis::monte_carlo_hijack(p, gamma, 1, 7) ==
        analysis::monte_carlo_hijack(p, gamma, 1, 7));
}
