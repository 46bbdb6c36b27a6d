// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "rbc/security.hpp"
#include "support/oracles.hpp"

using namespace rbc;
using namespace rbc::security;

namespace {

const double kLambda1 = states::lambda1_of(states::bb84_family());  // 0.1464466...

ProtocolParams reported_params() {
  ProtocolParams p;
  p.n = 2'200'000;
  p.mu = 0.05;
  p.eta = 0.06;
  p.q = 0.034;
  p.delta = 0.05;
  p.gamma = 0.002;
  return p;
}

}  // namespace

TEST_CASE("error allowance and detection threshold keep exact boundaries") {
  CHECK(error_allowance(0.1, 20) == 2);        // 2.0000 exactly: boundary included
  CHECK(error_allowance(0.05, 4400) == 220);
  CHECK(error_allowance(0.0, 10) == 0);
  CHECK(error_allowance(1.0, 10) == 10);
  CHECK(error_allowance(0.33, 10) == 3);       // 3.3 floors to 3
  CHECK(detection_threshold(0.002, 2'200'000) == 4400);
  CHECK(detection_threshold(0.0021, 1000) == 3);  // 2.1 ceils to 3
}

TEST_CASE("eps_exact closed cases") {
  CHECK(eps_exact(1, 0.0, kLambda1) == doctest::Approx(0.8535534).epsilon(1e-7));
  CHECK(eps_exact(10, 0.0, kLambda1) == doctest::Approx(std::pow(1.0 - kLambda1, 10)).epsilon(1e-12));
  CHECK(eps_exact(10, 0.0, kLambda1) == doctest::Approx(0.2053).epsilon(1e-3));
  CHECK_THROWS_AS(eps_exact(10, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(eps_exact(10, 0.0, 0.6), std::invalid_argument);
}

TEST_CASE("eps_exact against the long-double direct sum, n <= 30") {
  for (int n : {1, 2, 5, 10, 20, 30}) {
    for (double delta : {0.0, 0.1, 0.3, 0.5, 1.0}) {
      long double direct = 0.0L;
      const long allow = error_allowance(delta, n);
      for (long k = 0; k <= allow; ++k)
        direct += oracles::binom_pmf(n, static_cast<int>(k), static_cast<long double>(kLambda1));
      CHECK(eps_exact(n, delta, kLambda1) ==
            doctest::Approx(static_cast<double>(direct)).epsilon(1e-12));
    }
  }
}

TEST_CASE("eps_exact n=20 delta=0.1 three-term sum") {
  // sum_{k=0}^{2} C(20,k) l0^{20-k} l1^k
  const double l0 = 1.0 - kLambda1, l1 = kLambda1;
  const double expect = std::pow(l0, 20) + 20.0 * std::pow(l0, 19) * l1 +
                        190.0 * std::pow(l0, 18) * l1 * l1;
  CHECK(eps_exact(20, 0.1, kLambda1) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("eps_exact monotone in delta, decreasing in n at delta=0") {
  double prev = 0.0;
  for (double d = 0.0; d <= 1.0; d += 0.05) {
    const double v = eps_exact(50, d, kLambda1);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  for (int n = 1; n < 100; ++n)
    CHECK(eps_exact(n + 1, 0.0, kLambda1) < eps_exact(n, 0.0, kLambda1));
}

TEST_CASE("chernoff bound dominates eps_exact") {
  for (int n : {10, 100, 1000, 10000}) {
    for (double delta : {0.0, 0.01, 0.05, 0.1, 0.14}) {
      if (delta >= kLambda1) continue;
      CHECK(eps_chernoff(n, delta, kLambda1) >= eps_exact(n, delta, kLambda1));
    }
  }
  CHECK(eps_chernoff(100, kLambda1, kLambda1) == 1.0);  // vanishing exponent
  CHECK(eps_chernoff(100, 0.99, kLambda1) == 1.0);
}

TEST_CASE("chernoff tails dominate exact binomial tails on the full grid") {
  for (int n = 1; n <= 60; ++n) {
    for (int pi = 1; pi <= 19; ++pi) {
      const double p = 0.05 * pi;
      const double mean = n * p;
      for (int s = 0; s <= n; ++s) {
        const auto t = chernoff_tails(mean, s);
        const long double below = s >= 1 ? oracles::binom_cdf(n, s - 1, p) : 0.0L;
        const long double above = 1.0L - oracles::binom_cdf(n, s, p);
        CHECK(t.lower >= static_cast<double>(below) - 1e-15);
        CHECK(t.upper >= static_cast<double>(above) - 1e-15);
      }
    }
  }
}

TEST_CASE("chernoff tails dominate exact poisson tails, mean <= 50") {
  for (double mean = 0.5; mean <= 50.0; mean += 0.5) {
    const long smax = static_cast<long>(mean + 10.0 * std::sqrt(mean)) + 20;
    for (long s = 0; s <= smax; ++s) {
      const auto t = chernoff_tails(mean, static_cast<double>(s));
      const long double below = s >= 1 ? oracles::poisson_cdf(mean, s - 1) : 0.0L;
      const long double above = 1.0L - oracles::poisson_cdf(mean, s);
      CHECK(t.lower >= static_cast<double>(below) - 1e-15);
      CHECK(t.upper >= static_cast<double>(above) - 1e-15);
    }
  }
}

TEST_CASE("chernoff tails at s = mu are trivial") {
  const auto t = chernoff_tails(6.0, 6.0);
  CHECK(t.lower == 1.0);
  CHECK(t.upper == 1.0);
  // binomial n=30 p=0.2, s=3
  const auto b = chernoff_tails(6.0, 3.0);
  CHECK(b.lower >= static_cast<double>(oracles::binom_cdf(30, 2, 0.2L)));
}

TEST_CASE("asymptotic rhs: reported values and edge cases") {
  CHECK(asymptotic_rhs(0.05, 0.034, kLambda1) == doctest::Approx(1.5747e-3).epsilon(1e-3));
  CHECK(asymptotic_rhs(0.05, 0.05, kLambda1) == doctest::Approx(1.8359e-3).epsilon(1e-3));
  CHECK(asymptotic_rhs(0.0, 0.034, kLambda1) == 0.0);
  // qber = 0: exactly p_multi
  CHECK(asymptotic_rhs(0.05, 0.0, kLambda1) == doctest::Approx(1.2091e-3).epsilon(1e-4));
  CHECK(std::isinf(asymptotic_rhs(0.05, kLambda1, kLambda1)));
  CHECK(std::isinf(asymptotic_rhs(0.05, 0.99, kLambda1)));
}

TEST_CASE("asymptotic rhs monotone in mu and qber") {
  double prev = 0.0;
  for (double mu = 0.01; mu <= 0.5; mu += 0.01) {
    const double v = asymptotic_rhs(mu, 0.034, kLambda1);
    CHECK(v > prev);
    prev = v;
  }
  prev = 0.0;
  for (double q = 0.0; q < kLambda1; q += 0.01) {
    const double v = asymptotic_rhs(0.05, q, kLambda1);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("feasible region at the reported operating point") {
  const auto r = feasible_region(reported_params());
  CHECK(r.robust_ok);
  CHECK(r.secure_ok);
  CHECK(r.feasible_ok);
  CHECK(r.lhs_security == doctest::Approx(1.000108).epsilon(5e-5 / 1.000108));
  CHECK(r.lhs_collapsed > 1.0);
  CHECK(r.e_nm == doctest::Approx(2660.03).epsilon(1e-3));
  CHECK(r.k_t == doctest::Approx(2897.75).epsilon(1e-3));
}

TEST_CASE("feasible region boundary violations") {
  auto p = reported_params();
  p.gamma = 0.004;  // exceeds 1 - e^{-mu eta}: honest Bob cannot reach the threshold
  auto r = feasible_region(p);
  CHECK_FALSE(r.robust_ok);
  CHECK_FALSE(r.feasible_ok);
  CHECK(r.secure_ok);  // the security inequality itself strengthens with gamma

  p = reported_params();
  p.delta = 0.03;  // delta <= Q
  r = feasible_region(p);
  CHECK_FALSE(r.robust_ok);
  CHECK_FALSE(r.feasible_ok);
}

TEST_CASE("effective delta") {
  CHECK(effective_delta(2'200'000, 0.002, 0.05, 0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(effective_delta(2'200'000, 0.002, 0.05, 2660) ==
        doctest::Approx(0.1264368).epsilon(1e-6));
  CHECK(effective_delta(2'200'000, 0.002, 0.05, 4399) == doctest::Approx(220.0));
  CHECK(std::isinf(effective_delta(2'200'000, 0.002, 0.05, 4400)));
  CHECK(std::isinf(effective_delta(2'200'000, 0.002, 0.05, 9999)));
}

TEST_CASE("eps_finite reference evaluation at the reported operating point") {
  // Frozen from an independent implementation of the same sum (scratch
  // oracle, compensated summation): the bound is dominated by the bulk of
  // the N_m distribution and is of order 1e-1 at mu = 0.05 ...
  const double v = eps_finite(reported_params());
  CHECK(v == doctest::Approx(0.1267314).epsilon(1e-4));
  // ... and of order 1e-7 at mu = 0.045, the lower edge of the stated mu
  // uncertainty band.
  auto p = reported_params();
  p.mu = 0.045;
  CHECK(eps_finite(p) == doctest::Approx(1.0239e-7).epsilon(1e-3));
}

TEST_CASE("eps_finite reduces to the chernoff bound when mu -> 0") {
  auto p = reported_params();
  p.mu = 0.0;
  const double direct = eps_chernoff(detection_threshold(p.gamma, p.n), p.delta, kLambda1);
  CHECK(eps_finite(p) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("eps_finite trivial regimes") {
  auto p = reported_params();
  p.delta = 0.2;  // delta >= lambda1: no secure k exists
  CHECK(eps_finite(p) == 1.0);

  p = reported_params();
  p.n = 100;  // gamma n < 1
  CHECK_THROWS_AS(eps_finite(p), std::invalid_argument);
}

TEST_CASE("eps_finite stays a bound when the poisson mass crosses k_t") {
  // mu large enough that E[N_m] exceeds gamma n (1 - delta/lambda1)
  auto p = reported_params();
  p.mu = 0.08;
  const double v = eps_finite(p);
  CHECK(v > 0.9);
  CHECK(v <= 1.0);
}

TEST_CASE("coin guess closed form: trivial tables") {
  Eigen::Matrix2d fair;
  fair << 0.5, 0.5, 0.5, 0.5;
  CHECK(coin_guess_max(fair, 8, 0.0) == doctest::Approx(std::pow(2.0, -8)).epsilon(1e-12));
  Eigen::Matrix2d det;
  det << 1.0, 0.3, 0.0, 0.7;
  CHECK(coin_guess_max(det, 5, 0.0) == 1.0);
  Eigen::Matrix2d bad;
  bad << 0.9, 0.3, 0.2, 0.7;
  CHECK_THROWS_AS(coin_guess_max(bad, 5, 0.0), std::invalid_argument);
}

TEST_CASE("coin guess equals the exhaustive rational brute force") {
  using oracles::Rat;
  const oracles::CoinTable tables[] = {
      {{{Rat::of(3, 4), Rat::of(2, 3)}, {Rat::of(1, 4), Rat::of(1, 3)}}},
      {{{Rat::of(1, 2), Rat::of(1, 2)}, {Rat::of(1, 2), Rat::of(1, 2)}}},
      {{{Rat::of(9, 10), Rat::of(3, 5)}, {Rat::of(1, 10), Rat::of(2, 5)}}},
  };
  for (const auto& table : tables) {
    Eigen::Matrix2d m;
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) m(b, c) = table[b][c].to_double();
    for (int n = 1; n <= 5; ++n) {
      for (int allow = 0; allow <= n; ++allow) {
        const Rat brute = oracles::coin_brute_force_max(table, n, allow);
        const Rat closed = oracles::coin_closed_form(table, n, allow);
        CHECK(brute == closed);  // exact rational equality
        const double delta = static_cast<double>(allow) / static_cast<double>(n);
        CHECK(coin_guess_max(m, n, delta) ==
              doctest::Approx(brute.to_double()).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("analyze fills a coherent report") {
  const auto r = analyze(reported_params());
  CHECK(r.lambda1 == doctest::Approx(kLambda1));
  CHECK(r.lambda0 == doctest::Approx(1.0 - kLambda1));
  CHECK(r.eps_exact <= r.eps_chernoff);
  CHECK(r.eps_exact >= 0.0);
  CHECK(r.eps_finite <= 1.0);
  CHECK(r.asymptotic_rhs == doctest::Approx(1.8359e-3).epsilon(1e-3));
}

TEST_CASE("parameter validation") {
  auto p = reported_params();
  p.n = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = reported_params();
  p.gamma = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = reported_params();
  p.delta = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = reported_params();
  p.r_balance = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
