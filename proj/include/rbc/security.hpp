// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "rbc/states.hpp"

namespace rbc::security {

// All scalar knobs of one protocol instance.
struct ProtocolParams {
  std::int64_t n = 0;       // rounds (pulses sent)
  double mu = 0.0;          // mean photons per pulse
  double eta = 1.0;         // detection efficiency
  double q = 0.0;           // bit-flip probability
  double dark_rate = 0.0;   // per-pulse dark-count probability
  double delta = 0.0;       // error threshold
  double gamma = 0.0;       // detection threshold
  double r_balance = 1.0;   // detection-bias balancing ratio R
  int balanced_basis = 0;   // basis whose detections are thinned by R
  states::StateFamily family = states::bb84_family();

  void validate() const;
};

struct SecurityReport {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double eps_exact = 1.0;      // binding error of the ceil(gamma n)-round single-photon game
  double eps_chernoff = 1.0;
  double asymptotic_rhs = 0.0; // RHS of the asymptotic security condition at qber = delta
  bool robust_ok = false;      // e^{-mu eta} + gamma < 1  and  Q < delta
  bool secure_ok = false;      // e^{-mu}(1+mu) + (1 - delta/lambda1) gamma > 1
  bool feasible_ok = false;    // conjunction of the three inequalities
  double eps_finite = 1.0;     // finite-size upper bound on Pr[E]
  double k_t = 0.0;            // multi-photon threshold gamma n (1 - delta/lambda1)
  double e_nm = 0.0;           // expected multi-photon rounds p_m n
  // inequality left-hand sides, for reporting
  double lhs_detection = 0.0;  // e^{-mu eta} + gamma
  double lhs_security = 0.0;   // e^{-mu}(1+mu) + (1 - delta/lambda1) gamma
  double lhs_collapsed = 0.0;  // e^{-mu}(1+mu) + (1 - Q/lambda1)(1 - e^{-mu eta})
};

// floor(delta n) with values within 1e-9 of an integer treated as that
// integer, so the non-strict threshold d_H <= delta keeps its boundary term.
std::int64_t error_allowance(double delta, std::int64_t n);

// ceil(gamma n), boundary-exact in the same way.
std::int64_t detection_threshold(double gamma, std::int64_t n);

// Exact binding error for an n-round game with error allowance floor(delta n):
//   sum_{k=0}^{floor(delta n)} C(n,k) lambda0^{n-k} lambda1^k,
// i.e. the lower binomial tail at parameter lambda1. Log-domain with
// compensated summation; integer-valued delta n includes the boundary term.
double eps_exact(std::int64_t n, double delta, double lambda1);

// Chernoff form of the same tail: exp(-1/2 (sqrt(lambda1 n) - delta n / sqrt(lambda1 n))^2)
// for delta < lambda1, else 1.
double eps_chernoff(std::int64_t n, double delta, double lambda1);

struct ChernoffTails {
  double lower = 1.0;  // bound on Pr[X < s]  (valid and nontrivial for s < mu)
  double upper = 1.0;  // bound on Pr[X > s]  (valid and nontrivial for s > mu)
};

// Tail bounds for a sum of Bernoullis (or a Poisson) with mean mu.
ChernoffTails chernoff_tails(double mu, double s);

// (1 - e^{-mu}(1+mu)) / (1 - qber/lambda1). Returns +inf when qber >= lambda1
// (no secure region).
double asymptotic_rhs(double mu, double qber, double lambda1);

// Effective fractional error allowance once n_multi rounds are won for free:
// delta gamma n / (ceil(gamma n) - n_multi); +inf when n_multi exhausts the
// detection threshold.
double effective_delta(std::int64_t n, double gamma, double delta, std::int64_t n_multi);

// Evaluates the three feasibility inequalities and fills the booleans
// (eps fields are left untouched).
SecurityReport feasible_region(const ProtocolParams& p);

// Finite-size upper bound on the cheating probability:
//   Pr[E] = sum_k Pr[E | N_m = k] Pois(k; p_m n),
// conditional terms Chernoff-bounded below the threshold k_t and trivial
// above it. The Poisson sum is truncated at mean + 12 sqrt(mean) and the
// analytic upper-Chernoff remainder is added, so the result stays a bound.
double eps_finite(const ProtocolParams& p);

// Maximum probability of guessing, within Hamming distance delta, the outcome
// string of n adversarially chosen coin flips: the table column c lists the
// outcome probabilities of coin c. Closed form with lambda0 = max entry.
double coin_guess_max(const Eigen::Matrix2d& table, std::int64_t n, double delta);

// Full report for one parameter set.
SecurityReport analyze(const ProtocolParams& p);

}  // namespace rbc::security
