// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#include "rbc/security.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rbc/photonics.hpp"

namespace rbc::security {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_poisson_pmf(std::int64_t k, double mean) {
  return -mean + static_cast<double>(k) * std::log(mean) - std::lgamma(k + 1.0);
}

struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

}  // namespace

std::int64_t error_allowance(double delta, std::int64_t n) {
  const double t = delta * static_cast<double>(n);
  const double r = std::nearbyint(t);
  const double k = (std::abs(t - r) < 1e-9 * std::max(1.0, std::abs(t))) ? r : std::floor(t);
  if (k < 0) return 0;
  if (k > static_cast<double>(n)) return n;
  return static_cast<std::int64_t>(k);
}

std::int64_t detection_threshold(double gamma, std::int64_t n) {
  const double t = gamma * static_cast<double>(n);
  const double r = std::nearbyint(t);
  const double k = (std::abs(t - r) < 1e-9 * std::max(1.0, std::abs(t))) ? r : std::ceil(t);
  return static_cast<std::int64_t>(k);
}

void ProtocolParams::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  photonics::SourceParams{mu, eta, q, dark_rate}.validate();
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in [0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
  if (!(r_balance > 0.0 && r_balance <= 1.0))
    throw std::invalid_argument("r_balance must be in (0,1]");
}

double eps_exact(std::int64_t n, double delta, double lambda1) {
  if (n < 1) throw std::invalid_argument("eps_exact: n must be >= 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("eps_exact: delta in [0,1]");
  if (!(lambda1 > 0.0 && lambda1 <= 0.5))
    throw std::invalid_argument("eps_exact: lambda1 must be in (0, 1/2]");
  const double lambda0 = 1.0 - lambda1;
  const std::int64_t kmax = error_allowance(delta, n);
  const double l0 = std::log(lambda0), l1 = std::log(lambda1);

  // log-sum-exp keeps relative accuracy even when every term underflows
  double peak = -kInf;
  for (std::int64_t k = 0; k <= kmax; ++k)
    peak = std::max(peak, log_choose(n, k) + (n - k) * l0 + k * l1);
  KahanSum acc;
  for (std::int64_t k = 0; k <= kmax; ++k)
    acc.add(std::exp(log_choose(n, k) + (n - k) * l0 + k * l1 - peak));
  const double v = std::exp(peak + std::log(acc.s));
  return v > 1.0 ? 1.0 : v;
}

ChernoffTails chernoff_tails(double mu, double s) {
  if (!(mu > 0.0) || !(s >= 0.0)) throw std::invalid_argument("chernoff_tails: bad arguments");
  ChernoffTails t;
  if (s < mu) {
    const double d = std::sqrt(mu) - s / std::sqrt(mu);
    t.lower = std::exp(-0.5 * d * d);
  }
  if (s > mu) {
    // (mu/s)^s e^{s-mu} in log domain
    t.upper = std::exp(s * (std::log(mu) - std::log(s)) + s - mu);
  }
  return t;
}

double eps_chernoff(std::int64_t n, double delta, double lambda1) {
  if (!(delta < lambda1)) return 1.0;
  const double nn = static_cast<double>(n);
  return chernoff_tails(lambda1 * nn, delta * nn).lower;
}

double asymptotic_rhs(double mu, double qber, double lambda1) {
  if (!(mu >= 0.0) || !(qber >= 0.0) || !(lambda1 > 0.0))
    throw std::invalid_argument("asymptotic_rhs: bad arguments");
  if (qber >= lambda1) return kInf;
  return photonics::p_multi(mu) / (1.0 - qber / lambda1);
}

double effective_delta(std::int64_t n, double gamma, double delta, std::int64_t n_multi) {
  const std::int64_t g = detection_threshold(gamma, n);
  if (n_multi >= g) return kInf;  // no single-photon rounds left: no security
  return delta * gamma * static_cast<double>(n) / static_cast<double>(g - n_multi);
}

SecurityReport feasible_region(const ProtocolParams& p) {
  p.validate();
  SecurityReport r;
  r.lambda1 = states::lambda1_of(p.family);
  r.lambda0 = 1.0 - r.lambda1;
  r.lhs_detection = std::exp(-p.mu * p.eta) + p.gamma;
  r.lhs_security = std::exp(-p.mu) * (1.0 + p.mu) + (1.0 - p.delta / r.lambda1) * p.gamma;
  r.lhs_collapsed = std::exp(-p.mu) * (1.0 + p.mu) +
                    (1.0 - p.q / r.lambda1) * (1.0 - std::exp(-p.mu * p.eta));
  const bool detection_ok = r.lhs_detection < 1.0;
  const bool error_ok = p.q < p.delta;
  r.robust_ok = detection_ok && error_ok;
  r.secure_ok = r.lhs_security > 1.0;
  r.feasible_ok = r.robust_ok && r.secure_ok;
  r.e_nm = photonics::p_multi(p.mu) * static_cast<double>(p.n);
  r.k_t = p.gamma * static_cast<double>(p.n) * (1.0 - p.delta / r.lambda1);
  return r;
}

double eps_finite(const ProtocolParams& p) {
  p.validate();
  const double lambda1 = states::lambda1_of(p.family);
  const double gn = p.gamma * static_cast<double>(p.n);
  if (gn < 1.0) throw std::invalid_argument("eps_finite: gamma n must be >= 1");
  if (p.delta >= lambda1) return 1.0;

  const double dgn = p.delta * gn;
  const double k_t = gn * (1.0 - p.delta / lambda1);
  const double mean = photonics::p_multi(p.mu) * static_cast<double>(p.n);
  auto conditional = [&](double k) {
    if (k >= k_t) return 1.0;
    return chernoff_tails((gn - k) * lambda1, dgn).lower;
  };
  if (mean <= 0.0) return conditional(0.0);

  const std::int64_t kmax = static_cast<std::int64_t>(std::ceil(mean + 12.0 * std::sqrt(mean)));
  KahanSum acc;
  for (std::int64_t k = 0; k <= kmax; ++k)
    acc.add(std::exp(log_poisson_pmf(k, mean)) * conditional(static_cast<double>(k)));
  // Mass beyond the truncation point, bounded analytically.
  const double remainder = chernoff_tails(mean, static_cast<double>(kmax)).upper;
  const double v = acc.s + remainder;
  return v > 1.0 ? 1.0 : v;
}

double coin_guess_max(const Eigen::Matrix2d& table, std::int64_t n, double delta) {
  for (int c = 0; c < 2; ++c) {
    if (std::abs(table.col(c).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("coin_guess_max: columns must sum to 1");
    if (table.col(c).minCoeff() < 0.0)
      throw std::invalid_argument("coin_guess_max: negative probability");
  }
  const double lambda0 = table.maxCoeff();
  if (lambda0 >= 1.0) return 1.0;  // a deterministic coin guesses itself
  return eps_exact(n, delta, 1.0 - lambda0);
}

SecurityReport analyze(const ProtocolParams& p) {
  SecurityReport r = feasible_region(p);
  const std::int64_t g = detection_threshold(p.gamma, p.n);
  if (g >= 1) {
    r.eps_exact = eps_exact(g, p.delta, r.lambda1);
    r.eps_chernoff = eps_chernoff(g, p.delta, r.lambda1);
  }
  if (p.gamma * static_cast<double>(p.n) >= 1.0) r.eps_finite = eps_finite(p);
  r.asymptotic_rhs = asymptotic_rhs(p.mu, p.delta, r.lambda1);
  return r;
}

}  // namespace rbc::security
