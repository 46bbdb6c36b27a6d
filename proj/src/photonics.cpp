// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#include "rbc/photonics.hpp"

#include <cmath>
#include <stdexcept>

namespace rbc::photonics {

void SourceParams::validate() const {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must be in [0,1]");
  if (!(q >= 0.0 && q <= 0.5)) throw std::invalid_argument("q must be in [0, 1/2]");
  if (!(dark_rate >= 0.0 && dark_rate < 1.0))
    throw std::invalid_argument("dark_rate must be in [0, 1)");
}

double p_r(double mu, double eta, long r) {
  if (!(mu >= 0.0) || !(eta >= 0.0 && eta <= 1.0) || r < 0)
    throw std::invalid_argument("p_r: bad arguments");
  const double m = mu * eta;
  if (m == 0.0) return r == 0 ? 1.0 : 0.0;
  return std::exp(-m + static_cast<double>(r) * std::log(m) - std::lgamma(r + 1.0));
}

double p_multi(double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("p_multi: mu must be >= 0");
  // 1 - e^{-mu}(1+mu) = -expm1(-mu) - mu e^{-mu}
  return -std::expm1(-mu) - mu * std::exp(-mu);
}

PhotonCountDist::PhotonCountDist(double mu, double eta) : mu_eff_(mu * eta) {
  if (!(mu >= 0.0) || !(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("PhotonCountDist: bad arguments");
}

double PhotonCountDist::pmf(long r) const {
  if (r < 0) return 0.0;
  if (mu_eff_ == 0.0) return r == 0 ? 1.0 : 0.0;
  return std::exp(-mu_eff_ + static_cast<double>(r) * std::log(mu_eff_) -
                  std::lgamma(r + 1.0));
}

RoundRecord sample_round(const SourceParams& p, int x, int theta, int bob_basis, Rng& rng) {
  p.validate();
  RoundRecord rec;
  rec.x = x;
  rec.theta = theta;
  rec.photons_emitted = rng.poisson(p.mu);
  for (long i = 0; i < rec.photons_emitted; ++i)
    if (rng.bernoulli(p.eta)) ++rec.photons_detected;
  rec.detected = rec.photons_detected >= 1;
  if (p.dark_rate > 0.0 && rng.bernoulli(p.dark_rate)) rec.detected = true;
  if (rec.detected) {
    // One draw regardless of basis match, so the stream position is
    // independent of Bob's basis choice (hiding relies on this).
    const double u = rng.uniform01();
    rec.has_outcome = true;
    rec.y = (bob_basis == theta) ? (x ^ (u < p.q ? 1 : 0)) : (u < 0.5 ? 0 : 1);
  }
  return rec;
}

}  // namespace rbc::photonics
