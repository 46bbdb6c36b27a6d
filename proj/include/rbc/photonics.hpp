// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rbc/rng.hpp"

namespace rbc::photonics {

// Phase-randomized weak-coherent source and the loss/noise channel to Bob.
struct SourceParams {
  double mu = 0.0;         // mean photons per pulse
  double eta = 1.0;        // detection efficiency
  double q = 0.0;          // bit-flip probability on matched-basis outcomes
  double dark_rate = 0.0;  // per-pulse dark-count probability (extension)

  void validate() const;
};

// Probability that Bob detects exactly r photons: e^{-mu.eta} (mu.eta)^r / r!
double p_r(double mu, double eta, long r);

// Probability of a multi-photon (r >= 2) emission: 1 - e^{-mu}(1 + mu),
// evaluated in a form stable for small mu.
double p_multi(double mu);

class PhotonCountDist {
 public:
  PhotonCountDist(double mu, double eta);
  double mu_eff() const { return mu_eff_; }
  double pmf(long r) const;

 private:
  double mu_eff_;
};

// Per-pulse truth record. The protocol layer owns the valid-set bookkeeping;
// this is the physical outcome of one round.
struct RoundRecord {
  long index = 0;
  int x = 0;                 // Alice's encoded bit
  int theta = 0;             // Alice's basis
  long photons_emitted = 0;
  long photons_detected = 0;
  bool detected = false;
  bool has_outcome = false;  // y is meaningful iff detected
  int y = 0;                 // Bob's outcome
};

// One honest round: Poisson(mu) photons, each surviving with prob eta,
// detection on >= 1 survivor or a dark count. On a matched basis the
// outcome equals x flipped with probability q; otherwise it is uniform.
RoundRecord sample_round(const SourceParams& p, int x, int theta, int bob_basis, Rng& rng);

}  // namespace rbc::photonics
