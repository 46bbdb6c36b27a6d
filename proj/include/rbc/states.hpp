// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace rbc::states {

using Qubit = Eigen::Vector2cd;

// Four qubit states psi[theta][x] with the two states of each basis
// orthogonal (so each pair resolves the identity). The overlap parameter
//   t = max_{b,c} |<psi_b^0 | psi_c^1>|
// controls the security threshold lambda1 = (1 - t) / 2.
struct StateFamily {
  Qubit psi[2][2];
  double overlap_t = 0.0;

  const Qubit& state(int x, int theta) const { return psi[theta][x]; }
};

// Spectrum of rho = (|psi0><psi0| + |psi1><psi1|) / 2.
struct MixtureSpectrum {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  Qubit e_plus;
  Qubit e_minus;
};

// The exact BB84 family: {|0>, |1>} and {|+>, |->}; t = 1/sqrt(2).
StateFamily bb84_family();

// Family whose basis-theta pair lies at Bloch angle a_theta (radians) in
// the x-z plane; bb84 corresponds to (0, pi/2).
StateFamily family_from_bloch(double a0, double a1);

// Validated constructor from explicit states (orthogonality within 1e-10).
StateFamily make_family(const Qubit& psi00, const Qubit& psi10, const Qubit& psi01,
                        const Qubit& psi11);

// Closed-form diagonalisation of the two-pure-state mixture:
// lambda_pm = (1 pm c)/2 with <psi0|psi1> = c e^{i phi}, eigenvectors
// (|psi0> pm e^{-i phi}|psi1>) normalized. Inputs must be unit vectors.
MixtureSpectrum diagonalize_mixture(const Qubit& psi0, const Qubit& psi1);

double lambda1_of(const StateFamily& family);

}  // namespace rbc::states
