// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#include "rbc/states.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace rbc::states {

namespace {

constexpr double kOrthoTol = 1e-10;

double overlap_of(const StateFamily& f) {
  double t = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 2; ++c)
      t = std::max(t, std::abs(f.psi[0][b].dot(f.psi[1][c])));
  return t;
}

void validate(const StateFamily& f) {
  for (int theta = 0; theta < 2; ++theta) {
    if (std::abs(f.psi[theta][0].norm() - 1.0) > kOrthoTol ||
        std::abs(f.psi[theta][1].norm() - 1.0) > kOrthoTol)
      throw std::invalid_argument("family states must be normalized");
    if (std::abs(f.psi[theta][0].dot(f.psi[theta][1])) > kOrthoTol)
      throw std::invalid_argument("same-basis states must be orthogonal");
    Eigen::Matrix2cd sum = f.psi[theta][0] * f.psi[theta][0].adjoint() +
                           f.psi[theta][1] * f.psi[theta][1].adjoint();
    if ((sum - Eigen::Matrix2cd::Identity()).norm() > kOrthoTol)
      throw std::invalid_argument("basis pair must resolve the identity");
  }
}

}  // namespace

StateFamily bb84_family() {
  const double s = 1.0 / std::sqrt(2.0);
  StateFamily f;
  f.psi[0][0] << 1.0, 0.0;
  f.psi[0][1] << 0.0, 1.0;
  f.psi[1][0] << s, s;
  f.psi[1][1] << s, -s;
  f.overlap_t = overlap_of(f);
  return f;
}

StateFamily family_from_bloch(double a0, double a1) {
  StateFamily f;
  for (int theta = 0; theta < 2; ++theta) {
    const double a = theta == 0 ? a0 : a1;
    f.psi[theta][0] << std::cos(a / 2.0), std::sin(a / 2.0);
    f.psi[theta][1] << -std::sin(a / 2.0), std::cos(a / 2.0);
  }
  validate(f);
  f.overlap_t = overlap_of(f);
  return f;
}

StateFamily make_family(const Qubit& psi00, const Qubit& psi10, const Qubit& psi01,
                        const Qubit& psi11) {
  StateFamily f;
  f.psi[0][0] = psi00;
  f.psi[0][1] = psi10;
  f.psi[1][0] = psi01;
  f.psi[1][1] = psi11;
  validate(f);
  f.overlap_t = overlap_of(f);
  return f;
}

MixtureSpectrum diagonalize_mixture(const Qubit& psi0, const Qubit& psi1) {
  if (std::abs(psi0.norm() - 1.0) > 1e-9 || std::abs(psi1.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("diagonalize_mixture: states must be normalized");

  const std::complex<double> ov = psi0.dot(psi1);  // c e^{i phi}
  const double c = std::abs(ov);
  const std::complex<double> phase = c > 1e-15 ? ov / c : std::complex<double>(1.0, 0.0);

  MixtureSpectrum s;
  s.lambda_plus = (1.0 + c) / 2.0;
  s.lambda_minus = (1.0 - c) / 2.0;
  s.e_plus = (psi0 + std::conj(phase) * psi1) / std::sqrt(2.0 * (1.0 + c));
  if (1.0 - c > 1e-12) {
    s.e_minus = (psi0 - std::conj(phase) * psi1) / std::sqrt(2.0 * (1.0 - c));
  } else {
    // Degenerate pair (psi1 = psi0 up to phase): any orthogonal completion.
    s.e_minus << -std::conj(s.e_plus(1)), std::conj(s.e_plus(0));
  }
  return s;
}

double lambda1_of(const StateFamily& family) {
  return (1.0 - family.overlap_t) / 2.0;
}

}  // namespace rbc::states
