// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "rbc/rng.hpp"
#include "rbc/security.hpp"
#include "rbc/states.hpp"

namespace rbc::adversary {

enum class CheatKind {
  multi_photon_split,  // split multi-photon rounds, fill the quota with singles
  discard_singles,     // declare multi-photon rounds only; fails below the quota
  basis_guess,         // measure everything in the optimal intermediate basis
};

struct CheatStrategy {
  CheatKind kind = CheatKind::multi_photon_split;
  // intermediate-basis cross pair; -1 selects the maximal-overlap pair
  int guess_pair_b = -1;
  int guess_pair_c = -1;
};

// One cross-game instance for the brute-force operator oracle.
struct CrossGameInstance {
  std::int64_t n = 0;
  double delta = 0.0;
  states::StateFamily family = states::bb84_family();
  std::vector<std::uint8_t> y, z;  // target answer strings, |y| = |z| = n
};

struct AttackOutcome {
  bool success = false;          // both openings of the cross-game would verify
  std::int64_t n_multi = 0;      // multi-photon rounds declared
  std::int64_t n_single = 0;     // single-photon rounds Bob was forced to keep
  std::int64_t errors_s = 0, errors_t = 0;
  std::int64_t sifted_s = 0, sifted_t = 0;
};

// Dishonest Bob with perfect devices (eta = 1, Q = 0): declares multi-photon
// rounds first (splitting them answers both bases error-free), fills up to
// ceil(gamma n) with single-photon rounds measured in the optimal
// intermediate basis, and backreports everything else. Success means the
// unveilings of 0 at one site and 1 at the other would both be accepted.
AttackOutcome simulate_multiphoton_attack(const security::ProtocolParams& params, Rng rng);

// Same harness for any of the explicit strategies.
AttackOutcome simulate_attack(const security::ProtocolParams& params, Rng rng,
                              const CheatStrategy& strategy);

// Attainable cheating probability of the explicit measure-in-eigenbasis
// strategy: coin_guess_max over the cross-pair eigenvalue table.
double best_single_photon_guess(const states::StateFamily& family, std::int64_t n, double delta);

// Largest eigenvalue of the relaxed cross-game operator
//   B'_yz = sum_{w(x) <= delta} tensor_k rho_{x_k + y_k, x_k + z_k},
// built explicitly as a dense 2^n x 2^n matrix. n <= 8.
double cross_game_norm_relaxed(const CrossGameInstance& inst);

// Largest eigenvalue of the exact (theta-averaged) operator B_yz with the
// per-substring weight constraints. n <= 8; costlier than the relaxed form.
double cross_game_norm_exact(const CrossGameInstance& inst);

// max_{y,z} ||B'_yz|| <= eps_exact(n, delta, lambda1) + 1e-9, swept
// exhaustively. n <= 8.
bool cheat_bound_check(std::int64_t n, double delta, const states::StateFamily& family);

}  // namespace rbc::adversary
