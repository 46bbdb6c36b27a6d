// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbc/rng.hpp"
#include "rbc/security.hpp"
#include "rbc/spacetime.hpp"

namespace rbc::protocol {

enum class Verdict {
  ok,
  value_mismatch,
  string_mismatch,
  qber_exceeded,
  detection_below_gamma,
  lightcone_violation,
  preshare_unavailable,  // three-agent variant: no preshared data for j
};

const char* verdict_name(Verdict v);

// What one of Bob's agents unveils.
struct OpeningMessage {
  int b = 0;
  int a = 0;
  std::vector<std::uint8_t> y;
};

struct RunOptions {
  double t_c_s = 0.0;            // commit instant (protocol frame)
  double open_margin_s = 1e-5;   // opens scheduled at t_c + d/2c - margin
  std::optional<int> force_b;    // pin Bob's basis (tests, alternating runs)
};

// Committed/opened data of one protocol run, including spacetime stamps.
struct Transcript {
  security::ProtocolParams params;
  std::int64_t n = 0;
  int b = 0;        // Bob's random basis
  int a = 0;        // committed value
  int b_prime = 0;  // b xor a, announced at commit time by both agents
  std::vector<std::uint32_t> valid_set;             // M, ascending round index
  std::vector<std::uint8_t> x_m, theta_m, y_m;      // restricted to M
  int commit_b_prime_1 = 0, commit_b_prime_2 = 0;   // per-site commit messages
  OpeningMessage open1, open2;
  spacetime::SpacetimeEvent commit_ev1, commit_ev2, open_ev1, open_ev2;
  std::int64_t detected_raw = 0;  // clicks before bias balancing
  bool aborted = false;
  Verdict abort_reason = Verdict::ok;

  std::size_t m() const { return valid_set.size(); }
  double p_det() const { return n > 0 ? static_cast<double>(m()) / static_cast<double>(n) : 0.0; }
};

struct VerifyOutcome {
  bool accepted = false;
  Verdict reason = Verdict::ok;
  double observed_qber = 0.0;
  std::int64_t n_sifted = 0;
  std::int64_t n_err = 0;
};

// Normalised Hamming distance; inputs must be equal-length and nonempty.
double hamming_distance(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y);

inline int delayed_choice_commit(int b, int a) { return b ^ a; }

// Keeps detections in the favored basis with probability r, all others
// unconditionally, equalising the declared per-basis detection rates.
std::vector<std::uint8_t> balance_detections(const std::vector<std::uint8_t>& raw,
                                             const std::vector<std::uint8_t>& round_basis,
                                             int favored_basis, double r, Rng& rng);

// Plays n rounds over the simulated source/channel, applies detection
// balancing, assembles the valid set and the commit-time messages, and
// schedules honest open events. Aborts (in the transcript) when
// m < ceil(gamma n).
Transcript run_commit_phase(const security::ProtocolParams& params, int a,
                            const spacetime::SiteLayout& layout, Rng rng,
                            const RunOptions& opts = {});

// Re-schedules the open events (tests inject timing skew through this).
void schedule_open(Transcript& t, const spacetime::SiteLayout& layout, double t1_s, double t2_s);

// The three verification conditions plus the light-cone window check, in
// canonical order: detection, value, string, qber, lightcone.
VerifyOutcome open_and_verify(const Transcript& t, double delta,
                              const spacetime::SiteLayout& layout,
                              const spacetime::WindowOptions& wopt = {});

struct ThreeAgentOptions {
  std::int64_t preshare_count = 1;
  double equidistance_tol_m = 1000.0;
  RunOptions run;
};

// Delayed-choice commitment through a third agent pair (A0/B0) equidistant
// from the endpoints: B0 commits a = b_j xor b' by sending (b', j) at t_c;
// B1/B2 unveil the preshared (b_j, y_j) at the end of the window.
Transcript run_three_agent_variant(const security::ProtocolParams& params,
                                   const spacetime::SiteLayout& layout, int a,
                                   std::int64_t j_index, Rng rng,
                                   const ThreeAgentOptions& opts = {});

// Line-delimited structured records, one per phase event:
//   <commitment> <phase> <site> <time_ns> <payload-digest>
// Bit strings are hex-encoded into the digested payload, most significant
// bit first (round with the smallest index).
std::vector<std::string> transcript_records(const Transcript& t, std::int64_t commitment_index,
                                            const VerifyOutcome* verdict = nullptr);

std::string bits_to_hex(std::span<const std::uint8_t> bits);

}  // namespace rbc::protocol
