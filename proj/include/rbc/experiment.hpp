// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rbc/protocol.hpp"
#include "rbc/security.hpp"
#include "rbc/spacetime.hpp"

namespace rbc::experiment {

enum class Mode { honest, multiphoton_attack, three_agent };

struct ExperimentConfig {
  int schema_version = 1;
  security::ProtocolParams params;
  std::map<std::string, spacetime::Geodetic> sites;
  std::vector<std::uint64_t> seeds;
  std::int64_t n_commitments = 1;
  Mode mode = Mode::honest;
  std::string output_dir;  // empty: compute only, write nothing
  double open_margin_s = 1e-5;
  double tolerance_s = 1e-6;
  double transfer_time_s = 0.0;
  std::int64_t preshare_count = 4;       // three-agent
  double equidistance_tol_m = 1000.0;    // three-agent
  std::string source_text;               // verbatim config, for the digest

  void validate() const;
  spacetime::SiteLayout layout() const { return spacetime::SiteLayout(sites); }
  // Per-commitment stream: seeds[i] when enough are listed, otherwise
  // deterministic splits of seeds[0].
  std::uint64_t seed_for(std::int64_t index) const;
};

// Key/value sections:  schema_version at top, then [params], [layout], [run].
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::string config_digest(const ExperimentConfig& cfg);

struct CommitmentRow {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  int b = 0;
  int a = 0;
  protocol::Verdict verdict = protocol::Verdict::ok;
  bool accepted = false;
  std::int64_t m = 0;
  double p_det = 0.0;
  double qber = 0.0;
  std::int64_t n_sifted = 0;
  std::int64_t n_err = 0;
};

struct RunSummary {
  std::vector<CommitmentRow> rows;
  double mean_p_det = 0.0;
  double mean_qber = 0.0;   // over runs with sifted rounds
  double acceptance_rate = 0.0;
  std::int64_t attack_successes = 0;
  security::SecurityReport report;
  std::vector<std::string> records;  // phase-event log lines
};

// Executes n_commitments runs (basis alternating with the index in honest
// modes) in parallel workers with one RNG stream each, assembles the
// summary, and writes all output files when output_dir is set. Infeasible
// parameters are reported, not fatal.
RunSummary run_experiment(const ExperimentConfig& cfg);

// Boundary of the asymptotically secure region: rows (mu, rhs). Values with
// no secure region print as inf. The optional operating point is appended as
// a comment flagged inside/outside.
std::string boundary_csv(const std::vector<double>& mu_grid, double qber, double lambda1,
                         std::optional<std::pair<double, double>> operating_point);

void write_outputs(const ExperimentConfig& cfg, const RunSummary& summary);

}  // namespace rbc::experiment
