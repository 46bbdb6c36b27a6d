#include <cmath>
// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Batch runner for relativistic bit commitments over a simulated
// weak-coherent channel, plus the security-bound calculators.
//
//   rbcsim run      --config FILE [--seed S] [--out DIR] [--mode M]
//   rbcsim bounds   --config FILE
//   rbcsim boundary --config FILE [--out FILE] [--qber Q]
//   rbcsim oracle-check [--max-n N]
//
// Exit codes: 0 success, 2 abort-dominated run, 1 error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "rbc/adversary.hpp"
#include "rbc/experiment.hpp"

namespace {

using namespace rbc;

int cmd_run(experiment::ExperimentConfig cfg) {
  const auto sum = experiment::run_experiment(cfg);
  std::printf("commitments: %lld  accepted: %.1f%%  mean p_det: %.5f  mean QBER: %.5f\n",
              static_cast<long long>(cfg.n_commitments), 100.0 * sum.acceptance_rate,
              sum.mean_p_det, sum.mean_qber);
  if (cfg.mode == experiment::Mode::multiphoton_attack)
    std::printf("attack successes: %lld / %lld\n",
                static_cast<long long>(sum.attack_successes),
                static_cast<long long>(cfg.n_commitments));
  if (!cfg.output_dir.empty())
    std::printf("outputs written to %s (config digest %s)\n", cfg.output_dir.c_str(),
                experiment::config_digest(cfg).c_str());
  const bool abort_dominated =
      cfg.mode != experiment::Mode::multiphoton_attack && sum.acceptance_rate < 0.5;
  return abort_dominated ? 2 : 0;
}

int cmd_bounds(const experiment::ExperimentConfig& cfg) {
  const auto rep = security::analyze(cfg.params);
  std::printf("lambda0 = %.10f\nlambda1 = %.10f\n", rep.lambda0, rep.lambda1);
  std::printf("expected multi-photon rounds E[N_m] = %.3f  (threshold k_t = %.3f)\n", rep.e_nm,
              rep.k_t);
  std::printf("eps_exact    = %.6e   (game of ceil(gamma n) rounds)\n", rep.eps_exact);
  std::printf("eps_chernoff = %.6e\n", rep.eps_chernoff);
  std::printf("eps_finite   = %.6e\n", rep.eps_finite);
  std::printf("asymptotic rhs at qber = delta (%.4f): %.6e\n", cfg.params.delta,
              rep.asymptotic_rhs);
  if (cfg.params.q < rep.lambda1)
    std::printf("asymptotic rhs at qber = Q (%.4f):     %.6e\n", cfg.params.q,
                security::asymptotic_rhs(cfg.params.mu, cfg.params.q, rep.lambda1));
  std::printf("robust_ok=%d secure_ok=%d feasible_ok=%d\n", rep.robust_ok, rep.secure_ok,
              rep.feasible_ok);
  std::printf("  detection: e^(-mu eta) + gamma = %.8f (< 1 required)\n", rep.lhs_detection);
  std::printf("  error:     Q = %.4f < delta = %.4f required\n", cfg.params.q, cfg.params.delta);
  std::printf("  security:  e^(-mu)(1+mu) + (1 - delta/lambda1) gamma = %.8f (> 1 required)\n",
              rep.lhs_security);
  std::printf("  collapsed: %.8f (> 1 required)\n", rep.lhs_collapsed);
  return 0;
}

int cmd_boundary(const experiment::ExperimentConfig& cfg, const std::string& out_path,
                 double qber) {
  std::vector<double> grid;
  for (int i = 1; i <= 200; ++i) grid.push_back(0.001 * i);
  const double lambda1 = states::lambda1_of(cfg.params.family);
  // operating point: the model's expected honest detection probability
  const double p_det = 1.0 - (1.0 - cfg.params.dark_rate) *
                                 std::exp(-cfg.params.mu * cfg.params.eta);
  const auto csv =
      experiment::boundary_csv(grid, qber, lambda1, std::make_pair(cfg.params.mu, p_det));
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
      return 1;
    }
    out << csv;
    std::printf("boundary written to %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_oracle_check(int max_n) {
  const auto family = states::bb84_family();
  bool all_ok = true;
  for (int n = 1; n <= max_n; ++n) {
    for (int j = 0; j <= n; ++j) {
      const double delta = static_cast<double>(j) / static_cast<double>(n);
      const bool ok = adversary::cheat_bound_check(n, delta, family);
      all_ok = all_ok && ok;
      std::printf("cross-game oracle n=%d delta=%d/%d: %s\n", n, j, n, ok ? "ok" : "VIOLATION");
    }
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relativistic bit-commitment simulator"};
  app.require_subcommand(1);

  std::string config_path, out_override, mode_override;
  std::uint64_t seed_override = 0;
  bool have_seed = false;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")->required();
  };

  auto* run = app.add_subcommand("run", "execute commitments and write reports");
  add_config(run);
  run->add_option("--seed", seed_override, "override the master seed")
      ->each([&](const std::string&) { have_seed = true; });
  run->add_option("--out", out_override, "override the output directory");
  run->add_option("--mode", mode_override, "honest | multiphoton_attack | three_agent");

  auto* bounds = app.add_subcommand("bounds", "print the security report");
  add_config(bounds);

  std::string boundary_out;
  double boundary_qber = -1.0;
  auto* boundary = app.add_subcommand("boundary", "emit the secure-region boundary CSV");
  add_config(boundary);
  boundary->add_option("--out", boundary_out, "output CSV path (default stdout)");
  boundary->add_option("--qber", boundary_qber, "qber to plug in (default: delta)");

  int max_n = 3;
  auto* oracle = app.add_subcommand("oracle-check", "brute-force cross-game verification");
  oracle->add_option("--max-n", max_n, "largest game size to sweep (<= 8)")
      ->check(CLI::Range(1, 8));

  CLI11_PARSE(app, argc, argv);

  try {
    if (oracle->parsed()) return cmd_oracle_check(max_n);
    auto cfg = rbc::experiment::load_config(config_path);
    if (have_seed) cfg.seeds = {seed_override};
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (!mode_override.empty()) {
      if (mode_override == "honest") cfg.mode = rbc::experiment::Mode::honest;
      else if (mode_override == "multiphoton_attack")
        cfg.mode = rbc::experiment::Mode::multiphoton_attack;
      else if (mode_override == "three_agent") cfg.mode = rbc::experiment::Mode::three_agent;
      else throw std::invalid_argument("unknown mode: " + mode_override);
    }
    cfg.validate();
    if (run->parsed()) return cmd_run(cfg);
    if (bounds->parsed()) return cmd_bounds(cfg);
    if (boundary->parsed())
      return cmd_boundary(cfg, boundary_out,
                          boundary_qber >= 0 ? boundary_qber : cfg.params.delta);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
