// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rbc/experiment.hpp"

using namespace rbc;
using namespace rbc::experiment;

namespace {

std::string base_config(const std::string& run_extra = "") {
  return R"(schema_version = 1
[params]
n = 20000
mu = 0.05
eta = 0.06
qber = 0.034
delta = 0.08
gamma = 0.0015
r_balance = 0.95
balanced_basis = 0
family = bb84

[layout]
B1 = 46.20 6.15 400
A1 = 46.20 6.15 400
B2 = 1.30 103.80 70
A2 = 1.30 103.80 70

[run]
seeds = 4242
n_commitments = 6
mode = honest
)" + run_extra;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing covers all sections") {
  const auto cfg = parse_config(base_config());
  CHECK(cfg.schema_version == 1);
  CHECK(cfg.params.n == 20000);
  CHECK(cfg.params.mu == 0.05);
  CHECK(cfg.params.r_balance == 0.95);
  CHECK(cfg.sites.size() == 4);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{4242});
  CHECK(cfg.n_commitments == 6);
  CHECK(cfg.mode == Mode::honest);
  CHECK(cfg.layout().chord_distance_m() == doctest::Approx(9.354e6).epsilon(0.003));
}

TEST_CASE("config rejection paths") {
  CHECK_THROWS(parse_config("schema_version = 2\n"));
  CHECK_THROWS(parse_config(base_config("bogus_key = 1\n")));
  CHECK_THROWS(parse_config(base_config() + "[nosuch]\nx = 1\n"));
  // missing B2
  std::string broken = base_config();
  broken.erase(broken.find("B2 = "), 22);
  CHECK_THROWS(parse_config(broken));
  // empty seeds
  std::string noseed = base_config();
  noseed.replace(noseed.find("seeds = 4242"), 12, "seeds =     ");
  CHECK_THROWS(parse_config(noseed));
}

TEST_CASE("bloch family override changes lambda1") {
  std::string text = base_config();
  text.replace(text.find("family = bb84"), 13, "family = bloch 0 1.2");
  const auto cfg = parse_config(text);
  CHECK(states::lambda1_of(cfg.params.family) < 0.1465);
  CHECK(states::lambda1_of(cfg.params.family) > 0.0);
}

TEST_CASE("seed derivation: explicit list first, splits beyond it") {
  auto cfg = parse_config(base_config());
  cfg.seeds = {10, 20};
  CHECK(cfg.seed_for(0) == 10);
  CHECK(cfg.seed_for(1) == 20);
  CHECK(cfg.seed_for(2) != cfg.seed_for(3));
  CHECK(cfg.seed_for(2) == Rng(10).split(2).seed());
}

TEST_CASE("run_experiment: honest aggregates are consistent") {
  const auto cfg = parse_config(base_config());
  const auto sum = run_experiment(cfg);
  REQUIRE(sum.rows.size() == 6);
  double pdet = 0.0;
  std::int64_t accepted = 0;
  for (const auto& r : sum.rows) {
    pdet += r.p_det;
    accepted += r.accepted ? 1 : 0;
    CHECK(r.b == r.index % 2);  // alternating basis
  }
  CHECK(sum.mean_p_det == doctest::Approx(pdet / 6.0));
  CHECK(sum.acceptance_rate == doctest::Approx(accepted / 6.0));
  CHECK(sum.report.lambda1 == doctest::Approx(0.1464466).epsilon(1e-6));
  CHECK_FALSE(sum.records.empty());
}

TEST_CASE("byte-identical outputs for identical config and seeds") {
  TempDir d1("rbc_out_a"), d2("rbc_out_b");
  auto cfg = parse_config(base_config());
  cfg.output_dir = d1.path.string();
  run_experiment(cfg);
  cfg.output_dir = d2.path.string();
  run_experiment(cfg);
  for (const char* name :
       {"commitments.csv", "pdet.csv", "qber.csv", "records.log", "security_report.txt",
        "boundary.csv"}) {
    CHECK(slurp(d1.path / name) == slurp(d2.path / name));
  }
}

TEST_CASE("aggregates recomputable from the per-commitment file") {
  TempDir dir("rbc_out_c");
  auto cfg = parse_config(base_config());
  cfg.output_dir = dir.path.string();
  const auto sum = run_experiment(cfg);

  std::ifstream in(dir.path / "commitments.csv");
  std::string line;
  std::getline(in, line);  // digest
  CHECK(line.rfind("# config_digest=", 0) == 0);
  std::getline(in, line);  // schema
  std::getline(in, line);  // header
  double pdet = 0.0, qber = 0.0;
  long rows = 0, accepted = 0, sifted_rows = 0;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    long index, b, a, m, n_sifted, n_err;
    unsigned long long seed;
    int acc;
    std::string verdict;
    double pd, qb;
    is >> index >> seed >> b >> a >> verdict >> acc >> m >> pd >> qb >> n_sifted >> n_err;
    REQUIRE_FALSE(is.fail());
    ++rows;
    accepted += acc;
    pdet += pd;
    if (n_sifted > 0) {
      qber += qb;
      ++sifted_rows;
    }
  }
  CHECK(rows == 6);
  CHECK(sum.mean_p_det == doctest::Approx(pdet / rows).epsilon(1e-12));
  CHECK(sum.acceptance_rate == doctest::Approx(static_cast<double>(accepted) / rows));
  CHECK(sum.mean_qber == doctest::Approx(qber / sifted_rows).epsilon(1e-12));
}

TEST_CASE("attack mode reports successes") {
  auto cfg = parse_config(base_config());
  cfg.mode = Mode::multiphoton_attack;
  cfg.params.mu = 1.0;
  cfg.params.gamma = 0.002;
  cfg.n_commitments = 5;
  const auto sum = run_experiment(cfg);
  CHECK(sum.attack_successes == 5);  // mu = 1 floods the quota with multi-photon rounds
  CHECK(sum.acceptance_rate == doctest::Approx(1.0));
}

TEST_CASE("three-agent mode end to end") {
  auto cfg = parse_config(base_config());
  // place the extra pair at the great-circle arc midpoint
  const Eigen::Vector3d mid = (spacetime::to_cartesian(cfg.sites.at("B1")).normalized() +
                               spacetime::to_cartesian(cfg.sites.at("B2")).normalized())
                                  .normalized();
  const spacetime::Geodetic g{std::asin(mid.z()) * 180.0 / M_PI,
                              std::atan2(mid.y(), mid.x()) * 180.0 / M_PI, 0.0};
  cfg.sites["A0"] = g;
  cfg.sites["B0"] = g;
  cfg.mode = Mode::three_agent;
  cfg.n_commitments = 2;
  cfg.preshare_count = 2;
  const auto sum = run_experiment(cfg);
  CHECK(sum.acceptance_rate > 0.0);
}

TEST_CASE("boundary csv emits the secure-region curve") {
  const double lambda1 = 0.14644660940672627;
  const auto csv = boundary_csv({0.01, 0.05, 0.1}, 0.05, lambda1,
                                std::make_pair(0.05, 0.0032));
  CHECK(csv.find("mu,p_det_boundary") == 0);
  // row for mu = 0.05 carries the 0.18% boundary value
  std::istringstream rows(csv);
  std::string row;
  std::getline(rows, row);  // header
  bool found = false;
  while (std::getline(rows, row) && row.front() != '#') {
    const auto comma = row.find(',');
    if (std::abs(std::stod(row.substr(0, comma)) - 0.05) < 1e-12) {
      CHECK(std::stod(row.substr(comma + 1)) == doctest::Approx(1.8359e-3).epsilon(1e-3));
      found = true;
    }
  }
  CHECK(found);
  CHECK(csv.find("inside_secure_region") != std::string::npos);

  // operating point below the curve: flagged outside
  const auto bad = boundary_csv({0.05}, 0.05, lambda1, std::make_pair(0.05, 0.0001));
  CHECK(bad.find("outside_secure_region") != std::string::npos);

  // qber at the threshold: no secure region anywhere
  const auto inf = boundary_csv({0.01, 0.05}, lambda1, lambda1, std::nullopt);
  CHECK(inf.find("inf") != std::string::npos);
}

TEST_CASE("config digest is stable and stamped into outputs") {
  const auto cfg = parse_config(base_config());
  const auto again = parse_config(base_config());
  CHECK(config_digest(cfg) == config_digest(again));

  TempDir dir("rbc_out_d");
  auto writing = cfg;
  writing.output_dir = dir.path.string();
  run_experiment(writing);
  const auto text = slurp(dir.path / "security_report.txt");
  CHECK(text.find(config_digest(cfg)) != std::string::npos);
}

TEST_CASE("all-vacuum run aborts every commitment") {
  auto cfg = parse_config(base_config());
  cfg.params.mu = 0.0;
  cfg.n_commitments = 1;
  const auto sum = run_experiment(cfg);
  CHECK(sum.acceptance_rate == 0.0);
  CHECK(sum.rows[0].verdict == protocol::Verdict::detection_below_gamma);
  CHECK(sum.rows[0].m == 0);
}

TEST_CASE("full-scale commitments land in the reported QBER band") {
  auto cfg = parse_config(base_config());
  cfg.params.n = 2'200'000;
  cfg.params.delta = 0.05;
  cfg.params.gamma = 0.002;
  cfg.params.dark_rate = 2e-4;
  cfg.n_commitments = 20;
  const auto sum = run_experiment(cfg);
  CHECK(sum.mean_qber > 0.028);
  CHECK(sum.mean_qber < 0.043);
  CHECK(sum.mean_p_det == doctest::Approx(0.0032 * 0.975).epsilon(0.03));
  CHECK(sum.acceptance_rate >= 0.95);
}
