// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#include "rbc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rbc/adversary.hpp"

namespace rbc::experiment {

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

Mode parse_mode(const std::string& v) {
  if (v == "honest") return Mode::honest;
  if (v == "multiphoton_attack") return Mode::multiphoton_attack;
  if (v == "three_agent") return Mode::three_agent;
  throw std::invalid_argument("unknown mode: " + v);
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::honest: return "honest";
    case Mode::multiphoton_attack: return "multiphoton_attack";
    case Mode::three_agent: return "three_agent";
  }
  return "?";
}

}  // namespace

void ExperimentConfig::validate() const {
  params.validate();
  if (n_commitments < 1) throw std::invalid_argument("n_commitments must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  spacetime::SiteLayout check(sites);  // validates site set
  if (mode == Mode::three_agent && (!check.has("A0") || !check.has("B0")))
    throw std::invalid_argument("three_agent mode requires A0/B0 in the layout");
}

std::uint64_t ExperimentConfig::seed_for(std::int64_t index) const {
  if (static_cast<std::size_t>(index) < seeds.size()) return seeds[index];
  return Rng(seeds[0]).split(static_cast<std::uint64_t>(index)).seed();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.source_text = text;
  std::istringstream is(text);
  std::string line, section;
  std::optional<std::pair<double, double>> bloch;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("bad section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto num = [&] { return std::stod(value); };

    if (section.empty() && key == "schema_version") {
      cfg.schema_version = static_cast<int>(num());
      if (cfg.schema_version != 1)
        throw std::invalid_argument("unsupported schema_version " + value);
    } else if (section == "params") {
      if (key == "n") cfg.params.n = static_cast<std::int64_t>(num());
      else if (key == "mu") cfg.params.mu = num();
      else if (key == "eta") cfg.params.eta = num();
      else if (key == "qber") cfg.params.q = num();
      else if (key == "dark_rate") cfg.params.dark_rate = num();
      else if (key == "delta") cfg.params.delta = num();
      else if (key == "gamma") cfg.params.gamma = num();
      else if (key == "r_balance") cfg.params.r_balance = num();
      else if (key == "balanced_basis") cfg.params.balanced_basis = static_cast<int>(num());
      else if (key == "open_margin_s") cfg.open_margin_s = num();
      else if (key == "tolerance_s") cfg.tolerance_s = num();
      else if (key == "transfer_time_s") cfg.transfer_time_s = num();
      else if (key == "family") {
        auto toks = split_ws(value);
        if (toks.size() == 1 && toks[0] == "bb84") bloch.reset();
        else if (toks.size() == 3 && toks[0] == "bloch")
          bloch = std::make_pair(std::stod(toks[1]), std::stod(toks[2]));
        else throw std::invalid_argument("family must be 'bb84' or 'bloch <a0> <a1>'");
      } else throw std::invalid_argument("unknown [params] key: " + key);
    } else if (section == "layout") {
      auto toks = split_ws(value);
      if (toks.size() != 3)
        throw std::invalid_argument("layout site needs: lat_deg lon_deg alt_m");
      cfg.sites[key] = {std::stod(toks[0]), std::stod(toks[1]), std::stod(toks[2])};
    } else if (section == "run") {
      if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& t : split_ws(value)) cfg.seeds.push_back(std::stoull(t));
      } else if (key == "n_commitments") cfg.n_commitments = static_cast<std::int64_t>(num());
      else if (key == "mode") cfg.mode = parse_mode(value);
      else if (key == "output_dir") cfg.output_dir = value;
      else if (key == "preshare_count") cfg.preshare_count = static_cast<std::int64_t>(num());
      else if (key == "equidistance_tol_m") cfg.equidistance_tol_m = num();
      else throw std::invalid_argument("unknown [run] key: " + key);
    } else {
      throw std::invalid_argument("unknown section [" + section + "]");
    }
  }
  if (bloch) cfg.params.family = states::family_from_bloch(bloch->first, bloch->second);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_digest(const ExperimentConfig& cfg) {
  return hex64(fnv1a64(cfg.source_text));
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto layout = cfg.layout();
  RunSummary sum;
  sum.report = security::analyze(cfg.params);
  sum.rows.resize(cfg.n_commitments);

  std::vector<std::vector<std::string>> records(cfg.n_commitments);
  const spacetime::WindowOptions wopt{cfg.tolerance_s, cfg.transfer_time_s};

  auto run_one = [&](std::int64_t i) {
    CommitmentRow row;
    row.index = i;
    row.seed = cfg.seed_for(i);
    Rng rng(row.seed);
    if (cfg.mode == Mode::multiphoton_attack) {
      auto att = adversary::simulate_multiphoton_attack(cfg.params, rng);
      row.accepted = att.success;
      row.verdict = att.success ? protocol::Verdict::ok : protocol::Verdict::qber_exceeded;
      row.m = att.n_multi + att.n_single;
      row.p_det = static_cast<double>(row.m) / static_cast<double>(cfg.params.n);
      row.n_sifted = att.sifted_s + att.sifted_t;
      row.n_err = att.errors_s + att.errors_t;
      row.qber = row.n_sifted > 0
                     ? static_cast<double>(row.n_err) / static_cast<double>(row.n_sifted)
                     : 0.0;
    } else {
      protocol::RunOptions ro;
      ro.open_margin_s = cfg.open_margin_s;
      ro.force_b = static_cast<int>(i % 2);
      const int a = static_cast<int>(rng.split(3).bit());
      protocol::Transcript t;
      if (cfg.mode == Mode::three_agent) {
        protocol::ThreeAgentOptions topt;
        topt.preshare_count = cfg.preshare_count;
        topt.equidistance_tol_m = cfg.equidistance_tol_m;
        topt.run = ro;
        topt.run.force_b.reset();
        t = protocol::run_three_agent_variant(cfg.params, layout, a, /*j_index=*/0, rng, topt);
      } else {
        t = protocol::run_commit_phase(cfg.params, a, layout, rng, ro);
      }
      const auto v = protocol::open_and_verify(t, cfg.params.delta, layout, wopt);
      row.b = t.b;
      row.a = t.a;
      row.accepted = v.accepted;
      row.verdict = v.reason;
      row.m = static_cast<std::int64_t>(t.m());
      row.p_det = t.p_det();
      row.qber = v.observed_qber;
      row.n_sifted = v.n_sifted;
      row.n_err = v.n_err;
      records[i] = protocol::transcript_records(t, i, &v);
    }
    sum.rows[i] = row;
  };

  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  if (cfg.n_commitments == 1 || workers == 1) {
    for (std::int64_t i = 0; i < cfg.n_commitments; ++i) run_one(i);
  } else {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::int64_t i = w; i < cfg.n_commitments; i += workers) run_one(i);
        } catch (...) {
          std::scoped_lock lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  double pdet = 0.0, qber = 0.0;
  std::int64_t accepted = 0, with_sift = 0;
  for (const auto& r : sum.rows) {
    pdet += r.p_det;
    if (r.n_sifted > 0) {
      qber += r.qber;
      ++with_sift;
    }
    if (r.accepted) ++accepted;
    if (cfg.mode == Mode::multiphoton_attack && r.accepted) ++sum.attack_successes;
  }
  sum.mean_p_det = pdet / static_cast<double>(cfg.n_commitments);
  sum.mean_qber = with_sift > 0 ? qber / static_cast<double>(with_sift) : 0.0;
  sum.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(cfg.n_commitments);
  for (auto& rec : records)
    for (auto& linestr : rec) sum.records.push_back(std::move(linestr));

  if (!cfg.output_dir.empty()) write_outputs(cfg, sum);
  return sum;
}

std::string boundary_csv(const std::vector<double>& mu_grid, double qber, double lambda1,
                         std::optional<std::pair<double, double>> operating_point) {
  std::ostringstream os;
  os << "mu,p_det_boundary\n";
  for (double mu : mu_grid)
    os << fmt(mu) << "," << fmt(security::asymptotic_rhs(mu, qber, lambda1)) << "\n";
  if (operating_point) {
    const double rhs = security::asymptotic_rhs(operating_point->first, qber, lambda1);
    const bool secure = operating_point->second > rhs;
    os << "# operating_point mu=" << fmt(operating_point->first)
       << " p_det=" << fmt(operating_point->second) << " boundary=" << fmt(rhs) << " "
       << (secure ? "inside_secure_region" : "outside_secure_region") << "\n";
  }
  return os.str();
}

void write_outputs(const ExperimentConfig& cfg, const RunSummary& sum) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  const std::string digest = config_digest(cfg);
  auto open_file = [&](const char* name) {
    std::ofstream out(fs::path(cfg.output_dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error(std::string("cannot write output file ") + name);
    out << "# config_digest=" << digest << "\n# schema_version=" << cfg.schema_version << "\n";
    return out;
  };

  {
    auto out = open_file("commitments.csv");
    out << "index,seed,b,a,verdict,accepted,m,p_det,qber,n_sifted,n_err\n";
    for (const auto& r : sum.rows)
      out << r.index << "," << r.seed << "," << r.b << "," << r.a << ","
          << protocol::verdict_name(r.verdict) << "," << (r.accepted ? 1 : 0) << "," << r.m
          << "," << fmt(r.p_det) << "," << fmt(r.qber) << "," << r.n_sifted << "," << r.n_err
          << "\n";
  }
  {
    auto out = open_file("pdet.csv");
    for (const auto& r : sum.rows) out << fmt(r.p_det) << "\n";
  }
  {
    auto out = open_file("qber.csv");
    for (const auto& r : sum.rows) out << fmt(r.qber) << "\n";
  }
  {
    auto out = open_file("records.log");
    for (const auto& rec : sum.records) out << rec << "\n";
  }
  {
    const auto& rep = sum.report;
    auto out = open_file("security_report.txt");
    out << "mode=" << mode_name(cfg.mode) << "\n";
    out << "lambda0=" << fmt(rep.lambda0) << "\nlambda1=" << fmt(rep.lambda1) << "\n";
    out << "eps_exact=" << fmt(rep.eps_exact) << "\neps_chernoff=" << fmt(rep.eps_chernoff)
        << "\neps_finite=" << fmt(rep.eps_finite) << "\n";
    out << "asymptotic_rhs_at_delta=" << fmt(rep.asymptotic_rhs) << "\n";
    if (sum.mean_qber < rep.lambda1)
      out << "asymptotic_rhs_at_observed_qber="
          << fmt(security::asymptotic_rhs(cfg.params.mu, sum.mean_qber, rep.lambda1)) << "\n";
    out << "robust_ok=" << rep.robust_ok << "\nsecure_ok=" << rep.secure_ok
        << "\nfeasible_ok=" << rep.feasible_ok << "\n";
    out << "lhs_detection=" << fmt(rep.lhs_detection)
        << "\nlhs_security=" << fmt(rep.lhs_security)
        << "\nlhs_collapsed=" << fmt(rep.lhs_collapsed) << "\n";
    out << "k_t=" << fmt(rep.k_t) << "\ne_nm=" << fmt(rep.e_nm) << "\n";
    out << "mean_p_det=" << fmt(sum.mean_p_det) << "\nmean_qber=" << fmt(sum.mean_qber)
        << "\nacceptance_rate=" << fmt(sum.acceptance_rate) << "\n";
    if (cfg.mode == Mode::multiphoton_attack)
      out << "attack_successes=" << sum.attack_successes << "\n";
  }
  {
    std::vector<double> grid;
    for (int i = 1; i <= 200; ++i) grid.push_back(0.001 * i);  // mu in (0, 0.2]
    auto out = open_file("boundary.csv");
    out << boundary_csv(grid, cfg.params.delta, sum.report.lambda1,
                        std::make_pair(cfg.params.mu, sum.mean_p_det));
  }
}

}  // namespace rbc::experiment
