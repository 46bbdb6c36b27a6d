// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#include "rbc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rbc/photonics.hpp"

namespace rbc::protocol {

namespace {

std::uint64_t fnv1a64(std::span<const char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest(const std::string& payload) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64({payload.data(), payload.size()})));
  return buf;
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ok: return "ok";
    case Verdict::value_mismatch: return "value_mismatch";
    case Verdict::string_mismatch: return "string_mismatch";
    case Verdict::qber_exceeded: return "qber_exceeded";
    case Verdict::detection_below_gamma: return "detection_below_gamma";
    case Verdict::lightcone_violation: return "lightcone_violation";
    case Verdict::preshare_unavailable: return "preshare_unavailable";
  }
  return "?";
}

double hamming_distance(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("hamming_distance: equal nonzero lengths required");
  std::size_t d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] != y[i]) ? 1 : 0;
  return static_cast<double>(d) / static_cast<double>(x.size());
}

std::vector<std::uint8_t> balance_detections(const std::vector<std::uint8_t>& raw,
                                             const std::vector<std::uint8_t>& round_basis,
                                             int favored_basis, double r, Rng& rng) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("balance_detections: R in (0,1]");
  if (raw.size() != round_basis.size())
    throw std::invalid_argument("balance_detections: size mismatch");
  std::vector<std::uint8_t> kept(raw.size(), 0);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (!raw[k]) continue;
    kept[k] = (round_basis[k] != favored_basis || r >= 1.0 || rng.bernoulli(r)) ? 1 : 0;
  }
  return kept;
}

Transcript run_commit_phase(const security::ProtocolParams& params, int a,
                            const spacetime::SiteLayout& layout, Rng rng,
                            const RunOptions& opts) {
  params.validate();
  Transcript t;
  t.params = params;
  t.n = params.n;
  t.a = a & 1;

  Rng channel = rng.split(0);
  Rng alice = rng.split(1);
  Rng bob = rng.split(2);
  t.b = opts.force_b ? (*opts.force_b & 1) : bob.bit();

  const photonics::SourceParams src{params.mu, params.eta, params.q, params.dark_rate};
  const std::int64_t n = params.n;
  std::vector<std::uint8_t> x(n), theta(n), flags(n), y(n, 0);
  for (std::int64_t k = 0; k < n; ++k) {
    x[k] = static_cast<std::uint8_t>(alice.bit());
    theta[k] = static_cast<std::uint8_t>(alice.bit());
    auto rec = photonics::sample_round(src, x[k], theta[k], t.b, channel);
    flags[k] = rec.detected ? 1 : 0;
    if (rec.detected) y[k] = static_cast<std::uint8_t>(rec.y);
  }
  t.detected_raw = std::count(flags.begin(), flags.end(), std::uint8_t{1});

  std::vector<std::uint8_t> basis(n, static_cast<std::uint8_t>(t.b));
  const auto declared =
      balance_detections(flags, basis, params.balanced_basis, params.r_balance, bob);

  for (std::int64_t k = 0; k < n; ++k) {
    if (!declared[k]) continue;
    t.valid_set.push_back(static_cast<std::uint32_t>(k));
    t.x_m.push_back(x[k]);
    t.theta_m.push_back(theta[k]);
    t.y_m.push_back(y[k]);
  }

  t.b_prime = delayed_choice_commit(t.b, t.a);
  t.commit_b_prime_1 = t.commit_b_prime_2 = t.b_prime;
  t.open1 = t.open2 = OpeningMessage{t.b, t.a, t.y_m};

  t.commit_ev1 = layout.event_at("B1", opts.t_c_s);
  t.commit_ev2 = layout.event_at("B2", opts.t_c_s);
  const double open_at = opts.t_c_s + layout.duration_s() - opts.open_margin_s;
  schedule_open(t, layout, open_at, open_at);

  if (static_cast<std::int64_t>(t.m()) < security::detection_threshold(params.gamma, n)) {
    t.aborted = true;
    t.abort_reason = Verdict::detection_below_gamma;
  }
  return t;
}

void schedule_open(Transcript& t, const spacetime::SiteLayout& layout, double t1_s, double t2_s) {
  t.open_ev1 = layout.event_at("B1", t1_s);
  t.open_ev2 = layout.event_at("B2", t2_s);
}

VerifyOutcome open_and_verify(const Transcript& t, double delta,
                              const spacetime::SiteLayout& layout,
                              const spacetime::WindowOptions& wopt) {
  if (t.x_m.size() != t.m() || t.theta_m.size() != t.m())
    throw std::invalid_argument("open_and_verify: malformed transcript");
  VerifyOutcome out;
  if (t.aborted) {
    out.reason = t.abort_reason;
    return out;
  }
  if (t.open1.y.size() != t.m() || t.open2.y.size() != t.m())
    throw std::invalid_argument("open_and_verify: outcome strings must cover M");

  // Canonical failure order: value, string, qber, lightcone.
  const bool value_ok = t.open1.b == t.open2.b && t.open1.a == t.open2.a &&
                        t.commit_b_prime_1 == t.commit_b_prime_2 &&
                        delayed_choice_commit(t.open1.b, t.open1.a) == t.commit_b_prime_1;
  if (!value_ok) {
    out.reason = Verdict::value_mismatch;
    return out;
  }
  if (t.open1.y != t.open2.y) {
    out.reason = Verdict::string_mismatch;
    return out;
  }

  // Sift to the rounds Alice prepared in the announced basis.
  const int b = t.open1.b;
  for (std::size_t i = 0; i < t.m(); ++i) {
    if (t.theta_m[i] != b) continue;
    ++out.n_sifted;
    if (t.open1.y[i] != t.x_m[i]) ++out.n_err;
  }
  out.observed_qber =
      out.n_sifted > 0 ? static_cast<double>(out.n_err) / static_cast<double>(out.n_sifted) : 0.0;
  if (static_cast<double>(out.n_err) >
      delta * static_cast<double>(out.n_sifted) + 1e-9) {
    out.reason = Verdict::qber_exceeded;
    return out;
  }

  const auto cone = spacetime::check_open_window(layout, {t.commit_ev1, t.commit_ev2},
                                                 {t.open_ev1, t.open_ev2}, wopt);
  if (!cone.ok) {
    out.reason = Verdict::lightcone_violation;
    return out;
  }
  out.accepted = true;
  out.reason = Verdict::ok;
  return out;
}

Transcript run_three_agent_variant(const security::ProtocolParams& params,
                                   const spacetime::SiteLayout& layout, int a,
                                   std::int64_t j_index, Rng rng,
                                   const ThreeAgentOptions& opts) {
  if (!layout.has("A0") || !layout.has("B0"))
    throw std::invalid_argument("three-agent variant requires A0/B0 sites");
  const double d1 = spacetime::chord_distance(layout.site("B0"), layout.site("B1"));
  const double d2 = spacetime::chord_distance(layout.site("B0"), layout.site("B2"));
  if (std::abs(d1 - d2) > opts.equidistance_tol_m)
    throw std::invalid_argument("B0 must be equidistant from B1 and B2");

  if (j_index < 0 || j_index >= opts.preshare_count) {
    Transcript t;
    t.params = params;
    t.n = params.n;
    t.a = a & 1;
    t.aborted = true;
    t.abort_reason = Verdict::preshare_unavailable;
    return t;
  }

  // Preshared list: each entry is a full quantum phase with its own random
  // basis b_j; only the selected entry is unveiled.
  Transcript chosen;
  for (std::int64_t j = 0; j < opts.preshare_count; ++j) {
    RunOptions ro = opts.run;
    ro.force_b.reset();
    Transcript tj = run_commit_phase(params, /*a=*/0, layout, rng.split(100 + j), ro);
    if (j == j_index) chosen = std::move(tj);
  }

  // B0 commits a by sending b' = a xor b_j (and j) at t_c; the unveiling is
  // the preshared (b_j, y_j) from B1/B2.
  chosen.a = a & 1;
  chosen.b_prime = delayed_choice_commit(chosen.b, chosen.a);
  chosen.commit_b_prime_1 = chosen.commit_b_prime_2 = chosen.b_prime;
  chosen.open1.a = chosen.open2.a = chosen.a;
  return chosen;
}

std::string bits_to_hex(std::span<const std::uint8_t> bits) {
  static const char* hexd = "0123456789abcdef";
  std::string out;
  out.reserve((bits.size() + 3) / 4);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int v = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      v <<= 1;
      if (i + j < bits.size()) v |= bits[i + j] & 1;
    }
    out.push_back(hexd[v]);
  }
  return out;
}

std::vector<std::string> transcript_records(const Transcript& t, std::int64_t commitment_index,
                                            const VerifyOutcome* verdict) {
  auto line = [&](const char* phase, const char* site, long long time_ns,
                  const std::string& payload) {
    return std::to_string(commitment_index) + " " + phase + " " + site + " " +
           std::to_string(time_ns) + " " + digest(payload);
  };
  // Quantum exchange and backreporting happen well before the commit instant;
  // they are stamped one second earlier by convention.
  const long long pre_ns = t.commit_ev1.time.ns64() - 1'000'000'000LL;
  std::vector<std::string> rec;
  std::string mser = "m=" + std::to_string(t.m()) + ";M=";
  for (auto k : t.valid_set) mser += std::to_string(k) + ",";
  rec.push_back(line("backreport", "B1", pre_ns, mser));
  if (t.aborted) {
    rec.push_back(line("abort", "A1", pre_ns, verdict_name(t.abort_reason)));
    return rec;
  }
  const std::string bp1 = "bprime=" + std::to_string(t.commit_b_prime_1);
  const std::string bp2 = "bprime=" + std::to_string(t.commit_b_prime_2);
  rec.push_back(line("commit", "B1", t.commit_ev1.time.ns64(), bp1));
  rec.push_back(line("commit", "B2", t.commit_ev2.time.ns64(), bp2));
  auto open_payload = [](const OpeningMessage& o) {
    return "b=" + std::to_string(o.b) + ";a=" + std::to_string(o.a) +
           ";y=" + bits_to_hex(o.y);
  };
  rec.push_back(line("open", "B1", t.open_ev1.time.ns64(), open_payload(t.open1)));
  rec.push_back(line("open", "B2", t.open_ev2.time.ns64(), open_payload(t.open2)));
  if (verdict) {
    rec.push_back(line("verify", "A1", t.open_ev1.time.ns64(),
                       std::string(verdict_name(verdict->reason)) +
                           ";qber=" + std::to_string(verdict->observed_qber)));
  }
  return rec;
}

}  // namespace rbc::protocol
