// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#include "rbc/spacetime.hpp"

#include <cmath>
#include <stdexcept>

namespace rbc::spacetime {

TimeNs TimeNs::from_seconds(double s) {
  if (!std::isfinite(s)) throw std::invalid_argument("time must be finite");
  long double ns = static_cast<long double>(s) * 1e9L;
  if (ns > 9.1e18L || ns < -9.1e18L) throw std::invalid_argument("time out of range");
  return TimeNs(static_cast<__int128>(llroundl(ns)));
}

Eigen::Vector3d to_cartesian(const Geodetic& g) {
  if (g.lat_deg < -90.0 || g.lat_deg > 90.0)
    throw std::invalid_argument("latitude out of [-90, 90]");
  if (g.lon_deg < -180.0 || g.lon_deg > 180.0)
    throw std::invalid_argument("longitude out of [-180, 180]");
  if (g.alt_m < -1.2e4 || g.alt_m > 6.2e5)
    throw std::invalid_argument("altitude not near the Earth surface");
  const double lat = g.lat_deg * M_PI / 180.0;
  const double lon = g.lon_deg * M_PI / 180.0;
  const double r = kEarthRadius + g.alt_m;
  return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon),
          r * std::sin(lat)};
}

double chord_distance(const Geodetic& a, const Geodetic& b) {
  return (to_cartesian(a) - to_cartesian(b)).norm();
}

double commitment_duration(double d_meters) {
  if (d_meters < 0.0) throw std::invalid_argument("distance must be nonnegative");
  return d_meters / (2.0 * kSpeedOfLight);
}

SiteLayout::SiteLayout(std::map<std::string, Geodetic> sites) : sites_(std::move(sites)) {
  for (const char* id : {"A1", "A2", "B1", "B2"})
    if (!sites_.count(id)) throw std::invalid_argument(std::string("layout missing site ") + id);
  for (const auto& [id, g] : sites_) to_cartesian(g);  // validates ranges
  for (const char* i : {"0", "1", "2"}) {
    std::string a = std::string("A") + i, b = std::string("B") + i;
    if (sites_.count(a) && sites_.count(b) &&
        chord_distance(sites_.at(a), sites_.at(b)) > 100.0)
      throw std::invalid_argument(a + " not co-located with " + b);
  }
  chord_m_ = chord_distance(sites_.at("B1"), sites_.at("B2"));
}

const Geodetic& SiteLayout::site(const std::string& id) const {
  auto it = sites_.find(id);
  if (it == sites_.end()) throw std::invalid_argument("unknown site " + id);
  return it->second;
}

Eigen::Vector3d SiteLayout::position(const std::string& id) const {
  return to_cartesian(site(id));
}

SpacetimeEvent SiteLayout::event_at(const std::string& id, double t_seconds) const {
  return {position(id), TimeNs::from_seconds(t_seconds)};
}

namespace {

bool at_site(const SpacetimeEvent& e, const Eigen::Vector3d& pos) {
  return (e.position_m - pos).norm() <= 1.0;  // 1 m placement slop
}

}  // namespace

LightConeVerdict check_open_window(const SiteLayout& layout,
                                   const std::pair<SpacetimeEvent, SpacetimeEvent>& commit_events,
                                   const std::pair<SpacetimeEvent, SpacetimeEvent>& open_events,
                                   const WindowOptions& opt) {
  const Eigen::Vector3d b1 = layout.position("B1");
  const Eigen::Vector3d b2 = layout.position("B2");
  if (!at_site(commit_events.first, b1) || !at_site(commit_events.second, b2) ||
      !at_site(open_events.first, b1) || !at_site(open_events.second, b2))
    throw std::invalid_argument("events must sit at the B1/B2 sites, in order");

  const __int128 tc1 = commit_events.first.time.ns();
  const __int128 tc2 = commit_events.second.time.ns();
  const __int128 transfer = TimeNs::from_seconds(opt.transfer_time_s).ns();
  const __int128 to1 = open_events.first.time.ns() + transfer;
  const __int128 to2 = open_events.second.time.ns() + transfer;
  if (to1 < tc1 || to2 < tc2) throw std::invalid_argument("open precedes commit");

  const __int128 tol = TimeNs::from_seconds(opt.tolerance_s).ns();
  const __int128 dur = TimeNs::from_seconds(layout.duration_s()).ns();
  const __int128 tc = tc1 < tc2 ? tc1 : tc2;

  // Timing margins (required - actual), all in ns.
  const __int128 m1 = (tc + dur - tol) - to1;
  const __int128 m2 = (tc + dur - tol) - to2;
  const __int128 mp = (2 * dur - 2 * tol) - (to1 + to2 - 2 * tc);
  __int128 slack = m1 < m2 ? m1 : m2;
  if (mp < slack) slack = mp;

  // Simultaneity enters the verdict but not the honest-path slack, which
  // reports the remaining window.
  __int128 dsim = tc1 > tc2 ? tc1 - tc2 : tc2 - tc1;
  const __int128 msim = tol - dsim;
  if (msim < 0 && msim < slack) slack = msim;

  LightConeVerdict v;
  v.slack_s = static_cast<double>(slack) * 1e-9;
  v.ok = slack >= 0;
  if (!v.ok) {
    if (msim < 0)
      v.violating_pair = commit_events;
    else if (m1 < 0 || m2 < 0)
      v.violating_pair = std::make_pair(m1 <= m2 ? open_events.first : open_events.second,
                                        m1 <= m2 ? commit_events.first : commit_events.second);
    else
      v.violating_pair = open_events;
  }
  return v;
}

}  // namespace rbc::spacetime
