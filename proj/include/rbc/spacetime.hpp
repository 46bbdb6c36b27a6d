// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <utility>

namespace rbc::spacetime {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kEarthRadius = 6'371'000.0;     // spherical model, m

struct Geodetic {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double alt_m = 0.0;
};

// Protocol-frame time held as integer nanoseconds so that event ordering
// and window comparisons are exact.
class TimeNs {
 public:
  TimeNs() = default;
  static TimeNs from_seconds(double s);
  static TimeNs from_ns(__int128 ns) { return TimeNs(ns); }
  double seconds() const { return static_cast<double>(ns_) * 1e-9; }
  __int128 ns() const { return ns_; }
  long long ns64() const { return static_cast<long long>(ns_); }
  friend TimeNs operator+(TimeNs a, TimeNs b) { return TimeNs(a.ns_ + b.ns_); }
  friend TimeNs operator-(TimeNs a, TimeNs b) { return TimeNs(a.ns_ - b.ns_); }
  auto operator<=>(const TimeNs&) const = default;

 private:
  explicit TimeNs(__int128 ns) : ns_(ns) {}
  __int128 ns_ = 0;
};

struct SpacetimeEvent {
  Eigen::Vector3d position_m = Eigen::Vector3d::Zero();
  TimeNs time;
};

// Cartesian image of a geodetic point on the spherical Earth.
Eigen::Vector3d to_cartesian(const Geodetic& g);

// Straight-line (through-Earth) distance in meters.
double chord_distance(const Geodetic& a, const Geodetic& b);

// d / 2c, the interval during which two openings separated by d are bound.
double commitment_duration(double d_meters);

class SiteLayout {
 public:
  // Requires A1, A2, B1, B2; accepts optional extras (A0, B0, Alice, Bob).
  // Each A_i must be co-located with B_i within 100 m.
  explicit SiteLayout(std::map<std::string, Geodetic> sites);

  bool has(const std::string& id) const { return sites_.count(id) > 0; }
  const Geodetic& site(const std::string& id) const;
  Eigen::Vector3d position(const std::string& id) const;
  double chord_distance_m() const { return chord_m_; }
  double duration_s() const { return commitment_duration(chord_m_); }
  const std::map<std::string, Geodetic>& sites() const { return sites_; }

  SpacetimeEvent event_at(const std::string& id, double t_seconds) const;

 private:
  std::map<std::string, Geodetic> sites_;
  double chord_m_ = 0.0;  // B1 <-> B2
};

struct LightConeVerdict {
  bool ok = false;
  std::optional<std::pair<SpacetimeEvent, SpacetimeEvent>> violating_pair;
  double slack_s = 0.0;  // min over constraints of required - actual
};

struct WindowOptions {
  double tolerance_s = 1e-6;      // commit simultaneity / timing guard band
  double transfer_time_s = 0.0;   // added to open times; default instantaneous
};

// Decides whether the open events respect the commitment window:
//   (i)   commit events simultaneous within tolerance,
//   (ii)  each open no later than t_c + d/2c - tolerance,
//   (iii) no spacetime point after the earlier commit can signal to both
//         opens at speed <= c:  t_o1 + t_o2 - 2 t_c <= d/c - 2 tolerance.
// All comparisons are carried out on integer nanoseconds and are non-strict,
// so ok <=> slack_s >= 0 holds exactly.
LightConeVerdict check_open_window(const SiteLayout& layout,
                                   const std::pair<SpacetimeEvent, SpacetimeEvent>& commit_events,
                                   const std::pair<SpacetimeEvent, SpacetimeEvent>& open_events,
                                   const WindowOptions& opt = {});

}  // namespace rbc::spacetime
