#pragma once

// Circular-orbit propagation for Walker-star constellations, ground-station
// geometry and line-of-sight visibility windows.
//
// Frame: Earth-centred inertial, x towards the ascending node of a plane with
// RAAN 0, z along the Earth's rotation axis. At t = 0 the Greenwich meridian
// points along +x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "satfl/constants.hpp"
#include "satfl/errors.hpp"

namespace satfl {

struct OrbitPlane {
  double altitude_m = 2.0e6;
  double inclination_rad = deg_to_rad(85.0);
  double raan_rad = 0.0;
  int num_sats = 8;
  double phase_offset_rad = 0.0;

  void validate() const {
    if (!(altitude_m > 0.0)) throw DomainError("OrbitPlane: altitude must be positive");
    if (num_sats < 2) throw DomainError("OrbitPlane: at least two satellites per plane");
  }
};

struct GroundStation {
  double latitude_rad = deg_to_rad(53.08);
  double longitude_rad = deg_to_rad(8.80);
  double min_elevation_rad = deg_to_rad(10.0);

  void validate() const {
    if (std::abs(latitude_rad) > kPi / 2.0)
      throw DomainError("GroundStation: |latitude| must not exceed pi/2");
    if (min_elevation_rad < 0.0 || min_elevation_rad >= kPi / 2.0)
      throw DomainError("GroundStation: min elevation must lie in [0, pi/2)");
  }
};

inline GroundStation bremen() { return GroundStation{}; }

struct EciPosition {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double time_s = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double distance(const EciPosition& a, const EciPosition& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct VisibilityWindow {
  int sat_id = 0;
  double start_s = 0.0;
  double end_s = 0.0;

  bool contains(double t) const { return t >= start_s && t <= end_s; }
  friend bool operator==(const VisibilityWindow&, const VisibilityWindow&) = default;
};

inline double orbital_speed(double altitude_m, const PhysicalConstants& pc = kConstants) {
  if (altitude_m < 0.0) throw DomainError("orbital_speed: negative altitude");
  return std::sqrt(pc.mu / (pc.earth_radius_m + altitude_m));
}

inline double orbital_period(double altitude_m, const PhysicalConstants& pc = kConstants) {
  if (altitude_m < 0.0) throw DomainError("orbital_period: negative altitude");
  return kTwoPi * (pc.earth_radius_m + altitude_m) / orbital_speed(altitude_m, pc);
}

inline EciPosition propagate(const OrbitPlane& plane, int sat_index, double time_s,
                             const PhysicalConstants& pc = kConstants) {
  if (sat_index < 0 || sat_index >= plane.num_sats)
    throw IndexError("propagate: satellite index " + std::to_string(sat_index) +
                     " outside plane of " + std::to_string(plane.num_sats));
  const double r = pc.earth_radius_m + plane.altitude_m;
  const double period = orbital_period(plane.altitude_m, pc);
  // Reduce the time term modulo one period first so that t and t + T map to
  // the same angle up to rounding of fmod.
  const double u = plane.phase_offset_rad + kTwoPi * sat_index / plane.num_sats +
                   kTwoPi * std::fmod(time_s, period) / period;
  const double cu = std::cos(u), su = std::sin(u);
  const double ci = std::cos(plane.inclination_rad), si = std::sin(plane.inclination_rad);
  const double co = std::cos(plane.raan_rad), so = std::sin(plane.raan_rad);
  return EciPosition{r * (co * cu - so * su * ci), r * (so * cu + co * su * ci), r * (su * si),
                     time_s};
}

inline EciPosition gs_position(const GroundStation& gs, double time_s,
                               const PhysicalConstants& pc = kConstants) {
  const double lon = gs.longitude_rad + pc.earth_rotation_rate * time_s;
  const double cl = std::cos(gs.latitude_rad);
  return EciPosition{pc.earth_radius_m * cl * std::cos(lon), pc.earth_radius_m * cl * std::sin(lon),
                     pc.earth_radius_m * std::sin(gs.latitude_rad), time_s};
}

namespace detail {

inline void require_same_time(const EciPosition& a, const EciPosition& b) {
  if (std::abs(a.time_s - b.time_s) > 1e-9)
    throw ContractViolation("has_los: positions sampled at different times");
}

}  // namespace detail

// Sat-sat: the straight segment between the two must stay outside the Earth.
inline bool has_isl_los(const EciPosition& a, const EciPosition& b,
                        const PhysicalConstants& pc = kConstants) {
  detail::require_same_time(a, b);
  const double dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
  const double len2 = dx * dx + dy * dy + dz * dz;
  double s = 0.0;
  if (len2 > 0.0) s = std::clamp(-(a.x * dx + a.y * dy + a.z * dz) / len2, 0.0, 1.0);
  const double px = a.x + s * dx, py = a.y + s * dy, pz = a.z + s * dz;
  return std::sqrt(px * px + py * py + pz * pz) > pc.earth_radius_m;
}

inline double elevation(const EciPosition& sat, const EciPosition& station) {
  const double dx = sat.x - station.x, dy = sat.y - station.y, dz = sat.z - station.z;
  const double range = std::sqrt(dx * dx + dy * dy + dz * dz);
  const double up = (dx * station.x + dy * station.y + dz * station.z) / station.norm();
  return std::asin(std::clamp(up / range, -1.0, 1.0));
}

inline bool has_gs_los(const EciPosition& sat, const EciPosition& station, double min_elevation_rad) {
  detail::require_same_time(sat, station);
  return elevation(sat, station) >= min_elevation_rad;
}

// Generic form: an endpoint within 1 m of the Earth's surface is treated as a
// ground station, in which case the elevation mask applies; otherwise the
// chord test is used and min_elevation_rad is ignored.
inline bool has_los(const EciPosition& a, const EciPosition& b, double min_elevation_rad,
                    const PhysicalConstants& pc = kConstants) {
  const bool a_ground = std::abs(a.norm() - pc.earth_radius_m) <= 1.0;
  const bool b_ground = std::abs(b.norm() - pc.earth_radius_m) <= 1.0;
  if (a_ground && !b_ground) return has_gs_los(b, a, min_elevation_rad);
  if (b_ground && !a_ground) return has_gs_los(a, b, min_elevation_rad);
  return has_isl_los(a, b, pc);
}

inline bool sat_visible(const OrbitPlane& plane, int sat_index, const GroundStation& gs, double t,
                        const PhysicalConstants& pc = kConstants) {
  return has_gs_los(propagate(plane, sat_index, t, pc), gs_position(gs, t, pc), gs.min_elevation_rad);
}

inline constexpr double kDefaultVisibilityStep = 5.0;
inline constexpr double kBisectionTolerance = 1e-2;

// Maximal intervals of [t_start, t_end] where the satellite is above the
// station's elevation mask. Sampled every step_s, boundaries refined by
// bisection.
inline std::vector<VisibilityWindow> visibility_windows(const OrbitPlane& plane, int sat_index,
                                                        const GroundStation& gs, double t_start,
                                                        double t_end,
                                                        double step_s = kDefaultVisibilityStep,
                                                        const PhysicalConstants& pc = kConstants) {
  std::vector<VisibilityWindow> out;
  if (!(t_end > t_start)) return out;
  if (!(step_s > 0.0)) throw DomainError("visibility_windows: step must be positive");

  auto visible = [&](double t) { return sat_visible(plane, sat_index, gs, t, pc); };
  // Returns the first time in (lo, hi] at which visibility differs from vis(lo).
  auto refine = [&](double lo, double hi) {
    const bool v_lo = visible(lo);
    while (hi - lo > kBisectionTolerance) {
      const double mid = 0.5 * (lo + hi);
      if (visible(mid) == v_lo) lo = mid; else hi = mid;
    }
    return hi;
  };

  double prev_t = t_start;
  bool prev_v = visible(t_start);
  double open = t_start;
  const auto steps = static_cast<long long>(std::ceil((t_end - t_start) / step_s));
  for (long long i = 1; i <= steps; ++i) {
    const double t = std::min(t_end, t_start + static_cast<double>(i) * step_s);
    const bool v = visible(t);
    if (v != prev_v) {
      const double edge = refine(prev_t, t);
      if (v) {
        open = edge;
      } else if (edge > open) {
        out.push_back({sat_index, open, edge});
      }
    }
    prev_t = t;
    prev_v = v;
  }
  if (prev_v && t_end > open) out.push_back({sat_index, open, t_end});
  return out;
}

// Walker star: planes' ascending nodes evenly spread over pi, no inter-plane
// phasing.
inline std::vector<OrbitPlane> walker_star(int num_planes, int sats_per_plane, double altitude_m,
                                           double inclination_rad) {
  if (num_planes < 1) throw DomainError("walker_star: need at least one plane");
  std::vector<OrbitPlane> planes;
  planes.reserve(static_cast<std::size_t>(num_planes));
  for (int p = 0; p < num_planes; ++p) {
    OrbitPlane plane{altitude_m, inclination_rad, kPi * p / num_planes, sats_per_plane, 0.0};
    plane.validate();
    planes.push_back(plane);
  }
  return planes;
}

// Lazily extended window list for one satellite, answering "when is this
// satellite next visible at or after t". Windows that straddle a chunk
// boundary are merged.
class VisibilityTracker {
 public:
  VisibilityTracker(OrbitPlane plane, int sat_index, GroundStation gs,
                    double step_s = kDefaultVisibilityStep, double chunk_s = 21600.0)
      : plane_(plane), sat_(sat_index), gs_(gs), step_(step_s), chunk_(chunk_s) {}

  int sat_id() const { return sat_; }

  // The window containing t, or the first one starting after it. `limit_s`
  // bounds the search (the satellite may never be visible).
  const VisibilityWindow* window_at_or_after(double t, double limit_s = 30.0 * 86400.0) {
    while (true) {
      auto it = std::lower_bound(windows_.begin(), windows_.end(), t,
                                 [](const VisibilityWindow& w, double v) { return w.end_s < v; });
      // The last window may still grow when the horizon is extended.
      const bool open_tail = it != windows_.end() && std::next(it) == windows_.end() &&
                             it->end_s >= horizon_;
      if (it != windows_.end() && !open_tail) return &*it;
      if (horizon_ - t > limit_s) return it == windows_.end() ? nullptr : &*it;
      extend();
    }
  }

  double next_visible(double t, double limit_s = 30.0 * 86400.0) {
    const auto* w = window_at_or_after(t, limit_s);
    if (w == nullptr) throw ConfigurationError("satellite " + std::to_string(sat_) +
                                               " never becomes visible to the ground station");
    return std::max(t, w->start_s);
  }

  const std::vector<VisibilityWindow>& windows() const { return windows_; }

 private:
  void extend() {
    auto fresh = visibility_windows(plane_, sat_, gs_, horizon_, horizon_ + chunk_, step_);
    auto it = fresh.begin();
    if (it != fresh.end() && !windows_.empty() && windows_.back().end_s >= horizon_ &&
        it->start_s <= horizon_) {
      windows_.back().end_s = it->end_s;
      ++it;
    }
    windows_.insert(windows_.end(), it, fresh.end());
    horizon_ += chunk_;
  }

  OrbitPlane plane_;
  int sat_;
  GroundStation gs_;
  double step_;
  double chunk_;
  double horizon_ = 0.0;
  std::vector<VisibilityWindow> windows_;
};

}  // namespace satfl
