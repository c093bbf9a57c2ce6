#pragma once

// Free-space link budget: path loss, SNR, Shannon rate and the fixed ring
// rate used for every ISL hop.

#include <cmath>
#include <string>

#include "satfl/constants.hpp"
#include "satfl/errors.hpp"
#include "satfl/orbital.hpp"

namespace satfl {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct LinkParams {
  double tx_power_w = 10.0;  // 40 dBm
  double gain_tx_dbi = 32.13;
  double gain_rx_dbi = 32.13;
  double bandwidth_hz = 500e6;
  double carrier_hz = 20e9;
  double noise_temp_k = 354.0;

  void validate() const {
    if (!(tx_power_w > 0.0 && gain_tx_dbi > 0.0 && gain_rx_dbi > 0.0 && bandwidth_hz > 0.0 &&
          carrier_hz > 0.0 && noise_temp_k > 0.0))
      throw DomainError("LinkParams: all fields must be strictly positive");
  }

  double noise_power_w(const PhysicalConstants& pc = kConstants) const {
    return pc.boltzmann * noise_temp_k * bandwidth_hz;
  }
};

struct LinkBudget {
  double distance_m = 0.0;
  double path_loss_linear = 0.0;
  double snr_linear = 0.0;
  double rate_bps = 0.0;
};

inline double path_loss(double distance_m, double carrier_hz,
                        const PhysicalConstants& pc = kConstants) {
  if (!(distance_m > 0.0)) throw DomainError("path_loss: distance must be positive");
  const double a = 4.0 * kPi * carrier_hz * distance_m / pc.light_speed;
  return a * a;
}

inline double snr(const LinkParams& p, double distance_m, bool los,
                  const PhysicalConstants& pc = kConstants) {
  const double loss = path_loss(distance_m, p.carrier_hz, pc);
  if (!los) return 0.0;
  return p.tx_power_w * db_to_linear(p.gain_tx_dbi) * db_to_linear(p.gain_rx_dbi) /
         (p.noise_power_w(pc) * loss);
}

inline double data_rate(const LinkParams& p, double distance_m, bool los,
                        const PhysicalConstants& pc = kConstants) {
  return p.bandwidth_hz * std::log2(1.0 + snr(p, distance_m, los, pc));
}

inline LinkBudget link_budget(const LinkParams& p, double distance_m, bool los,
                              const PhysicalConstants& pc = kConstants) {
  LinkBudget b;
  b.distance_m = distance_m;
  b.path_loss_linear = path_loss(distance_m, p.carrier_hz, pc);
  b.snr_linear = snr(p, distance_m, los, pc);
  b.rate_bps = p.bandwidth_hz * std::log2(1.0 + b.snr_linear);
  return b;
}

// Distance between ring neighbours; constant for equidistant satellites.
inline double neighbor_distance(const OrbitPlane& plane, const PhysicalConstants& pc = kConstants) {
  return 2.0 * (pc.earth_radius_m + plane.altitude_m) * std::sin(kPi / plane.num_sats);
}

// Rate of the slowest ring hop. All ISL hops of the plane run at this rate.
inline double fixed_link_rate(const LinkParams& p, const OrbitPlane& plane,
                              const PhysicalConstants& pc = kConstants) {
  plane.validate();
  double worst_d = 0.0;
  for (int k = 0; k < plane.num_sats; ++k) {
    const auto a = propagate(plane, k, 0.0, pc);
    const auto b = propagate(plane, (k + 1) % plane.num_sats, 0.0, pc);
    if (!has_isl_los(a, b, pc))
      throw ConfigurationError("fixed_link_rate: Earth blocks the link between ring neighbours " +
                               std::to_string(k) + " and " +
                               std::to_string((k + 1) % plane.num_sats) + " (K_p=" +
                               std::to_string(plane.num_sats) + ")");
    worst_d = std::max(worst_d, distance(a, b));
  }
  return data_rate(p, worst_d, true, pc);
}

inline double tx_duration(double bits, double rate_bps) {
  if (bits < 0.0) throw DomainError("tx_duration: negative payload");
  if (!(rate_bps > 0.0)) throw NoLinkError("tx_duration: link rate is zero");
  return bits / rate_bps;
}

inline double propagation_delay(double distance_m, const PhysicalConstants& pc = kConstants) {
  return distance_m / pc.light_speed;
}

}  // namespace satfl
