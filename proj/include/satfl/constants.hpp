#pragma once

#include <numbers>

namespace satfl {

struct PhysicalConstants {
  double mu = 3.98e14;                      // geocentric gravitational constant [m^3/s^2]
  double earth_radius_m = 6.371e6;          // spherical Earth [m]
  double boltzmann = 1.380649e-23;          // [J/K]
  double light_speed = 299792458.0;         // [m/s]
  double earth_rotation_rate = 7.2921159e-5;  // sidereal [rad/s]
};

inline constexpr PhysicalConstants kConstants{};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace satfl
