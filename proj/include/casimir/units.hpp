#pragma once

// Conversion between SI inputs and the internal natural units.
//
// Internally hbar = c = k_B = 1 and every frequency is stored as an inverse
// length in 1/um (omega/c). Lengths are in um, temperatures are k_B T/(hbar c)
// in 1/um, pressures in 1/um^4 and energies per area in 1/um^3.

namespace casimir::units {

// CODATA 2018 exact / recommended values.
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double boltzmann = 1.380649e-23;      // J/K
inline constexpr double electron_volt = 1.602176634e-19;  // J

inline constexpr double hbar_c = hbar * speed_of_light;  // J m
inline constexpr double um_per_m = 1e6;

/// k_B T / (hbar c) in 1/um.
constexpr double temperature_to_natural(double kelvin) {
  return boltzmann * kelvin / hbar_c / um_per_m;
}

constexpr double temperature_from_natural(double natural) {
  return natural * um_per_m * hbar_c / boltzmann;
}

/// Angular frequency in rad/s to omega/c in 1/um.
constexpr double angular_frequency_to_natural(double rad_per_s) {
  return rad_per_s / speed_of_light / um_per_m;
}

/// Photon energy in eV to omega/c in 1/um.
constexpr double ev_to_natural(double ev) { return ev * electron_volt / hbar_c / um_per_m; }

/// Pressure in 1/um^4 to Pa.
constexpr double pressure_to_pascal(double natural) {
  return natural * hbar_c * um_per_m * um_per_m * um_per_m * um_per_m;
}

/// Energy per area in 1/um^3 to J/m^2.
constexpr double energy_density_to_si(double natural) {
  return natural * hbar_c * um_per_m * um_per_m * um_per_m;
}

}  // namespace casimir::units
