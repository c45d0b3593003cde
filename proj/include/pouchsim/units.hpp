#ifndef POUCHSIM_UNITS_HPP
#define POUCHSIM_UNITS_HPP

#include <numbers>

namespace pouchsim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kGravity = 9.80665;       // m/s^2
inline constexpr double kPascalPerPsi = 6894.757293168;

constexpr double psi_to_pa(double psi) { return psi * kPascalPerPsi; }
constexpr double pa_to_psi(double pa) { return pa / kPascalPerPsi; }
constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }
constexpr double lpm_to_m3s(double lpm) { return lpm * 1e-3 / 60.0; }

} // namespace pouchsim

#endif // POUCHSIM_UNITS_HPP
