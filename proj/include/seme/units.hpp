#ifndef SEME_UNITS_HPP
#define SEME_UNITS_HPP

#include <cmath>
#include <limits>
#include <numbers>

namespace seme {

inline constexpr double kSpeedOfLight = 299'792'458.0;      // m/s
inline constexpr double kVacuumPermeability = 1.25663706212e-6; // H/m (CODATA 2018)
inline constexpr double kVacuumPermittivity = 8.8541878128e-12; // F/m (CODATA 2018)

/// Free-space wave impedance sqrt(mu0 / eps0), ~376.730 ohm.
inline double free_space_impedance() noexcept
{
    return std::sqrt(kVacuumPermeability / kVacuumPermittivity);
}

inline double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// 0 W maps to -inf dBm.
inline double watts_to_dbm(double watts) noexcept
{
    if (watts <= 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(watts) + 30.0;
}

inline double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) noexcept { return 10.0 * std::log10(x); }

inline constexpr double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

} // namespace seme

#endif // SEME_UNITS_HPP
