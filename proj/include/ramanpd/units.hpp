#pragma once

#include <cmath>
#include <limits>

namespace rpd {

/// Speed of light in nm·THz, so that f[THz] = c / lambda[nm].
inline constexpr double kSpeedOfLightNmThz = 299792.458;

double wavelength_to_frequency(double lambda_nm);

inline double db_to_neper(double db_per_km) { return db_per_km * std::log(10.0) / 10.0; }

/// Non-positive power maps to -inf.
inline double mw_to_dbm(double mw) {
  if (!(mw > 0.0)) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(mw);
}

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

}  // namespace rpd
