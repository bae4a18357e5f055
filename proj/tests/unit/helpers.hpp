#pragma once

#include <cmath>
#include <vector>

#include "ramanpd/bvp_solver.hpp"
#include "ramanpd/raman_model.hpp"
#include "ramanpd/units.hpp"

namespace rpd::testing {

inline Wave signal_wave(double thz, double alpha_db_km = 0.2) {
  return {thz, Direction::forward, db_to_neper(alpha_db_km), WaveRole::signal};
}

inline Wave pump_wave(double lambda_nm, Direction dir, double alpha_db_km = 0.25) {
  return {wavelength_to_frequency(lambda_nm), dir, db_to_neper(alpha_db_km), WaveRole::pump_first_order};
}

/// Signal power (dBm) at the far end for a solve with explicit launch powers.
inline double end_dbm(const SolveResult& r, std::size_t wave) {
  return mw_to_dbm(1e3 * r.power_w(wave, r.points() - 1));
}

}  // namespace rpd::testing
