#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ramanpd/profile.hpp"

namespace rpd {

struct WeightVector {
  double m0 = 1.0;
  double m1 = 0.0;
  double m2 = 0.0;

  /// Non-negative and summing to one within 1e-12.
  void validate() const;
};

struct CostBreakdown {
  double j0 = 0.0;  ///< power excursion, dB
  double j1 = 0.0;  ///< spectrum excursion, dB
  double j2 = 0.0;  ///< end-to-end gain deviation, dB
  double weighted = 0.0;
  std::vector<double> asymmetry_per_channel;
  double max_asymmetry = 0.0;
};

// Excursions work on dBm values; asymmetry on linear mW values.

double power_excursion(const PowerProfile2D& p);
double spectrum_excursion(const PowerProfile2D& p);
double end_gain_deviation(const PowerProfile2D& p);
double weighted_cost(const PowerProfile2D& p, const WeightVector& m);
std::vector<double> per_channel_excursion(const PowerProfile2D& p);

/// Trapezoidal integrals over the first half of a z-grid that is symmetric
/// about L/2 with an odd number of points. Throws invalid_state on a zero
/// denominator.
std::vector<double> asymmetry_per_channel(const PowerProfile2D& p);
double max_asymmetry(const PowerProfile2D& p);

/// Weighted term is filled only when weights are given.
CostBreakdown evaluate_costs(const PowerProfile2D& p, const std::optional<WeightVector>& m = std::nullopt);

/// {j0_db, j1_db, j2_db, weighted_db, max_asymmetry, asymmetry_per_channel[]}
std::string cost_breakdown_json(const CostBreakdown& c, const std::string& config_hash = {});

PowerProfile2D flat_target(double level_dbm, const ProfileGrid& grid = ProfileGrid::standard());
/// 4 sin(pi z / L + pi) dBm for every channel, endpoints included.
PowerProfile2D sinusoidal_symmetric_target(const ProfileGrid& grid = ProfileGrid::standard());

}  // namespace rpd
