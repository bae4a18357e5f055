#include "ramanpd/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

#include "ramanpd/error.hpp"
#include "ramanpd/units.hpp"

namespace rpd {
namespace {

void check_profile(const PowerProfile2D& p) {
  require(!p.empty(), ErrorCode::invalid_argument, "profile is empty");
  require(p.all_finite(), ErrorCode::invalid_argument, "profile has non-finite entries");
}

}  // namespace

void WeightVector::validate() const {
  require(m0 >= 0.0 && m1 >= 0.0 && m2 >= 0.0, ErrorCode::invalid_argument, "weights must be non-negative");
  require(std::abs(m0 + m1 + m2 - 1.0) <= 1e-12, ErrorCode::invalid_argument, "weights must sum to one");
}

double power_excursion(const PowerProfile2D& p) {
  check_profile(p);
  const auto [lo, hi] = std::minmax_element(p.values().begin(), p.values().end());
  return *hi - *lo;
}

double spectrum_excursion(const PowerProfile2D& p) {
  check_profile(p);
  double worst = 0.0;
  for (std::size_t c = 0; c < p.cols(); ++c) {
    double lo = p.at(0, c), hi = lo;
    for (std::size_t r = 1; r < p.rows(); ++r) {
      lo = std::min(lo, p.at(r, c));
      hi = std::max(hi, p.at(r, c));
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

double end_gain_deviation(const PowerProfile2D& p) {
  check_profile(p);
  double worst = 0.0;
  const std::size_t last = p.cols() - 1;
  for (std::size_t r = 0; r < p.rows(); ++r) worst = std::max(worst, std::abs(p.at(r, last) - p.at(r, 0)));
  return worst;
}

double weighted_cost(const PowerProfile2D& p, const WeightVector& m) {
  m.validate();
  return m.m0 * power_excursion(p) + m.m1 * spectrum_excursion(p) + m.m2 * end_gain_deviation(p);
}

std::vector<double> per_channel_excursion(const PowerProfile2D& p) {
  check_profile(p);
  std::vector<double> out(p.rows());
  for (std::size_t r = 0; r < p.rows(); ++r) {
    const auto row = p.row(r);
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    out[r] = *hi - *lo;
  }
  return out;
}

std::vector<double> asymmetry_per_channel(const PowerProfile2D& p) {
  check_profile(p);
  const auto& z = p.z_grid();
  const std::size_t n = z.size();
  require(n >= 3 && n % 2 == 1, ErrorCode::invalid_argument, "asymmetry needs an odd number of z points");
  const double span = z.back() - z.front();
  for (std::size_t k = 0; k < n; ++k)
    require(std::abs((z[k] - z.front()) - (z.back() - z[n - 1 - k])) <= 1e-9 * span,
            ErrorCode::invalid_argument, "z grid must be symmetric about the span midpoint");

  const std::size_t mid = (n - 1) / 2;
  std::vector<double> out(p.rows());
  std::vector<double> mw(n);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    for (std::size_t k = 0; k < n; ++k) mw[k] = dbm_to_mw(p.at(r, k));
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < mid; ++k) {
      const double dz = z[k + 1] - z[k];
      num += 0.5 * dz * (std::abs(mw[k] - mw[n - 1 - k]) + std::abs(mw[k + 1] - mw[n - 2 - k]));
      den += 0.5 * dz * (mw[k] + mw[k + 1]);
    }
    require(den > 0.0, ErrorCode::invalid_state, "asymmetry denominator is zero");
    out[r] = num / den;
  }
  return out;
}

double max_asymmetry(const PowerProfile2D& p) {
  const auto a = asymmetry_per_channel(p);
  return *std::max_element(a.begin(), a.end());
}

CostBreakdown evaluate_costs(const PowerProfile2D& p, const std::optional<WeightVector>& m) {
  CostBreakdown c;
  c.j0 = power_excursion(p);
  c.j1 = spectrum_excursion(p);
  c.j2 = end_gain_deviation(p);
  if (m) {
    m->validate();
    c.weighted = m->m0 * c.j0 + m->m1 * c.j1 + m->m2 * c.j2;
  }
  c.asymmetry_per_channel = asymmetry_per_channel(p);
  c.max_asymmetry = *std::max_element(c.asymmetry_per_channel.begin(), c.asymmetry_per_channel.end());
  return c;
}

std::string cost_breakdown_json(const CostBreakdown& c, const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["j0_db"] = c.j0;
  j["j1_db"] = c.j1;
  j["j2_db"] = c.j2;
  j["weighted_db"] = c.weighted;
  j["max_asymmetry"] = c.max_asymmetry;
  j["asymmetry_per_channel"] = c.asymmetry_per_channel;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  return j.dump(2);
}

PowerProfile2D flat_target(double level_dbm, const ProfileGrid& grid) { return PowerProfile2D(grid, level_dbm); }

PowerProfile2D sinusoidal_symmetric_target(const ProfileGrid& grid) {
  PowerProfile2D p(grid, 0.0);
  const double z0 = grid.z_km.front();
  const double span = grid.z_km.back() - z0;
  for (std::size_t c = 0; c < p.cols(); ++c) {
    // 4 sin(pi t + pi) = -4 sin(pi t). Evaluating at the nearer end's mirror
    // column keeps mirrored columns bit-identical on the uniform grid.
    const std::size_t m = std::min(c, p.cols() - 1 - c);
    const double t = (grid.z_km[m] - z0) / span;
    const double v = -4.0 * std::sin(std::numbers::pi * t);
    for (std::size_t r = 0; r < p.rows(); ++r) p.at(r, c) = v;
  }
  return p;
}

}  // namespace rpd
