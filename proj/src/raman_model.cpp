#include "ramanpd/raman_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "ramanpd/error.hpp"
#include "ramanpd/units.hpp"

namespace rpd {

double wavelength_to_frequency(double lambda_nm) {
  require(lambda_nm > 0.0 && std::isfinite(lambda_nm), ErrorCode::invalid_argument,
          "wavelength must be positive");
  return kSpeedOfLightNmThz / lambda_nm;
}

void FiberSpec::validate() const {
  require(span_length_km > 0.0, ErrorCode::invalid_argument, "span_length_km must be positive");
  require(alpha_signal_db_km > 0.0 && alpha_pump_first_db_km > 0.0 && alpha_pump_second_db_km > 0.0,
          ErrorCode::invalid_argument, "attenuations must be positive");
  require(raman_peak_efficiency > 0.0, ErrorCode::invalid_argument,
          "raman_peak_efficiency must be positive");
}

const std::array<PumpSpec, kPumpCount>& standard_pumps() {
  static const std::array<PumpSpec, kPumpCount> pumps{{
      {1366.0, Direction::forward, WaveRole::pump_second_order, 200.0, 1200.0},
      {1425.0, Direction::forward, WaveRole::pump_first_order, 5.0, 150.0},
      {1455.0, Direction::forward, WaveRole::pump_first_order, 5.0, 150.0},
      {1475.0, Direction::forward, WaveRole::pump_first_order, 5.0, 150.0},
      {1366.0, Direction::backward, WaveRole::pump_second_order, 200.0, 1200.0},
      {1425.0, Direction::backward, WaveRole::pump_first_order, 5.0, 150.0},
      {1455.0, Direction::backward, WaveRole::pump_first_order, 5.0, 150.0},
      {1475.0, Direction::backward, WaveRole::pump_first_order, 5.0, 150.0},
  }};
  return pumps;
}

WaveSet::WaveSet(std::vector<Wave> waves) : waves_(std::move(waves)) {
  for (const auto& w : waves_) {
    require(w.frequency_thz > 0.0 && std::isfinite(w.frequency_thz), ErrorCode::invalid_argument,
            "wave frequency must be positive");
    require(w.attenuation_per_km >= 0.0, ErrorCode::invalid_argument,
            "wave attenuation must be non-negative");
  }
}

WaveSet WaveSet::standard(const FiberSpec& fiber) {
  std::vector<double> channels(kChannelCount);
  for (std::size_t k = 0; k < kChannelCount; ++k)
    channels[k] = kFirstChannelThz + kChannelSpacingThz * static_cast<double>(k);
  return with_channels(fiber, channels);
}

WaveSet WaveSet::with_channels(const FiberSpec& fiber, std::span<const double> channel_thz) {
  fiber.validate();
  std::vector<Wave> waves;
  waves.reserve(channel_thz.size() + kPumpCount);
  for (double f : channel_thz)
    waves.push_back({f, Direction::forward, db_to_neper(fiber.alpha_signal_db_km), WaveRole::signal});
  for (const auto& p : standard_pumps()) {
    const double alpha = p.role == WaveRole::pump_second_order ? fiber.alpha_pump_second_db_km
                                                               : fiber.alpha_pump_first_db_km;
    waves.push_back({wavelength_to_frequency(p.wavelength_nm), p.direction, db_to_neper(alpha), p.role});
  }
  return WaveSet(std::move(waves));
}

std::vector<std::size_t> WaveSet::signal_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < waves_.size(); ++i)
    if (waves_[i].role == WaveRole::signal) out.push_back(i);
  return out;
}

std::vector<std::size_t> WaveSet::pump_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < waves_.size(); ++i)
    if (waves_[i].role != WaveRole::signal) out.push_back(i);
  return out;
}

std::vector<double> WaveSet::signal_frequencies() const {
  std::vector<double> out;
  for (const auto& w : waves_)
    if (w.role == WaveRole::signal) out.push_back(w.frequency_thz);
  return out;
}

bool WaveSet::is_standard() const {
  if (waves_.size() != kChannelCount + kPumpCount) return false;
  for (std::size_t k = 0; k < kChannelCount; ++k) {
    const auto& w = waves_[k];
    const double expected = kFirstChannelThz + kChannelSpacingThz * static_cast<double>(k);
    if (w.role != WaveRole::signal || w.direction != Direction::forward ||
        std::abs(w.frequency_thz - expected) > 1e-9)
      return false;
  }
  for (std::size_t p = 0; p < kPumpCount; ++p) {
    const auto& w = waves_[kChannelCount + p];
    const auto& spec = standard_pumps()[p];
    if (w.role != spec.role || w.direction != spec.direction) return false;
  }
  return true;
}

void PumpConfig::validate() const {
  for (double p : powers_mw)
    require(p > 0.0 && std::isfinite(p), ErrorCode::invalid_argument, "pump powers must be positive");
}

bool PumpConfig::within_ranges() const {
  for (std::size_t i = 0; i < kPumpCount; ++i) {
    const auto& spec = standard_pumps()[i];
    if (!(powers_mw[i] >= spec.min_mw && powers_mw[i] <= spec.max_mw)) return false;
  }
  return true;
}

RamanGainProfile RamanGainProfile::triangular(double peak_efficiency, double peak_shift_thz,
                                              double cutoff_thz) {
  require(peak_efficiency > 0.0, ErrorCode::invalid_argument, "peak efficiency must be positive");
  require(peak_shift_thz > 0.0 && cutoff_thz > peak_shift_thz, ErrorCode::invalid_argument,
          "need 0 < peak shift < cutoff");
  RamanGainProfile g;
  g.peak_ = peak_efficiency;
  g.peak_shift_ = peak_shift_thz;
  g.cutoff_ = cutoff_thz;
  return g;
}

RamanGainProfile RamanGainProfile::tabulated(std::vector<std::pair<double, double>> rows) {
  require(rows.size() >= 2, ErrorCode::invalid_argument, "gain table needs at least two rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(std::isfinite(rows[i].first) && std::isfinite(rows[i].second) && rows[i].second >= 0.0,
            ErrorCode::invalid_argument, "gain table entries must be finite and non-negative");
    if (i > 0)
      require(rows[i].first > rows[i - 1].first, ErrorCode::invalid_argument,
              "gain table frequency column must be strictly increasing");
  }
  RamanGainProfile g;
  g.table_ = std::move(rows);
  g.peak_ = 0.0;
  for (const auto& [df, eff] : g.table_) {
    if (eff > g.peak_) {
      g.peak_ = eff;
      g.peak_shift_ = df;
    }
  }
  g.cutoff_ = g.table_.back().first;
  return g;
}

RamanGainProfile RamanGainProfile::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::not_found, "cannot open gain table " + path.string());
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double df = 0.0, eff = 0.0;
    if (!(ls >> df)) continue;
    require(static_cast<bool>(ls >> eff), ErrorCode::invalid_argument,
            "gain table row needs two columns: " + line);
    rows.emplace_back(df, eff);
  }
  return tabulated(std::move(rows));
}

double RamanGainProfile::efficiency(double delta_f_thz) const {
  if (!(delta_f_thz > 0.0)) return 0.0;
  if (!table_.empty()) {
    if (delta_f_thz < table_.front().first || delta_f_thz > table_.back().first) return 0.0;
    const auto it = std::upper_bound(table_.begin(), table_.end(), delta_f_thz,
                                     [](double x, const auto& row) { return x < row.first; });
    if (it == table_.end()) return table_.back().second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (delta_f_thz - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
  }
  if (delta_f_thz <= peak_shift_) return peak_ * delta_f_thz / peak_shift_;
  if (delta_f_thz < cutoff_) return peak_ * (cutoff_ - delta_f_thz) / (cutoff_ - peak_shift_);
  return 0.0;
}

double raman_gain(double delta_f_thz, const FiberSpec& fiber) {
  return RamanGainProfile::triangular(fiber.raman_peak_efficiency).efficiency(delta_f_thz);
}

CouplingMatrix::CouplingMatrix(const WaveSet& waves, const RamanGainProfile& gain)
    : n_(waves.size()), c_(n_ * n_, 0.0) {
  for (std::size_t i = 0; i < n_; ++i) {
    const double fi = waves[i].frequency_thz;
    for (std::size_t j = 0; j < n_; ++j) {
      const double fj = waves[j].frequency_thz;
      if (fj > fi)
        c_[i * n_ + j] = gain.efficiency(fj - fi);
      else if (fj < fi)
        c_[i * n_ + j] = -(fi / fj) * gain.efficiency(fi - fj);
    }
  }
}

void coupled_rhs(double /*z_km*/, std::span<const double> powers_w, const WaveSet& waves,
                 const CouplingMatrix& coupling, std::span<double> out) {
  const std::size_t n = waves.size();
  require(powers_w.size() == n && out.size() == n && coupling.size() == n,
          ErrorCode::invalid_argument, "power vector size does not match wave set");
  for (double p : powers_w)
    require(p >= 0.0, ErrorCode::invalid_state, "powers must be non-negative and not NaN");
  for (std::size_t i = 0; i < n; ++i) {
    const double* c = coupling.row(i);
    double exchange = 0.0;
    for (std::size_t j = 0; j < n; ++j) exchange += c[j] * powers_w[j];
    const double slope = powers_w[i] * (exchange - waves[i].attenuation_per_km);
    out[i] = waves[i].direction == Direction::forward ? slope : -slope;
  }
}

std::vector<double> coupled_rhs(double z_km, std::span<const double> powers_w, const WaveSet& waves,
                                const RamanGainProfile& gain) {
  std::vector<double> out(waves.size());
  coupled_rhs(z_km, powers_w, waves, CouplingMatrix(waves, gain), out);
  return out;
}

}  // namespace rpd
