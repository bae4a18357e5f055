/**
 * @file raman_model.hpp
 * @brief Fiber, wave and pump bookkeeping plus the stimulated Raman coupling.
 *
 * Powers are linear Watts and distances km everywhere in this header. The
 * coupled power equations for wave i travelling in direction s_i (+1 forward,
 * -1 backward) read
 *
 *   s_i dP_i/dz = -a_i P_i + P_i sum_{f_j > f_i} g(f_j - f_i) P_j
 *                          - P_i sum_{f_j < f_i} (f_i / f_j) g(f_i - f_j) P_j
 *
 * which is what CouplingMatrix precomputes: C_ij = g(f_j - f_i) above the
 * diagonal in frequency and -(f_i/f_j) g(f_i - f_j) below it.
 */
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace rpd {

struct FiberSpec {
  double span_length_km = 80.0;
  double alpha_signal_db_km = 0.2;
  double alpha_pump_first_db_km = 0.25;
  double alpha_pump_second_db_km = 0.32;
  /// Peak Raman efficiency g_R in 1/(W km).
  double raman_peak_efficiency = 0.4125;
  /// Recorded only: g_R is already normalized by the effective area.
  double effective_area_um2 = 80.0;
  /// Recorded only: no phase effects in power evolution.
  double nonlinear_coeff = 1.26;

  void validate() const;
};

enum class Direction { forward, backward };
enum class WaveRole { signal, pump_first_order, pump_second_order };

struct Wave {
  double frequency_thz = 0.0;
  Direction direction = Direction::forward;
  /// Natural units (1/km).
  double attenuation_per_km = 0.0;
  WaveRole role = WaveRole::signal;
};

inline constexpr std::size_t kPumpCount = 8;
inline constexpr std::size_t kChannelCount = 40;
inline constexpr double kFirstChannelThz = 192.0;
inline constexpr double kChannelSpacingThz = 0.1;

struct PumpSpec {
  double wavelength_nm;
  Direction direction;
  WaveRole role;
  double min_mw;
  double max_mw;
};

/// p1..p4 co-propagating, p5..p8 counter-propagating; 1366 nm is second order.
const std::array<PumpSpec, kPumpCount>& standard_pumps();

/// Ordered waves: signals first (ascending frequency), then co-pumps, then
/// counter-pumps. Arbitrary compositions are allowed for experiments; the
/// standard 40 + 8 layout is checked by is_standard().
class WaveSet {
 public:
  WaveSet() = default;
  explicit WaveSet(std::vector<Wave> waves);

  static WaveSet standard(const FiberSpec& fiber);
  /// Given signal channels plus the eight standard pumps.
  static WaveSet with_channels(const FiberSpec& fiber, std::span<const double> channel_thz);

  std::span<const Wave> waves() const { return waves_; }
  std::size_t size() const { return waves_.size(); }
  const Wave& operator[](std::size_t i) const { return waves_[i]; }

  std::vector<std::size_t> signal_indices() const;
  std::vector<std::size_t> pump_indices() const;
  std::vector<double> signal_frequencies() const;

  bool is_standard() const;

 private:
  std::vector<Wave> waves_;
};

struct PumpConfig {
  std::array<double, kPumpCount> powers_mw{};

  /// All powers finite and strictly positive.
  void validate() const;
  /// Inside the standard pump power ranges (inclusive).
  bool within_ranges() const;
};

/// Raman efficiency versus frequency down-shift.
///
/// The default shape is triangular: linear rise from 0 to the peak at
/// 13.2 THz, linear fall to 0 at 15 THz. A tabulated curve (linear
/// interpolation, zero outside the table) can replace it.
class RamanGainProfile {
 public:
  static RamanGainProfile triangular(double peak_efficiency, double peak_shift_thz = 13.2,
                                     double cutoff_thz = 15.0);
  static RamanGainProfile tabulated(std::vector<std::pair<double, double>> rows);
  /// Two whitespace-separated columns "delta_f_THz efficiency_per_W_km".
  static RamanGainProfile load_table(const std::filesystem::path& path);

  double efficiency(double delta_f_thz) const;

  bool is_tabulated() const { return !table_.empty(); }
  const std::vector<std::pair<double, double>>& table() const { return table_; }
  double peak_efficiency() const { return peak_; }
  double peak_shift_thz() const { return peak_shift_; }
  double cutoff_thz() const { return cutoff_; }

 private:
  double peak_ = 0.0;
  double peak_shift_ = 13.2;
  double cutoff_ = 15.0;
  std::vector<std::pair<double, double>> table_;
};

/// Triangular profile scaled by the fiber's peak efficiency.
double raman_gain(double delta_f_thz, const FiberSpec& fiber = {});

class CouplingMatrix {
 public:
  CouplingMatrix(const WaveSet& waves, const RamanGainProfile& gain);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return c_[i * n_ + j]; }
  const double* row(std::size_t i) const { return c_.data() + i * n_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> c_;
};

/// dP/dz for every wave (W/km). Throws invalid_state on NaN or negative power.
std::vector<double> coupled_rhs(double z_km, std::span<const double> powers_w, const WaveSet& waves,
                                const RamanGainProfile& gain);

void coupled_rhs(double z_km, std::span<const double> powers_w, const WaveSet& waves,
                 const CouplingMatrix& coupling, std::span<double> out);

}  // namespace rpd
