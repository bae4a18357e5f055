#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace rpd {

/// Frequency (rows) and distance (columns) axes of a 2D power profile.
struct ProfileGrid {
  std::vector<double> freq_thz;
  std::vector<double> z_km;

  /// 40 channels 192.0..195.9 THz by 0.5 km steps over 80 km (40 x 161).
  static ProfileGrid standard();
  static ProfileGrid make(std::vector<double> freq_thz, double span_km, double z_step_km);

  std::size_t rows() const { return freq_thz.size(); }
  std::size_t cols() const { return z_km.size(); }
  bool operator==(const ProfileGrid&) const = default;
};

/// Signal power P(f, z) in dBm, row-major (channel, distance).
class PowerProfile2D {
 public:
  PowerProfile2D() = default;
  PowerProfile2D(ProfileGrid grid, std::vector<double> values_dbm);
  PowerProfile2D(ProfileGrid grid, double fill_dbm);

  std::size_t rows() const { return grid_.rows(); }
  std::size_t cols() const { return grid_.cols(); }
  bool empty() const { return values_.empty(); }

  double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
  double& at(std::size_t row, std::size_t col) { return values_[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  const ProfileGrid& grid() const { return grid_; }
  const std::vector<double>& freq_grid() const { return grid_.freq_thz; }
  const std::vector<double>& z_grid() const { return grid_.z_km; }

  bool all_finite() const;

 private:
  ProfileGrid grid_;
  std::vector<double> values_;
};

/// Header "z_km,ch0_192.0THz,...", one row per distance point, 6 decimals.
/// A non-empty config hash is emitted as a leading "# config_hash=" line.
void write_profile_csv(const PowerProfile2D& profile, std::ostream& out,
                       std::string_view config_hash = {});

/// Binary PGM (P5, maxval 255): rows = channels, columns = distance points.
/// Pmin/Pmax in dBm are written in the comment line.
void write_profile_pgm(const PowerProfile2D& profile, std::ostream& out,
                       std::string_view config_hash = {});

}  // namespace rpd
