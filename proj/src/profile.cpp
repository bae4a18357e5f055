#include "ramanpd/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "ramanpd/error.hpp"
#include "ramanpd/raman_model.hpp"

namespace rpd {
namespace {

void check_increasing(const std::vector<double>& axis, const char* name) {
  for (std::size_t i = 1; i < axis.size(); ++i)
    require(axis[i] > axis[i - 1], ErrorCode::invalid_argument,
            std::string(name) + " grid must be strictly increasing");
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

ProfileGrid ProfileGrid::standard() {
  std::vector<double> freqs(kChannelCount);
  for (std::size_t k = 0; k < kChannelCount; ++k)
    freqs[k] = kFirstChannelThz + kChannelSpacingThz * static_cast<double>(k);
  return make(std::move(freqs), 80.0, 0.5);
}

ProfileGrid ProfileGrid::make(std::vector<double> freq_thz, double span_km, double z_step_km) {
  require(span_km > 0.0 && z_step_km > 0.0, ErrorCode::invalid_argument,
          "span and step must be positive");
  const double intervals = span_km / z_step_km;
  const auto n = static_cast<std::size_t>(std::llround(intervals));
  require(n >= 1 && std::abs(intervals - static_cast<double>(n)) <= 1e-9 * intervals,
          ErrorCode::invalid_argument, "z step must divide the span length exactly");
  ProfileGrid g;
  g.freq_thz = std::move(freq_thz);
  g.z_km.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g.z_km[k] = span_km * static_cast<double>(k) / static_cast<double>(n);
  return g;
}

PowerProfile2D::PowerProfile2D(ProfileGrid grid, std::vector<double> values_dbm)
    : grid_(std::move(grid)), values_(std::move(values_dbm)) {
  require(values_.size() == grid_.rows() * grid_.cols(), ErrorCode::invalid_argument,
          "profile values do not match grid shape");
  check_increasing(grid_.freq_thz, "frequency");
  check_increasing(grid_.z_km, "distance");
}

PowerProfile2D::PowerProfile2D(ProfileGrid grid, double fill_dbm)
    : PowerProfile2D(grid, std::vector<double>(grid.rows() * grid.cols(), fill_dbm)) {}

bool PowerProfile2D::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void write_profile_csv(const PowerProfile2D& profile, std::ostream& out, std::string_view config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "z_km";
  for (std::size_t r = 0; r < profile.rows(); ++r)
    out << ",ch" << r << '_' << format_fixed(profile.freq_grid()[r], 1) << "THz";
  out << '\n';
  for (std::size_t c = 0; c < profile.cols(); ++c) {
    out << format_fixed(profile.z_grid()[c], 6);
    for (std::size_t r = 0; r < profile.rows(); ++r) out << ',' << format_fixed(profile.at(r, c), 6);
    out << '\n';
  }
}

void write_profile_pgm(const PowerProfile2D& profile, std::ostream& out, std::string_view config_hash) {
  require(!profile.empty(), ErrorCode::invalid_argument, "cannot export an empty profile");
  require(profile.all_finite(), ErrorCode::invalid_argument, "cannot export a non-finite profile");
  const auto [lo, hi] = std::minmax_element(profile.values().begin(), profile.values().end());
  const double pmin = *lo;
  const double pmax = *hi;
  out << "P5\n# pmin=" << format_fixed(pmin, 6) << " pmax=" << format_fixed(pmax, 6);
  if (!config_hash.empty()) out << " config_hash=" << config_hash;
  out << '\n' << profile.cols() << ' ' << profile.rows() << "\n255\n";
  const double span = pmax - pmin;
  std::string bytes(profile.rows() * profile.cols(), '\0');
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double v = span > 0.0 ? std::round(255.0 * (profile.values()[i] - pmin) / span) : 0.0;
    bytes[i] = static_cast<char>(static_cast<unsigned char>(std::clamp(v, 0.0, 255.0)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace rpd
