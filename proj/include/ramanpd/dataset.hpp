/**
 * @file dataset.hpp
 * @brief Pump-power -> 2D profile training corpus.
 *
 * On disk a dataset is a directory holding `manifest.json` and one record file
 * `samples.rrd`. Each record is little-endian float32: the eight pump powers
 * (mW) followed by the rows x cols profile in dBm, row-major. Records are
 * ordered train | val | test, so splits are contiguous index ranges.
 */
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ramanpd/bvp_solver.hpp"
#include "ramanpd/raman_model.hpp"
#include "ramanpd/rng.hpp"

namespace rpd {

struct Sample {
  std::array<float, kPumpCount> pumps_mw{};
  std::vector<float> profile_dbm;
};

struct SplitCounts {
  std::uint64_t train = 3500;
  std::uint64_t val = 800;
  std::uint64_t test = 800;

  std::uint64_t total() const { return train + val + test; }
  bool operator==(const SplitCounts&) const = default;
};

enum class Split { train, val, test, all };

Split parse_split(std::string_view name);
std::string_view split_name(Split s);

/// Validation and test sizes are floor(n * ratio); training takes the rest.
SplitCounts split_counts(std::uint64_t n, const SplitCounts& ratios = {});

struct DatasetManifest {
  std::uint64_t seed = 0;
  SplitCounts counts{0, 0, 0};
  std::uint64_t redraws = 0;
  std::string config_hash;
  std::uint64_t record_bytes = 0;
  std::string float_format = "le_f32";
  std::string record_file = "samples.rrd";
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<double> freq_grid;
  std::vector<double> z_grid;

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

/// Maps per-pump quantiles in [0, 1] onto the standard pump ranges.
PumpConfig pump_config_from_quantiles(const std::array<double, kPumpCount>& u);
PumpConfig sample_pump_config(Rng& rng);

struct GenerateOptions {
  SplitCounts ratios{};
  unsigned jobs = 1;
  double max_failure_rate = 0.05;
  std::string config_hash;
};

/// Writes n samples to dir. Sample i draws from Rng(seed ^ i), so content is
/// independent of job count. Non-convergent draws are redrawn from the same
/// stream and counted; a failure rate above max_failure_rate aborts.
DatasetManifest generate_dataset(const RamanSolver& solver, std::uint64_t n, std::uint64_t seed,
                                 const std::filesystem::path& dir, const GenerateOptions& opts = {});

class Dataset {
 public:
  /// Throws not_found if the manifest or record file is missing.
  static Dataset open(const std::filesystem::path& dir);

  const DatasetManifest& manifest() const { return manifest_; }
  std::uint64_t size() const { return manifest_.counts.total(); }

  /// First index and count of a split.
  std::pair<std::uint64_t, std::uint64_t> range(Split s) const;
  std::vector<Sample> load(Split s) const;
  std::vector<Sample> load_range(std::uint64_t first, std::uint64_t count) const;

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
};

}  // namespace rpd
