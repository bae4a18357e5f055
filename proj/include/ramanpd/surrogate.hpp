/**
 * @file surrogate.hpp
 * @brief Convolutional inverse model: 2D power profile -> eight pump powers.
 *
 * Architecture (fixed by NetworkSpec):
 *
 *   input 1 x 40 x 161
 *   4 x [conv 3x3 same, stride 1, ReLU -> maxpool 2x2 stride 2, ceil mode]
 *       filters 8, 16, 16, 32  ->  32 x 3 x 11
 *   flatten (1056, channel-major) -> dense 64 ReLU -> dense 8 logistic
 *
 * Ceil-mode pooling only considers in-range elements of a clipped window, so
 * an odd trailing row/column is pooled on its own. Ties in a pooling window
 * go to the first element in row-major order.
 *
 * Parameter blob order: for each conv layer W[F][C][3][3] then b[F]; then
 * dense1 W[64][1056], b[64]; then dense2 W[8][64], b[8].
 */
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ramanpd/dataset.hpp"
#include "ramanpd/profile.hpp"
#include "ramanpd/raman_model.hpp"

namespace rpd {

struct TensorShape {
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return channels * rows * cols; }
  bool operator==(const TensorShape&) const = default;
};

struct NetworkSpec {
  std::size_t input_rows = 40;
  std::size_t input_cols = 161;
  std::vector<std::size_t> conv_filters{8, 16, 16, 32};
  std::size_t kernel = 3;
  std::size_t dense_units = 64;
  std::size_t outputs = kPumpCount;

  void validate() const;
  /// Shape entering conv layer l; index conv_filters.size() is the pooled output.
  TensorShape conv_input_shape(std::size_t layer) const;
  std::size_t flatten_size() const;
  std::size_t parameter_count() const;
  bool operator==(const NetworkSpec&) const = default;
};

struct Network {
  NetworkSpec spec;
  std::vector<double> params;

  /// Fan-in scaled uniform init (limit sqrt(6/fan_in) for ReLU layers,
  /// sqrt(3/fan_in) for the logistic head), zero biases.
  static Network initialize(const NetworkSpec& spec, std::uint64_t seed);
  static Network zeros(const NetworkSpec& spec);
};

/// Reusable scratch buffers for forward/backward passes (one per thread).
class Workspace {
 public:
  explicit Workspace(const NetworkSpec& spec);
  ~Workspace();
  Workspace(Workspace&&) noexcept;
  Workspace& operator=(Workspace&&) noexcept;

  struct Impl;
  Impl& impl() { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

/// Normalized input (rows x cols, row-major) -> outputs in (0, 1).
std::vector<double> forward(const Network& net, std::span<const double> input, Workspace& ws);
std::vector<double> forward(const Network& net, std::span<const double> input);

struct BatchItem {
  std::span<const double> input;
  std::span<const double> target;
};

/// Mean squared error over batch items and outputs; grad receives dLoss/dparams
/// (resized to the parameter count and overwritten).
double loss_and_gradient(const Network& net, std::span<const BatchItem> batch, std::vector<double>& grad,
                         Workspace& ws);
double loss(const Network& net, std::span<const BatchItem> batch, Workspace& ws);

/// Input: scalar mean/std of training dBm values. Output: per-pump range -> [0, 1].
struct Normalizer {
  double input_mean = 0.0;
  double input_std = 1.0;
  std::array<double, kPumpCount> output_lo{};
  std::array<double, kPumpCount> output_hi{};

  /// Output ranges from the standard pump table; input stats from the samples.
  static Normalizer fit(std::span<const Sample> train);

  void normalize_input(std::span<const float> dbm, std::span<double> out) const;
  void normalize_input(std::span<const double> dbm, std::span<double> out) const;
  double normalize_pump(std::size_t i, double mw) const { return (mw - output_lo[i]) / (output_hi[i] - output_lo[i]); }
  double denormalize_pump(std::size_t i, double x) const { return output_lo[i] + x * (output_hi[i] - output_lo[i]); }
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t max_epochs = 500;
  std::size_t patience = 25;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

class SurrogateModel {
 public:
  SurrogateModel() = default;
  SurrogateModel(Network net, Normalizer norm, std::uint64_t seed = 0);

  /// Normalized pump vector in (0, 1)^8. Throws invalid_argument on shape mismatch.
  std::vector<double> forward(const PowerProfile2D& profile) const;
  PumpConfig predict_pumps(const PowerProfile2D& profile) const;
  PumpConfig predict_pumps(std::span<const float> profile_dbm) const;

  const Network& network() const { return net_; }
  const Normalizer& normalizer() const { return norm_; }
  std::uint64_t seed() const { return seed_; }

  /// Writes model.json and weights.bin (little-endian float64) into dir.
  void save(const std::filesystem::path& dir, const std::string& config_hash = {}) const;
  static SurrogateModel load(const std::filesystem::path& dir);

 private:
  Network net_;
  Normalizer norm_;
  std::uint64_t seed_ = 0;
};

struct TrainResult {
  SurrogateModel model;
  std::vector<EpochRecord> curve;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;
  bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on minibatches; returns the weights with the best validation MSE.
/// Throws runtime if the validation MSE becomes NaN.
TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set, const NetworkSpec& spec,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Mean squared error of normalized pump vectors over a sample set.
double evaluate_mse(const SurrogateModel& model, std::span<const Sample> samples);

/// Per-pump coefficient of determination on physical (mW) values; nullopt
/// where the truth has zero variance. Needs at least two samples.
std::array<std::optional<double>, kPumpCount> r_squared(std::span<const PumpConfig> predictions,
                                                        std::span<const PumpConfig> truths);

/// Largest absolute dBm difference between two profiles on the same grid.
double e_max(const PowerProfile2D& truth, const PowerProfile2D& predicted);

void write_learning_curve_csv(std::span<const EpochRecord> curve, std::ostream& out,
                              const std::string& config_hash = {});

}  // namespace rpd
