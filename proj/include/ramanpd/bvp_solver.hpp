/**
 * @file bvp_solver.hpp
 * @brief Two-point boundary value solver for bidirectional Raman propagation.
 *
 * Forward waves are fixed at z = 0 and backward waves at z = L. The solver
 * relaxes between the two families: forward waves are integrated 0 -> L with
 * classical RK4 while backward-wave profiles are held frozen, then backward
 * waves are integrated L -> 0 against the fresh forward profiles. Sweeps
 * repeat until the largest relative change of any wave at any grid point
 * drops below the residual threshold.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ramanpd/profile.hpp"
#include "ramanpd/raman_model.hpp"

namespace rpd {

struct SolverConfig {
  double z_step_km = 0.5;
  double residual_threshold = 1e-6;
  int max_relaxation_iters = 100;
  /// new iterate = damping * sweep + (1 - damping) * previous
  double damping = 0.8;
  /// Multiply the damping by this factor whenever the residual grows between
  /// iterations (1 disables adaptation).
  double damping_backoff = 0.7;
  double min_damping = 0.05;
  int rk_substeps = 1;
  /// Per-channel launch power.
  double signal_launch_dbm = 0.0;

  void validate(double span_km) const;
};

struct SolveResult {
  /// Signal rows in wave-set order, dBm.
  PowerProfile2D signal_profile;
  /// Pump rows in wave-set order, linear mW, row-major (pump, distance).
  std::vector<double> pump_profiles_mw;
  std::size_t pump_count = 0;
  /// Every wave, linear W, row-major (wave, distance).
  std::vector<double> powers_w;
  std::size_t wave_count = 0;
  /// Wave index of each signal row.
  std::vector<std::size_t> signal_waves;

  bool converged = false;
  int iterations_used = 0;
  double final_residual = 0.0;
  /// Negative powers clamped to zero during integration.
  std::size_t clamp_count = 0;
  /// Signal entries that were zero/negative and mapped to -inf dBm.
  std::size_t nonpositive_signal_entries = 0;

  std::size_t points() const { return signal_profile.cols(); }
  double power_w(std::size_t wave, std::size_t col) const { return powers_w[wave * points() + col]; }
  double pump_mw(std::size_t pump, std::size_t col) const { return pump_profiles_mw[pump * points() + col]; }
};

/// Reusable solver bound to one fiber, wave set and gain curve. solve() is
/// const and thread-safe.
class RamanSolver {
 public:
  RamanSolver(FiberSpec fiber, WaveSet waves, RamanGainProfile gain, SolverConfig cfg = {});
  /// Uses the fiber's triangular gain profile.
  RamanSolver(FiberSpec fiber, WaveSet waves, SolverConfig cfg = {});

  /// Launch powers (W) in wave-set order: forward waves at z = 0, backward at z = L.
  SolveResult solve(std::span<const double> launch_w) const;
  /// Pumps p1..p8 (mW) onto the pump waves in order; signals at the configured launch.
  SolveResult solve(const PumpConfig& pumps) const;

  std::vector<double> launch_vector(const PumpConfig& pumps) const;

  const FiberSpec& fiber() const { return fiber_; }
  const WaveSet& waves() const { return waves_; }
  const RamanGainProfile& gain() const { return gain_; }
  const SolverConfig& config() const { return cfg_; }
  const CouplingMatrix& coupling() const { return coupling_; }
  ProfileGrid grid() const;

 private:
  FiberSpec fiber_;
  WaveSet waves_;
  RamanGainProfile gain_;
  SolverConfig cfg_;
  CouplingMatrix coupling_;
};

SolveResult solve(const PumpConfig& pumps, const FiberSpec& fiber, const WaveSet& waves,
                  const SolverConfig& cfg = {});

/// Converts the linear signal powers of a result to dBm. Non-positive powers
/// become -inf and are counted in *nonpositive when given.
PowerProfile2D signal_profile_dbm(const SolveResult& result, std::size_t* nonpositive = nullptr);

}  // namespace rpd
