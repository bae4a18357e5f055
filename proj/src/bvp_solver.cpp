#include "ramanpd/bvp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ramanpd/error.hpp"
#include "ramanpd/units.hpp"

namespace rpd {
namespace {

constexpr double kResidualFloorW = 1e-12;

/// Row-major (wave, grid point) linear power table.
struct PowerTable {
  std::size_t points = 0;
  std::vector<double> p;
  double* row(std::size_t w) { return p.data() + w * points; }
  const double* row(std::size_t w) const { return p.data() + w * points; }
};

/// Frozen-wave value between two grid points; geometric interpolation is
/// exact for pure exponential decay/growth between the nodes.
inline double interpolate(double a, double b, double t) {
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  if (a > 0.0 && b > 0.0) return t == 0.5 ? std::sqrt(a * b) : a * std::pow(b / a, t);
  return a + t * (b - a);
}

/// Integrates one direction family along its propagation coordinate while
/// the other family is held fixed.
class Sweep {
 public:
  Sweep(const WaveSet& waves, const CouplingMatrix& coupling, std::vector<std::size_t> active,
        std::vector<std::size_t> frozen, bool forward)
      : active_(std::move(active)), frozen_(std::move(frozen)), forward_(forward) {
    const std::size_t na = active_.size();
    const std::size_t nf = frozen_.size();
    alpha_.resize(na);
    ca_.resize(na * na);
    cf_.resize(na * nf);
    for (std::size_t i = 0; i < na; ++i) {
      alpha_[i] = waves[active_[i]].attenuation_per_km;
      for (std::size_t j = 0; j < na; ++j) ca_[i * na + j] = coupling(active_[i], active_[j]);
      for (std::size_t j = 0; j < nf; ++j) cf_[i * nf + j] = coupling(active_[i], frozen_[j]);
    }
    y_.resize(na);
    k1_.resize(na);
    k2_.resize(na);
    k3_.resize(na);
    k4_.resize(na);
    tmp_.resize(na);
    b0_.resize(na);
    bm_.resize(na);
    b1_.resize(na);
    fz_.resize(nf);
  }

  bool empty() const { return active_.empty(); }

  /// Returns false if the integration produced NaN.
  bool run(PowerTable& table, double h, int substeps, std::size_t& clamps) {
    const std::size_t na = active_.size();
    if (na == 0) return true;
    const std::size_t n_int = table.points - 1;
    auto ord = [&](std::size_t m) { return forward_ ? m : n_int - m; };

    for (std::size_t i = 0; i < na; ++i) y_[i] = table.row(active_[i])[ord(0)];
    frozen_term(table, ord(0), ord(0), 0.0, b1_);

    const double hs = h / substeps;
    for (std::size_t m = 0; m < n_int; ++m) {
      const std::size_t k0 = ord(m);
      const std::size_t k1 = ord(m + 1);
      for (int s = 0; s < substeps; ++s) {
        const double t0 = static_cast<double>(s) / substeps;
        const double tm = (s + 0.5) / substeps;
        const double t1 = static_cast<double>(s + 1) / substeps;
        if (s == 0)
          b0_ = b1_;
        else
          frozen_term(table, k0, k1, t0, b0_);
        frozen_term(table, k0, k1, tm, bm_);
        frozen_term(table, k0, k1, t1, b1_);

        derivative(y_, b0_, k1_);
        for (std::size_t i = 0; i < na; ++i) tmp_[i] = y_[i] + 0.5 * hs * k1_[i];
        derivative(tmp_, bm_, k2_);
        for (std::size_t i = 0; i < na; ++i) tmp_[i] = y_[i] + 0.5 * hs * k2_[i];
        derivative(tmp_, bm_, k3_);
        for (std::size_t i = 0; i < na; ++i) tmp_[i] = y_[i] + hs * k3_[i];
        derivative(tmp_, b1_, k4_);
        for (std::size_t i = 0; i < na; ++i) {
          y_[i] += hs / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
          if (y_[i] < 0.0) {
            y_[i] = 0.0;
            ++clamps;
          } else if (!(y_[i] == y_[i])) {
            return false;
          }
        }
      }
      for (std::size_t i = 0; i < na; ++i) table.row(active_[i])[k1] = y_[i];
    }
    return true;
  }

  const std::vector<std::size_t>& active() const { return active_; }

 private:
  void frozen_term(const PowerTable& table, std::size_t k0, std::size_t k1, double t,
                   std::vector<double>& out) {
    const std::size_t nf = frozen_.size();
    const std::size_t na = active_.size();
    for (std::size_t j = 0; j < nf; ++j) {
      const double* r = table.row(frozen_[j]);
      fz_[j] = interpolate(r[k0], r[k1], t);
    }
    for (std::size_t i = 0; i < na; ++i) {
      const double* c = cf_.data() + i * nf;
      double acc = 0.0;
      for (std::size_t j = 0; j < nf; ++j) acc += c[j] * fz_[j];
      out[i] = acc;
    }
  }

  void derivative(const std::vector<double>& y, const std::vector<double>& b, std::vector<double>& out) const {
    const std::size_t na = active_.size();
    for (std::size_t i = 0; i < na; ++i) {
      const double* c = ca_.data() + i * na;
      double acc = b[i] - alpha_[i];
      for (std::size_t j = 0; j < na; ++j) acc += c[j] * y[j];
      out[i] = y[i] * acc;
    }
  }

  std::vector<std::size_t> active_, frozen_;
  bool forward_;
  std::vector<double> alpha_, ca_, cf_;
  std::vector<double> y_, k1_, k2_, k3_, k4_, tmp_, b0_, bm_, b1_, fz_;
};

}  // namespace

void SolverConfig::validate(double span_km) const {
  require(z_step_km > 0.0, ErrorCode::invalid_argument, "z_step must be positive");
  const double intervals = span_km / z_step_km;
  require(std::abs(intervals - std::round(intervals)) <= 1e-9 * intervals && intervals >= 1.0,
          ErrorCode::invalid_argument, "z_step must divide the span length exactly");
  require(residual_threshold > 0.0, ErrorCode::invalid_argument, "residual_threshold must be positive");
  require(max_relaxation_iters >= 1, ErrorCode::invalid_argument, "max_relaxation_iters must be >= 1");
  require(damping > 0.0 && damping <= 1.0, ErrorCode::invalid_argument, "damping must be in (0, 1]");
  require(damping_backoff > 0.0 && damping_backoff <= 1.0, ErrorCode::invalid_argument,
          "damping_backoff must be in (0, 1]");
  require(min_damping > 0.0 && min_damping <= damping, ErrorCode::invalid_argument,
          "min_damping must be in (0, damping]");
  require(rk_substeps >= 1, ErrorCode::invalid_argument, "rk_substeps must be >= 1");
  require(std::isfinite(signal_launch_dbm), ErrorCode::invalid_argument, "signal launch must be finite");
}

RamanSolver::RamanSolver(FiberSpec fiber, WaveSet waves, RamanGainProfile gain, SolverConfig cfg)
    : fiber_(fiber), waves_(std::move(waves)), gain_(std::move(gain)), cfg_(cfg), coupling_(waves_, gain_) {
  require(fiber_.span_length_km > 0.0, ErrorCode::invalid_argument, "span_length_km must be positive");
  require(waves_.size() > 0, ErrorCode::invalid_argument, "wave set is empty");
  cfg_.validate(fiber_.span_length_km);
}

RamanSolver::RamanSolver(FiberSpec fiber, WaveSet waves, SolverConfig cfg)
    : RamanSolver(fiber, std::move(waves), RamanGainProfile::triangular(fiber.raman_peak_efficiency), cfg) {}

ProfileGrid RamanSolver::grid() const {
  return ProfileGrid::make(waves_.signal_frequencies(), fiber_.span_length_km, cfg_.z_step_km);
}

std::vector<double> RamanSolver::launch_vector(const PumpConfig& pumps) const {
  pumps.validate();
  const auto pump_idx = waves_.pump_indices();
  require(pump_idx.size() == kPumpCount, ErrorCode::invalid_argument,
          "wave set must contain exactly eight pumps");
  std::vector<double> launch(waves_.size(), dbm_to_mw(cfg_.signal_launch_dbm) * 1e-3);
  for (std::size_t p = 0; p < kPumpCount; ++p) launch[pump_idx[p]] = pumps.powers_mw[p] * 1e-3;
  return launch;
}

SolveResult RamanSolver::solve(const PumpConfig& pumps) const { return solve(launch_vector(pumps)); }

SolveResult RamanSolver::solve(std::span<const double> launch_w) const {
  const std::size_t n = waves_.size();
  require(launch_w.size() == n, ErrorCode::invalid_argument, "launch vector size does not match wave set");
  for (double p : launch_w)
    require(p >= 0.0 && std::isfinite(p), ErrorCode::invalid_argument, "launch powers must be finite and >= 0");

  const ProfileGrid g = grid();
  const std::size_t points = g.cols();
  const double span = fiber_.span_length_km;

  std::vector<std::size_t> fwd, bwd;
  for (std::size_t i = 0; i < n; ++i) (waves_[i].direction == Direction::forward ? fwd : bwd).push_back(i);

  PowerTable table{points, std::vector<double>(n * points)};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = waves_[i].attenuation_per_km;
    const bool forward = waves_[i].direction == Direction::forward;
    double* r = table.row(i);
    for (std::size_t k = 0; k < points; ++k) {
      const double travelled = forward ? g.z_km[k] : span - g.z_km[k];
      r[k] = launch_w[i] * std::exp(-a * travelled);
    }
    // Boundary values stay bit-exact launches.
    r[forward ? 0 : points - 1] = launch_w[i];
  }

  Sweep forward_sweep(waves_, coupling_, fwd, bwd, true);
  Sweep backward_sweep(waves_, coupling_, bwd, fwd, false);

  SolveResult result;
  const bool one_family = fwd.empty() || bwd.empty();
  // A single family needs one undamped sweep.
  double d = one_family ? 1.0 : cfg_.damping;
  double last_residual = std::numeric_limits<double>::infinity();
  PowerTable previous = table;
  bool finite = true;

  auto blend = [&](const Sweep& sweep) {
    if (d == 1.0) return;
    for (std::size_t w : sweep.active()) {
      double* r = table.row(w);
      const double* o = previous.row(w);
      for (std::size_t k = 0; k < points; ++k) r[k] = d * r[k] + (1.0 - d) * o[k];
    }
  };

  for (int it = 1; it <= cfg_.max_relaxation_iters; ++it) {
    previous.p = table.p;
    finite = forward_sweep.run(table, cfg_.z_step_km, cfg_.rk_substeps, result.clamp_count);
    blend(forward_sweep);
    if (finite) {
      finite = backward_sweep.run(table, cfg_.z_step_km, cfg_.rk_substeps, result.clamp_count);
      blend(backward_sweep);
    }
    result.iterations_used = it;
    if (!finite) {
      result.final_residual = std::numeric_limits<double>::infinity();
      break;
    }
    if (one_family) {
      // Nothing is frozen, so a single sweep is the exact discrete solution.
      result.final_residual = 0.0;
      result.converged = true;
      break;
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < table.p.size(); ++i) {
      const double cur = table.p[i];
      residual = std::max(residual, std::abs(cur - previous.p[i]) / std::max(cur, kResidualFloorW));
    }
    result.final_residual = residual;
    if (residual <= cfg_.residual_threshold) {
      result.converged = true;
      break;
    }
    if (residual > last_residual) d = std::max(cfg_.min_damping, d * cfg_.damping_backoff);
    last_residual = residual;
  }

  result.wave_count = n;
  result.powers_w = std::move(table.p);

  result.signal_waves = waves_.signal_indices();
  result.signal_profile = PowerProfile2D(g, 0.0);
  result.signal_profile = signal_profile_dbm(result, &result.nonpositive_signal_entries);

  const auto pumps = waves_.pump_indices();
  result.pump_count = pumps.size();
  result.pump_profiles_mw.resize(pumps.size() * points);
  for (std::size_t p = 0; p < pumps.size(); ++p)
    for (std::size_t k = 0; k < points; ++k)
      result.pump_profiles_mw[p * points + k] = result.powers_w[pumps[p] * points + k] * 1e3;
  return result;
}

SolveResult solve(const PumpConfig& pumps, const FiberSpec& fiber, const WaveSet& waves, const SolverConfig& cfg) {
  return RamanSolver(fiber, waves, cfg).solve(pumps);
}

PowerProfile2D signal_profile_dbm(const SolveResult& result, std::size_t* nonpositive) {
  const std::size_t points = result.points();
  const std::size_t rows = result.signal_waves.size();
  require(rows == result.signal_profile.rows() && result.powers_w.size() == result.wave_count * points,
          ErrorCode::invalid_argument, "solve result is incomplete");
  std::vector<double> dbm(rows * points);
  std::size_t bad = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < points; ++k) {
      const double mw = result.power_w(result.signal_waves[r], k) * 1e3;
      if (!(mw > 0.0)) ++bad;
      dbm[r * points + k] = mw_to_dbm(mw);
    }
  if (nonpositive) *nonpositive = bad;
  return PowerProfile2D(result.signal_profile.grid(), std::move(dbm));
}

}  // namespace rpd
