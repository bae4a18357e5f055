/**
 * @file de_optimizer.hpp
 * @brief rand/1/bin differential evolution over the eight pump powers.
 *
 * Evaluation accounting: every solver call (initial population included)
 * consumes one evaluation. A trial that leaves the bounds box is rejected
 * without being solved and consumes none; rejected_trial_count keeps the
 * tally. Population updates are in place, so an individual replaced early in
 * a generation is already visible to later mutations in that generation.
 */
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ramanpd/bvp_solver.hpp"
#include "ramanpd/objectives.hpp"
#include "ramanpd/raman_model.hpp"
#include "ramanpd/rng.hpp"
#include "ramanpd/surrogate.hpp"

namespace rpd {

struct DEParams {
  std::size_t population_size = 30;
  double crossover_prob = 0.5;
  double mutation_factor = 0.8;
  std::size_t max_evaluations = 1000;
  std::size_t max_generations = 500;
  std::uint64_t seed = 1;

  /// Np >= 4, CR and F in [0, 1], MaxEv >= Np.
  void validate() const;
};

using PumpArray = std::array<double, kPumpCount>;

struct Bounds {
  PumpArray lower{};
  PumpArray upper{};

  /// 0 < lower < upper elementwise.
  void validate() const;
  /// Inclusive at the faces.
  bool contains(const PumpConfig& p) const;
  /// Extremes of the standard pump table.
  static Bounds table();
};

/// Relative half-widths used around a surrogate prediction.
PumpArray default_delta_p();

/// lower = (1 - d) p*, upper = (1 + d) p*. Needs p* > 0 and 0 < d < 1.
Bounds bounds_from_prediction(const PumpConfig& p_star, const PumpArray& delta_p);

struct Evaluation {
  double cost = std::numeric_limits<double>::infinity();
  double j0 = std::numeric_limits<double>::quiet_NaN();
  double j1 = std::numeric_limits<double>::quiet_NaN();
  double j2 = std::numeric_limits<double>::quiet_NaN();
  double max_asymmetry = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

using Objective = std::function<Evaluation(const PumpConfig&)>;

enum class ObjectiveKind { weighted, asymmetry };

/// Solves each candidate and scores the signal profile with either the
/// weighted excursion cost or the max channel asymmetry. Non-convergent
/// solves score +inf. The solver must outlive the returned objective.
Objective make_profile_objective(const RamanSolver& solver, ObjectiveKind kind, const WeightVector& weights = {});

struct Individual {
  PumpConfig x;
  Evaluation eval;
};

using Population = std::vector<Individual>;

struct TraceRecord {
  std::size_t eval_index = 0;  // 1-based
  PumpConfig candidate;
  Evaluation eval;
  double best_so_far = std::numeric_limits<double>::infinity();
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  Individual best;
  std::size_t rejected_trial_count = 0;
  std::size_t generations = 0;
  bool generation_cap_hit = false;

  std::size_t evaluations() const { return records.size(); }
  /// Appends one evaluation and updates best / best_so_far.
  void record(const PumpConfig& candidate, const Evaluation& eval);
};

/// Np uniform draws in the box, each evaluated and recorded. Draws are made
/// up front, so jobs > 1 only parallelizes the solves.
Population init_population(const Bounds& bounds, std::size_t np, Rng& rng, const Objective& objective,
                           OptimizationTrace& trace, unsigned jobs = 1);

/// x_r1 + F (x_r2 - x_r3) with r1, r2, r3 distinct and != i.
PumpConfig mutate(const Population& pop, std::size_t i, double f, Rng& rng);

/// Binomial crossover; coordinate j_rand always comes from the donor.
PumpConfig crossover(const PumpConfig& target, const PumpConfig& donor, double cr, Rng& rng);

/// One mutate/crossover/select step for individual i. Returns the number of
/// evaluations consumed (0 for a bound-rejected trial, else 1).
std::size_t step_individual(std::size_t i, Population& pop, const Objective& objective, const Bounds& bounds,
                            const DEParams& params, Rng& rng, OptimizationTrace& trace);

/// Full DE loop. Throws not_converged if no evaluation produced a finite cost.
OptimizationTrace run(const Objective& objective, const Bounds& bounds, const DEParams& params, unsigned jobs = 1);

struct CnnAssistedResult {
  PumpConfig prediction;
  Evaluation prediction_eval;
  Bounds bounds;
  OptimizationTrace trace;
};

CnnAssistedResult run_cnn_assisted(const SurrogateModel& model, const PowerProfile2D& target,
                                   const Objective& objective, const PumpArray& delta_p, const DEParams& params,
                                   unsigned jobs = 1);

OptimizationTrace run_random_baseline(const Objective& objective, const DEParams& params, unsigned jobs = 1);

struct TrialStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // sample std (n - 1)
  std::vector<double> final_costs;
};

/// Aligns best_so_far curves by evaluation index (shorter traces are padded
/// with their last value) and reduces across trials. Needs >= 2 traces.
TrialStats multi_trial_stats(std::span<const OptimizationTrace> traces);

/// Runs runner(seed) for each seed, trials in parallel over jobs workers.
std::vector<OptimizationTrace> run_trials(const std::function<OptimizationTrace(std::uint64_t)>& runner,
                                          std::span<const std::uint64_t> seeds, unsigned jobs = 1);

void write_trace_csv(const OptimizationTrace& trace, std::ostream& out, const std::string& config_hash = {});
void write_trial_stats_csv(const TrialStats& stats, std::ostream& out, const std::string& config_hash = {});

}  // namespace rpd
