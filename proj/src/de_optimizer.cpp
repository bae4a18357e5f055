#include "ramanpd/de_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ramanpd/error.hpp"
#include "ramanpd/parallel.hpp"

namespace rpd {

void DEParams::validate() const {
  require(population_size >= 4, ErrorCode::invalid_argument, "population size must be at least 4");
  require(crossover_prob >= 0.0 && crossover_prob <= 1.0, ErrorCode::invalid_argument, "CR must be in [0, 1]");
  require(mutation_factor >= 0.0 && mutation_factor <= 1.0, ErrorCode::invalid_argument, "F must be in [0, 1]");
  require(max_evaluations >= population_size, ErrorCode::invalid_argument,
          "max evaluations must cover the initial population");
  require(max_generations > 0, ErrorCode::invalid_argument, "generation cap must be positive");
}

void Bounds::validate() const {
  for (std::size_t j = 0; j < kPumpCount; ++j) {
    require(lower[j] > 0.0, ErrorCode::invalid_argument, "lower bounds must be positive");
    require(lower[j] < upper[j], ErrorCode::invalid_argument, "lower bound must be below upper bound");
  }
}

bool Bounds::contains(const PumpConfig& p) const {
  for (std::size_t j = 0; j < kPumpCount; ++j)
    if (!(p.powers_mw[j] >= lower[j] && p.powers_mw[j] <= upper[j])) return false;
  return true;
}

Bounds Bounds::table() {
  Bounds b;
  for (std::size_t j = 0; j < kPumpCount; ++j) {
    b.lower[j] = standard_pumps()[j].min_mw;
    b.upper[j] = standard_pumps()[j].max_mw;
  }
  return b;
}

PumpArray default_delta_p() { return {0.35, 0.5, 0.5, 0.5, 0.35, 0.5, 0.5, 0.5}; }

Bounds bounds_from_prediction(const PumpConfig& p_star, const PumpArray& delta_p) {
  Bounds b;
  for (std::size_t j = 0; j < kPumpCount; ++j) {
    const double p = p_star.powers_mw[j];
    const double d = delta_p[j];
    require(p > 0.0 && std::isfinite(p), ErrorCode::invalid_argument, "predicted pump powers must be positive");
    require(d > 0.0 && d < 1.0, ErrorCode::invalid_argument, "delta_p must be in (0, 1)");
    b.lower[j] = (1.0 - d) * p;
    b.upper[j] = (1.0 + d) * p;
  }
  return b;
}

Objective make_profile_objective(const RamanSolver& solver, ObjectiveKind kind, const WeightVector& weights) {
  weights.validate();
  return [&solver, kind, weights](const PumpConfig& pumps) {
    Evaluation e;
    const SolveResult r = solver.solve(pumps);
    if (!r.converged || r.nonpositive_signal_entries > 0 || !r.signal_profile.all_finite()) return e;
    const CostBreakdown c = evaluate_costs(r.signal_profile, weights);
    e.j0 = c.j0;
    e.j1 = c.j1;
    e.j2 = c.j2;
    e.max_asymmetry = c.max_asymmetry;
    e.cost = kind == ObjectiveKind::weighted ? c.weighted : c.max_asymmetry;
    e.converged = true;
    return e;
  };
}

void OptimizationTrace::record(const PumpConfig& candidate, const Evaluation& eval) {
  TraceRecord r;
  r.eval_index = records.size() + 1;
  r.candidate = candidate;
  r.eval = eval;
  const double prev = records.empty() ? std::numeric_limits<double>::infinity() : records.back().best_so_far;
  if (records.empty() || eval.cost < prev) best = {candidate, eval};
  r.best_so_far = std::min(prev, eval.cost);
  records.push_back(r);
}

Population init_population(const Bounds& bounds, std::size_t np, Rng& rng, const Objective& objective,
                           OptimizationTrace& trace, unsigned jobs) {
  bounds.validate();
  Population pop(np);
  for (auto& ind : pop)
    for (std::size_t j = 0; j < kPumpCount; ++j) ind.x.powers_mw[j] = rng.uniform(bounds.lower[j], bounds.upper[j]);
  parallel_for(np, jobs, [&](std::size_t i) { pop[i].eval = objective(pop[i].x); });
  for (const auto& ind : pop) trace.record(ind.x, ind.eval);
  return pop;
}

PumpConfig mutate(const Population& pop, std::size_t i, double f, Rng& rng) {
  const std::size_t np = pop.size();
  require(np >= 4, ErrorCode::invalid_state, "mutation needs at least four individuals");
  require(i < np, ErrorCode::invalid_argument, "individual index out of range");
  // Partial Fisher-Yates over {0..np-1} \ {i}.
  std::vector<std::size_t> idx;
  idx.reserve(np - 1);
  for (std::size_t k = 0; k < np; ++k)
    if (k != i) idx.push_back(k);
  std::array<std::size_t, 3> r{};
  for (std::size_t k = 0; k < 3; ++k) {
    std::swap(idx[k], idx[k + rng.below(idx.size() - k)]);
    r[k] = idx[k];
  }
  PumpConfig v;
  for (std::size_t j = 0; j < kPumpCount; ++j) {
    const auto& x = [&](std::size_t n) { return pop[n].x.powers_mw[j]; };
    v.powers_mw[j] = x(r[0]) + f * (x(r[1]) - x(r[2]));
  }
  return v;
}

PumpConfig crossover(const PumpConfig& target, const PumpConfig& donor, double cr, Rng& rng) {
  const std::size_t j_rand = rng.below(kPumpCount);
  PumpConfig u = target;
  for (std::size_t j = 0; j < kPumpCount; ++j)
    if (rng.uniform01() <= cr || j == j_rand) u.powers_mw[j] = donor.powers_mw[j];
  return u;
}

std::size_t step_individual(std::size_t i, Population& pop, const Objective& objective, const Bounds& bounds,
                            const DEParams& params, Rng& rng, OptimizationTrace& trace) {
  const PumpConfig v = mutate(pop, i, params.mutation_factor, rng);
  const PumpConfig u = crossover(pop[i].x, v, params.crossover_prob, rng);
  if (!bounds.contains(u)) {
    ++trace.rejected_trial_count;
    return 0;
  }
  const Evaluation e = objective(u);
  trace.record(u, e);
  if (e.cost <= pop[i].eval.cost) pop[i] = {u, e};
  return 1;
}

OptimizationTrace run(const Objective& objective, const Bounds& bounds, const DEParams& params, unsigned jobs) {
  params.validate();
  bounds.validate();
  Rng rng(params.seed);
  OptimizationTrace trace;
  Population pop = init_population(bounds, params.population_size, rng, objective, trace, jobs);
  std::size_t evals = pop.size();
  while (evals < params.max_evaluations) {
    if (trace.generations >= params.max_generations) {
      trace.generation_cap_hit = true;
      break;
    }
    ++trace.generations;
    for (std::size_t i = 0; i < pop.size() && evals < params.max_evaluations; ++i)
      evals += step_individual(i, pop, objective, bounds, params, rng, trace);
  }
  require(std::isfinite(trace.best.eval.cost), ErrorCode::not_converged,
          "no candidate produced a converged solution");
  return trace;
}

CnnAssistedResult run_cnn_assisted(const SurrogateModel& model, const PowerProfile2D& target,
                                   const Objective& objective, const PumpArray& delta_p, const DEParams& params,
                                   unsigned jobs) {
  CnnAssistedResult r;
  r.prediction = model.predict_pumps(target);
  r.prediction_eval = objective(r.prediction);
  r.bounds = bounds_from_prediction(r.prediction, delta_p);
  r.trace = run(objective, r.bounds, params, jobs);
  return r;
}

OptimizationTrace run_random_baseline(const Objective& objective, const DEParams& params, unsigned jobs) {
  return run(objective, Bounds::table(), params, jobs);
}

TrialStats multi_trial_stats(std::span<const OptimizationTrace> traces) {
  require(traces.size() >= 2, ErrorCode::invalid_argument, "trial statistics need at least two traces");
  std::size_t len = 0;
  for (const auto& t : traces) {
    require(!t.records.empty(), ErrorCode::invalid_argument, "trace is empty");
    len = std::max(len, t.records.size());
  }
  TrialStats s;
  s.mean.assign(len, 0.0);
  s.stddev.assign(len, 0.0);
  const double n = static_cast<double>(traces.size());
  for (std::size_t k = 0; k < len; ++k) {
    const auto value = [&](const OptimizationTrace& t) {
      return t.records[std::min(k, t.records.size() - 1)].best_so_far;
    };
    double sum = 0.0;
    for (const auto& t : traces) sum += value(t);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& t : traces) ss += (value(t) - mean) * (value(t) - mean);
    s.mean[k] = mean;
    s.stddev[k] = std::sqrt(ss / (n - 1.0));
  }
  for (const auto& t : traces) s.final_costs.push_back(t.records.back().best_so_far);
  return s;
}

std::vector<OptimizationTrace> run_trials(const std::function<OptimizationTrace(std::uint64_t)>& runner,
                                          std::span<const std::uint64_t> seeds, unsigned jobs) {
  std::vector<OptimizationTrace> out(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t k) { out[k] = runner(seeds[k]); });
  return out;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out << buf;
}

}  // namespace

void write_trace_csv(const OptimizationTrace& trace, std::ostream& out, const std::string& config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "eval_index,p1,p2,p3,p4,p5,p6,p7,p8,j0,j1,j2,weighted_or_asym,best_so_far\n";
  for (const auto& r : trace.records) {
    out << r.eval_index;
    for (double p : r.candidate.powers_mw) {
      out << ',';
      put(out, p);
    }
    for (double v : {r.eval.j0, r.eval.j1, r.eval.j2, r.eval.cost, r.best_so_far}) {
      out << ',';
      put(out, v);
    }
    out << '\n';
  }
}

void write_trial_stats_csv(const TrialStats& stats, std::ostream& out, const std::string& config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "eval_index,mean_best_cost,std_best_cost\n";
  for (std::size_t k = 0; k < stats.mean.size(); ++k) {
    out << k + 1 << ',';
    put(out, stats.mean[k]);
    out << ',';
    put(out, stats.stddev[k]);
    out << '\n';
  }
}

}  // namespace rpd
