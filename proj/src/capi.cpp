#include "ramanpd/ramanpd.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <string>

#include "json.hpp"
#include "ramanpd/config.hpp"
#include "ramanpd/de_optimizer.hpp"
#include "ramanpd/error.hpp"
#include "ramanpd/objectives.hpp"
#include "ramanpd/parallel.hpp"
#include "ramanpd/surrogate.hpp"

struct rpd_config {
  rpd::RunConfig cfg;
};

struct rpd_profile {
  rpd::PowerProfile2D profile;
};

struct rpd_model {
  rpd::SurrogateModel model;
  std::vector<rpd::EpochRecord> curve;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;
};

struct rpd_trace {
  rpd::OptimizationTrace trace;
  rpd::Bounds bounds;
  std::optional<rpd::PumpConfig> prediction;
  rpd::Evaluation prediction_eval;
  rpd::PowerProfile2D best_profile;
  rpd::PowerProfile2D prediction_profile;
};

namespace {

thread_local std::string g_last_error;

rpd_status to_status(rpd::ErrorCode c) {
  switch (c) {
    case rpd::ErrorCode::invalid_argument: return RPD_ERR_INVALID_ARGUMENT;
    case rpd::ErrorCode::invalid_state: return RPD_ERR_INVALID_STATE;
    case rpd::ErrorCode::not_found: return RPD_ERR_NOT_FOUND;
    case rpd::ErrorCode::io: return RPD_ERR_IO;
    case rpd::ErrorCode::not_converged: return RPD_ERR_NOT_CONVERGED;
    case rpd::ErrorCode::runtime: return RPD_ERR_RUNTIME;
  }
  return RPD_ERR_RUNTIME;
}

template <class F>
rpd_status guarded(F&& fn) {
  try {
    fn();
    return RPD_OK;
  } catch (const rpd::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RPD_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RPD_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return RPD_ERR_RUNTIME;
  }
}

void need(const void* p, const char* what) {
  rpd::require(p != nullptr, rpd::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

std::string str_or_empty(const char* s) { return s ? s : ""; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::ofstream open_out(const char* path) {
  need(path, "path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  rpd::require(static_cast<bool>(out), rpd::ErrorCode::io, std::string("cannot write ") + path);
  return out;
}

void close_out(std::ofstream& out, const char* path) {
  out.close();
  rpd::require(static_cast<bool>(out), rpd::ErrorCode::io, std::string("error writing ") + path);
}

rpd::PumpConfig pumps_from(const double* mw) {
  need(mw, "pumps");
  rpd::PumpConfig p;
  for (std::size_t i = 0; i < rpd::kPumpCount; ++i) p.powers_mw[i] = mw[i];
  p.validate();
  return p;
}

std::optional<rpd::WeightVector> weights_from(const double* w) {
  if (!w) return std::nullopt;
  rpd::WeightVector v{w[0], w[1], w[2]};
  v.validate();
  return v;
}

rpd_costs costs_from(const rpd::Evaluation& e) {
  rpd_costs c{};
  c.j0_db = e.j0;
  c.j1_db = e.j1;
  c.j2_db = e.j2;
  c.weighted_db = e.cost;
  c.max_asymmetry = e.max_asymmetry;
  return c;
}

rpd::PowerProfile2D make_target(const rpd::RunConfig& cfg, const rpd_design_options& o) {
  const rpd::ProfileGrid grid =
      rpd::ProfileGrid::make(cfg.channels.frequencies(), cfg.fiber.span_length_km, cfg.solver.z_step_km);
  if (o.target == RPD_TARGET_SYMMETRIC) return rpd::sinusoidal_symmetric_target(grid);
  rpd::require(o.target == RPD_TARGET_FLAT, rpd::ErrorCode::invalid_argument, "unknown target kind");
  return rpd::flat_target(o.flat_level_dbm, grid);
}

/// Solves a pump set and returns its signal profile, empty if it did not converge.
rpd::PowerProfile2D profile_of(const rpd::RamanSolver& solver, const rpd::PumpConfig& p) {
  const rpd::SolveResult r = solver.solve(p);
  if (!r.converged) return {};
  return r.signal_profile;
}

rpd_trace* design_once(const rpd::RunConfig& cfg, const rpd::RamanSolver& solver, const rpd_model* model,
                       const rpd_design_options& o, std::uint64_t seed) {
  rpd::require(o.objective == RPD_OBJECTIVE_WEIGHTED || o.objective == RPD_OBJECTIVE_ASYMMETRY,
               rpd::ErrorCode::invalid_argument, "unknown objective kind");
  const auto kind = o.objective == RPD_OBJECTIVE_WEIGHTED ? rpd::ObjectiveKind::weighted : rpd::ObjectiveKind::asymmetry;
  const rpd::WeightVector w{o.weights[0], o.weights[1], o.weights[2]};
  const rpd::Objective objective = rpd::make_profile_objective(solver, kind, w);
  rpd::DEParams params = cfg.de;
  params.seed = seed;

  auto t = std::make_unique<rpd_trace>();
  if (o.use_surrogate) {
    rpd::require(model != nullptr, rpd::ErrorCode::invalid_argument, "surrogate-assisted design needs a model");
    const rpd::PowerProfile2D target = make_target(cfg, o);
    auto r = rpd::run_cnn_assisted(model->model, target, objective, cfg.delta_p, params, o.jobs);
    t->trace = std::move(r.trace);
    t->bounds = r.bounds;
    t->prediction = r.prediction;
    t->prediction_eval = r.prediction_eval;
    t->prediction_profile = profile_of(solver, r.prediction);
  } else {
    t->trace = rpd::run_random_baseline(objective, params, o.jobs);
    t->bounds = rpd::Bounds::table();
  }
  t->best_profile = profile_of(solver, t->trace.best.x);
  return t.release();
}

}  // namespace

extern "C" {

const char* rpd_last_error(void) { return g_last_error.c_str(); }

const char* rpd_version(void) { return "0.1.0"; }

void rpd_string_free(char* s) { std::free(s); }

void rpd_doubles_free(double* p) { std::free(p); }

rpd_status rpd_config_default(rpd_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rpd_config{rpd::RunConfig::from_json("{}")};
  });
}

rpd_status rpd_config_load(const char* path, rpd_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new rpd_config{rpd::RunConfig::load(path)};
  });
}

rpd_status rpd_config_from_json(const char* json, rpd_config** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = new rpd_config{rpd::RunConfig::from_json(json)};
  });
}

void rpd_config_free(rpd_config* cfg) { delete cfg; }

rpd_status rpd_config_to_json(const rpd_config* cfg, char** out_json) {
  return guarded([&] {
    need(cfg, "config");
    need(out_json, "out");
    *out_json = dup_string(cfg->cfg.to_json());
  });
}

rpd_status rpd_config_set(rpd_config* cfg, const char* key, const char* json_value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(json_value, "value");
    nlohmann::ordered_json doc = nlohmann::ordered_json::parse(cfg->cfg.to_json());
    nlohmann::ordered_json value;
    try {
      value = nlohmann::ordered_json::parse(json_value);
    } catch (const nlohmann::json::exception&) {
      throw rpd::Error(rpd::ErrorCode::invalid_argument,
                       std::string("value for '") + key + "' is not valid JSON: " + json_value);
    }
    std::string path = "/";
    for (const char* c = key; *c; ++c) path += *c == '.' ? '/' : *c;
    const nlohmann::ordered_json::json_pointer ptr(path);
    rpd::require(doc.contains(ptr), rpd::ErrorCode::invalid_argument, std::string("unknown config key '") + key + "'");
    doc[ptr] = value;
    cfg->cfg = rpd::RunConfig::from_json(doc.dump());
  });
}

rpd_status rpd_config_hash(const rpd_config* cfg, char out[17]) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    const std::string h = cfg->cfg.hash();
    std::memcpy(out, h.c_str(), 17);
  });
}

rpd_status rpd_config_apply_seed_env(rpd_config* cfg, int* applied) {
  return guarded([&] {
    need(cfg, "config");
    const bool a = cfg->cfg.apply_seed_env();
    if (applied) *applied = a ? 1 : 0;
  });
}

rpd_status rpd_config_seed(const rpd_config* cfg, uint64_t* seed) {
  return guarded([&] {
    need(cfg, "config");
    need(seed, "seed");
    *seed = cfg->cfg.seed;
  });
}

const char* rpd_config_out_dir(const rpd_config* cfg) { return cfg ? cfg->cfg.out_dir.c_str() : ""; }

rpd_status rpd_solve(const rpd_config* cfg, const double pumps_mw[RPD_PUMP_COUNT], rpd_profile** out,
                     rpd_solve_info* info) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    const rpd::RamanSolver solver = cfg->cfg.make_solver();
    const rpd::SolveResult r = solver.solve(pumps_from(pumps_mw));
    if (info) *info = {r.converged ? 1 : 0, r.iterations_used, r.final_residual, r.clamp_count};
    rpd::require(r.converged, rpd::ErrorCode::not_converged,
                 "solver did not converge (residual " + std::to_string(r.final_residual) + " after " +
                     std::to_string(r.iterations_used) + " iterations)");
    rpd::require(r.nonpositive_signal_entries == 0, rpd::ErrorCode::not_converged,
                 "signal power collapsed to zero somewhere along the span");
    *out = new rpd_profile{r.signal_profile};
  });
}

rpd_status rpd_target_flat(const rpd_config* cfg, double level_dbm, rpd_profile** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    rpd_design_options o;
    rpd_design_options_init(&o);
    o.flat_level_dbm = level_dbm;
    *out = new rpd_profile{make_target(cfg->cfg, o)};
  });
}

rpd_status rpd_target_symmetric(const rpd_config* cfg, rpd_profile** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    rpd_design_options o;
    rpd_design_options_init(&o);
    o.target = RPD_TARGET_SYMMETRIC;
    *out = new rpd_profile{make_target(cfg->cfg, o)};
  });
}

void rpd_profile_free(rpd_profile* p) { delete p; }

rpd_status rpd_profile_shape(const rpd_profile* p, size_t* rows, size_t* cols) {
  return guarded([&] {
    need(p, "profile");
    if (rows) *rows = p->profile.rows();
    if (cols) *cols = p->profile.cols();
  });
}

rpd_status rpd_profile_values(const rpd_profile* p, double* out, size_t n) {
  return guarded([&] {
    need(p, "profile");
    need(out, "out");
    const auto& v = p->profile.values();
    rpd::require(n >= v.size(), rpd::ErrorCode::invalid_argument, "output buffer is too small");
    std::copy(v.begin(), v.end(), out);
  });
}

rpd_status rpd_profile_write_csv(const rpd_profile* p, const char* path, const char* config_hash) {
  return guarded([&] {
    need(p, "profile");
    auto out = open_out(path);
    rpd::write_profile_csv(p->profile, out, str_or_empty(config_hash));
    close_out(out, path);
  });
}

rpd_status rpd_profile_write_pgm(const rpd_profile* p, const char* path, const char* config_hash) {
  return guarded([&] {
    need(p, "profile");
    auto out = open_out(path);
    rpd::write_profile_pgm(p->profile, out, str_or_empty(config_hash));
    close_out(out, path);
  });
}

rpd_status rpd_profile_costs(const rpd_profile* p, const double* weights, rpd_costs* out, double* asymmetry_out) {
  return guarded([&] {
    need(p, "profile");
    need(out, "out");
    const rpd::CostBreakdown c = rpd::evaluate_costs(p->profile, weights_from(weights));
    *out = {c.j0, c.j1, c.j2, c.weighted, c.max_asymmetry};
    if (asymmetry_out) std::copy(c.asymmetry_per_channel.begin(), c.asymmetry_per_channel.end(), asymmetry_out);
  });
}

rpd_status rpd_profile_costs_json(const rpd_profile* p, const double* weights, const char* config_hash,
                                  char** out_json) {
  return guarded([&] {
    need(p, "profile");
    need(out_json, "out");
    const rpd::CostBreakdown c = rpd::evaluate_costs(p->profile, weights_from(weights));
    *out_json = dup_string(rpd::cost_breakdown_json(c, str_or_empty(config_hash)));
  });
}

rpd_status rpd_profile_channel_excursion(const rpd_profile* p, double* out, size_t n) {
  return guarded([&] {
    need(p, "profile");
    need(out, "out");
    const auto e = rpd::per_channel_excursion(p->profile);
    rpd::require(n >= e.size(), rpd::ErrorCode::invalid_argument, "output buffer is too small");
    std::copy(e.begin(), e.end(), out);
  });
}

rpd_status rpd_profile_emax(const rpd_profile* a, const rpd_profile* b, double* out) {
  return guarded([&] {
    need(a, "profile");
    need(b, "profile");
    need(out, "out");
    *out = rpd::e_max(a->profile, b->profile);
  });
}

rpd_status rpd_dataset_generate(const rpd_config* cfg, const char* dir, uint64_t count, unsigned jobs,
                                uint64_t* redraws) {
  return guarded([&] {
    need(cfg, "config");
    need(dir, "dir");
    const auto& c = cfg->cfg;
    rpd::GenerateOptions opts;
    opts.ratios = c.dataset.ratios;
    opts.jobs = jobs;
    opts.max_failure_rate = c.dataset.max_failure_rate;
    opts.config_hash = c.hash();
    const auto m = rpd::generate_dataset(c.make_solver(), count ? count : c.dataset.count, c.seed, dir, opts);
    if (redraws) *redraws = m.redraws;
  });
}

rpd_status rpd_dataset_counts(const char* dir, uint64_t counts[3]) {
  return guarded([&] {
    need(dir, "dir");
    need(counts, "counts");
    const auto d = rpd::Dataset::open(dir);
    counts[0] = d.manifest().counts.train;
    counts[1] = d.manifest().counts.val;
    counts[2] = d.manifest().counts.test;
  });
}

rpd_status rpd_model_train(const rpd_config* cfg, const char* dataset_dir, uint64_t train_limit,
                           rpd_epoch_callback cb, void* user, rpd_model** out) {
  return guarded([&] {
    need(cfg, "config");
    need(dataset_dir, "dataset dir");
    need(out, "out");
    const auto d = rpd::Dataset::open(dataset_dir);
    const auto [first, count] = d.range(rpd::Split::train);
    rpd::require(train_limit <= count, rpd::ErrorCode::invalid_argument,
                 "requested " + std::to_string(train_limit) + " training samples but the split has " +
                     std::to_string(count));
    const auto train = d.load_range(first, train_limit ? train_limit : count);
    const auto val = d.load(rpd::Split::val);
    rpd::EpochCallback on_epoch;
    if (cb) on_epoch = [cb, user](const rpd::EpochRecord& r) { cb(r.epoch, r.train_mse, r.val_mse, user); };
    auto result = rpd::train(train, val, cfg->cfg.network, cfg->cfg.training, on_epoch);
    *out = new rpd_model{std::move(result.model), std::move(result.curve), result.best_epoch, result.best_val_mse};
  });
}

rpd_status rpd_model_save(const rpd_model* m, const char* dir, const char* config_hash) {
  return guarded([&] {
    need(m, "model");
    need(dir, "dir");
    m->model.save(dir, str_or_empty(config_hash));
  });
}

rpd_status rpd_model_load(const char* dir, rpd_model** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new rpd_model{rpd::SurrogateModel::load(dir), {}, 0, 0.0};
  });
}

void rpd_model_free(rpd_model* m) { delete m; }

rpd_status rpd_model_predict(const rpd_model* m, const rpd_profile* target, double pumps_mw[RPD_PUMP_COUNT]) {
  return guarded([&] {
    need(m, "model");
    need(target, "target");
    need(pumps_mw, "out");
    const auto p = m->model.predict_pumps(target->profile);
    std::copy(p.powers_mw.begin(), p.powers_mw.end(), pumps_mw);
  });
}

rpd_status rpd_model_write_curve_csv(const rpd_model* m, const char* path, const char* config_hash) {
  return guarded([&] {
    need(m, "model");
    auto out = open_out(path);
    rpd::write_learning_curve_csv(m->curve, out, str_or_empty(config_hash));
    close_out(out, path);
  });
}

rpd_status rpd_model_training_summary(const rpd_model* m, size_t* epochs_run, size_t* best_epoch,
                                      double* best_val_mse) {
  return guarded([&] {
    need(m, "model");
    if (epochs_run) *epochs_run = m->curve.size();
    if (best_epoch) *best_epoch = m->best_epoch;
    if (best_val_mse) *best_val_mse = m->best_val_mse;
  });
}

rpd_status rpd_model_evaluate(const rpd_model* m, const rpd_config* cfg, const char* dataset_dir, const char* split,
                              uint64_t limit, unsigned jobs, rpd_eval_metrics* out, double** emax_out) {
  return guarded([&] {
    need(m, "model");
    need(cfg, "config");
    need(dataset_dir, "dataset dir");
    need(split, "split");
    need(out, "out");
    const auto d = rpd::Dataset::open(dataset_dir);
    const auto [first, count] = d.range(rpd::parse_split(split));
    const auto samples = d.load_range(first, limit ? std::min(limit, count) : count);
    rpd::require(samples.size() >= 2, rpd::ErrorCode::invalid_argument, "evaluation needs at least two samples");

    const rpd::RamanSolver solver = cfg->cfg.make_solver();
    const rpd::ProfileGrid grid = solver.grid();
    std::vector<rpd::PumpConfig> preds(samples.size()), truths(samples.size());
    std::vector<double> emax(samples.size());
    rpd::parallel_for(samples.size(), jobs, [&](std::size_t i) {
      const auto& s = samples[i];
      preds[i] = m->model.predict_pumps(std::span<const float>(s.profile_dbm));
      for (std::size_t k = 0; k < rpd::kPumpCount; ++k) truths[i].powers_mw[k] = s.pumps_mw[k];
      const rpd::SolveResult r = solver.solve(preds[i]);
      rpd::require(r.converged && r.nonpositive_signal_entries == 0, rpd::ErrorCode::not_converged,
                   "solver failed on predicted pumps of sample " + std::to_string(first + i));
      const rpd::PowerProfile2D truth(grid, std::vector<double>(s.profile_dbm.begin(), s.profile_dbm.end()));
      emax[i] = rpd::e_max(truth, r.signal_profile);
    });

    rpd_eval_metrics met{};
    met.samples = samples.size();
    met.mse = rpd::evaluate_mse(m->model, samples);
    const auto r2 = rpd::r_squared(preds, truths);
    for (std::size_t k = 0; k < rpd::kPumpCount; ++k) {
      met.r2_defined[k] = r2[k].has_value() ? 1 : 0;
      met.r2[k] = r2[k].value_or(std::nan(""));
    }
    double sum = 0.0;
    for (double e : emax) sum += e;
    met.emax_mean_db = sum / static_cast<double>(emax.size());
    double ss = 0.0;
    for (double e : emax) ss += (e - met.emax_mean_db) * (e - met.emax_mean_db);
    met.emax_std_db = std::sqrt(ss / static_cast<double>(emax.size() - 1));
    *out = met;
    if (emax_out) {
      auto* buf = static_cast<double*>(std::malloc(emax.size() * sizeof(double)));
      if (!buf) throw std::bad_alloc();
      std::copy(emax.begin(), emax.end(), buf);
      *emax_out = buf;
    }
  });
}

void rpd_design_options_init(rpd_design_options* o) {
  if (!o) return;
  *o = {};
  o->target = RPD_TARGET_FLAT;
  o->flat_level_dbm = 0.0;
  o->objective = RPD_OBJECTIVE_WEIGHTED;
  o->weights[0] = 1.0;
  o->use_surrogate = 1;
  o->seed = 1;
  o->jobs = 1;
}

rpd_status rpd_design_run(const rpd_config* cfg, const rpd_model* model, const rpd_design_options* opts,
                          rpd_trace** out) {
  return guarded([&] {
    need(cfg, "config");
    need(opts, "options");
    need(out, "out");
    const rpd::RamanSolver solver = cfg->cfg.make_solver();
    *out = design_once(cfg->cfg, solver, model, *opts, opts->seed);
  });
}

rpd_status rpd_design_trials(const rpd_config* cfg, const rpd_model* model, const rpd_design_options* opts,
                             const uint64_t* seeds, size_t n_trials, unsigned jobs, rpd_trace** out) {
  return guarded([&] {
    need(cfg, "config");
    need(opts, "options");
    need(seeds, "seeds");
    need(out, "out");
    const rpd::RamanSolver solver = cfg->cfg.make_solver();
    std::vector<std::unique_ptr<rpd_trace>> traces(n_trials);
    rpd_design_options inner = *opts;
    inner.jobs = 1;
    rpd::parallel_for(n_trials, jobs, [&](std::size_t k) {
      traces[k].reset(design_once(cfg->cfg, solver, model, inner, seeds[k]));
    });
    for (std::size_t k = 0; k < n_trials; ++k) out[k] = traces[k].release();
  });
}

void rpd_trace_free(rpd_trace* t) { delete t; }

rpd_status rpd_trace_summary(const rpd_trace* t, rpd_design_summary* out) {
  return guarded([&] {
    need(t, "trace");
    need(out, "out");
    rpd_design_summary s{};
    s.evaluations = t->trace.evaluations();
    s.rejected_trials = t->trace.rejected_trial_count;
    s.generations = t->trace.generations;
    s.generation_cap_hit = t->trace.generation_cap_hit ? 1 : 0;
    std::copy(t->trace.best.x.powers_mw.begin(), t->trace.best.x.powers_mw.end(), s.best_pumps_mw);
    s.best = costs_from(t->trace.best.eval);
    s.best_cost = t->trace.best.eval.cost;
    s.has_prediction = t->prediction.has_value() ? 1 : 0;
    if (t->prediction) {
      std::copy(t->prediction->powers_mw.begin(), t->prediction->powers_mw.end(), s.prediction_pumps_mw);
      s.prediction = costs_from(t->prediction_eval);
      s.prediction_cost = t->prediction_eval.cost;
    }
    std::copy(t->bounds.lower.begin(), t->bounds.lower.end(), s.lower_mw);
    std::copy(t->bounds.upper.begin(), t->bounds.upper.end(), s.upper_mw);
    *out = s;
  });
}

rpd_status rpd_trace_length(const rpd_trace* t, size_t* n) {
  return guarded([&] {
    need(t, "trace");
    need(n, "out");
    *n = t->trace.records.size();
  });
}

rpd_status rpd_trace_best_so_far(const rpd_trace* t, double* out, size_t n) {
  return guarded([&] {
    need(t, "trace");
    need(out, "out");
    rpd::require(n >= t->trace.records.size(), rpd::ErrorCode::invalid_argument, "output buffer is too small");
    for (std::size_t i = 0; i < t->trace.records.size(); ++i) out[i] = t->trace.records[i].best_so_far;
  });
}

rpd_status rpd_trace_write_csv(const rpd_trace* t, const char* path, const char* config_hash) {
  return guarded([&] {
    need(t, "trace");
    auto out = open_out(path);
    rpd::write_trace_csv(t->trace, out, str_or_empty(config_hash));
    close_out(out, path);
  });
}

rpd_status rpd_trace_best_profile(const rpd_trace* t, rpd_profile** out) {
  return guarded([&] {
    need(t, "trace");
    need(out, "out");
    rpd::require(!t->best_profile.empty(), rpd::ErrorCode::invalid_state, "best individual has no profile");
    *out = new rpd_profile{t->best_profile};
  });
}

rpd_status rpd_trace_prediction_profile(const rpd_trace* t, rpd_profile** out) {
  return guarded([&] {
    need(t, "trace");
    need(out, "out");
    rpd::require(!t->prediction_profile.empty(), rpd::ErrorCode::invalid_state,
                 "trace has no converged surrogate prediction");
    *out = new rpd_profile{t->prediction_profile};
  });
}

rpd_status rpd_trials_write_stats(const rpd_trace* const* traces, size_t n, const char* path,
                                  const char* config_hash, double* final_mean, double* final_std) {
  return guarded([&] {
    need(traces, "traces");
    std::vector<rpd::OptimizationTrace> ts;
    ts.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      need(traces[i], "trace");
      ts.push_back(traces[i]->trace);
    }
    const rpd::TrialStats s = rpd::multi_trial_stats(ts);
    if (final_mean) *final_mean = s.mean.back();
    if (final_std) *final_std = s.stddev.back();
    if (path) {
      auto out = open_out(path);
      rpd::write_trial_stats_csv(s, out, str_or_empty(config_hash));
      close_out(out, path);
    }
  });
}

}  // extern "C"
