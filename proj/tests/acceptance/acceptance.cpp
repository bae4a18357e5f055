// Acceptance run: one PASS/FAIL line per criterion.
//
//   rpd_acceptance [cache_dir]
//
// The full dataset and trained model are cached under cache_dir/<config hash>
// together with the wall times measured when they were built, so reruns skip
// the expensive stages. Exit status is 0 only if every criterion passes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "ramanpd/bvp_solver.hpp"
#include "ramanpd/config.hpp"
#include "ramanpd/dataset.hpp"
#include "ramanpd/de_optimizer.hpp"
#include "ramanpd/error.hpp"
#include "ramanpd/objectives.hpp"
#include "ramanpd/parallel.hpp"
#include "ramanpd/rng.hpp"
#include "ramanpd/surrogate.hpp"
#include "ramanpd/units.hpp"

namespace fs = std::filesystem;
using namespace rpd;

namespace {

// Tolerances.
constexpr double kAttenuationEndDbm = -16.0;
constexpr double kAttenuationTolDb = 0.01;
constexpr double kAttenuationMaxSeconds = 1.0;
constexpr double kUndepletedRelTol = 0.01;
constexpr double kPhotonFluxTol = 1e-6;
constexpr int kBvpDraws = 100;
constexpr double kBvpResidual = 1e-6;
constexpr double kGridHalvingTolDb = 0.01;
constexpr int kGradCheckWeights = 100;
constexpr double kGradCheckRelTol = 1e-4;
constexpr double kOverfitMse = 1e-4;
constexpr double kMinR2 = 0.80;
constexpr double kMaxMeanEmaxDb = 1.0;
constexpr double kBudgetSeconds = 30.0 * 60.0;
constexpr double kFlatJ0Db = 3.5;
constexpr double kM3J1Db = 1.5;
constexpr double kM3J2Db = 1.2;
constexpr double kM3J0Db = 4.0;
constexpr double kMaxAsymmetry = 0.20;
constexpr double kMinAsymmetryGain = 0.10;
constexpr int kTrialSeeds = 5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int g_failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& fn) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++g_failures;
  std::printf("[%s] C%d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

Wave signal_wave(double thz, double alpha_db_km) {
  return {thz, Direction::forward, db_to_neper(alpha_db_km), WaveRole::signal};
}

// ---------------------------------------------------------------------------
// Physics

Outcome attenuation_only() {
  const FiberSpec f;
  const std::vector<double> channel{193.4};
  const RamanSolver s(f, WaveSet::with_channels(f, channel));
  PumpConfig off;
  off.powers_mw.fill(1e-9);
  const auto t0 = Clock::now();
  const SolveResult r = s.solve(off);
  const double dt = seconds_since(t0);
  const double end = r.signal_profile.at(0, r.points() - 1);
  const bool ok = r.converged && std::abs(end - kAttenuationEndDbm) <= kAttenuationTolDb && dt < kAttenuationMaxSeconds;
  return {ok, fmt("P(80 km) = %.6f dBm, solve %.4f s", end, dt)};
}

Outcome undepleted_oracle() {
  // Oracle first: g(df) P L_eff in dB, triangular curve on the pump detuning.
  const FiberSpec f;
  const double fp = wavelength_to_frequency(1455.0), fs_ = 193.4;
  const double g = f.raman_peak_efficiency * (fp - fs_) / 13.2;
  const double a = db_to_neper(f.alpha_pump_first_db_km);
  const double l_eff = (1.0 - std::exp(-a * f.span_length_km)) / a;
  const double oracle = 10.0 * std::log10(std::exp(1.0)) * g * 0.1 * l_eff;

  auto gain = [&](Direction dir) {
    const WaveSet w({signal_wave(fs_, f.alpha_signal_db_km),
                     {fp, dir, db_to_neper(f.alpha_pump_first_db_km), WaveRole::pump_first_order}});
    const RamanSolver s(f, w);
    const SolveResult on = s.solve(std::vector<double>{1e-5, 0.1});
    const SolveResult off = s.solve(std::vector<double>{1e-5, 1e-15});
    require(on.converged && off.converged, ErrorCode::not_converged, "oracle solve did not converge");
    return on.signal_profile.at(0, on.points() - 1) - off.signal_profile.at(0, off.points() - 1);
  };
  const double co = gain(Direction::forward), counter = gain(Direction::backward);
  const double e_co = std::abs(co - oracle) / oracle, e_counter = std::abs(counter - oracle) / oracle;
  return {e_co <= kUndepletedRelTol && e_counter <= kUndepletedRelTol,
          fmt("oracle %.4f dB, co %.4f dB (%.2f%%), counter %.4f dB (%.2f%%)", oracle, co, 100 * e_co, counter,
              100 * e_counter)};
}

Outcome photon_flux() {
  FiberSpec f;
  f.alpha_signal_db_km = f.alpha_pump_first_db_km = f.alpha_pump_second_db_km = 0.0;
  const WaveSet w({signal_wave(192.5, 0.0), signal_wave(194.0, 0.0), signal_wave(195.5, 0.0),
                   {wavelength_to_frequency(1475.0), Direction::forward, 0.0, WaveRole::pump_first_order},
                   {wavelength_to_frequency(1455.0), Direction::forward, 0.0, WaveRole::pump_first_order},
                   {wavelength_to_frequency(1366.0), Direction::forward, 0.0, WaveRole::pump_second_order}});
  const RamanSolver s(f, w);
  const SolveResult r = s.solve(std::vector<double>{1e-3, 1e-3, 1e-3, 0.2, 0.3, 0.8});
  auto flux = [&](std::size_t col) {
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += r.power_w(i, col) / w[i].frequency_thz;
    return sum;
  };
  const double f0 = flux(0);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.points(); ++k) worst = std::max(worst, std::abs(flux(k) - f0) / f0);
  const double transferred = 1.0 - r.power_w(5, r.points() - 1) / 0.8;
  return {r.converged && worst < kPhotonFluxTol,
          fmt("max relative flux drift %.3e, 1366 nm pump gave away %.1f%% of its power", worst, 100 * transferred)};
}

Outcome bvp_contract(const RunConfig& cfg) {
  const RamanSolver coarse = cfg.make_solver();
  RunConfig fine_cfg = cfg;
  fine_cfg.solver.z_step_km = cfg.solver.z_step_km / 2;
  const RamanSolver fine = fine_cfg.make_solver();
  std::vector<double> residual(kBvpDraws), diff(kBvpDraws);
  std::vector<int> ok(kBvpDraws);
  parallel_for(kBvpDraws, jobs(), [&](std::size_t n) {
    Rng rng(cfg.seed ^ (0xACCE55ULL + n));
    const PumpConfig p = sample_pump_config(rng);
    const SolveResult a = coarse.solve(p);
    const SolveResult b = fine.solve(p);
    ok[n] = a.converged && b.converged;
    residual[n] = a.final_residual;
    double worst = 0.0;
    for (std::size_t r = 0; r < a.signal_profile.rows(); ++r)
      for (std::size_t c = 0; c < a.points(); ++c)
        worst = std::max(worst, std::abs(a.signal_profile.at(r, c) - b.signal_profile.at(r, 2 * c)));
    diff[n] = worst;
  });
  const int converged = std::accumulate(ok.begin(), ok.end(), 0);
  const double max_res = *std::max_element(residual.begin(), residual.end());
  const double max_diff = *std::max_element(diff.begin(), diff.end());
  return {converged == kBvpDraws && max_res <= kBvpResidual && max_diff < kGridHalvingTolDb,
          fmt("%d/%d converged, max residual %.2e, max grid-halving change %.5f dB", converged, kBvpDraws, max_res,
              max_diff)};
}

// ---------------------------------------------------------------------------
// Surrogate

Outcome gradient_check(const RunConfig& cfg) {
  const NetworkSpec& s = cfg.network;
  Network net = Network::initialize(s, cfg.seed);
  Rng rng(cfg.seed + 5);
  std::vector<std::vector<double>> inputs(2), targets(2);
  for (int b = 0; b < 2; ++b) {
    inputs[b].resize(s.input_rows * s.input_cols);
    for (double& v : inputs[b]) v = rng.uniform(-2.0, 2.0);
    targets[b].resize(s.outputs);
    for (double& v : targets[b]) v = rng.uniform(0.0, 1.0);
  }
  const std::vector<BatchItem> batch{{inputs[0], targets[0]}, {inputs[1], targets[1]}};
  Workspace ws(s);
  std::vector<double> grad;
  loss_and_gradient(net, batch, grad, ws);
  int checked = 0, skipped = 0;
  double worst = 0.0;
  while (checked < kGradCheckWeights && skipped < 100000) {
    const std::size_t i = rng.below(net.params.size());
    const double h = 1e-5, orig = net.params[i];
    net.params[i] = orig + h;
    const double lp = loss(net, batch, ws);
    net.params[i] = orig - h;
    const double lm = loss(net, batch, ws);
    net.params[i] = orig;
    const double fd = (lp - lm) / (2 * h);
    const double scale = std::max(std::abs(fd), std::abs(grad[i]));
    // Weights behind inactive ReLUs have an exactly zero gradient.
    if (scale < 1e-9) {
      ++skipped;
      continue;
    }
    worst = std::max(worst, std::abs(fd - grad[i]) / scale);
    ++checked;
  }
  return {checked >= kGradCheckWeights && worst < kGradCheckRelTol,
          fmt("%d weights checked (%d zero-gradient draws skipped), worst relative error %.2e", checked, skipped,
              worst)};
}

Outcome overfit_smoke(const RunConfig& cfg, const Dataset& data) {
  const auto set = data.load_range(0, 10);
  TrainConfig tc = cfg.training;
  tc.batch_size = 10;
  tc.max_epochs = 3000;
  tc.patience = 3000;
  std::size_t epochs = 0;
  const TrainResult r = train(set, set, cfg.network, tc, [&](const EpochRecord& e) { epochs = e.epoch; });
  const double mse = evaluate_mse(r.model, set);
  return {mse < kOverfitMse, fmt("train MSE %.3e after %zu epochs (best epoch %zu)", mse, epochs, r.best_epoch)};
}

struct Pipeline {
  fs::path root;
  double gen_seconds = 0.0;
  double train_seconds = 0.0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
  bool cached = false;
};

Pipeline build_pipeline(const RunConfig& cfg, const fs::path& cache) {
  Pipeline p;
  p.root = cache / cfg.hash();
  const fs::path timing = p.root / "timing.json";
  if (fs::exists(timing) && fs::exists(p.root / "model" / "model.json")) {
    std::ifstream in(timing);
    const auto j = nlohmann::json::parse(in);
    p.gen_seconds = j.at("dataset_seconds");
    p.train_seconds = j.at("training_seconds");
    p.epochs = j.at("epochs");
    p.best_epoch = j.at("best_epoch");
    p.stopped_early = j.at("stopped_early");
    p.cached = true;
    return p;
  }
  fs::remove_all(p.root);
  fs::create_directories(p.root);
  std::printf("building dataset (%llu samples) ...\n", static_cast<unsigned long long>(cfg.dataset.count));
  std::fflush(stdout);
  GenerateOptions go;
  go.ratios = cfg.dataset.ratios;
  go.jobs = jobs();
  go.max_failure_rate = cfg.dataset.max_failure_rate;
  go.config_hash = cfg.hash();
  auto t0 = Clock::now();
  generate_dataset(cfg.make_solver(), cfg.dataset.count, cfg.seed, p.root / "dataset", go);
  p.gen_seconds = seconds_since(t0);

  std::printf("training surrogate ...\n");
  std::fflush(stdout);
  const Dataset d = Dataset::open(p.root / "dataset");
  const auto train_set = d.load(Split::train);
  const auto val_set = d.load(Split::val);
  t0 = Clock::now();
  const TrainResult r = train(train_set, val_set, cfg.network, cfg.training, [](const EpochRecord& e) {
    if (e.epoch % 25 == 0) {
      std::printf("  epoch %zu train %.3e val %.3e\n", e.epoch, e.train_mse, e.val_mse);
      std::fflush(stdout);
    }
  });
  p.train_seconds = seconds_since(t0);
  p.epochs = r.curve.size();
  p.best_epoch = r.best_epoch;
  p.stopped_early = r.stopped_early;
  r.model.save(p.root / "model", cfg.hash());
  std::ofstream curve(p.root / "learning_curve.csv");
  write_learning_curve_csv(r.curve, curve, cfg.hash());
  std::ofstream(timing) << nlohmann::json{{"dataset_seconds", p.gen_seconds},
                                          {"training_seconds", p.train_seconds},
                                          {"epochs", p.epochs},
                                          {"best_epoch", p.best_epoch},
                                          {"stopped_early", p.stopped_early}}
                               .dump(2);
  return p;
}

Outcome full_training(const RunConfig& cfg, const Pipeline& p, const SurrogateModel& model, const Dataset& data) {
  const auto test = data.load(Split::test);
  const RamanSolver solver = cfg.make_solver();
  const ProfileGrid grid = solver.grid();
  std::vector<PumpConfig> preds(test.size()), truths(test.size());
  std::vector<double> emax(test.size());
  parallel_for(test.size(), jobs(), [&](std::size_t i) {
    preds[i] = model.predict_pumps(std::span<const float>(test[i].profile_dbm));
    for (std::size_t k = 0; k < kPumpCount; ++k) truths[i].powers_mw[k] = test[i].pumps_mw[k];
    const SolveResult r = solver.solve(preds[i]);
    const PowerProfile2D truth(grid, std::vector<double>(test[i].profile_dbm.begin(), test[i].profile_dbm.end()));
    emax[i] = r.converged ? e_max(truth, r.signal_profile) : std::numeric_limits<double>::infinity();
  });
  const auto r2 = r_squared(preds, truths);
  double min_r2 = 1.0;
  std::string r2s;
  for (std::size_t k = 0; k < kPumpCount; ++k) {
    const double v = r2[k].value_or(-1.0);
    min_r2 = std::min(min_r2, v);
    r2s += fmt("%s%.3f", k ? " " : "", v);
  }
  const double mean = std::accumulate(emax.begin(), emax.end(), 0.0) / static_cast<double>(emax.size());
  double ss = 0.0;
  for (double e : emax) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / static_cast<double>(emax.size() - 1));
  const bool ok = min_r2 >= kMinR2 && mean <= kMaxMeanEmaxDb && p.gen_seconds <= kBudgetSeconds &&
                  p.train_seconds <= kBudgetSeconds;
  return {ok, fmt("test R2 [%s], E_max mean %.3f dB std %.3f dB; dataset %.0f s, training %.0f s over %zu epochs "
                  "(best %zu%s)%s",
                  r2s.c_str(), mean, sd, p.gen_seconds, p.train_seconds, p.epochs, p.best_epoch,
                  p.stopped_early ? ", early stop" : "", p.cached ? " [times from cache]" : "")};
}

// ---------------------------------------------------------------------------
// Design

struct DesignRuns {
  std::vector<OptimizationTrace> all;  // every trace, for the optimizer properties
  std::vector<Bounds> bounds;          // matching bounds
  void add(const OptimizationTrace& t, const Bounds& b) {
    all.push_back(t);
    bounds.push_back(b);
  }
};

CnnAssistedResult cnn_design(const RunConfig& cfg, const RamanSolver& solver, const SurrogateModel& model,
                             const PowerProfile2D& target, ObjectiveKind kind, const WeightVector& w,
                             std::uint64_t seed) {
  DEParams params = cfg.de;
  params.seed = seed;
  return run_cnn_assisted(model, target, make_profile_objective(solver, kind, w), cfg.delta_p, params);
}

OptimizationTrace random_design(const RunConfig& cfg, const RamanSolver& solver, ObjectiveKind kind,
                                const WeightVector& w, std::uint64_t seed) {
  DEParams params = cfg.de;
  params.seed = seed;
  return run_random_baseline(make_profile_objective(solver, kind, w), params);
}

const WeightVector kM1{1.0, 0.0, 0.0};
const WeightVector kM3{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0};

Outcome flat_m1(const RunConfig& cfg, const RamanSolver& solver, const SurrogateModel& model, DesignRuns& runs) {
  const auto t0 = Clock::now();
  const auto r = cnn_design(cfg, solver, model, flat_target(0.0, solver.grid()), ObjectiveKind::weighted, kM1, cfg.seed);
  const double dt = seconds_since(t0);
  runs.add(r.trace, r.bounds);
  const double j0 = r.trace.best.eval.j0;
  return {j0 <= kFlatJ0Db && dt <= kBudgetSeconds,
          fmt("J0 %.3f dB (CNN-only %.3f dB) after %zu evaluations, %.0f s", j0, r.prediction_eval.j0,
              r.trace.evaluations(), dt)};
}

Outcome flat_m3(const RunConfig& cfg, const RamanSolver& solver, const SurrogateModel& model, DesignRuns& runs) {
  const auto r = cnn_design(cfg, solver, model, flat_target(0.0, solver.grid()), ObjectiveKind::weighted, kM3, cfg.seed);
  runs.add(r.trace, r.bounds);
  const auto& e = r.trace.best.eval;
  return {e.j1 <= kM3J1Db && e.j2 <= kM3J2Db && e.j0 <= kM3J0Db,
          fmt("J0 %.3f dB, J1 %.3f dB, J2 %.3f dB (CNN-only %.3f / %.3f / %.3f)", e.j0, e.j1, e.j2,
              r.prediction_eval.j0, r.prediction_eval.j1, r.prediction_eval.j2)};
}

Outcome symmetric(const RunConfig& cfg, const RamanSolver& solver, const SurrogateModel& model, DesignRuns& runs) {
  const auto r = cnn_design(cfg, solver, model, sinusoidal_symmetric_target(solver.grid()), ObjectiveKind::asymmetry,
                            {}, cfg.seed);
  runs.add(r.trace, r.bounds);
  const double fin = r.trace.best.eval.max_asymmetry, cnn = r.prediction_eval.max_asymmetry;
  return {fin <= kMaxAsymmetry && cnn - fin >= kMinAsymmetryGain,
          fmt("max asymmetry %.1f%% after fine-tuning, %.1f%% from the CNN alone", 100 * fin, 100 * cnn)};
}

Outcome baseline_comparison(const RunConfig& cfg, const RamanSolver& solver, const SurrogateModel& model,
                            DesignRuns& runs) {
  std::vector<std::uint64_t> seeds(kTrialSeeds);
  for (int k = 0; k < kTrialSeeds; ++k) seeds[static_cast<std::size_t>(k)] = cfg.seed + 1000 + static_cast<std::uint64_t>(k);

  struct Case {
    const char* name;
    PowerProfile2D target;
    ObjectiveKind kind;
    WeightVector w;
  };
  const std::vector<Case> cases{{"flat m(3)", flat_target(0.0, solver.grid()), ObjectiveKind::weighted, kM3},
                                {"asymmetry", sinusoidal_symmetric_target(solver.grid()), ObjectiveKind::asymmetry, {}}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    std::vector<Bounds> cnn_bounds(seeds.size());
    const auto cnn = run_trials(
        [&](std::uint64_t s) {
          auto r = cnn_design(cfg, solver, model, c.target, c.kind, c.w, s);
          cnn_bounds[static_cast<std::size_t>(std::find(seeds.begin(), seeds.end(), s) - seeds.begin())] = r.bounds;
          return r.trace;
        },
        seeds, jobs());
    const auto rnd = run_trials([&](std::uint64_t s) { return random_design(cfg, solver, c.kind, c.w, s); }, seeds,
                                jobs());
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      runs.add(cnn[k], cnn_bounds[k]);
      runs.add(rnd[k], Bounds::table());
    }
    const TrialStats a = multi_trial_stats(cnn), b = multi_trial_stats(rnd);
    const bool case_ok = a.mean.back() < b.mean.back() && a.stddev.back() <= b.stddev.back();
    ok = ok && case_ok;
    detail += fmt("%s%s: CNN-DE %.4f +- %.4f vs random DE %.4f +- %.4f", detail.empty() ? "" : "; ", c.name,
                  a.mean.back(), a.stddev.back(), b.mean.back(), b.stddev.back());
  }
  return {ok, detail};
}

Outcome optimizer_properties(const RunConfig& cfg, const DesignRuns& runs) {
  std::size_t violations = 0, traces = 0;
  for (std::size_t n = 0; n < runs.all.size(); ++n) {
    const auto& t = runs.all[n];
    const auto& b = runs.bounds[n];
    ++traces;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : t.records) {
      if (r.best_so_far > prev) ++violations;
      prev = r.best_so_far;
      if (!b.contains(r.candidate)) ++violations;
    }
    if (!b.contains(t.best.x)) ++violations;
    if (t.evaluations() > cfg.de.max_evaluations) ++violations;
    if (!t.generation_cap_hit && t.evaluations() != cfg.de.max_evaluations) ++violations;
    if (t.best.eval.cost != t.records.back().best_so_far) ++violations;
  }

  // Fixed point: F = 0, CR = 0 and an identical population never move.
  DEParams fp = cfg.de;
  fp.mutation_factor = 0.0;
  fp.crossover_prob = 0.0;
  const Bounds table = Bounds::table();
  std::size_t calls = 0;
  const Objective counting = [&calls](const PumpConfig& p) {
    ++calls;
    Evaluation e;
    e.cost = std::accumulate(p.powers_mw.begin(), p.powers_mw.end(), 0.0);
    e.converged = true;
    return e;
  };
  PumpConfig x;
  for (std::size_t j = 0; j < kPumpCount; ++j) x.powers_mw[j] = 0.5 * (table.lower[j] + table.upper[j]);
  Population pop(fp.population_size, Individual{x, counting(x)});
  calls = 0;
  OptimizationTrace ft;
  Rng rng(cfg.seed);
  for (int gen = 0; gen < 10; ++gen)
    for (std::size_t i = 0; i < pop.size(); ++i) step_individual(i, pop, counting, table, fp, rng, ft);
  bool fixed = calls == 10 * fp.population_size && ft.rejected_trial_count == 0;
  for (const auto& ind : pop) fixed = fixed && ind.x.powers_mw == x.powers_mw;

  return {violations == 0 && fixed,
          fmt("%zu traces checked, %zu violations; fixed point %s", traces, violations, fixed ? "holds" : "broken")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path cache = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_cache");
  RunConfig cfg;
  cfg.validate();
  std::printf("config %s, %u worker thread(s), cache %s\n", cfg.hash().c_str(), jobs(), cache.string().c_str());
  std::fflush(stdout);

  report(1, "attenuation only", attenuation_only);
  report(2, "undepleted-pump oracle", undepleted_oracle);
  report(3, "photon-flux conservation", photon_flux);
  report(4, "BVP contract", [&] { return bvp_contract(cfg); });
  report(5, "gradient check", [&] { return gradient_check(cfg); });

  Pipeline p;
  std::optional<Dataset> data;
  std::optional<SurrogateModel> model;
  try {
    p = build_pipeline(cfg, cache);
    data = Dataset::open(p.root / "dataset");
    model = SurrogateModel::load(p.root / "model");
  } catch (const std::exception& e) {
    std::printf("pipeline failed: %s\n", e.what());
  }
  auto needs = [&](const std::function<Outcome()>& fn) {
    return [&, fn] { return data && model ? fn() : Outcome{false, "no dataset/model"}; };
  };

  report(6, "overfit smoke", needs([&] { return overfit_smoke(cfg, *data); }));
  report(7, "full training", needs([&] { return full_training(cfg, p, *model, *data); }));

  const RamanSolver solver = cfg.make_solver();
  DesignRuns runs;
  report(8, "flat target, m(1)", needs([&] { return flat_m1(cfg, solver, *model, runs); }));
  report(9, "flat target, m(3)", needs([&] { return flat_m3(cfg, solver, *model, runs); }));
  report(10, "symmetric target", needs([&] { return symmetric(cfg, solver, *model, runs); }));
  report(11, "CNN-assisted vs random DE", needs([&] { return baseline_comparison(cfg, solver, *model, runs); }));
  report(12, "optimizer properties", [&] {
    return runs.all.empty() ? Outcome{false, "no traces"} : optimizer_properties(cfg, runs);
  });

  std::printf("%d of 12 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
