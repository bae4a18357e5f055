// rpd: command-line front end over the ramanpd C API.
//
//   rpd solve    --pumps p1,...,p8           profile CSV/PGM + cost JSON
//   rpd gen-data [--count N]                 dataset directory
//   rpd train    [--train-sizes a,b,...]     model + learning curve
//   rpd eval     [--split test]              metrics JSON (R^2, E_max)
//   rpd design   --target flat|symmetric     traces, summary, per-channel CSV
//
// Exit codes: 0 success, 1 usage error, 2 runtime or convergence failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ramanpd/ramanpd.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Failure {
  int exit_code;
  std::string message;
};

void check(rpd_status s, const std::string& context) {
  if (s == RPD_OK) return;
  const int code = s == RPD_ERR_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
  throw Failure{code, context + ": " + rpd_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kExitUsage, msg}; }

struct ConfigDeleter {
  void operator()(rpd_config* p) const { rpd_config_free(p); }
};
struct ProfileDeleter {
  void operator()(rpd_profile* p) const { rpd_profile_free(p); }
};
struct ModelDeleter {
  void operator()(rpd_model* p) const { rpd_model_free(p); }
};
struct TraceDeleter {
  void operator()(rpd_trace* p) const { rpd_trace_free(p); }
};
using ConfigPtr = std::unique_ptr<rpd_config, ConfigDeleter>;
using ProfilePtr = std::unique_ptr<rpd_profile, ProfileDeleter>;
using ModelPtr = std::unique_ptr<rpd_model, ModelDeleter>;
using TracePtr = std::unique_ptr<rpd_trace, TraceDeleter>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  rpd_string_free(s);
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

/// Accepts decimals and simple fractions such as "2/3".
double parse_number(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
    const double num = std::stod(text.substr(0, slash), &used);
    const std::string rest = text.substr(slash + 1);
    std::size_t used2 = 0;
    const double den = std::stod(rest, &used2);
    if (used != slash || used2 != rest.size() || den == 0.0) throw std::invalid_argument(text);
    return num / den;
  } catch (const std::exception&) {
    usage_error("not a number: '" + text + "'");
  }
}

std::vector<double> parse_numbers(const std::string& s, std::size_t expected, const char* what) {
  const auto items = split_list(s);
  if (items.size() != expected)
    usage_error(std::string(what) + " needs " + std::to_string(expected) + " comma-separated values");
  std::vector<double> out;
  for (const auto& i : items) out.push_back(parse_number(i));
  return out;
}

/// Weights must sum to one within 1e-6; they are then rescaled to sum exactly.
std::array<double, 3> parse_weights(const std::string& s) {
  const auto w = parse_numbers(s, 3, "--weights");
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) usage_error("--weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) usage_error("--weights must sum to 1 (got " + std::to_string(sum) + ")");
  return {w[0] / sum, w[1] / sum, w[2] / sum};
}

struct Global {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  unsigned jobs = 1;
};

struct Context {
  ConfigPtr cfg;
  std::string hash;
  fs::path out;
  unsigned jobs = 1;

  std::string path(const std::string& p) const {
    const fs::path q(p);
    return (q.is_absolute() ? q : out / q).string();
  }
};

Context make_context(const Global& g) {
  Context ctx;
  rpd_config* raw = nullptr;
  if (g.config_path.empty())
    check(rpd_config_default(&raw), "default config");
  else
    check(rpd_config_load(g.config_path.c_str(), &raw), "loading " + g.config_path);
  ctx.cfg.reset(raw);
  int applied = 0;
  check(rpd_config_apply_seed_env(ctx.cfg.get(), &applied), "RPD_SEED");
  for (const auto& o : g.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) usage_error("--set expects key=value, got '" + o + "'");
    check(rpd_config_set(ctx.cfg.get(), o.substr(0, eq).c_str(), o.substr(eq + 1).c_str()), "--set " + o);
  }
  if (g.seed >= 0) check(rpd_config_set(ctx.cfg.get(), "seed", std::to_string(g.seed).c_str()), "--seed");
  if (!g.out_dir.empty()) {
    const std::string v = Json(g.out_dir).dump();
    check(rpd_config_set(ctx.cfg.get(), "out_dir", v.c_str()), "--out");
  }
  char h[17];
  check(rpd_config_hash(ctx.cfg.get(), h), "config hash");
  ctx.hash = h;
  ctx.out = rpd_config_out_dir(ctx.cfg.get());
  ctx.jobs = g.jobs;
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw Failure{kExitRuntime, "cannot create output directory " + ctx.out.string()};
  char* js = nullptr;
  check(rpd_config_to_json(ctx.cfg.get(), &js), "config");
  std::ofstream(ctx.out / "config.json", std::ios::binary) << take_string(js);
  return ctx;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Failure{kExitRuntime, "cannot write " + path};
}

Json costs_json(const rpd_costs& c) {
  return {{"j0_db", c.j0_db}, {"j1_db", c.j1_db}, {"j2_db", c.j2_db}, {"max_asymmetry", c.max_asymmetry}};
}

Json pumps_json(const double* p) { return std::vector<double>(p, p + RPD_PUMP_COUNT); }

ModelPtr load_model(const Context& ctx, const std::string& dir) {
  rpd_model* m = nullptr;
  check(rpd_model_load(ctx.path(dir).c_str(), &m), "loading model " + ctx.path(dir));
  return ModelPtr(m);
}

// ---------------------------------------------------------------- solve

struct SolveOpts {
  std::string pumps;
  std::string target;
  double level = 0.0;
  std::string weights = "1,0,0";
  std::string name = "solve";
};

int cmd_solve(const Context& ctx, const SolveOpts& o) {
  const auto p = parse_numbers(o.pumps, RPD_PUMP_COUNT, "--pumps");
  const auto w = parse_weights(o.weights);
  rpd_profile* raw = nullptr;
  rpd_solve_info info{};
  check(rpd_solve(ctx.cfg.get(), p.data(), &raw, &info), "solve");
  ProfilePtr prof(raw);
  const std::string base = ctx.path(o.name);
  check(rpd_profile_write_csv(prof.get(), (base + "_profile.csv").c_str(), ctx.hash.c_str()), "profile CSV");
  check(rpd_profile_write_pgm(prof.get(), (base + "_profile.pgm").c_str(), ctx.hash.c_str()), "profile PGM");

  char* cj = nullptr;
  check(rpd_profile_costs_json(prof.get(), w.data(), nullptr, &cj), "costs");
  Json j = Json::parse(take_string(cj));
  j["weights"] = w;
  j["pumps_mw"] = p;
  j["solver"] = {{"converged", info.converged != 0},
                 {"iterations", info.iterations},
                 {"final_residual", info.final_residual},
                 {"clamp_count", info.clamp_count}};
  if (!o.target.empty()) {
    rpd_profile* t = nullptr;
    if (o.target == "flat")
      check(rpd_target_flat(ctx.cfg.get(), o.level, &t), "target");
    else if (o.target == "symmetric")
      check(rpd_target_symmetric(ctx.cfg.get(), &t), "target");
    else
      usage_error("--target must be flat or symmetric");
    ProfilePtr target(t);
    double emax = 0.0;
    check(rpd_profile_emax(prof.get(), target.get(), &emax), "target deviation");
    j["target"] = o.target;
    j["target_emax_db"] = emax;
  }
  j["config_hash"] = ctx.hash;
  write_text(base + "_costs.json", j.dump(2) + "\n");
  std::printf("J0 %.4f dB  J1 %.4f dB  J2 %.4f dB  max asymmetry %.4f  (%d iterations)\n", j["j0_db"].get<double>(),
              j["j1_db"].get<double>(), j["j2_db"].get<double>(), j["max_asymmetry"].get<double>(), info.iterations);
  return 0;
}

// ---------------------------------------------------------------- gen-data

struct GenOpts {
  std::uint64_t count = 0;
  std::string dir = "dataset";
};

int cmd_gen_data(const Context& ctx, const GenOpts& o) {
  std::uint64_t redraws = 0;
  const std::string dir = ctx.path(o.dir);
  check(rpd_dataset_generate(ctx.cfg.get(), dir.c_str(), o.count, ctx.jobs, &redraws), "dataset generation");
  std::uint64_t c[3];
  check(rpd_dataset_counts(dir.c_str(), c), "dataset");
  std::printf("wrote %llu/%llu/%llu records to %s (%llu redraws)\n", static_cast<unsigned long long>(c[0]),
              static_cast<unsigned long long>(c[1]), static_cast<unsigned long long>(c[2]), dir.c_str(),
              static_cast<unsigned long long>(redraws));
  return 0;
}

// ---------------------------------------------------------------- train / eval

struct TrainOpts {
  std::string data = "dataset";
  std::string model = "model";
  std::string sizes;
  bool quiet = false;
};

struct EvalOpts {
  std::string data = "dataset";
  std::string model = "model";
  std::string split = "test";
  std::uint64_t limit = 0;
  std::string name = "metrics";
};

void print_epoch(size_t epoch, double train_mse, double val_mse, void*) {
  std::fprintf(stderr, "epoch %4zu  train %.4e  val %.4e\n", epoch, train_mse, val_mse);
}

Json metrics_json(const rpd_eval_metrics& m, const std::vector<double>& emax, const std::string& split) {
  Json r2 = Json::array();
  for (int k = 0; k < RPD_PUMP_COUNT; ++k) r2.push_back(m.r2_defined[k] ? Json(m.r2[k]) : Json(nullptr));
  double hi = 0.0;
  for (double e : emax) hi = std::max(hi, e);
  const double width = 0.1;
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::floor(hi / width)) + 1, 0);
  for (double e : emax) ++counts[static_cast<std::size_t>(std::floor(e / width))];
  Json j;
  j["split"] = split;
  j["samples"] = m.samples;
  j["mse_normalized"] = m.mse;
  j["r2"] = r2;
  j["emax_mean_db"] = m.emax_mean_db;
  j["emax_std_db"] = m.emax_std_db;
  j["emax_histogram"] = {{"bin_width_db", width}, {"counts", counts}};
  return j;
}

rpd_eval_metrics evaluate(const Context& ctx, const rpd_model* m, const std::string& data, const std::string& split,
                          std::uint64_t limit, std::vector<double>& emax) {
  rpd_eval_metrics met{};
  double* raw = nullptr;
  check(rpd_model_evaluate(m, ctx.cfg.get(), ctx.path(data).c_str(), split.c_str(), limit, ctx.jobs, &met, &raw),
        "evaluation");
  emax.assign(raw, raw + met.samples);
  rpd_doubles_free(raw);
  return met;
}

int cmd_train(const Context& ctx, const TrainOpts& o) {
  const std::string data = ctx.path(o.data);
  std::vector<std::uint64_t> sizes;
  if (!o.sizes.empty())
    for (const auto& s : split_list(o.sizes)) {
      const double v = parse_number(s);
      if (!(v >= 2.0) || v != std::floor(v)) usage_error("--train-sizes needs integers >= 2");
      sizes.push_back(static_cast<std::uint64_t>(v));
    }
  if (sizes.empty()) sizes.push_back(0);

  std::ofstream sweep;
  if (!o.sizes.empty()) {
    sweep.open(ctx.path("train_sweep.csv"), std::ios::binary | std::ios::trunc);
    sweep << "# config_hash=" << ctx.hash << "\ntrain_size,best_epoch,best_val_mse";
    for (int k = 1; k <= RPD_PUMP_COUNT; ++k) sweep << ",r2_p" << k;
    sweep << ",emax_mean_db\n";
  }
  for (std::uint64_t n : sizes) {
    rpd_model* raw = nullptr;
    check(rpd_model_train(ctx.cfg.get(), data.c_str(), n, o.quiet ? nullptr : print_epoch, nullptr, &raw),
          "training");
    ModelPtr m(raw);
    const std::string dir = n ? ctx.path(o.model + "_n" + std::to_string(n)) : ctx.path(o.model);
    check(rpd_model_save(m.get(), dir.c_str(), ctx.hash.c_str()), "saving model");
    check(rpd_model_write_curve_csv(m.get(), (dir + "/learning_curve.csv").c_str(), ctx.hash.c_str()),
          "learning curve");
    size_t epochs = 0, best = 0;
    double best_val = 0.0;
    check(rpd_model_training_summary(m.get(), &epochs, &best, &best_val), "training summary");
    std::printf("trained %s: %zu epochs, best epoch %zu, val MSE %.4e\n", dir.c_str(), epochs, best, best_val);
    if (sweep.is_open()) {
      std::vector<double> emax;
      const auto met = evaluate(ctx, m.get(), o.data, "test", 0, emax);
      sweep << n << ',' << best << ',' << best_val;
      for (int k = 0; k < RPD_PUMP_COUNT; ++k) sweep << ',' << met.r2[k];
      sweep << ',' << met.emax_mean_db << '\n';
    }
  }
  return 0;
}

int cmd_eval(const Context& ctx, const EvalOpts& o) {
  const ModelPtr m = load_model(ctx, o.model);
  std::vector<double> emax;
  const auto met = evaluate(ctx, m.get(), o.data, o.split, o.limit, emax);
  Json j = metrics_json(met, emax, o.split);
  j["config_hash"] = ctx.hash;
  write_text(ctx.path(o.name + ".json"), j.dump(2) + "\n");
  std::printf("R2:");
  for (int k = 0; k < RPD_PUMP_COUNT; ++k) std::printf(" %.3f", met.r2[k]);
  std::printf("\nE_max mean %.3f dB, std %.3f dB over %zu samples\n", met.emax_mean_db, met.emax_std_db,
              met.samples);
  return 0;
}

// ---------------------------------------------------------------- design

struct DesignOpts {
  std::string target = "flat";
  double level = 0.0;
  std::string weights;
  std::string objective = "weighted";
  bool baseline = false;
  bool no_surrogate = false;
  std::size_t trials = 0;
  std::string model = "model";
  std::string name;
};

Json run_json(const rpd_design_summary& s, bool prediction) {
  if (prediction)
    return {{"pumps_mw", pumps_json(s.prediction_pumps_mw)}, {"cost", s.prediction_cost},
            {"costs", costs_json(s.prediction)}};
  return {{"pumps_mw", pumps_json(s.best_pumps_mw)},
          {"cost", s.best_cost},
          {"costs", costs_json(s.best)},
          {"evaluations", s.evaluations},
          {"rejected_trials", s.rejected_trials},
          {"generations", s.generations},
          {"generation_cap_hit", s.generation_cap_hit != 0},
          {"lower_mw", pumps_json(s.lower_mw)},
          {"upper_mw", pumps_json(s.upper_mw)}};
}

int cmd_design(const Context& ctx, const DesignOpts& o) {
  rpd_design_options opts;
  rpd_design_options_init(&opts);
  if (o.target == "flat")
    opts.target = RPD_TARGET_FLAT;
  else if (o.target == "symmetric")
    opts.target = RPD_TARGET_SYMMETRIC;
  else
    usage_error("--target must be flat or symmetric");
  opts.flat_level_dbm = o.level;
  if (o.objective == "asymmetry") {
    if (!o.weights.empty()) usage_error("--weights and --objective asymmetry are exclusive");
    opts.objective = RPD_OBJECTIVE_ASYMMETRY;
  } else if (o.objective == "weighted") {
    const auto w = parse_weights(o.weights.empty() ? "1,0,0" : o.weights);
    std::copy(w.begin(), w.end(), opts.weights);
  } else {
    usage_error("--objective must be weighted or asymmetry");
  }
  if (o.trials == 1) usage_error("--trials needs at least 2 runs");
  std::uint64_t seed = 0;
  check(rpd_config_seed(ctx.cfg.get(), &seed), "seed");
  opts.seed = seed;
  opts.jobs = ctx.jobs;

  const std::string label =
      o.name.empty() ? "design_" + o.target + (opts.objective == RPD_OBJECTIVE_ASYMMETRY ? "_asym" : "") : o.name;
  const std::string base = ctx.path(label);

  ModelPtr model;
  if (!o.no_surrogate) model = load_model(ctx, o.model);

  struct Variant {
    std::string key;
    bool surrogate;
  };
  std::vector<Variant> variants;
  if (!o.no_surrogate) variants.push_back({"cnn_de", true});
  if (o.baseline || o.no_surrogate) variants.push_back({"random_de", false});

  Json summary;
  summary["target"] = o.target;
  summary["objective"] = o.objective;
  if (opts.objective == RPD_OBJECTIVE_WEIGHTED) summary["weights"] = std::vector<double>(opts.weights, opts.weights + 3);
  summary["seed"] = seed;

  std::size_t rows = 0;
  std::vector<std::pair<std::string, std::vector<double>>> excursion, asymmetry;
  const auto per_channel = [&](const std::string& key, rpd_profile* p) {
    check(rpd_profile_shape(p, &rows, nullptr), "profile");
    std::vector<double> ex(rows), as(rows);
    rpd_costs c{};
    check(rpd_profile_channel_excursion(p, ex.data(), rows), "per-channel excursion");
    check(rpd_profile_costs(p, nullptr, &c, as.data()), "per-channel asymmetry");
    excursion.emplace_back(key, ex);
    asymmetry.emplace_back(key, as);
  };

  for (const auto& v : variants) {
    rpd_design_options vo = opts;
    vo.use_surrogate = v.surrogate ? 1 : 0;
    rpd_trace* raw = nullptr;
    check(rpd_design_run(ctx.cfg.get(), model.get(), &vo, &raw), "design (" + v.key + ")");
    TracePtr trace(raw);
    rpd_design_summary s{};
    check(rpd_trace_summary(trace.get(), &s), "summary");
    check(rpd_trace_write_csv(trace.get(), (base + "_" + v.key + "_trace.csv").c_str(), ctx.hash.c_str()), "trace");
    rpd_profile* bp = nullptr;
    check(rpd_trace_best_profile(trace.get(), &bp), "best profile");
    ProfilePtr best(bp);
    check(rpd_profile_write_csv(best.get(), (base + "_" + v.key + "_profile.csv").c_str(), ctx.hash.c_str()),
          "profile CSV");
    check(rpd_profile_write_pgm(best.get(), (base + "_" + v.key + "_profile.pgm").c_str(), ctx.hash.c_str()),
          "profile PGM");
    if (s.has_prediction) {
      summary["cnn"] = run_json(s, true);
      rpd_profile* pp = nullptr;
      if (rpd_trace_prediction_profile(trace.get(), &pp) == RPD_OK) {
        ProfilePtr pred(pp);
        check(rpd_profile_write_csv(pred.get(), (base + "_cnn_profile.csv").c_str(), ctx.hash.c_str()),
              "profile CSV");
        per_channel("cnn", pred.get());
      }
    }
    summary[v.key] = run_json(s, false);
    per_channel(v.key, best.get());
    std::printf("%-9s best cost %.4f  J0 %.3f  J1 %.3f  J2 %.3f  asym %.4f  (%zu evals, %zu rejected)\n",
                v.key.c_str(), s.best_cost, s.best.j0_db, s.best.j1_db, s.best.j2_db, s.best.max_asymmetry,
                s.evaluations, s.rejected_trials);
    if (s.has_prediction)
      std::printf("%-9s cost      %.4f  J0 %.3f  J1 %.3f  J2 %.3f  asym %.4f\n", "cnn", s.prediction_cost,
                  s.prediction.j0_db, s.prediction.j1_db, s.prediction.j2_db, s.prediction.max_asymmetry);

    if (o.trials >= 2) {
      std::vector<std::uint64_t> seeds(o.trials);
      for (std::size_t k = 0; k < o.trials; ++k) seeds[k] = seed + k;
      std::vector<rpd_trace*> raws(o.trials, nullptr);
      check(rpd_design_trials(ctx.cfg.get(), model.get(), &vo, seeds.data(), o.trials, ctx.jobs, raws.data()),
            "trials (" + v.key + ")");
      std::vector<TracePtr> owned;
      for (auto* t : raws) owned.emplace_back(t);
      double mean = 0.0, sd = 0.0;
      check(rpd_trials_write_stats(raws.data(), raws.size(), (base + "_" + v.key + "_trials.csv").c_str(),
                                   ctx.hash.c_str(), &mean, &sd),
            "trial statistics");
      summary[v.key]["trials"] = {{"count", o.trials}, {"final_mean_cost", mean}, {"final_std_cost", sd}};
      std::printf("%-9s %zu trials: final cost mean %.4f std %.4f\n", v.key.c_str(), o.trials, mean, sd);
    }
  }
  summary["config_hash"] = ctx.hash;
  write_text(base + "_summary.json", summary.dump(2) + "\n");

  std::ofstream pc(base + "_channels.csv", std::ios::binary | std::ios::trunc);
  pc << "# config_hash=" << ctx.hash << "\nchannel";
  for (const auto& [k, v] : excursion) pc << ',' << k << "_excursion_db";
  for (const auto& [k, v] : asymmetry) pc << ',' << k << "_asymmetry";
  pc << '\n';
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    pc << r + 1;
    for (const auto& [k, v] : excursion) {
      std::snprintf(buf, sizeof buf, ",%.6f", v[r]);
      pc << buf;
    }
    for (const auto& [k, v] : asymmetry) {
      std::snprintf(buf, sizeof buf, ",%.6f", v[r]);
      pc << buf;
    }
    pc << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raman amplifier 2D power-profile design"};
  app.require_subcommand(1);
  Global g;
  app.add_option("-c,--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("-o,--out", g.out_dir, "Output directory (overrides out_dir)");
  app.add_option("--seed", g.seed, "Global seed (overrides config and RPD_SEED)");
  app.add_option("--set", g.overrides, "Override a config field, e.g. de.max_evaluations=500");
  app.add_option("-j,--jobs", g.jobs, "Worker threads (0 = all cores)");

  SolveOpts so;
  auto* solve = app.add_subcommand("solve", "Solve one pump configuration");
  solve->add_option("--pumps", so.pumps, "p1..p8 in mW, comma-separated")->required();
  solve->add_option("--target", so.target, "Also report deviation from a target (flat|symmetric)");
  solve->add_option("--level", so.level, "Flat target level in dBm");
  solve->add_option("--weights", so.weights, "m0,m1,m2 for the weighted cost");
  solve->add_option("--name", so.name, "Output file prefix");

  GenOpts go;
  auto* gen = app.add_subcommand("gen-data", "Generate the training dataset");
  gen->add_option("--count", go.count, "Number of records (default from config)");
  gen->add_option("--dir", go.dir, "Dataset directory");

  TrainOpts to;
  auto* tr = app.add_subcommand("train", "Train the inverse surrogate");
  tr->add_option("--data", to.data, "Dataset directory");
  tr->add_option("--model", to.model, "Model directory");
  tr->add_option("--train-sizes", to.sizes, "Comma-separated training-set sizes for a sweep");
  tr->add_flag("-q,--quiet", to.quiet, "No per-epoch log");

  EvalOpts eo;
  auto* ev = app.add_subcommand("eval", "Evaluate a trained surrogate");
  ev->add_option("--data", eo.data, "Dataset directory");
  ev->add_option("--model", eo.model, "Model directory");
  ev->add_option("--split", eo.split, "train|val|test|all");
  ev->add_option("--limit", eo.limit, "Evaluate only the first N records of the split");
  ev->add_option("--name", eo.name, "Metrics file name (without .json)");

  DesignOpts d;
  auto* de = app.add_subcommand("design", "Design pump powers for a target profile");
  de->add_option("--target", d.target, "flat|symmetric");
  de->add_option("--level", d.level, "Flat target level in dBm");
  de->add_option("--weights", d.weights, "m0,m1,m2 (fractions like 2/3 allowed)");
  de->add_option("--objective", d.objective, "weighted|asymmetry");
  de->add_flag("--baseline", d.baseline, "Also run random-initialization DE");
  de->add_flag("--no-surrogate", d.no_surrogate, "Run only random-initialization DE");
  de->add_option("--trials", d.trials, "Repeat each run over N seeds and write mean/std curves");
  de->add_option("--model", d.model, "Model directory");
  de->add_option("--name", d.name, "Output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    const Context ctx = make_context(g);
    if (*solve) return cmd_solve(ctx, so);
    if (*gen) return cmd_gen_data(ctx, go);
    if (*tr) return cmd_train(ctx, to);
    if (*ev) return cmd_eval(ctx, eo);
    if (*de) return cmd_design(ctx, d);
  } catch (const Failure& f) {
    std::fprintf(stderr, "rpd: %s\n", f.message.c_str());
    return f.exit_code;
  }
  return kExitUsage;
}
