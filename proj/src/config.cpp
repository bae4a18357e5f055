#include "ramanpd/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ramanpd/error.hpp"

namespace rpd {
namespace {

using Json = nlohmann::ordered_json;

/// Reads optional keys from one object and rejects any it was not asked about.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    require(j_.is_object(), ErrorCode::invalid_argument, "config section '" + name_ + "' must be an object");
  }
  void done() const {
    for (const auto& [key, value] : j_.items())
      require(seen_.count(key) > 0, ErrorCode::invalid_argument,
              "unknown config key '" + (name_.empty() ? key : name_ + "." + key) + "'");
  }
  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::invalid_argument, "config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  const Json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json to_json_object(const RunConfig& c, bool with_out_dir) {
  Json j;
  j["seed"] = c.seed;
  if (with_out_dir) j["out_dir"] = c.out_dir;
  j["gain_table"] = c.gain_table;
  const auto& f = c.fiber;
  j["fiber"] = {{"span_length_km", f.span_length_km},
                {"alpha_signal_db_km", f.alpha_signal_db_km},
                {"alpha_pump_first_db_km", f.alpha_pump_first_db_km},
                {"alpha_pump_second_db_km", f.alpha_pump_second_db_km},
                {"raman_peak_efficiency", f.raman_peak_efficiency},
                {"effective_area_um2", f.effective_area_um2},
                {"nonlinear_coeff", f.nonlinear_coeff}};
  j["waves"] = {{"channel_count", c.channels.count},
                {"first_channel_thz", c.channels.first_thz},
                {"channel_spacing_thz", c.channels.spacing_thz}};
  const auto& s = c.solver;
  j["solver"] = {{"z_step_km", s.z_step_km},
                 {"residual_threshold", s.residual_threshold},
                 {"max_relaxation_iters", s.max_relaxation_iters},
                 {"damping", s.damping},
                 {"damping_backoff", s.damping_backoff},
                 {"min_damping", s.min_damping},
                 {"rk_substeps", s.rk_substeps},
                 {"signal_launch_dbm", s.signal_launch_dbm}};
  j["dataset"] = {{"count", c.dataset.count},
                  {"train", c.dataset.ratios.train},
                  {"val", c.dataset.ratios.val},
                  {"test", c.dataset.ratios.test},
                  {"max_failure_rate", c.dataset.max_failure_rate}};
  j["network"] = {{"conv_filters", c.network.conv_filters},
                  {"kernel", c.network.kernel},
                  {"dense_units", c.network.dense_units}};
  const auto& t = c.training;
  j["training"] = {{"batch_size", t.batch_size}, {"max_epochs", t.max_epochs}, {"patience", t.patience},
                   {"learning_rate", t.learning_rate}, {"beta1", t.beta1}, {"beta2", t.beta2},
                   {"epsilon", t.epsilon}};
  const auto& d = c.de;
  j["de"] = {{"population_size", d.population_size}, {"crossover_prob", d.crossover_prob},
             {"mutation_factor", d.mutation_factor}, {"max_evaluations", d.max_evaluations},
             {"max_generations", d.max_generations}, {"delta_p", c.delta_p}};
  return j;
}

void sync_network_shape(RunConfig& c) {
  c.network.input_rows = c.channels.count;
  c.network.input_cols =
      ProfileGrid::make(c.channels.frequencies(), c.fiber.span_length_km, c.solver.z_step_km).cols();
  c.network.outputs = kPumpCount;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> ChannelPlan::frequencies() const {
  std::vector<double> f(count);
  for (std::size_t i = 0; i < count; ++i) f[i] = first_thz + spacing_thz * static_cast<double>(i);
  return f;
}

void RunConfig::validate() const {
  fiber.validate();
  solver.validate(fiber.span_length_km);
  require(channels.count > 0 && channels.spacing_thz > 0.0, ErrorCode::invalid_argument,
          "channel plan needs a positive count and spacing");
  require(dataset.count > 0, ErrorCode::invalid_argument, "dataset count must be positive");
  network.validate();
  training.validate();
  de.validate();
  for (double d : delta_p) require(d > 0.0 && d < 1.0, ErrorCode::invalid_argument, "delta_p must be in (0, 1)");
}

std::string RunConfig::to_json() const { return to_json_object(*this, true).dump(2) + "\n"; }

RunConfig RunConfig::from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  {
    Section root(j, "");
    root.get("seed", c.seed);
    root.get("out_dir", c.out_dir);
    root.get("gain_table", c.gain_table);
    if (const Json* s = root.sub("fiber")) {
      Section f(*s, "fiber");
      f.get("span_length_km", c.fiber.span_length_km);
      f.get("alpha_signal_db_km", c.fiber.alpha_signal_db_km);
      f.get("alpha_pump_first_db_km", c.fiber.alpha_pump_first_db_km);
      f.get("alpha_pump_second_db_km", c.fiber.alpha_pump_second_db_km);
      f.get("raman_peak_efficiency", c.fiber.raman_peak_efficiency);
      f.get("effective_area_um2", c.fiber.effective_area_um2);
      f.get("nonlinear_coeff", c.fiber.nonlinear_coeff);
      f.done();
    }
    if (const Json* s = root.sub("waves")) {
      Section w(*s, "waves");
      w.get("channel_count", c.channels.count);
      w.get("first_channel_thz", c.channels.first_thz);
      w.get("channel_spacing_thz", c.channels.spacing_thz);
      w.done();
    }
    if (const Json* s = root.sub("solver")) {
      Section v(*s, "solver");
      v.get("z_step_km", c.solver.z_step_km);
      v.get("residual_threshold", c.solver.residual_threshold);
      v.get("max_relaxation_iters", c.solver.max_relaxation_iters);
      v.get("damping", c.solver.damping);
      v.get("damping_backoff", c.solver.damping_backoff);
      v.get("min_damping", c.solver.min_damping);
      v.get("rk_substeps", c.solver.rk_substeps);
      v.get("signal_launch_dbm", c.solver.signal_launch_dbm);
      v.done();
    }
    if (const Json* s = root.sub("dataset")) {
      Section d(*s, "dataset");
      d.get("count", c.dataset.count);
      d.get("train", c.dataset.ratios.train);
      d.get("val", c.dataset.ratios.val);
      d.get("test", c.dataset.ratios.test);
      d.get("max_failure_rate", c.dataset.max_failure_rate);
      d.done();
    }
    if (const Json* s = root.sub("network")) {
      Section n(*s, "network");
      n.get("conv_filters", c.network.conv_filters);
      n.get("kernel", c.network.kernel);
      n.get("dense_units", c.network.dense_units);
      n.done();
    }
    if (const Json* s = root.sub("training")) {
      Section t(*s, "training");
      t.get("batch_size", c.training.batch_size);
      t.get("max_epochs", c.training.max_epochs);
      t.get("patience", c.training.patience);
      t.get("learning_rate", c.training.learning_rate);
      t.get("beta1", c.training.beta1);
      t.get("beta2", c.training.beta2);
      t.get("epsilon", c.training.epsilon);
      t.done();
    }
    if (const Json* s = root.sub("de")) {
      Section d(*s, "de");
      d.get("population_size", c.de.population_size);
      d.get("crossover_prob", c.de.crossover_prob);
      d.get("mutation_factor", c.de.mutation_factor);
      d.get("max_evaluations", c.de.max_evaluations);
      d.get("max_generations", c.de.max_generations);
      d.get("delta_p", c.delta_p);
      d.done();
    }
    root.done();
  }
  sync_network_shape(c);
  c.sync_seeds();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::not_found, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string RunConfig::hash() const {
  const std::string canon = to_json_object(*this, false).dump();
  std::uint64_t h = fnv1a64(canon.data(), canon.size());
  if (!gain_table.empty()) {
    std::ifstream in(gain_table, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::not_found, "cannot open gain table " + gain_table);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string body = ss.str();
    h = fnv1a64(body.data(), body.size(), h);
  }
  return hex64(h);
}

bool RunConfig::apply_seed_env() {
  const char* env = std::getenv("RPD_SEED");
  if (env == nullptr || *env == '\0') return false;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  require(end != nullptr && *end == '\0', ErrorCode::invalid_argument, std::string("RPD_SEED is not an integer: ") + env);
  seed = v;
  sync_seeds();
  return true;
}

void RunConfig::sync_seeds() {
  training.seed = seed;
  de.seed = seed;
}

RamanSolver RunConfig::make_solver() const {
  validate();
  const auto freqs = channels.frequencies();
  WaveSet waves = WaveSet::with_channels(fiber, freqs);
  if (gain_table.empty()) return RamanSolver(fiber, std::move(waves), solver);
  return RamanSolver(fiber, std::move(waves), RamanGainProfile::load_table(gain_table), solver);
}

}  // namespace rpd
