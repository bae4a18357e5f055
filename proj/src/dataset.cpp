#include "ramanpd/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "json.hpp"
#include "ramanpd/error.hpp"
#include "ramanpd/parallel.hpp"

namespace rpd {
namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr std::size_t kChunk = 256;
constexpr int kMaxRedrawsPerSample = 50;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::not_found, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  if (name == "all") return Split::all;
  throw Error(ErrorCode::invalid_argument, "unknown split '" + std::string(name) + "'");
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::all: return "all";
  }
  return "?";
}

SplitCounts split_counts(std::uint64_t n, const SplitCounts& ratios) {
  const std::uint64_t sum = ratios.total();
  require(sum > 0, ErrorCode::invalid_argument, "split ratios must not all be zero");
  require(sum <= (std::uint64_t{1} << 32), ErrorCode::invalid_argument, "split ratios are too large");
  SplitCounts c;
  const auto part = [&](std::uint64_t r) {
    // floor(n * r / sum) without overflowing n * r
    return (n / sum) * r + ((n % sum) * r) / sum;
  };
  c.val = part(ratios.val);
  c.test = part(ratios.test);
  c.train = n - c.val - c.test;
  return c;
}

std::string DatasetManifest::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["counts"] = {{"train", counts.train}, {"val", counts.val}, {"test", counts.test}};
  j["redraws"] = redraws;
  j["config_hash"] = config_hash;
  j["record_bytes"] = record_bytes;
  j["float_format"] = float_format;
  j["record_file"] = record_file;
  j["layout"] = {{"pumps", kPumpCount}, {"rows", rows}, {"cols", cols}, {"order", "pumps_mw,profile_dbm_row_major"}};
  j["freq_grid_thz"] = freq_grid;
  j["z_grid_km"] = z_grid;
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DatasetManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.counts.train = j.at("counts").at("train").get<std::uint64_t>();
    m.counts.val = j.at("counts").at("val").get<std::uint64_t>();
    m.counts.test = j.at("counts").at("test").get<std::uint64_t>();
    m.redraws = j.at("redraws").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.record_bytes = j.at("record_bytes").get<std::uint64_t>();
    m.float_format = j.at("float_format").get<std::string>();
    m.record_file = j.value("record_file", std::string("samples.rrd"));
    m.rows = j.at("layout").at("rows").get<std::uint64_t>();
    m.cols = j.at("layout").at("cols").get<std::uint64_t>();
    m.freq_grid = j.at("freq_grid_thz").get<std::vector<double>>();
    m.z_grid = j.at("z_grid_km").get<std::vector<double>>();
    require(m.float_format == "le_f32", ErrorCode::invalid_argument, "unsupported float format " + m.float_format);
    require(m.record_bytes == 4 * (kPumpCount + m.rows * m.cols), ErrorCode::invalid_argument,
            "record_bytes does not match layout");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("malformed dataset manifest: ") + e.what());
  }
}

PumpConfig pump_config_from_quantiles(const std::array<double, kPumpCount>& u) {
  PumpConfig p;
  for (std::size_t i = 0; i < kPumpCount; ++i) {
    const auto& spec = standard_pumps()[i];
    p.powers_mw[i] = spec.min_mw + u[i] * (spec.max_mw - spec.min_mw);
  }
  return p;
}

PumpConfig sample_pump_config(Rng& rng) {
  std::array<double, kPumpCount> u{};
  for (auto& x : u) x = rng.uniform01();
  return pump_config_from_quantiles(u);
}

DatasetManifest generate_dataset(const RamanSolver& solver, std::uint64_t n, std::uint64_t seed,
                                 const std::filesystem::path& dir, const GenerateOptions& opts) {
  require(opts.max_failure_rate >= 0.0, ErrorCode::invalid_argument, "max_failure_rate must be >= 0");
  const ProfileGrid grid = solver.grid();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create dataset directory " + dir.string());

  DatasetManifest m;
  m.seed = seed;
  m.counts = split_counts(n, opts.ratios);
  m.config_hash = opts.config_hash;
  m.rows = grid.rows();
  m.cols = grid.cols();
  m.record_bytes = 4 * (kPumpCount + m.rows * m.cols);
  m.freq_grid = grid.freq_thz;
  m.z_grid = grid.z_km;

  std::ofstream out(dir / m.record_file, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot write " + (dir / m.record_file).string());

  const std::size_t profile_len = m.rows * m.cols;
  std::vector<Sample> chunk;
  std::vector<int> redraws;
  for (std::uint64_t first = 0; first < n; first += kChunk) {
    const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n - first));
    chunk.assign(count, Sample{});
    redraws.assign(count, 0);
    parallel_for(count, opts.jobs, [&](std::size_t k) {
      Rng rng(seed ^ (first + k));
      for (int attempt = 0;; ++attempt) {
        const PumpConfig pumps = sample_pump_config(rng);
        const SolveResult r = solver.solve(pumps);
        if (r.converged && r.nonpositive_signal_entries == 0) {
          for (std::size_t p = 0; p < kPumpCount; ++p) chunk[k].pumps_mw[p] = static_cast<float>(pumps.powers_mw[p]);
          chunk[k].profile_dbm.resize(profile_len);
          for (std::size_t i = 0; i < profile_len; ++i)
            chunk[k].profile_dbm[i] = static_cast<float>(r.signal_profile.values()[i]);
          return;
        }
        redraws[k] = attempt + 1;
        require(attempt + 1 < kMaxRedrawsPerSample, ErrorCode::runtime,
                "solver failed repeatedly on sample " + std::to_string(first + k));
      }
    });
    for (std::size_t k = 0; k < count; ++k) {
      detail::write_le_f32(out, chunk[k].pumps_mw);
      detail::write_le_f32(out, chunk[k].profile_dbm);
      m.redraws += static_cast<std::uint64_t>(redraws[k]);
    }
    const double attempts = static_cast<double>(first + count + m.redraws);
    require(static_cast<double>(m.redraws) <= opts.max_failure_rate * attempts, ErrorCode::runtime,
            "solver failure rate exceeded: " + std::to_string(m.redraws) + " failures in " +
                std::to_string(static_cast<std::uint64_t>(attempts)) + " solves");
  }
  out.close();
  require(static_cast<bool>(out), ErrorCode::io, "error writing record file");

  std::ofstream mf(dir / kManifestName, std::ios::binary | std::ios::trunc);
  mf << m.to_json();
  require(static_cast<bool>(mf), ErrorCode::io, "error writing manifest");
  return m;
}

Dataset Dataset::open(const std::filesystem::path& dir) {
  Dataset d;
  d.dir_ = dir;
  d.manifest_ = DatasetManifest::from_json(read_text(dir / kManifestName));
  const auto records = dir / d.manifest_.record_file;
  require(std::filesystem::exists(records), ErrorCode::not_found, "missing record file " + records.string());
  const auto bytes = std::filesystem::file_size(records);
  require(bytes == d.manifest_.record_bytes * d.size(), ErrorCode::invalid_state,
          "record file size does not match manifest counts");
  return d;
}

std::pair<std::uint64_t, std::uint64_t> Dataset::range(Split s) const {
  const auto& c = manifest_.counts;
  switch (s) {
    case Split::train: return {0, c.train};
    case Split::val: return {c.train, c.val};
    case Split::test: return {c.train + c.val, c.test};
    case Split::all: return {0, c.total()};
  }
  return {0, 0};
}

std::vector<Sample> Dataset::load(Split s) const {
  const auto [first, count] = range(s);
  return load_range(first, count);
}

std::vector<Sample> Dataset::load_range(std::uint64_t first, std::uint64_t count) const {
  require(first + count <= size(), ErrorCode::invalid_argument, "record range out of bounds");
  std::ifstream in(dir_ / manifest_.record_file, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::not_found, "cannot open record file");
  in.seekg(static_cast<std::streamoff>(first * manifest_.record_bytes));
  std::vector<Sample> out(count);
  for (auto& s : out) {
    s.profile_dbm.resize(manifest_.rows * manifest_.cols);
    require(detail::read_le_f32(in, s.pumps_mw) && detail::read_le_f32(in, s.profile_dbm), ErrorCode::io,
            "truncated record file");
  }
  return out;
}

}  // namespace rpd
