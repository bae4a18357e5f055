/**
 * @file config.hpp
 * @brief Run configuration: one JSON document with a section per module.
 *
 * Missing keys keep their defaults; unknown keys are rejected so that typos
 * do not silently fall back. The config hash is FNV-1a (64 bit) over the
 * canonical JSON with the output directory removed, plus the gain table
 * contents when one is configured.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ramanpd/bvp_solver.hpp"
#include "ramanpd/dataset.hpp"
#include "ramanpd/de_optimizer.hpp"
#include "ramanpd/raman_model.hpp"
#include "ramanpd/surrogate.hpp"

namespace rpd {

struct ChannelPlan {
  std::size_t count = kChannelCount;
  double first_thz = kFirstChannelThz;
  double spacing_thz = kChannelSpacingThz;

  std::vector<double> frequencies() const;
};

struct DatasetConfig {
  std::uint64_t count = 5100;
  SplitCounts ratios{};
  double max_failure_rate = 0.05;
};

struct RunConfig {
  FiberSpec fiber;
  ChannelPlan channels;
  SolverConfig solver;
  /// Optional two-column gain table replacing the triangular curve.
  std::string gain_table;
  DatasetConfig dataset;
  NetworkSpec network;
  TrainConfig training;
  DEParams de;
  PumpArray delta_p = default_delta_p();
  std::uint64_t seed = 42;
  std::string out_dir = "out";

  RunConfig() { sync_seeds(); }

  void validate() const;
  std::string to_json() const;
  /// Throws invalid_argument on malformed JSON or unknown keys.
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);

  /// 16 hex digits.
  std::string hash() const;

  /// Applies RPD_SEED from the environment if set. Returns true if applied.
  bool apply_seed_env();
  /// Propagates the global seed into the training and DE sections.
  void sync_seeds();

  RamanSolver make_solver() const;
};

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace rpd
