#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dsdr/distributed.hpp"
#include "dsdr/models.hpp"
#include "dsdr/psvm.hpp"

namespace dsdr {

std::string_view to_string(Engine engine);
std::string_view to_string(Variant variant);
std::string_view to_string(BandwidthRule rule);
Engine parse_engine(std::string_view text);
Variant parse_variant(std::string_view text);
BandwidthRule parse_bandwidth_rule(std::string_view text);

/// Everything needed to run one fit with any engine.
struct EngineOptions {
  Engine engine = Engine::Full;
  Variant variant = Variant::Psvm;
  int R = 5;
  int d = 2;
  int k = 1;
  int B = 3;
  /// Non-positive selects the engine default (2 n^{2/3} full, 2 m^{2/3} distributed).
  double lambda = 0.0;
  BandwidthRule bandwidth_rule = BandwidthRule::Floored;
  int init_batch = 1;
  SolverConfig solver;
};

/// Dispatches to fit_full / naive_fit / refined_fit. The partition (if any) is
/// drawn from partition_seed.
SdrFit fit_engine(const Dataset& data, const EngineOptions& options, std::uint64_t partition_seed);

struct ExperimentConfig {
  ModelSpec model;  // model.seed is ignored; replicate r uses seed + r
  EngineOptions fit;
  int replicates = 1;
  std::uint64_t seed = 1;
  bool compute_dcor = false;
};

struct ReplicateResult {
  int index = 0;
  double distance = 0.0;
  double runtime_seconds = 0.0;
  double critical_path_seconds = 0.0;
  std::optional<double> dcor;
};

struct ReportRow {
  ExperimentConfig config;
  double mean_distance = 0.0;
  double sd_distance = 0.0;
  double mean_runtime_seconds = 0.0;
  double mean_critical_path_seconds = 0.0;
  std::optional<double> mean_dcor;
};

struct ExperimentResult {
  ReportRow row;
  std::vector<ReplicateResult> replicates;  // replicate-index order
};

/// Replicate r simulates with seed + r and partitions with mix_seed(seed + r).
/// Only the fit call is timed. A failing replicate aborts with its index in
/// the message (the error kind is preserved).
ExperimentResult run_experiment(const ExperimentConfig& config);

struct ScalingResult {
  std::vector<double> n;
  std::vector<double> mean_distance;
  double slope = 0.0;
};

/// Runs the experiment at each n and fits log(mean distance) ~ log(n).
/// The grid needs >= 3 points spanning at least a factor of 8.
ScalingResult scaling_study(const ExperimentConfig& base, std::span<const Eigen::Index> n_grid);

}  // namespace dsdr
