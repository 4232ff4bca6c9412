#include "dsdr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsdr/error.hpp"
#include "dsdr/metrics.hpp"
#include "dsdr/rng.hpp"

namespace dsdr {

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::Full: return "full";
    case Engine::Naive: return "naive";
    case Engine::Refined: return "refined";
  }
  return "?";
}

std::string_view to_string(Variant variant) {
  return variant == Variant::Psvm ? "psvm" : "wpsvm";
}

std::string_view to_string(BandwidthRule rule) {
  return rule == BandwidthRule::Floored ? "sec6" : "assumption7";
}

Engine parse_engine(std::string_view text) {
  if (text == "full") return Engine::Full;
  if (text == "naive") return Engine::Naive;
  if (text == "refined") return Engine::Refined;
  throw Error(ErrorKind::InvalidArgument, "unknown engine '" + std::string(text) + "'");
}

Variant parse_variant(std::string_view text) {
  if (text == "psvm" || text == "PSVM") return Variant::Psvm;
  if (text == "wpsvm" || text == "WPSVM") return Variant::Wpsvm;
  throw Error(ErrorKind::InvalidArgument, "unknown variant '" + std::string(text) + "'");
}

BandwidthRule parse_bandwidth_rule(std::string_view text) {
  if (text == "sec6") return BandwidthRule::Floored;
  if (text == "assumption7") return BandwidthRule::Rate;
  throw Error(ErrorKind::InvalidArgument, "unknown bandwidth rule '" + std::string(text) + "'");
}

SdrFit fit_engine(const Dataset& data, const EngineOptions& o, std::uint64_t partition_seed) {
  switch (o.engine) {
    case Engine::Full: {
      FitOptions f;
      f.R = o.R;
      f.d = o.d;
      f.lambda = o.lambda;
      f.variant = o.variant;
      f.solver = o.solver;
      return fit_full(data, f);
    }
    case Engine::Naive: {
      NaiveOptions f;
      f.R = o.R;
      f.d = o.d;
      f.lambda = o.lambda;
      f.variant = o.variant;
      f.solver = o.solver;
      return naive_fit(data, partition(data.n(), o.k, partition_seed), f);
    }
    case Engine::Refined: {
      RefinedOptions f;
      f.R = o.R;
      f.d = o.d;
      f.variant = o.variant;
      f.config.B = o.B;
      f.config.lambda = o.lambda;
      f.config.bandwidth_rule = o.bandwidth_rule;
      f.config.init_batch = o.init_batch;
      f.config.solver = o.solver;
      return refined_fit(data, partition(data.n(), o.k, partition_seed), f);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown engine");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.replicates < 1) throw Error(ErrorKind::InvalidArgument, "replicates must be >= 1");
  ExperimentResult result;
  result.row.config = config;
  for (int r = 0; r < config.replicates; ++r) {
    const std::uint64_t rep_seed = config.seed + static_cast<std::uint64_t>(r);
    ModelSpec spec = config.model;
    spec.seed = rep_seed;
    ReplicateResult rep;
    rep.index = r;
    try {
      const SimulatedData sim = generate_model(spec);
      const SdrFit fit = fit_engine(sim.data, config.fit, mix_seed(rep_seed));
      rep.distance = projection_distance(fit.V, sim.true_basis);
      rep.runtime_seconds = fit.timing_seconds;
      rep.critical_path_seconds = fit.critical_path_seconds;
      if (config.compute_dcor) {
        const Matrix z = sim.data.x * fit.V;
        rep.dcor = distance_correlation(as_span(sim.data.y), z);
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "replicate " + std::to_string(r) + " (seed " +
                                std::to_string(rep_seed) + "): " + e.what());
    }
    result.replicates.push_back(rep);
  }

  const auto reps = static_cast<double>(result.replicates.size());
  ReportRow& row = result.row;
  double dcor_sum = 0.0;
  for (const auto& rep : result.replicates) {
    row.mean_distance += rep.distance;
    row.mean_runtime_seconds += rep.runtime_seconds;
    row.mean_critical_path_seconds += rep.critical_path_seconds;
    if (rep.dcor) dcor_sum += *rep.dcor;
  }
  row.mean_distance /= reps;
  row.mean_runtime_seconds /= reps;
  row.mean_critical_path_seconds /= reps;
  if (config.compute_dcor) row.mean_dcor = dcor_sum / reps;
  if (result.replicates.size() > 1) {
    double ss = 0.0;
    for (const auto& rep : result.replicates) {
      ss += (rep.distance - row.mean_distance) * (rep.distance - row.mean_distance);
    }
    row.sd_distance = std::sqrt(ss / (reps - 1.0));
  }
  return result;
}

ScalingResult scaling_study(const ExperimentConfig& base, std::span<const Eigen::Index> n_grid) {
  if (n_grid.size() < 3) throw Error(ErrorKind::InvalidArgument, "scaling study needs >= 3 sizes");
  const auto [lo, hi] = std::minmax_element(n_grid.begin(), n_grid.end());
  if (*lo < 1 || *hi < 8 * *lo) {
    throw Error(ErrorKind::InvalidArgument, "scaling grid must span at least a factor of 8");
  }
  ScalingResult out;
  for (Eigen::Index n : n_grid) {
    ExperimentConfig cfg = base;
    cfg.model.n = n;
    out.n.push_back(static_cast<double>(n));
    out.mean_distance.push_back(run_experiment(cfg).row.mean_distance);
  }
  out.slope = log_log_slope(out.n, out.mean_distance);
  return out;
}

}  // namespace dsdr
