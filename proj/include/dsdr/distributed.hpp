#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsdr/psvm.hpp"

namespace dsdr {

/// Random, nearly even split of row indices into k batches. Indices inside a
/// batch are ascending, so k = 1 reproduces the original row order.
struct Partition {
  std::vector<std::vector<Eigen::Index>> batches;
  int k = 0;
  /// Nominal batch size floor(n / k).
  Eigen::Index m = 0;
};

/// Seeded Fisher-Yates shuffle split into k blocks; the first n mod k batches
/// get one extra row. Throws InvalidArgument unless 1 <= k <= n.
Partition partition(Eigen::Index n, int k, std::uint64_t seed);

Matrix gather_rows(const Matrix& x, std::span<const Eigen::Index> rows);
std::vector<double> gather(const Vector& y, std::span<const Eigen::Index> rows);

struct NaiveOptions {
  int R = 5;
  int d = 2;
  /// Per-batch cost; non-positive selects 2 m^{2/3} with m the batch size.
  double lambda = 0.0;
  Variant variant = Variant::Psvm;
  SolverConfig solver;
};

/// Fits every batch independently (local mean, covariance and slicing) and
/// averages the batch candidate matrices. Batches whose response cannot be
/// sliced are skipped; if none remain the DegenerateSlicing error propagates.
SdrFit naive_fit(const Dataset& data, const Partition& part, const NaiveOptions& options);

enum class BandwidthRule {
  /// max{10 sqrt(p/n), 10 (p/m)^{2^{b-2}}, 0.3}
  Floored,
  /// max{n^{-1/2}, m^{-2^{b-2}}}
  Rate,
};

double bandwidth_schedule(int b, double n, double m, double p, BandwidthRule rule);

/// Per-worker message for one slice and one round. Everything is scaled by
/// 1 / n_total, so summing over workers gives full-sample averages.
struct WorkerSummary {
  SymMatrix U_base;  // sum x^ x^^T / n
  SymMatrix U_curv;  // sum w x^ x^^T H'(g/h) / h / n
  Vector V_grad;     // sum w y x^ (H(g/h) + H'(g/h) / h) / n
  int batch_id = 0;
  int slice_id = 0;
};

/// x^ = (x - mu, -1) and g = 1 - y theta^T x^ with theta = (psi, t).
/// Empty weights mean w = 1. Throws InvalidArgument if h <= 0.
WorkerSummary worker_summary(const Matrix& batch, std::span<const int> labels,
                             const Vector& mu_global, const DirectionEstimate& theta_prev,
                             double h, Eigen::Index n_total,
                             std::span<const double> weights = {});

/// theta = [sum U_curv + 2/lambda diag(sum U_base, 0)]^{-1} sum V_grad, where
/// diag(A, 0) zeroes the last row and column. Reduction runs in the given
/// order. Negative ridge selects default_ridge of the system matrix.
/// Throws RefinementSingular if the system cannot be solved.
DirectionEstimate refined_update(std::span<const WorkerSummary> summaries, double lambda,
                                 double ridge = -1.0);

struct RefinedConfig {
  int B = 3;
  /// Non-positive selects 2 m^{2/3}; used both for the initializer and the updates.
  double lambda = 0.0;
  BandwidthRule bandwidth_rule = BandwidthRule::Floored;
  /// 1-based batch that supplies the initial estimate.
  int init_batch = 1;
  SolverConfig solver;
};

struct RefinedOptions {
  int R = 5;
  int d = 2;
  Variant variant = Variant::Psvm;
  RefinedConfig config;
};

/// Smoothed iterative distributed estimator. The response is sliced at the
/// pooled quantiles; the weighted variant uses the raw +-1 response for every
/// weight. A slice whose initializer is degenerate keeps psi = 0.
SdrFit refined_fit(const Dataset& data, const Partition& part, const RefinedOptions& options);

}  // namespace dsdr
