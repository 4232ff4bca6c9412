#include "dsdr/distributed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dsdr/error.hpp"
#include "dsdr/rng.hpp"
#include "dsdr/smoothing.hpp"

namespace dsdr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// pi_l per slice; empty for the unweighted variant
std::vector<double> slice_weights(Variant variant, int R) {
  if (variant == Variant::Psvm) return {};
  return weight_grid(R).weights;
}

}  // namespace

Partition partition(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 1 || static_cast<Eigen::Index>(k) > n) {
    throw Error(ErrorKind::InvalidArgument, "partition needs 1 <= k <= n");
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(seed);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }

  Partition part;
  part.k = k;
  part.m = n / k;
  const Eigen::Index extra = n % k;
  auto it = perm.begin();
  for (int j = 0; j < k; ++j) {
    const Eigen::Index size = part.m + (j < extra ? 1 : 0);
    std::vector<Eigen::Index> batch(it, it + size);
    std::sort(batch.begin(), batch.end());
    part.batches.push_back(std::move(batch));
    it += size;
  }
  return part;
}

Matrix gather_rows(const Matrix& x, std::span<const Eigen::Index> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

std::vector<double> gather(const Vector& y, std::span<const Eigen::Index> rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y(rows[i]);
  return out;
}

SdrFit naive_fit(const Dataset& data, const Partition& part, const NaiveOptions& options) {
  const auto start = Clock::now();
  if (part.batches.empty()) throw Error(ErrorKind::InvalidArgument, "empty partition");

  FitOptions local;
  local.R = options.R;
  local.d = options.d;
  local.variant = options.variant;
  local.solver = options.solver;
  local.lambda = options.lambda > 0 ? options.lambda : default_lambda(part.m);

  SdrFit fit;
  fit.variant = options.variant;
  fit.engine = Engine::Naive;
  Matrix sum = Matrix::Zero(data.p(), data.p());
  int used = 0;
  double slowest = 0.0;
  std::string last_failure;
  for (std::size_t j = 0; j < part.batches.size(); ++j) {
    const auto worker_start = Clock::now();
    const Matrix bx = gather_rows(data.x, part.batches[j]);
    const std::vector<double> by = gather(data.y, part.batches[j]);
    std::vector<DirectionEstimate> dirs;
    try {
      dirs = fit_directions(bx, by, local);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSlicing) throw;
      ++fit.skipped_batches;
      last_failure = e.what();
      fit.warnings.push_back("batch " + std::to_string(j + 1) + " skipped: " + e.what());
      continue;
    }
    sum += candidate_matrix(dirs).dense();
    ++used;
    // keep the first batch's directions as a representative sample
    if (fit.directions.empty()) fit.directions = std::move(dirs);
    slowest = std::max(slowest, seconds_since(worker_start));
  }
  if (used == 0) {
    throw Error(ErrorKind::DegenerateSlicing, "every batch failed to slice: " + last_failure);
  }

  const auto reduce_start = Clock::now();
  fit.M = SymMatrix(sum / static_cast<double>(used));
  Subspace sub = central_subspace(fit.M, options.d);
  fit.V = std::move(sub.V);
  fit.eigenvalues = std::move(sub.eigenvalues);
  fit.critical_path_seconds = slowest + seconds_since(reduce_start);
  fit.timing_seconds = seconds_since(start);
  return fit;
}

double bandwidth_schedule(int b, double n, double m, double p, BandwidthRule rule) {
  if (b < 1) throw Error(ErrorKind::InvalidArgument, "bandwidth iteration index must be >= 1");
  const double exponent = std::pow(2.0, b - 2);
  if (rule == BandwidthRule::Floored) {
    return std::max({10.0 * std::sqrt(p / n), 10.0 * std::pow(p / m, exponent), 0.3});
  }
  return std::max(1.0 / std::sqrt(n), std::pow(m, -exponent));
}

WorkerSummary worker_summary(const Matrix& batch, std::span<const int> labels,
                             const Vector& mu_global, const DirectionEstimate& theta_prev,
                             double h, Eigen::Index n_total, std::span<const double> weights) {
  if (!(h > 0)) throw Error(ErrorKind::InvalidArgument, "bandwidth must be positive");
  const Eigen::Index m = batch.rows();
  const Eigen::Index p = batch.cols();
  if (static_cast<std::size_t>(m) != labels.size() ||
      (!weights.empty() && weights.size() != labels.size())) {
    throw Error(ErrorKind::DimensionMismatch, "labels/weights do not match the batch");
  }
  if (mu_global.size() != p || theta_prev.psi.size() != p) {
    throw Error(ErrorKind::DimensionMismatch, "mean or direction has the wrong length");
  }
  if (n_total < 1) throw Error(ErrorKind::InvalidArgument, "n_total must be positive");

  // x^ as columns: (p + 1) x m
  Matrix xhat(p + 1, m);
  xhat.topRows(p) = (batch.rowwise() - mu_global.transpose()).transpose();
  xhat.row(p).setConstant(-1.0);

  Vector theta(p + 1);
  theta << theta_prev.psi, theta_prev.t;
  const Vector fitted = xhat.transpose() * theta;

  const double inv_n = 1.0 / static_cast<double>(n_total);
  Vector curv_w = Vector::Zero(m);
  Vector grad_w = Vector::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double y = labels[static_cast<std::size_t>(i)];
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
    const double v = (1.0 - y * fitted(i)) / h;
    const double hp = smooth_h_prime(v) / h;
    curv_w(i) = w * hp * inv_n;
    grad_w(i) = w * y * (smooth_h(v) + hp) * inv_n;
  }

  WorkerSummary s;
  Matrix base = Matrix::Zero(p + 1, p + 1);
  base.selfadjointView<Eigen::Lower>().rankUpdate(xhat, inv_n);
  s.U_base = SymMatrix(Matrix(base.selfadjointView<Eigen::Lower>()));
  s.U_curv = SymMatrix(xhat * curv_w.asDiagonal() * xhat.transpose());
  s.V_grad = xhat * grad_w;
  return s;
}

DirectionEstimate refined_update(std::span<const WorkerSummary> summaries, double lambda,
                                 double ridge) {
  if (summaries.empty()) throw Error(ErrorKind::InvalidArgument, "no worker summaries");
  if (!(lambda > 0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  const Eigen::Index q = summaries.front().V_grad.size();
  Matrix curv = Matrix::Zero(q, q);
  Matrix base = Matrix::Zero(q, q);
  Vector grad = Vector::Zero(q);
  for (const auto& s : summaries) {
    if (s.V_grad.size() != q || s.U_base.dim() != q || s.U_curv.dim() != q) {
      throw Error(ErrorKind::DimensionMismatch, "worker summaries disagree in size");
    }
    curv += s.U_curv.dense();
    base += s.U_base.dense();
    grad += s.V_grad;
  }
  base.row(q - 1).setZero();
  base.col(q - 1).setZero();
  const Matrix system = curv + (2.0 / lambda) * base;

  Vector theta;
  try {
    theta = solve_linear_system(system, grad, ridge < 0 ? default_ridge(system) : ridge);
  } catch (const Error& e) {
    throw Error(ErrorKind::RefinementSingular, std::string("refinement step failed: ") + e.what());
  }
  DirectionEstimate out;
  out.psi = theta.head(q - 1);
  out.t = theta(q - 1);
  out.slice_index = summaries.front().slice_id;
  return out;
}

SdrFit refined_fit(const Dataset& data, const Partition& part, const RefinedOptions& options) {
  const auto start = Clock::now();
  const RefinedConfig& cfg = options.config;
  if (cfg.B < 1) throw Error(ErrorKind::InvalidArgument, "refinement needs B >= 1");
  if (cfg.init_batch < 1 || cfg.init_batch > part.k) {
    throw Error(ErrorKind::InvalidArgument, "init_batch must lie in [1, k]");
  }
  if (data.n() == 0) throw Error(ErrorKind::EmptyData, "no observations");
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const double lambda = cfg.lambda > 0 ? cfg.lambda : default_lambda(part.m);

  SdrFit fit;
  fit.variant = options.variant;
  fit.engine = Engine::Refined;

  // Workers hold their slice of the data for the whole run.
  std::vector<Matrix> bx;
  std::vector<std::vector<double>> by;
  std::vector<Vector> local_mean;
  double slowest = 0.0;
  for (const auto& rows : part.batches) {
    const auto t0 = Clock::now();
    bx.push_back(gather_rows(data.x, rows));
    by.push_back(gather(data.y, rows));
    local_mean.push_back(sample_mean(bx.back()));
    slowest = std::max(slowest, seconds_since(t0));
  }
  double critical = slowest;

  // Coordinator: pooled mean (size-weighted, so it equals the full-sample mean)
  // and the slicing of the response.
  auto coord_start = Clock::now();
  Vector mu = Vector::Zero(p);
  for (std::size_t j = 0; j < bx.size(); ++j) {
    mu += static_cast<double>(bx[j].rows()) * local_mean[j];
  }
  mu /= static_cast<double>(n);
  std::vector<double> q_points;
  if (options.variant == Variant::Psvm) {
    q_points = default_slices(as_span(data.y), options.R).dividing_points;
  } else {
    binary_labels(as_span(data.y));
  }
  const std::vector<double> pis = slice_weights(options.variant, options.R);
  const std::size_t slices = options.variant == Variant::Psvm ? q_points.size() : pis.size();
  critical += seconds_since(coord_start);

  // Initial estimate from one batch, re-expressed around the pooled mean.
  const auto init_start = Clock::now();
  const std::size_t init = static_cast<std::size_t>(cfg.init_batch - 1);
  FitOptions init_opts;
  init_opts.R = options.R;
  init_opts.d = options.d;
  init_opts.lambda = lambda;
  init_opts.variant = options.variant;
  init_opts.solver = cfg.solver;
  if (options.variant == Variant::Psvm) init_opts.slices = SliceSpec{q_points};
  std::vector<DirectionEstimate> theta = fit_directions(bx[init], by[init], init_opts);
  const Vector shift = local_mean[init] - mu;
  for (auto& th : theta) {
    if (!th.degenerate) th.t += th.psi.dot(shift);
  }
  critical += seconds_since(init_start);

  // Labels and weights are fixed across rounds.
  std::vector<std::vector<Labels>> labels(bx.size());
  std::vector<std::vector<std::vector<double>>> weights(bx.size());
  for (std::size_t j = 0; j < bx.size(); ++j) {
    for (std::size_t l = 0; l < slices; ++l) {
      if (options.variant == Variant::Psvm) {
        labels[j].push_back(sliced_labels(by[j], q_points[l]));
        weights[j].emplace_back();
      } else {
        labels[j].push_back(binary_labels(by[j]));
        weights[j].push_back(class_weights(labels[j].back(), pis[l]));
      }
    }
  }

  for (int b = 1; b <= cfg.B; ++b) {
    const double h = bandwidth_schedule(b, static_cast<double>(n), static_cast<double>(part.m),
                                        static_cast<double>(p), cfg.bandwidth_rule);
    std::vector<std::vector<WorkerSummary>> msgs(slices);
    slowest = 0.0;
    for (std::size_t j = 0; j < bx.size(); ++j) {
      const auto t0 = Clock::now();
      for (std::size_t l = 0; l < slices; ++l) {
        if (theta[l].degenerate) continue;
        WorkerSummary s = worker_summary(bx[j], labels[j][l], mu, theta[l], h, n, weights[j][l]);
        s.batch_id = static_cast<int>(j);
        s.slice_id = static_cast<int>(l);
        msgs[l].push_back(std::move(s));
      }
      slowest = std::max(slowest, seconds_since(t0));
    }
    coord_start = Clock::now();
    for (std::size_t l = 0; l < slices; ++l) {
      if (theta[l].degenerate) continue;
      const long passes = theta[l].passes;
      theta[l] = refined_update(msgs[l], lambda);
      theta[l].passes = passes;
    }
    critical += slowest + seconds_since(coord_start);
  }

  coord_start = Clock::now();
  fit.directions = std::move(theta);
  fit.M = candidate_matrix(fit.directions);
  Subspace sub = central_subspace(fit.M, options.d);
  fit.V = std::move(sub.V);
  fit.eigenvalues = std::move(sub.eigenvalues);
  critical += seconds_since(coord_start);
  fit.critical_path_seconds = critical;
  fit.timing_seconds = seconds_since(start);
  return fit;
}

}  // namespace dsdr
