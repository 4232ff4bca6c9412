#include "dsdr/psvm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dsdr/error.hpp"

namespace dsdr {

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

SliceSpec dividing_points(std::span<const double> responses, int R) {
  if (R < 2) throw Error(ErrorKind::InvalidArgument, "need at least two slices");
  if (responses.size() < static_cast<std::size_t>(R)) {
    throw Error(ErrorKind::InvalidArgument, "fewer observations than slices");
  }
  std::vector<double> sorted(responses.begin(), responses.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "non-finite response");
  }
  std::sort(sorted.begin(), sorted.end());
  const double last = static_cast<double>(sorted.size() - 1);

  SliceSpec spec;
  spec.dividing_points.reserve(static_cast<std::size_t>(R - 1));
  for (int l = 1; l < R; ++l) {
    const double h = last * static_cast<double>(l) / static_cast<double>(R);
    const auto lower = static_cast<std::size_t>(std::floor(h));
    const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lower);
    spec.dividing_points.push_back(sorted[lower] + frac * (sorted[upper] - sorted[lower]));
  }
  for (std::size_t l = 1; l < spec.dividing_points.size(); ++l) {
    if (!(spec.dividing_points[l] > spec.dividing_points[l - 1])) {
      throw Error(ErrorKind::DegenerateSlicing, "dividing points are not strictly increasing");
    }
  }
  if (!(spec.dividing_points.back() < sorted.back())) {
    throw Error(ErrorKind::DegenerateSlicing, "top slice is empty");
  }
  return spec;
}

SliceSpec default_slices(std::span<const double> responses, int R) {
  const bool binary = !responses.empty() && std::all_of(responses.begin(), responses.end(),
                                                        [](double v) { return v == 1.0 || v == -1.0; });
  // a single class cannot be sliced; let the quantile rule report it
  const bool both = std::find(responses.begin(), responses.end(), 1.0) != responses.end() &&
                    std::find(responses.begin(), responses.end(), -1.0) != responses.end();
  if (binary && both) return SliceSpec{{0.0}};
  return dividing_points(responses, R);
}

Labels sliced_labels(std::span<const double> responses, double q) {
  Labels labels(responses.size());
  std::transform(responses.begin(), responses.end(), labels.begin(),
                 [q](double y) { return sliced_label(y, q); });
  return labels;
}

WeightSpec weight_grid(int R) {
  if (R < 1) throw Error(ErrorKind::InvalidArgument, "weight grid needs R >= 1");
  WeightSpec spec;
  for (int l = 1; l <= R; ++l) spec.weights.push_back(static_cast<double>(l) / (R + 1));
  return spec;
}

SymMatrix candidate_matrix(std::span<const DirectionEstimate> directions) {
  if (directions.empty()) throw Error(ErrorKind::InvalidArgument, "no directions");
  const Eigen::Index p = directions.front().psi.size();
  Matrix m = Matrix::Zero(p, p);
  for (const auto& d : directions) {
    if (d.psi.size() != p) throw Error(ErrorKind::DimensionMismatch, "direction lengths differ");
    m.noalias() += d.psi * d.psi.transpose();
  }
  return SymMatrix(m);
}

Subspace central_subspace(const SymMatrix& M, int d) {
  if (d < 1 || d > M.dim()) {
    throw Error(ErrorKind::InvalidArgument, "structural dimension out of range");
  }
  EigenDecomposition eig = sym_eigen(M);
  return {eig.vectors.leftCols(d), std::move(eig.values)};
}

double default_lambda(Eigen::Index sample_size) {
  return 2.0 * std::pow(static_cast<double>(sample_size), 2.0 / 3.0);
}

Labels binary_labels(std::span<const double> responses) {
  Labels labels(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (responses[i] == 1.0) {
      labels[i] = 1;
    } else if (responses[i] == -1.0) {
      labels[i] = -1;
    } else {
      throw Error(ErrorKind::InvalidArgument, "weighted variant needs a response in {-1, +1}");
    }
  }
  return labels;
}

std::vector<DirectionEstimate> fit_directions(const Matrix& x, std::span<const double> y,
                                              const FitOptions& options) {
  if (x.rows() == 0) throw Error(ErrorKind::EmptyData, "no observations");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorKind::DimensionMismatch, "response length does not match predictors");
  }
  const Vector mu = sample_mean(x);
  const SymMatrix sigma = sample_covariance(x, mu);
  SolverConfig solver = options.solver;
  solver.lambda = options.lambda > 0 ? options.lambda : default_lambda(x.rows());

  std::vector<DirectionEstimate> directions;
  if (options.variant == Variant::Psvm) {
    const SliceSpec slices = options.slices ? *options.slices : default_slices(y, options.R);
    for (std::size_t l = 0; l < slices.dividing_points.size(); ++l) {
      const Labels labels = sliced_labels(y, slices.dividing_points[l]);
      DirectionEstimate dir = psvm_direction(x, labels, mu, sigma, solver);
      dir.slice_index = static_cast<int>(l);
      directions.push_back(std::move(dir));
    }
  } else {
    const Labels labels = binary_labels(y);
    const WeightSpec grid = weight_grid(options.R);
    for (std::size_t l = 0; l < grid.weights.size(); ++l) {
      DirectionEstimate dir = wpsvm_direction(x, labels, mu, sigma, solver, grid.weights[l]);
      dir.slice_index = static_cast<int>(l);
      directions.push_back(std::move(dir));
    }
  }
  return directions;
}

SdrFit fit_full(const Dataset& data, const FitOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  SdrFit fit;
  fit.variant = options.variant;
  fit.engine = Engine::Full;
  fit.directions = fit_directions(data.x, as_span(data.y), options);
  fit.M = candidate_matrix(fit.directions);
  Subspace sub = central_subspace(fit.M, options.d);
  fit.V = std::move(sub.V);
  fit.eigenvalues = std::move(sub.eigenvalues);
  fit.timing_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fit.critical_path_seconds = fit.timing_seconds;
  return fit;
}

}  // namespace dsdr
