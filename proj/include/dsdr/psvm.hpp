#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsdr/linalg.hpp"
#include "dsdr/svm_solver.hpp"

namespace dsdr {

/// Observations stored row-wise: x is n x p, y has n entries.
struct Dataset {
  Matrix x;
  Vector y;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
};

/// Dividing points q_1 < ... < q_{R-1} that turn a response into R - 1 binary labels.
struct SliceSpec {
  std::vector<double> dividing_points;
  int R() const { return static_cast<int>(dividing_points.size()) + 1; }
};

/// Class weights pi_1 < ... < pi_R, each strictly inside (0, 1).
struct WeightSpec {
  std::vector<double> weights;
};

enum class Variant { Psvm, Wpsvm };
enum class Engine { Full, Naive, Refined };

struct SdrFit {
  SymMatrix M;
  Matrix V;            // p x d
  Vector eigenvalues;  // all p, non-increasing
  std::vector<DirectionEstimate> directions;
  Variant variant = Variant::Psvm;
  Engine engine = Engine::Full;
  double timing_seconds = 0.0;
  /// For the distributed engines: slowest worker per round plus coordinator
  /// work, i.e. the time if workers ran in parallel. Equals timing_seconds
  /// for the full engine.
  double critical_path_seconds = 0.0;
  /// Batches dropped by the naive engine because they could not be sliced.
  int skipped_batches = 0;
  std::vector<std::string> warnings;
};

/// Linear-interpolation quantiles at levels l / R, l = 1..R-1.
/// Throws DegenerateSlicing when the points are not strictly increasing or the
/// top slice would be empty (e.g. constant or heavily tied responses).
SliceSpec dividing_points(std::span<const double> responses, int R);

/// Slicing used when none is supplied: a response taking only the values
/// -1 and +1 (both present) gets the single dividing point 0 (quantiles of a binary variable
/// are tied); anything else gets dividing_points(responses, R).
SliceSpec default_slices(std::span<const double> responses, int R);

/// +1 iff y > q; the boundary y == q goes to the lower slice.
constexpr int sliced_label(double y, double q) { return y > q ? 1 : -1; }

Labels sliced_labels(std::span<const double> responses, double q);

/// Interior grid pi_l = l / (R + 1), l = 1..R.
WeightSpec weight_grid(int R);

/// sum_l psi_l psi_l^T. Throws if the list is empty or lengths disagree.
SymMatrix candidate_matrix(std::span<const DirectionEstimate> directions);

struct Subspace {
  Matrix V;
  Vector eigenvalues;
};

/// Top-d eigenvectors of M under the sym_eigen ordering and sign conventions.
Subspace central_subspace(const SymMatrix& M, int d);

struct FitOptions {
  /// Number of slices (PSVM) or weights (WPSVM).
  int R = 5;
  int d = 2;
  /// Cost; non-positive selects 2 n^{2/3}.
  double lambda = 0.0;
  Variant variant = Variant::Psvm;
  SolverConfig solver;
  /// PSVM only: use these dividing points instead of empirical quantiles.
  std::optional<SliceSpec> slices;
};

double default_lambda(Eigen::Index sample_size);

/// Fits R - 1 slice problems (PSVM) or R weighted problems on a +-1 response
/// (WPSVM) using the mean and covariance of `x`, then extracts the subspace.
/// Returns only directions and M; `fit_full` adds the subspace and timing.
std::vector<DirectionEstimate> fit_directions(const Matrix& x, std::span<const double> y,
                                              const FitOptions& options);

SdrFit fit_full(const Dataset& data, const FitOptions& options);

/// Checks that every response is exactly +1 or -1 and returns them as labels.
Labels binary_labels(std::span<const double> responses);

std::span<const double> as_span(const Vector& v);

}  // namespace dsdr
