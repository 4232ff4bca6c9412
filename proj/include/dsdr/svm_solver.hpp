#pragma once

#include <span>
#include <vector>

#include "dsdr/linalg.hpp"

namespace dsdr {

/// One fitted principal SVM: normal psi, intercept t, and the exact hinge
/// objective at (psi, t). The margin of observation x is psi^T (x - mu) - t.
struct DirectionEstimate {
  Vector psi;
  double t = 0.0;
  double objective_value = 0.0;
  int slice_index = 0;
  /// Set when the labels contain a single class; psi is then zero.
  bool degenerate = false;
  /// Total coordinate-descent passes spent (diagnostic only).
  long passes = 0;
};

struct SolverConfig {
  double lambda = 1.0;
  /// Per inner solve; 0 means max(1000, 10 m).
  long max_passes = 0;
  double kkt_tol = 1e-6;
  /// Whitening ridge; negative selects default_ridge(Sigma).
  double ridge = -1.0;
};

using Labels = std::vector<int>;

/// psi^T Sigma psi + lambda / n * sum_i w_i [1 - y_i (psi^T (x_i - mu) - t)]_+.
/// Empty weights mean w_i = 1.
double hinge_objective(const DirectionEstimate& theta, const Matrix& data,
                       std::span<const int> labels, const Vector& mu, const SymMatrix& sigma,
                       double lambda, std::span<const double> weights = {});

/// Same as hinge_objective with the hinge replaced by K_h(u) = u H(u / h).
double smoothed_objective(const DirectionEstimate& theta, const Matrix& data,
                          std::span<const int> labels, const Vector& mu, const SymMatrix& sigma,
                          double lambda, double h, std::span<const double> weights = {});

/// Minimizes hinge_objective over (psi, t).
///
/// The problem is whitened with eta = (Sigma + ridge I)^{1/2} psi, which turns
/// it into a soft-margin linear SVM with an unpenalized intercept and cost
/// lambda / (2 m). For a fixed intercept the SVM dual has only box
/// constraints and is solved by dual coordinate descent; the intercept is then
/// found by a bracketed root search on the derivative of the (convex) profile
/// objective, and finally polished exactly for the returned normal.
///
/// Labels from a single class yield psi = 0 with degenerate = true.
DirectionEstimate psvm_direction(const Matrix& data, std::span<const int> labels,
                                 const Vector& mu, const SymMatrix& sigma,
                                 const SolverConfig& config);

/// Weighted variant with w = 1 - pi for label +1 and pi for label -1.
DirectionEstimate wpsvm_direction(const Matrix& data, std::span<const int> labels,
                                  const Vector& mu, const SymMatrix& sigma,
                                  const SolverConfig& config, double pi);

/// General per-row weighted solve (weights >= 0); the engine behind both of the above.
DirectionEstimate weighted_svm_direction(const Matrix& data, std::span<const int> labels,
                                         const Vector& mu, const SymMatrix& sigma,
                                         const SolverConfig& config,
                                         std::span<const double> weights);

/// Row weights w_pi(y) for the weighted objective. Throws if pi is outside (0, 1).
std::vector<double> class_weights(std::span<const int> labels, double pi);

struct GridSpec {
  double lower = -3.0;
  double upper = 3.0;
  double step = 1e-3;
};

/// Minimum of hinge_objective over the grid [lower, upper]^(p + 1) with the
/// given step. Every psi grid point is visited; along t only the two grid
/// points around the continuous minimizer are evaluated, which by convexity
/// gives the same minimum as a full scan. Test oracle only; throws
/// OracleTooLarge for p > 2.
DirectionEstimate brute_force_oracle(const Matrix& data, std::span<const int> labels,
                                     const Vector& mu, const SymMatrix& sigma, double lambda,
                                     std::span<const double> weights, const GridSpec& grid);

}  // namespace dsdr
