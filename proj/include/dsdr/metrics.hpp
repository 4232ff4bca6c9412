#pragma once

#include <span>

#include "dsdr/linalg.hpp"

namespace dsdr {

/// ||P1 - P2||_F with P = A (A^T A)^{-1} A^T. Throws RankDeficient if either
/// basis has dependent columns.
double projection_distance(const Matrix& v1, const Matrix& v2);

/// Sample distance correlation (V-statistic form) between y and the rows of z.
/// O(n^2) time, O(n) memory. Throws ZeroDistanceVariance when either argument
/// is constant.
double distance_correlation(std::span<const double> y, const Matrix& z);

/// Least-squares slope of log(values) on log(sizes).
double log_log_slope(std::span<const double> sizes, std::span<const double> values);

}  // namespace dsdr
