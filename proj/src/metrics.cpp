#include "dsdr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dsdr/error.hpp"

namespace dsdr {

namespace {

Matrix projector(const Matrix& a) {
  if (a.cols() == 0 || a.rows() < a.cols()) {
    throw Error(ErrorKind::RankDeficient, "basis must have 1 <= d <= p columns");
  }
  if (!all_finite(a)) throw Error(ErrorKind::NonFinite, "basis has non-finite entries");
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < a.cols()) throw Error(ErrorKind::RankDeficient, "basis columns are dependent");
  const Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  return q * q.transpose();
}

}  // namespace

double projection_distance(const Matrix& v1, const Matrix& v2) {
  if (v1.rows() != v2.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "bases live in different dimensions");
  }
  return (projector(v1) - projector(v2)).norm();
}

double distance_correlation(std::span<const double> y, const Matrix& z) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "distance correlation needs n >= 2");
  if (z.rows() != n) throw Error(ErrorKind::DimensionMismatch, "y and z lengths differ");

  auto dy = [&](Eigen::Index i, Eigen::Index j) { return std::abs(y[i] - y[j]); };
  auto dz = [&](Eigen::Index i, Eigen::Index j) { return (z.row(i) - z.row(j)).norm(); };

  // pass 1: row means of both distance matrices
  Vector ra = Vector::Zero(n);
  Vector rb = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = dy(i, j);
      const double b = dz(i, j);
      ra(i) += a;
      ra(j) += a;
      rb(i) += b;
      rb(j) += b;
    }
  }
  ra /= static_cast<double>(n);
  rb /= static_cast<double>(n);
  const double ga = ra.mean();
  const double gb = rb.mean();

  // pass 2: sums of products of the double-centred entries
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = dy(i, j) - ra(i) - ra(j) + ga;
      const double b = dz(i, j) - rb(i) - rb(j) + gb;
      ab += a * b;
      aa += a * a;
      bb += b * b;
    }
  }
  if (!(aa > 0) || !(bb > 0)) {
    throw Error(ErrorKind::ZeroDistanceVariance, "distance variance is zero (constant input)");
  }
  const double r2 = ab / std::sqrt(aa * bb);
  return std::sqrt(std::max(r2, 0.0));
}

double log_log_slope(std::span<const double> sizes, std::span<const double> values) {
  if (sizes.size() != values.size() || sizes.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "slope needs >= 2 matching points");
  }
  const auto k = static_cast<double>(sizes.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(sizes[i] > 0) || !(values[i] > 0)) {
      throw Error(ErrorKind::InvalidArgument, "slope needs positive sizes and values");
    }
    sx += std::log(sizes[i]);
    sy += std::log(values[i]);
  }
  const double mx = sx / k, my = sy / k;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double dx = std::log(sizes[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0)) throw Error(ErrorKind::InvalidArgument, "sizes must not all be equal");
  return sxy / sxx;
}

}  // namespace dsdr
