#pragma once

#include <Eigen/Dense>

namespace dsdr {

using Vector = Eigen::VectorXd;
/// Column-major dense matrix. Data matrices are n x p with one observation per row.
using Matrix = Eigen::MatrixXd;

/// Square matrix whose storage is exactly symmetric.
///
/// Construction from an arbitrary square matrix symmetrizes it as
/// (A + A^T) / 2, so entries (i, j) and (j, i) are always bit-identical.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& a);

  static SymMatrix zero(Eigen::Index dim);
  static SymMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Matrix& dense() const { return m_; }
  double trace() const { return m_.trace(); }

  SymMatrix& operator+=(const SymMatrix& other);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator*(double s, const SymMatrix& a);

 private:
  Matrix m_;
};

struct EigenDecomposition {
  Vector values;   // non-increasing
  Matrix vectors;  // columns orthonormal, largest-|entry| of each column positive
};

/// Column means of an n x p data matrix. Throws EmptyData when n == 0.
Vector sample_mean(const Matrix& data);

/// Covariance with divisor n (population form, matching the sample-average operator).
SymMatrix sample_covariance(const Matrix& data, const Vector& mean);

/// Full symmetric eigendecomposition with deterministic order and signs.
///
/// Eigenvalues are sorted in non-increasing order. For a run of eigenvalues that
/// agree to within 1e-12 relative, the eigenspace gets a canonical basis that
/// does not depend on the solver: greedily take the coordinate axis with the
/// largest projection onto the remaining subspace (lowest index on ties), so
/// e.g. the identity yields e1, e2, ... Each eigenvector is signed so its
/// largest-magnitude entry is positive (lowest index wins on magnitude ties).
EigenDecomposition sym_eigen(const SymMatrix& a);

struct Whitening {
  Matrix forward;  // (Sigma + ridge I)^{-1/2}
  Matrix inverse;  // (Sigma + ridge I)^{+1/2}
};

Whitening whitening_transform(const SymMatrix& sigma, double ridge);

/// Solves (A + ridge I) x = b. Throws SingularSystem if the regularized system
/// is numerically singular or the residual check fails.
Vector solve_linear_system(const Matrix& a, const Vector& b, double ridge);

/// Scale-aware ridge 1e-8 * trace(A) / dim used when the caller asks for the default.
double default_ridge(const Matrix& a);

bool all_finite(const Matrix& a);

}  // namespace dsdr
