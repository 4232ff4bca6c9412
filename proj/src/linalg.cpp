#include "dsdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dsdr/error.hpp"

namespace dsdr {

SymMatrix::SymMatrix(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "SymMatrix requires a square matrix");
  }
  m_ = 0.5 * (a + a.transpose());
}

SymMatrix SymMatrix::zero(Eigen::Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::identity(Eigen::Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  if (other.dim() != dim()) {
    throw Error(ErrorKind::DimensionMismatch, "SymMatrix sum of different sizes");
  }
  // Sum of two exactly symmetric matrices stays exactly symmetric.
  m_ += other.m_;
  return *this;
}

SymMatrix operator*(double s, const SymMatrix& a) {
  SymMatrix out = a;
  out.m_ *= s;
  return out;
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

Vector sample_mean(const Matrix& data) {
  if (data.rows() == 0) {
    throw Error(ErrorKind::EmptyData, "sample_mean of an empty data matrix");
  }
  Vector mean = Vector::Zero(data.cols());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    mean += data.row(i).transpose();
  }
  return mean / static_cast<double>(data.rows());
}

SymMatrix sample_covariance(const Matrix& data, const Vector& mean) {
  if (data.rows() == 0) {
    throw Error(ErrorKind::EmptyData, "sample_covariance of an empty data matrix");
  }
  if (mean.size() != data.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "mean length does not match data columns");
  }
  const Matrix centered = data.rowwise() - mean.transpose();
  Matrix cov = Matrix::Zero(data.cols(), data.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return SymMatrix(cov / static_cast<double>(data.rows()));
}

namespace {

Eigen::Index argmax_abs(const Eigen::Ref<const Vector>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  return best;
}

}  // namespace

EigenDecomposition sym_eigen(const SymMatrix& a) {
  if (!all_finite(a.dense())) {
    throw Error(ErrorKind::NonFinite, "sym_eigen input has non-finite entries");
  }
  const Eigen::Index dim = a.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.dense());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFinite, "symmetric eigensolver did not converge");
  }
  const Vector& raw_values = solver.eigenvalues();
  Matrix raw_vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return raw_values(x) > raw_values(y); });

  EigenDecomposition out{Vector(dim), Matrix(dim, dim)};
  for (Eigen::Index j = 0; j < dim; ++j) {
    out.values(j) = raw_values(order[j]);
    out.vectors.col(j) = raw_vectors.col(order[j]);
  }

  // A run of numerically equal eigenvalues only determines a subspace, and the
  // solver's basis for it is arbitrary. Replace it by a canonical one: repeatedly
  // take the coordinate axis with the largest projection onto what is left of
  // the subspace (lowest index on ties) and normalize that projection.
  const double scale = std::max(1.0, raw_values.cwiseAbs().maxCoeff());
  const double tie_tol = 1e-12 * scale;
  Eigen::Index start = 0;
  while (start < dim) {
    Eigen::Index stop = start + 1;
    while (stop < dim && out.values(stop - 1) - out.values(stop) <= tie_tol) ++stop;
    const Eigen::Index width = stop - start;
    if (width > 1) {
      Matrix rest = out.vectors.middleCols(start, width);  // orthonormal basis of what is left
      for (Eigen::Index c = 0; c < width; ++c) {
        // squared projection norm of e_i onto span(rest) is the squared row norm
        const Vector norms = rest.rowwise().squaredNorm();
        const double best = norms.maxCoeff();
        Eigen::Index axis = 0;
        while (norms(axis) < best * (1.0 - 1e-9)) ++axis;
        Vector coeff = rest.row(axis).transpose();
        coeff.normalize();
        out.vectors.col(start + c) = rest * coeff;
        // drop the chosen direction: complete coeff to an orthonormal basis
        Matrix basis = Matrix::Identity(rest.cols(), rest.cols());
        basis.col(0) = coeff;
        Eigen::HouseholderQR<Matrix> qr(basis);
        const Matrix q = qr.householderQ();
        rest = (rest * q).rightCols(rest.cols() - 1).eval();
      }
    }
    start = stop;
  }

  for (Eigen::Index j = 0; j < dim; ++j) {
    const Eigen::Index p = argmax_abs(out.vectors.col(j));
    if (out.vectors(p, j) < 0) out.vectors.col(j) *= -1.0;
  }
  return out;
}

Whitening whitening_transform(const SymMatrix& sigma, double ridge) {
  if (ridge < 0) {
    throw Error(ErrorKind::InvalidArgument, "whitening ridge must be non-negative");
  }
  const Eigen::Index p = sigma.dim();
  const SymMatrix regularized(sigma.dense() + ridge * Matrix::Identity(p, p));
  const EigenDecomposition eig = sym_eigen(regularized);
  if (eig.values.minCoeff() <= 0.0) {
    throw Error(ErrorKind::SingularCovariance,
                "covariance plus ridge has a non-positive eigenvalue");
  }
  const Vector root = eig.values.array().sqrt();
  Matrix forward = eig.vectors * root.cwiseInverse().asDiagonal() * eig.vectors.transpose();
  Matrix inverse = eig.vectors * root.asDiagonal() * eig.vectors.transpose();
  return {SymMatrix(forward).dense(), SymMatrix(inverse).dense()};
}

double default_ridge(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  return 1e-8 * std::abs(a.trace()) / static_cast<double>(a.rows());
}

Vector solve_linear_system(const Matrix& a, const Vector& b, double ridge) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "solve_linear_system needs square A matching b");
  }
  if (ridge < 0) {
    throw Error(ErrorKind::InvalidArgument, "ridge must be non-negative");
  }
  if (!all_finite(a) || !b.allFinite()) {
    throw Error(ErrorKind::NonFinite, "solve_linear_system input has non-finite entries");
  }
  const Matrix system = a + ridge * Matrix::Identity(a.rows(), a.cols());
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::SingularSystem, "linear system is numerically singular");
  }
  Vector x = lu.solve(b);
  const double residual = (system * x - b).norm();
  const double bound = 1e-8 * (system.norm() * x.norm() + b.norm());
  if (!x.allFinite() || residual > bound) {
    throw Error(ErrorKind::SingularSystem, "linear solve failed the residual check");
  }
  return x;
}

}  // namespace dsdr
