#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "mds/core.hpp"
#include "mds/errors.hpp"

namespace mds {

// C = -1/2 J (delta o delta) J with J = I - ee'/n.  When delta holds exact
// Euclidean distances of some X, C equals the Gram matrix of the centered X.
inline Matrix double_center(const DissimilarityMatrix& delta) {
  const Index n = delta.order();
  const Matrix sq = delta.values().cwiseProduct(delta.values());
  const Vector row_means = sq.rowwise().mean();
  const double grand_mean = sq.mean();
  Matrix c(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      c(i, j) = -0.5 * (sq(i, j) - row_means(i) - row_means(j) + grand_mean);
  return c;
}

struct EigenPair {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, values(k) <-> vectors.col(k)
};

// Symmetric eigendecomposition with a deterministic presentation: eigenvalues
// sorted descending and each vector's largest-magnitude entry made positive,
// so repeated runs (and different platforms) agree on more than just spans.
inline EigenPair sym_eigen(const Matrix& s) {
  const Index n = s.rows();
  if (s.cols() != n) fail(ErrorCode::NonSquare, "eigendecomposition needs a square matrix");
  const double scale = std::max(1.0, detail::max_abs(s));
  if (detail::max_asymmetry(s) > 1e-10 * scale)
    fail(ErrorCode::NotSymmetric, "matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()));
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::SingularSystem, "eigendecomposition did not converge");

  EigenPair out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Index k = 0; k < n; ++k) {
    Index imax = 0;
    out.vectors.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.vectors(imax, k) < 0.0) out.vectors.col(k) = -out.vectors.col(k);
  }
  return out;
}

// Solves U Z = R for the centered solution Z of a positive-semidefinite U
// whose nullspace is exactly the constant vector (a connected Laplacian).
// Adding ee'/n makes U positive definite without disturbing the centered
// part, and subtracting the row means afterwards removes the component the
// regularizer introduced:  Z = (U + ee'/n)^{-1} R - ee'R/n  satisfies
// U Z = J R and e'Z = 0.
inline Matrix centered_solve(const Matrix& u, const Matrix& r) {
  const Index n = u.rows();
  if (u.cols() != n || r.rows() != n)
    fail(ErrorCode::InvalidArgument, "centered_solve size mismatch");
  Matrix a = u;
  a.array() += 1.0 / static_cast<double>(n);

  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success)
    fail(ErrorCode::SingularSystem, "factorization of the regularized system failed");
  const Vector d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  // A singular or indefinite U leaves a (near-)zero or negative pivot; the
  // regularizer only ever removes the constant-vector nullspace.
  if (dmax <= 0.0 || d.minCoeff() <= 1e-12 * dmax)
    fail(ErrorCode::SingularSystem,
         "system is singular beyond the constant-vector nullspace");

  Matrix z = ldlt.solve(r);
  z.rowwise() -= r.colwise().sum() / static_cast<double>(n);
  return z;
}

struct ProcrustesResult {
  Matrix aligned;           // s * Xc * R, the transformed centered X
  Matrix rotation;          // orthogonal R (may include a reflection)
  double dilation;          // s, 1 unless dilation was requested
  double residual;          // || s Xc R - Yc ||_F
  double relative_residual; // residual / || Yc ||_F
};

// Orthogonal Procrustes: rotate (and optionally rescale) centered X onto
// centered Y.  With K = Xc'Yc = P S Q', the minimizer over the orthogonal
// group is R = P Q', and the optimal dilation is tr S / ||Xc||^2.
inline ProcrustesResult procrustes_align(const Configuration& x, const Configuration& y,
                                         bool with_dilation = false) {
  if (x.point_count() != y.point_count() || x.dim_count() != y.dim_count())
    fail(ErrorCode::InvalidArgument, "configurations must have matching shapes");
  Matrix xc = x.coords.rowwise() - x.coords.colwise().mean();
  Matrix yc = y.coords.rowwise() - y.coords.colwise().mean();
  const double xnorm = xc.norm(), ynorm = yc.norm();

  const Matrix k = xc.transpose() * yc;
  Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  if (smax <= 1e-14 * std::max(xnorm * ynorm, 1e-300))
    fail(ErrorCode::DegenerateInput,
         "cross-covariance has rank zero; rotation is undetermined");

  ProcrustesResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.dilation = with_dilation ? svd.singularValues().sum() / (xnorm * xnorm) : 1.0;
  out.aligned = out.dilation * xc * out.rotation;
  out.residual = (out.aligned - yc).norm();
  out.relative_residual = out.residual / (ynorm > 0.0 ? ynorm : 1.0);
  return out;
}

}  // namespace mds
