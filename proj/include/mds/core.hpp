#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mds/errors.hpp"

namespace mds {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace detail {

inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double max_asymmetry(const Matrix& a) {
  return max_abs(a - a.transpose());
}

// Sums f(i, j) over the unordered pairs i > j (lower triangle).  All stress
// quantities are pair sums, so keeping a single traversal order here makes
// results reproducible down to the last bit.
template <typename F>
double pair_sum(Index n, F&& f) {
  double acc = 0.0;
  for (Index i = 1; i < n; ++i)
    for (Index j = 0; j < i; ++j) acc += f(i, j);
  return acc;
}

// Accumulates sum_{i>j} c(i,j) * A_ij where A_ij is the Laplacian of the
// single edge {i,j}: +1 at (i,i) and (j,j), -1 at (i,j) and (j,i).  Every
// structural matrix in this library (V, B, M, and their combinations) has
// this form, which also makes zero row sums automatic.
template <typename F>
Matrix edge_laplacian(Index n, F&& coeff) {
  Matrix out = Matrix::Zero(n, n);
  for (Index i = 1; i < n; ++i)
    for (Index j = 0; j < i; ++j) {
      double c = coeff(i, j);
      if (c == 0.0) continue;
      out(i, j) -= c;
      out(j, i) -= c;
      out(i, i) += c;
      out(j, j) += c;
    }
  return out;
}

// Distances below this floor count as zero: the ratios delta/d and 1/d that
// drive B and M blow up there, so those pairs are dropped from the sums.
inline double distance_floor(const Matrix& d) {
  double dmax = max_abs(d);
  return 1e-12 * (dmax > 0.0 ? dmax : 1.0);
}

}  // namespace detail

// Symmetric hollow matrix of target dissimilarities, n >= 3.
class DissimilarityMatrix {
 public:
  static DissimilarityMatrix from_matrix(Matrix values) {
    const Index n = values.rows();
    if (n < 3 || values.cols() != n)
      fail(ErrorCode::InvalidArgument,
           "dissimilarity matrix must be square with at least 3 rows, got " +
               std::to_string(n) + "x" + std::to_string(values.cols()));
    const double scale = std::max(1.0, detail::max_abs(values));
    if (detail::max_asymmetry(values) > 1e-12 * scale)
      fail(ErrorCode::AsymmetricInput, "dissimilarities must be symmetric");
    for (Index i = 0; i < n; ++i) {
      if (values(i, i) != 0.0)
        fail(ErrorCode::InvalidArgument, "dissimilarity diagonal must be zero");
      for (Index j = 0; j < i; ++j)
        if (values(i, j) < 0.0)
          fail(ErrorCode::InvalidArgument, "dissimilarities must be nonnegative");
    }
    return DissimilarityMatrix(std::move(values));
  }

  const Matrix& values() const { return values_; }
  Index order() const { return values_.rows(); }

 private:
  explicit DissimilarityMatrix(Matrix v) : values_(std::move(v)) {}
  Matrix values_;
};

class WeightMatrix;
inline WeightMatrix normalize_weights(const Matrix& raw);

// Symmetric nonnegative weights, normalized so the pair sum over the lower
// triangle equals one, with a connected positive-weight graph.  Only
// normalize_weights can construct one, so holding a WeightMatrix is proof
// that all of that has been checked.
class WeightMatrix {
 public:
  const Matrix& values() const { return values_; }
  Index order() const { return values_.rows(); }

  static WeightMatrix equal(Index n) {
    Matrix w = Matrix::Ones(n, n);
    w.diagonal().setZero();
    return normalize_weights(w);
  }

  friend WeightMatrix normalize_weights(const Matrix& raw);

 private:
  explicit WeightMatrix(Matrix v) : values_(std::move(v)) {}
  Matrix values_;
};

// Validates a raw weight matrix and rescales it so sum_{i>j} w_ij = 1.
inline WeightMatrix normalize_weights(const Matrix& raw) {
  const Index n = raw.rows();
  if (n < 3 || raw.cols() != n)
    fail(ErrorCode::InvalidArgument,
         "weight matrix must be square with at least 3 rows, got " +
             std::to_string(n) + "x" + std::to_string(raw.cols()));
  const double scale = std::max(1.0, detail::max_abs(raw));
  if (detail::max_asymmetry(raw) > 1e-12 * scale)
    fail(ErrorCode::AsymmetricInput, "weights must be symmetric");
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j)
      if (raw(i, j) < 0.0) fail(ErrorCode::NegativeWeight, "weights must be nonnegative");

  const double total = detail::pair_sum(n, [&](Index i, Index j) { return raw(i, j); });
  if (total <= 0.0) fail(ErrorCode::AllZeroWeights, "all pair weights are zero");

  // Connectivity of the positive-weight graph; without it the centered
  // systems solved later are singular beyond the usual translation nullspace.
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::vector<Index> stack = {0};
  seen[0] = 1;
  while (!stack.empty()) {
    Index i = stack.back();
    stack.pop_back();
    for (Index j = 0; j < n; ++j)
      if (j != i && !seen[static_cast<size_t>(j)] && raw(i, j) > 0.0) {
        seen[static_cast<size_t>(j)] = 1;
        stack.push_back(j);
      }
  }
  for (Index i = 0; i < n; ++i)
    if (!seen[static_cast<size_t>(i)])
      fail(ErrorCode::DisconnectedWeightGraph,
           "positive-weight graph is disconnected (object " + std::to_string(i) +
               " unreachable from object 0)");

  Matrix w = raw / total;
  w.diagonal().setZero();
  return WeightMatrix(std::move(w));
}

// An n x p coordinate matrix, one object per row.
struct Configuration {
  Matrix coords;

  Configuration() = default;
  explicit Configuration(Matrix c) : coords(std::move(c)) {
    const Index n = coords.rows(), p = coords.cols();
    if (n < 1 || p < 1 || p > n - 1)
      fail(ErrorCode::InvalidArgument,
           "configuration must be n x p with 1 <= p <= n-1, got " + std::to_string(n) +
               "x" + std::to_string(p));
  }

  Index point_count() const { return coords.rows(); }
  Index dim_count() const { return coords.cols(); }
};

// Pairwise Euclidean distances between configuration rows.
inline Matrix compute_distances(const Configuration& x) {
  const Index n = x.point_count();
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 1; i < n; ++i)
    for (Index j = 0; j < i; ++j) {
      double dij = (x.coords.row(i) - x.coords.row(j)).norm();
      d(i, j) = dij;
      d(j, i) = dij;
    }
  return d;
}

namespace detail {

// The five pair sums every loss function is built from.  With weights
// normalized to sum one, d_bar is the weighted mean distance and eta2_sq the
// weighted variance of the distances.
struct StressTerms {
  double sigma_raw;     // sum w (delta - d)^2
  double eta1_sq;       // sum w d^2
  double eta2_sq;       // sum w (d - d_bar)^2
  double eta_delta_sq;  // sum w delta^2
  double d_bar;         // sum w d
};

inline StressTerms stress_terms(const Matrix& delta, const Matrix& w, const Matrix& d) {
  const Index n = delta.rows();
  StressTerms t{};
  t.d_bar = pair_sum(n, [&](Index i, Index j) { return w(i, j) * d(i, j); });
  t.sigma_raw = pair_sum(n, [&](Index i, Index j) {
    double r = delta(i, j) - d(i, j);
    return w(i, j) * r * r;
  });
  t.eta1_sq = pair_sum(n, [&](Index i, Index j) { return w(i, j) * d(i, j) * d(i, j); });
  t.eta2_sq = pair_sum(n, [&](Index i, Index j) {
    double r = d(i, j) - t.d_bar;
    return w(i, j) * r * r;
  });
  t.eta_delta_sq =
      pair_sum(n, [&](Index i, Index j) { return w(i, j) * delta(i, j) * delta(i, j); });
  return t;
}

}  // namespace detail

// Loss values for one configuration.  sigma2 divides the raw stress by the
// weighted variance of the distances, which is what makes it immune to the
// shrinking trick that plagues sigma1: scaling X down cannot fake progress
// because numerator and denominator shrink together.
struct StressReport {
  double sigma_raw;     // sum w (delta - d)^2
  double sigma1;        // sigma_raw / eta1_sq
  double sigma2;        // sigma_raw / eta2_sq
  double eta1_sq;       // sum w d^2
  double eta2_sq;       // sum w (d - d_bar)^2
  double eta_delta_sq;  // sum w delta^2
  double d_bar;         // sum w d
};

namespace detail {

inline StressReport make_report(const StressTerms& t) {
  // All distances (nearly) equal makes the variance denominator vanish; the
  // ratio loss is simply not defined at such configurations.
  if (t.eta2_sq <= 1e-20 * std::max(t.eta1_sq, 1e-300))
    fail(ErrorCode::DegenerateDenominator,
         "weighted distance variance vanishes (all distances equal)");
  StressReport r{};
  r.sigma_raw = t.sigma_raw;
  r.eta1_sq = t.eta1_sq;
  r.eta2_sq = t.eta2_sq;
  r.eta_delta_sq = t.eta_delta_sq;
  r.d_bar = t.d_bar;
  r.sigma1 = t.sigma_raw / t.eta1_sq;
  r.sigma2 = t.sigma_raw / t.eta2_sq;
  return r;
}

}  // namespace detail

inline StressReport stress_report(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                  const Configuration& x) {
  if (delta.order() != w.order() || delta.order() != x.point_count())
    fail(ErrorCode::InvalidArgument, "dissimilarity, weight, and configuration sizes differ");
  return detail::make_report(
      detail::stress_terms(delta.values(), w.values(), compute_distances(x)));
}

namespace detail {

// V = sum w_ij A_ij: the weight Laplacian.  tr X'VX = sum w d^2.
inline Matrix weight_laplacian(const Matrix& w) {
  return edge_laplacian(w.rows(), [&](Index i, Index j) { return w(i, j); });
}

// B(X) = sum' (w delta / d) A_ij, skipping pairs at or below the distance
// floor.  tr X'B(X)X = sum' w delta d, the cross term of the raw stress.
inline Matrix b_matrix(const Matrix& delta, const Matrix& w, const Matrix& d,
                       Index* skipped = nullptr) {
  const double floor = distance_floor(d);
  Index skips = 0;
  Matrix b = edge_laplacian(d.rows(), [&](Index i, Index j) {
    if (d(i, j) <= floor) {
      if (w(i, j) > 0.0) ++skips;
      return 0.0;
    }
    return w(i, j) * delta(i, j) / d(i, j);
  });
  if (skipped) *skipped = skips;
  return b;
}

// M(X) = d_bar(X) * sum' (w / d) A_ij.  tr X'M(X)X = d_bar(X)^2 at X itself,
// and tr X'M(Y)X majorizes -d_bar(X)^2 in the sign convention used below.
inline Matrix m_matrix(const Matrix& w, const Matrix& d, double d_bar,
                       Index* skipped = nullptr) {
  const double floor = distance_floor(d);
  Index skips = 0;
  Matrix m = edge_laplacian(d.rows(), [&](Index i, Index j) {
    if (d(i, j) <= floor) {
      if (w(i, j) > 0.0) ++skips;
      return 0.0;
    }
    return d_bar * w(i, j) / d(i, j);
  });
  if (skipped) *skipped = skips;
  return m;
}

}  // namespace detail

inline Matrix compute_V(const WeightMatrix& w) {
  return detail::weight_laplacian(w.values());
}

inline Matrix compute_B(const DissimilarityMatrix& delta, const WeightMatrix& w,
                        const Configuration& x) {
  return detail::b_matrix(delta.values(), w.values(), compute_distances(x));
}

inline Matrix compute_M(const WeightMatrix& w, const Configuration& x) {
  const Matrix d = compute_distances(x);
  const double d_bar = detail::pair_sum(
      w.order(), [&](Index i, Index j) { return w.values()(i, j) * d(i, j); });
  return detail::m_matrix(w.values(), d, d_bar);
}

// omega(X, Y) = sigma_raw(X) - sigma2(Y) * eta2_sq(X).  Its sign compares X
// against Y on the ratio loss: omega < 0 forces sigma2(X) < sigma2(Y), and
// omega(X, X) = 0.  Driving omega below zero is how the solver turns the
// fractional objective into a sequence of tractable subproblems.
inline double omega(const DissimilarityMatrix& delta, const WeightMatrix& w,
                    const Configuration& x, const Configuration& y) {
  const StressReport at_y = stress_report(delta, w, y);
  const auto at_x =
      detail::stress_terms(delta.values(), w.values(), compute_distances(x));
  return at_x.sigma_raw - at_y.sigma2 * at_x.eta2_sq;
}

// xi(X, Y) majorizes omega(X, Y) in X with equality at X = Y: a quadratic
//   eta_delta_sq + (1 - sigma2(Y)) tr X'VX - 2 tr X'B(Y)Y + sigma2(Y) tr X'M(Y)X
// built from two bounds: tr X'B(X)X >= tr X'B(Y)Y (Cauchy-Schwarz on the
// cross term) and tr X'M(X)X <= tr X'M(Y)X (arithmetic-geometric mean on
// the squared mean distance).
inline double xi(const DissimilarityMatrix& delta, const WeightMatrix& w,
                 const Configuration& x, const Configuration& y) {
  const StressReport at_y = stress_report(delta, w, y);
  const Matrix v = compute_V(w);
  const Matrix b = compute_B(delta, w, y);
  const Matrix m = compute_M(w, y);
  const double tr_xvx = (v * x.coords).cwiseProduct(x.coords).sum();
  const double tr_xby = (b * y.coords).cwiseProduct(x.coords).sum();
  const double tr_xmx = (m * x.coords).cwiseProduct(x.coords).sum();
  return at_y.eta_delta_sq + (1.0 - at_y.sigma2) * tr_xvx - 2.0 * tr_xby +
         at_y.sigma2 * tr_xmx;
}

}  // namespace mds
