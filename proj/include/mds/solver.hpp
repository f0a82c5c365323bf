#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mds/core.hpp"
#include "mds/linalg.hpp"

namespace mds {

// How the solver obtains its starting configuration.
struct InitSpec {
  enum class Kind { torgerson, random, user };
  Kind kind = Kind::torgerson;
  std::uint64_t seed = 0;
  Matrix coords;  // only for Kind::user

  static InitSpec torgerson_start() { return InitSpec{}; }
  static InitSpec random_start(std::uint64_t seed) {
    InitSpec s;
    s.kind = Kind::random;
    s.seed = seed;
    return s;
  }
  static InitSpec user_start(Matrix coords) {
    InitSpec s;
    s.kind = Kind::user;
    s.coords = std::move(coords);
    return s;
  }
};

struct SolverOptions {
  int ndim = 2;
  int itmax = 1000;
  double eps = 1e-10;
  bool allow_indefinite = false;
  InitSpec init = InitSpec::torgerson_start();
};

// One line of the iteration history: the loss before and after update itel.
struct IterationRecord {
  int itel;
  double sold;
  double snew;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

struct SolverResult {
  Configuration x;                       // final configuration, column-centered
  double stress = 0.0;                   // loss at x (sigma2 or sigma1 by solver)
  Matrix distances;                      // pairwise distances at x
  std::vector<IterationRecord> records;  // one entry per update
  int itel = 0;                          // number of updates performed
  bool converged = false;                // stopped by eps rather than itmax
  Index skipped_pairs = 0;               // pairs under the distance floor, last update
  Matrix b, m, u;                        // matrices of the last update, for diagnostics
};

// Classical metric initialization: embed the double-centered squared
// dissimilarities through their top eigenpairs.  Exact Euclidean input is
// recovered up to rotation; anything else gives the usual least-squares
// flattening that works well as a starting point.
inline Configuration torgerson_init(const DissimilarityMatrix& delta, Index p) {
  const Index n = delta.order();
  if (p < 1 || p > n - 1)
    fail(ErrorCode::InvalidArgument,
         "embedding dimension must satisfy 1 <= p <= n-1, got " + std::to_string(p));
  const EigenPair ep = sym_eigen(double_center(delta));
  const double thresh = 1e-12 * std::max(ep.values(0), 0.0);
  if (ep.values(p - 1) <= thresh) {
    Index positive = 0;
    while (positive < n && ep.values(positive) > thresh) ++positive;
    fail(ErrorCode::InsufficientPositiveEigenvalues,
         "need " + std::to_string(p) + " positive eigenvalues, found " +
             std::to_string(positive));
  }
  return Configuration(ep.vectors.leftCols(p) *
                       ep.values.head(p).cwiseSqrt().asDiagonal());
}

// Rescales X by lambda = sum(w delta d) / sum(w d^2), the multiplier that
// minimizes the raw stress over all rescalings of X.
inline Configuration initial_scale(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                   const Configuration& x) {
  const Matrix d = compute_distances(x);
  const Index n = delta.order();
  const double num = detail::pair_sum(n, [&](Index i, Index j) {
    return w.values()(i, j) * delta.values()(i, j) * d(i, j);
  });
  const double den = detail::pair_sum(
      n, [&](Index i, Index j) { return w.values()(i, j) * d(i, j) * d(i, j); });
  if (den <= 0.0)
    fail(ErrorCode::DegenerateConfiguration, "all weighted distances are zero");
  return Configuration(x.coords * (num / den));
}

namespace detail {

// Deterministic standard normals: Box-Muller over a fixed-width engine, so
// a seed produces the same start on every platform and standard library.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform() {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline Configuration initial_configuration(const DissimilarityMatrix& delta,
                                           const WeightMatrix& w, const SolverOptions& opt) {
  const Index n = delta.order();
  switch (opt.init.kind) {
    case InitSpec::Kind::torgerson:
      return initial_scale(delta, w, torgerson_init(delta, opt.ndim));
    case InitSpec::Kind::random: {
      NormalSampler normal(opt.init.seed);
      Matrix c(n, opt.ndim);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < opt.ndim; ++j) c(i, j) = normal();
      c.rowwise() -= c.colwise().mean();
      return initial_scale(delta, w, Configuration(std::move(c)));
    }
    case InitSpec::Kind::user: {
      if (opt.init.coords.rows() != n || opt.init.coords.cols() != opt.ndim)
        fail(ErrorCode::InvalidArgument,
             "supplied start must be " + std::to_string(n) + "x" +
                 std::to_string(opt.ndim));
      return Configuration(opt.init.coords);
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown initialization kind");
}

inline void check_problem(const DissimilarityMatrix& delta, const WeightMatrix& w,
                          const SolverOptions& opt) {
  if (delta.order() != w.order())
    fail(ErrorCode::InvalidArgument, "dissimilarity and weight sizes differ");
  if (opt.ndim < 1 || opt.ndim > delta.order() - 1)
    fail(ErrorCode::InvalidArgument, "ndim must satisfy 1 <= ndim <= n-1");
  if (opt.itmax < 1) fail(ErrorCode::InvalidArgument, "itmax must be positive");
  if (!(opt.eps >= 0.0)) fail(ErrorCode::InvalidArgument, "eps must be nonnegative");
}

}  // namespace detail

// One majorization update for the ratio loss, evaluated at X with its own
// sigma2 and mean distance passed in (the solver already has them).  Solves
//   [(1 - sigma2) V + sigma2 M(X)] X+ = B(X) X
// for the centered X+.  For sigma2 <= 1 the system matrix is a convex-like
// combination of two positive-semidefinite Laplacians, hence safe to solve.
inline Configuration stress2_update(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                    const Configuration& x, double sigma2, double d_bar) {
  const Matrix d = compute_distances(x);
  const Matrix b = detail::b_matrix(delta.values(), w.values(), d);
  const Matrix m = detail::m_matrix(w.values(), d, d_bar);
  const Matrix u = (1.0 - sigma2) * compute_V(w) + sigma2 * m;
  return Configuration(centered_solve(u, b * x.coords));
}

// One classical raw-stress majorization update: V X+ = B(X) X.
inline Configuration guttman_update(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                    const Configuration& x) {
  const Matrix b = compute_B(delta, w, x);
  return Configuration(centered_solve(compute_V(w), b * x.coords));
}

// Fallback move for indefinite systems: minimize the majorizer along a given
// direction Y.  xi(X + alpha Y, X) is a quadratic in alpha with curvature
// a2 = tr Y'UY and slope a1 = 2 tr Y'(U - B(X))X at alpha = 0; the step is
// only meaningful when the curvature along Y is nonnegative.
inline Configuration emergency_step(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                    const Configuration& x, const Matrix& y) {
  if (y.rows() != x.point_count() || y.cols() != x.dim_count())
    fail(ErrorCode::InvalidArgument, "direction must match the configuration shape");
  const StressReport rep = stress_report(delta, w, x);
  const Matrix d = compute_distances(x);
  const Matrix b = detail::b_matrix(delta.values(), w.values(), d);
  const Matrix m = detail::m_matrix(w.values(), d, rep.d_bar);
  const Matrix u = (1.0 - rep.sigma2) * compute_V(w) + rep.sigma2 * m;

  const double a2 = (u * y).cwiseProduct(y).sum();
  const double scale = detail::max_abs(u) * y.squaredNorm() + 1e-300;
  if (a2 < -1e-10 * scale)
    fail(ErrorCode::DirectionViolatesCondition,
         "direction has negative curvature tr Y'UY under the majorizer");
  const double a1 = 2.0 * ((u * x.coords - b * x.coords).cwiseProduct(y)).sum();

  double alpha = 0.0;
  if (a2 > 1e-14 * scale) {
    alpha = -a1 / (2.0 * a2);
  } else if (a1 != 0.0) {
    // flat curvature along y: bounded move downhill
    const double trust = x.coords.norm() / std::max(y.norm(), 1e-300);
    alpha = a1 > 0.0 ? -trust : trust;
  }
  return Configuration(x.coords + alpha * y);
}

namespace detail {

// Emergency direction: the centered downhill direction -J(U - B)X when its
// curvature under U is nonnegative, otherwise the dominant eigenvector of U
// replicated across columns (guaranteed nonnegative curvature).
inline Configuration indefinite_move(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                     const Configuration& xold, const Matrix& umat,
                                     const Matrix& bmat) {
  Matrix g = umat * xold.coords - bmat * xold.coords;
  Matrix y = -(g.rowwise() - g.colwise().mean()).eval();
  const double curv = (umat * y).cwiseProduct(y).sum();
  const double scale = max_abs(umat) * y.squaredNorm() + 1e-300;
  if (curv < -1e-10 * scale) {
    const EigenPair ep = sym_eigen(umat);
    const double root_p = std::sqrt(static_cast<double>(xold.dim_count()));
    y = ep.vectors.col(0) * Matrix::Ones(1, xold.dim_count()) / root_p;
  }
  return emergency_step(delta, w, xold, y);
}

}  // namespace detail

// Majorization loop for the ratio loss sigma2.  Each pass solves the
// linearized subproblem at the current iterate; the chain
//   omega(X+, X) <= xi(X+, X) <= xi(X, X) = omega(X, X) = 0
// forces sigma2(X+) <= sigma2(X), so the recorded losses never increase.
// Stops when an update gains less than eps, after itmax updates, or at a
// non-differentiable boundary (a weighted pair collapsing to distance zero).
inline SolverResult run_stress2(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                const SolverOptions& opt, IterationObserver observer = {}) {
  detail::check_problem(delta, w, opt);
  const Matrix vmat = compute_V(w);

  Configuration xold = detail::initial_configuration(delta, w, opt);
  Matrix dold = compute_distances(xold);
  StressReport rep =
      detail::make_report(detail::stress_terms(delta.values(), w.values(), dold));
  double sold = rep.sigma2;
  double aold = rep.d_bar;
  if (sold > 1.0 + 1e-12 && !opt.allow_indefinite)
    fail(ErrorCode::InitialStressAboveOne,
         "initial sigma2 = " + std::to_string(sold) +
             " > 1; improve the start or pass allow_indefinite");

  SolverResult out;
  int itel = 1;
  for (;;) {
    Index skips = 0;
    Matrix bmat = detail::b_matrix(delta.values(), w.values(), dold, &skips);
    Matrix mmat = detail::m_matrix(w.values(), dold, aold);
    Matrix umat = (1.0 - sold) * vmat + sold * mmat;

    Configuration xnew;
    try {
      xnew = Configuration(centered_solve(umat, bmat * xold.coords));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularSystem) throw;
      if (sold <= 1.0 + 1e-12) throw;  // singular for structural reasons
      if (!opt.allow_indefinite)
        fail(ErrorCode::IndefiniteMajorizer,
             "system matrix is indefinite at sigma2 = " + std::to_string(sold));
      xnew = detail::indefinite_move(delta, w, xold, umat, bmat);
    }

    Matrix dnew = compute_distances(xnew);
    rep = detail::make_report(detail::stress_terms(delta.values(), w.values(), dnew));
    const double snew = rep.sigma2;

    // When a weighted pair falls below the distance floor it drops out of B
    // and M, and the reduced surrogate no longer majorizes sigma2: the solved
    // step can ascend.  Keep the last good iterate instead of a known-bad
    // step; the stop is at a non-differentiable boundary, not a fixed point,
    // so the run does not count as converged.
    if (snew > sold + 1e-12) {
      out.x = std::move(xold);
      out.stress = sold;
      out.distances = std::move(dold);
      out.itel = itel - 1;
      out.converged = false;
      out.skipped_pairs = skips;
      out.b = std::move(bmat);
      out.m = std::move(mmat);
      out.u = std::move(umat);
      return out;
    }

    out.records.push_back({itel, sold, snew});
    if (observer) observer(out.records.back());

    if (itel == opt.itmax || (sold - snew) < opt.eps) {
      out.x = std::move(xnew);
      out.stress = snew;
      out.distances = std::move(dnew);
      out.itel = itel;
      out.converged = (sold - snew) < opt.eps;
      out.skipped_pairs = skips;
      out.b = std::move(bmat);
      out.m = std::move(mmat);
      out.u = std::move(umat);
      return out;
    }
    ++itel;
    xold = std::move(xnew);
    dold = std::move(dnew);
    sold = snew;
    aold = rep.d_bar;
  }
}

// Classical raw-stress majorization with the same loop mechanics.  The solve
// uses the fixed weight Laplacian V; records carry sigma1 so the two solvers
// report on a comparable scale, and sigma1 shares every zero and every
// stationary point with the raw stress it normalizes.
inline SolverResult run_raw_smacof(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                   const SolverOptions& opt, IterationObserver observer = {}) {
  detail::check_problem(delta, w, opt);
  const Matrix vmat = compute_V(w);

  Configuration xold = detail::initial_configuration(delta, w, opt);
  Matrix dold = compute_distances(xold);
  StressReport rep =
      detail::make_report(detail::stress_terms(delta.values(), w.values(), dold));
  double sold = rep.sigma1;

  SolverResult out;
  int itel = 1;
  for (;;) {
    Index skips = 0;
    Matrix bmat = detail::b_matrix(delta.values(), w.values(), dold, &skips);
    Configuration xnew(centered_solve(vmat, bmat * xold.coords));

    Matrix dnew = compute_distances(xnew);
    rep = detail::make_report(detail::stress_terms(delta.values(), w.values(), dnew));
    const double snew = rep.sigma1;

    out.records.push_back({itel, sold, snew});
    if (observer) observer(out.records.back());

    if (itel == opt.itmax || (sold - snew) < opt.eps) {
      out.x = std::move(xnew);
      out.stress = snew;
      out.distances = std::move(dnew);
      out.itel = itel;
      out.converged = (sold - snew) < opt.eps;
      out.skipped_pairs = skips;
      out.b = std::move(bmat);
      out.m = Matrix();
      out.u = vmat;
      return out;
    }
    ++itel;
    xold = std::move(xnew);
    dold = std::move(dnew);
    sold = snew;
  }
}

}  // namespace mds
