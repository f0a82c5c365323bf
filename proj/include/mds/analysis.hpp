#pragma once

#include <cmath>
#include <optional>

#include "mds/core.hpp"
#include "mds/linalg.hpp"

namespace mds {

struct GradientReport {
  Matrix gradient;  // n x p, columns sum to zero
  double norm = 0.0;
  std::optional<double> fd_rel_error;  // set when a finite-difference check ran
};

namespace detail {

inline void require_positive_distances(const Matrix& w, const Matrix& d) {
  const double floor = distance_floor(d);
  for (Index i = 1; i < d.rows(); ++i)
    for (Index j = 0; j < i; ++j)
      if (w(i, j) > 0.0 && d(i, j) <= floor)
        fail(ErrorCode::NonDifferentiablePoint,
             "a weighted pair has (near-)zero distance; the loss is not "
             "differentiable here");
}

inline double sigma2_at(const DissimilarityMatrix& delta, const WeightMatrix& w,
                        const Matrix& coords) {
  return make_report(
             stress_terms(delta.values(), w.values(), compute_distances(Configuration(coords))))
      .sigma2;
}

}  // namespace detail

// Analytic gradient of sigma2 at X:
//   grad = (2 / eta2_sq) [ (1 - sigma2) V + sigma2 M(X) - B(X) ] X
// i.e. the same matrices the solver assembles; the update direction and the
// downhill direction agree, which is what ties stationary points to fixed
// points.  Optionally cross-checks against central differences with step
// h = 1e-5 (1 + max|X|) unless a step is supplied.
inline GradientReport gradient_sigma2(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                      const Configuration& x, bool check_fd = false,
                                      double fd_step = 0.0) {
  if (delta.order() != w.order() || delta.order() != x.point_count())
    fail(ErrorCode::InvalidArgument, "dissimilarity, weight, and configuration sizes differ");
  const Matrix d = compute_distances(x);
  detail::require_positive_distances(w.values(), d);
  const auto rep = detail::make_report(detail::stress_terms(delta.values(), w.values(), d));

  const Matrix b = detail::b_matrix(delta.values(), w.values(), d);
  const Matrix m = detail::m_matrix(w.values(), d, rep.d_bar);
  const Matrix u = (1.0 - rep.sigma2) * compute_V(w) + rep.sigma2 * m;

  GradientReport out;
  out.gradient = (2.0 / rep.eta2_sq) * ((u - b) * x.coords);
  out.norm = out.gradient.norm();

  if (check_fd) {
    const double h =
        fd_step > 0.0 ? fd_step : 1e-5 * (1.0 + detail::max_abs(x.coords));
    Matrix fd(x.point_count(), x.dim_count());
    Matrix probe = x.coords;
    for (Index i = 0; i < probe.rows(); ++i)
      for (Index j = 0; j < probe.cols(); ++j) {
        const double saved = probe(i, j);
        probe(i, j) = saved + h;
        const double up = detail::sigma2_at(delta, w, probe);
        probe(i, j) = saved - h;
        const double down = detail::sigma2_at(delta, w, probe);
        probe(i, j) = saved;
        fd(i, j) = (up - down) / (2.0 * h);
      }
    out.fd_rel_error = (fd - out.gradient).norm() / std::max(out.gradient.norm(), 1e-300);
  }
  return out;
}

// Fixed-point residual || JX - U(X)^+ B(X) X || / || JX ||.  The update map
// leaves X unchanged exactly when the gradient vanishes, so this measures
// distance from stationarity on the scale of the configuration itself.
inline double stationarity_residual(const DissimilarityMatrix& delta, const WeightMatrix& w,
                                    const Configuration& x) {
  if (delta.order() != w.order() || delta.order() != x.point_count())
    fail(ErrorCode::InvalidArgument, "dissimilarity, weight, and configuration sizes differ");
  const Matrix d = compute_distances(x);
  detail::require_positive_distances(w.values(), d);
  const auto rep = detail::make_report(detail::stress_terms(delta.values(), w.values(), d));

  const Matrix b = detail::b_matrix(delta.values(), w.values(), d);
  const Matrix m = detail::m_matrix(w.values(), d, rep.d_bar);
  const Matrix u = (1.0 - rep.sigma2) * compute_V(w) + rep.sigma2 * m;

  const Matrix xc = x.coords.rowwise() - x.coords.colwise().mean();
  const Matrix xplus = centered_solve(u, b * x.coords);
  const double denom = xc.norm();
  if (denom <= 0.0)
    fail(ErrorCode::DegenerateConfiguration, "configuration has collapsed to one point");
  return (xc - xplus).norm() / denom;
}

struct RatioDiagnostics {
  double ratio;    // eta2_sq / eta1_sq, always in (0, 1]
  double bound;    // (n - 2) / (3 n)
  bool applies;    // bound is only proven for p == 1 with equal weights
  bool satisfied;  // ratio >= bound whenever applies, vacuously true otherwise
};

// The variance-to-size ratio of the distances.  In the unidimensional
// equally-weighted case it cannot drop below (n-2)/(3n), which caps how much
// larger sigma2 can be than sigma1; outside that case the bound is reported
// but not asserted.
inline RatioDiagnostics ratio_diagnostics(const DissimilarityMatrix& delta,
                                          const WeightMatrix& w, const Configuration& x) {
  const auto rep = stress_report(delta, w, x);
  const Index n = delta.order();

  const double pair_count = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double equal_value = 1.0 / pair_count;
  bool equal_weights = true;
  for (Index i = 1; i < n && equal_weights; ++i)
    for (Index j = 0; j < i; ++j)
      if (std::abs(w.values()(i, j) - equal_value) > 1e-9 * equal_value) {
        equal_weights = false;
        break;
      }

  RatioDiagnostics out;
  out.ratio = rep.eta2_sq / rep.eta1_sq;
  out.bound = static_cast<double>(n - 2) / (3.0 * static_cast<double>(n));
  out.applies = (x.dim_count() == 1) && equal_weights;
  out.satisfied = !out.applies || out.ratio >= out.bound - 1e-12;
  return out;
}

}  // namespace mds
