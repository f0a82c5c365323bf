#pragma once

// Shared helpers for the test binaries: a deterministic RNG and generators
// for valid random problem instances.

#include <cmath>
#include <cstdint>
#include <random>

#include "mds/core.hpp"

namespace testsupport {

using mds::Configuration;
using mds::DissimilarityMatrix;
using mds::Index;
using mds::Matrix;
using mds::WeightMatrix;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
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

  int integer(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Symmetric, hollow, entries bounded away from zero.
inline DissimilarityMatrix random_delta(Rng& rng, Index n) {
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 1; i < n; ++i)
    for (Index j = 0; j < i; ++j) {
      const double v = rng.uniform(0.1, 1.1);
      d(i, j) = v;
      d(j, i) = v;
    }
  return DissimilarityMatrix::from_matrix(std::move(d));
}

// Positive weights on the complete graph, so connectivity always holds.
inline WeightMatrix random_weights(Rng& rng, Index n) {
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 1; i < n; ++i)
    for (Index j = 0; j < i; ++j) {
      const double v = rng.uniform(0.2, 1.0);
      w(i, j) = v;
      w(j, i) = v;
    }
  return mds::normalize_weights(w);
}

// Gaussian coordinates, redrawn until no two points nearly coincide so that
// B and M keep all their terms and gradients stay well defined.
inline Configuration random_config(Rng& rng, Index n, Index p) {
  for (;;) {
    Matrix c(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) c(i, j) = rng.normal();
    Configuration x(std::move(c));
    const Matrix d = mds::compute_distances(x);
    double dmin = 1e300, dmax = 0.0;
    for (Index i = 1; i < n; ++i)
      for (Index j = 0; j < i; ++j) {
        dmin = std::min(dmin, d(i, j));
        dmax = std::max(dmax, d(i, j));
      }
    if (dmin > 0.05 * dmax) return x;
  }
}

// Exact Euclidean dissimilarities of a configuration.
inline DissimilarityMatrix euclidean_delta(const Configuration& x) {
  return DissimilarityMatrix::from_matrix(mds::compute_distances(x));
}

}  // namespace testsupport
