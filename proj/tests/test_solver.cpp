#include "mds/solver.hpp"

#include <cstring>

#include "catch_helpers.hpp"
#include "mds/analysis.hpp"
#include "mds/io.hpp"
#include "support.hpp"

using namespace mds;
using namespace testsupport;
using Catch::Approx;

namespace {

// Reference values for the builtin color data under default settings,
// computed with an independent implementation of the same update rules.
constexpr double kEkmanLambda = 1.1400419532741402;
constexpr double kEkmanS2First = 0.15669899773110199;
constexpr double kEkmanS2Snew1 = 0.13151215248158621;
constexpr double kEkmanS2Final = 0.11260126901923925;
constexpr int kEkmanS2Iters = 27;
constexpr double kEkmanRawFirst = 0.02784811462754588;
constexpr double kEkmanRawFinal = 0.017528661860394631;
constexpr int kEkmanRawIters = 24;

Dataset ekman() { return load_dataset("ekman"); }

}  // namespace

TEST_CASE("torgerson_init reproduces exact Euclidean input") {
  Rng rng(211);
  const Configuration x = random_config(rng, 7, 2);
  const DissimilarityMatrix delta = euclidean_delta(x);
  const Configuration rebuilt = torgerson_init(delta, 2);
  REQUIRE((compute_distances(rebuilt) - delta.values()).cwiseAbs().maxCoeff() <= 1e-9);

  // one-dimensional case: collinear points come back up to sign and shift
  const Configuration line = torgerson_init(euclidean_delta(Configuration([] {
                                              Matrix c(5, 1);
                                              c << 0.0, 1.0, 2.5, 4.0, 7.0;
                                              return c;
                                            }())),
                                            1);
  Matrix expected(5, 1);
  expected << 0.0, 1.0, 2.5, 4.0, 7.0;
  REQUIRE((compute_distances(line) -
           compute_distances(Configuration(expected))).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("torgerson_init needs enough positive eigenvalues") {
  // collinear points span one dimension; asking for two must fail
  Matrix c(4, 1);
  c << 0.0, 1.0, 2.0, 3.5;
  const DissimilarityMatrix delta = euclidean_delta(Configuration(c));
  REQUIRE(code_of([&] { torgerson_init(delta, 2); }) ==
          ErrorCode::InsufficientPositiveEigenvalues);
  REQUIRE(code_of([&] { torgerson_init(delta, 0); }) == ErrorCode::InvalidArgument);
  REQUIRE(code_of([&] { torgerson_init(delta, 4); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("torgerson_init spectrum on the color data") {
  const EigenPair ep = sym_eigen(double_center(ekman().delta));
  REQUIRE(ep.values(0) == Approx(1.9589050485924464).epsilon(1e-9));
  REQUIRE(ep.values(1) == Approx(1.3043775564471607).epsilon(1e-9));
  REQUIRE(ep.values(2) == Approx(0.44545378516983491).epsilon(1e-9));
  REQUIRE(ep.values(3) == Approx(0.36645965496980931).epsilon(1e-9));
}

TEST_CASE("initial_scale multiplies by the raw-stress-optimal factor") {
  Rng rng(223);
  const Configuration x = random_config(rng, 6, 2);
  const WeightMatrix w = random_weights(rng, 6);

  // dissimilarities exactly twice the distances: optimal factor is 2
  const DissimilarityMatrix twice =
      DissimilarityMatrix::from_matrix(2.0 * compute_distances(x));
  const Configuration scaled = initial_scale(twice, w, x);
  REQUIRE((scaled.coords - 2.0 * x.coords).cwiseAbs().maxCoeff() <= 1e-12);

  // no rescaling of the result can lower the raw stress
  const DissimilarityMatrix delta = random_delta(rng, 6);
  const Configuration best = initial_scale(delta, w, x);
  const double at_best = stress_report(delta, w, best).sigma_raw;
  for (int k = 1; k <= 100; ++k) {
    const double c = 0.5 + 1.5 * k / 100.0;
    const double other =
        stress_report(delta, w, Configuration(Matrix(c * best.coords))).sigma_raw;
    REQUIRE(at_best <= other + 1e-12);
  }
}

TEST_CASE("initial_scale on the color data matches the reference factor") {
  const Dataset data = ekman();
  const WeightMatrix w = WeightMatrix::equal(data.delta.order());
  const Configuration xt = torgerson_init(data.delta, 2);
  const Configuration xs = initial_scale(data.delta, w, xt);
  REQUIRE(xs.coords.norm() / xt.coords.norm() ==
          Approx(kEkmanLambda).epsilon(1e-9));
  REQUIRE(stress_report(data.delta, w, xs).sigma2 ==
          Approx(kEkmanS2First).epsilon(1e-9));
}

TEST_CASE("stress2_update leaves a perfect fit in place") {
  Rng rng(227);
  const Configuration x = random_config(rng, 6, 2);
  const DissimilarityMatrix delta = euclidean_delta(x);
  const WeightMatrix w = random_weights(rng, 6);
  const StressReport rep = stress_report(delta, w, x);
  const Configuration next = stress2_update(delta, w, x, rep.sigma2, rep.d_bar);
  const Matrix xc = x.coords.rowwise() - x.coords.colwise().mean();
  REQUIRE((next.coords - xc).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("stress2_update never increases sigma2") {
  Rng rng(229);
  int tested = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = rng.integer(4, 10);
    const WeightMatrix w = trial % 2 ? random_weights(rng, n) : WeightMatrix::equal(n);
    const Configuration x = random_config(rng, n, rng.integer(1, 3));
    // dissimilarities as noisy distances keep sigma2 inside the guarantee
    Matrix noisy = compute_distances(x);
    for (Index i = 1; i < n; ++i)
      for (Index j = 0; j < i; ++j) {
        const double v = noisy(i, j) * rng.uniform(0.5, 1.5);
        noisy(i, j) = v;
        noisy(j, i) = v;
      }
    const DissimilarityMatrix delta = DissimilarityMatrix::from_matrix(std::move(noisy));
    const StressReport rep = stress_report(delta, w, x);
    if (rep.sigma2 > 1.0) continue;  // outside the guarantee
    const Configuration next = stress2_update(delta, w, x, rep.sigma2, rep.d_bar);
    REQUIRE(stress_report(delta, w, next).sigma2 <= rep.sigma2 + 1e-12);
    ++tested;
  }
  REQUIRE(tested >= 200);
}

TEST_CASE("run_stress2 on the color data matches the reference trajectory") {
  const Dataset data = ekman();
  const WeightMatrix w = WeightMatrix::equal(data.delta.order());
  const SolverResult result = run_stress2(data.delta, w, SolverOptions{});

  REQUIRE(result.converged);
  REQUIRE(result.itel == kEkmanS2Iters);
  REQUIRE(static_cast<int>(result.records.size()) == kEkmanS2Iters);
  REQUIRE(result.stress == Approx(kEkmanS2Final).margin(1e-10));

  REQUIRE(result.records.front().itel == 1);
  REQUIRE(result.records.front().sold == Approx(kEkmanS2First).margin(1e-10));
  REQUIRE(result.records.front().snew == Approx(kEkmanS2Snew1).margin(1e-10));
  REQUIRE(result.records.back().itel == kEkmanS2Iters);
  REQUIRE(result.records.back().snew == Approx(kEkmanS2Final).margin(1e-10));

  // the chain of records is consistent and monotone
  for (size_t k = 0; k + 1 < result.records.size(); ++k) {
    REQUIRE(result.records[k].snew == result.records[k + 1].sold);
    REQUIRE(result.records[k].snew <= result.records[k].sold + 1e-12);
  }
  REQUIRE(result.skipped_pairs == 0);
}

TEST_CASE("run_stress2 stops immediately on a perfect fit") {
  Rng rng(233);
  const Configuration x = random_config(rng, 6, 2);
  const DissimilarityMatrix delta = euclidean_delta(x);
  const WeightMatrix w = WeightMatrix::equal(6);
  const SolverResult result = run_stress2(delta, w, SolverOptions{});
  REQUIRE(result.itel == 1);
  REQUIRE(result.converged);
  REQUIRE(result.stress <= 1e-12);
}

TEST_CASE("run_stress2 respects itmax and reports non-convergence") {
  const Dataset data = ekman();
  const WeightMatrix w = WeightMatrix::equal(data.delta.order());
  SolverOptions opt;
  opt.itmax = 3;
  const SolverResult result = run_stress2(data.delta, w, opt);
  REQUIRE(result.itel == 3);
  REQUIRE_FALSE(result.converged);
  REQUIRE(static_cast<int>(result.records.size()) == 3);
}

TEST_CASE("run_stress2 streams records to the observer") {
  const Dataset data = ekman();
  const WeightMatrix w = WeightMatrix::equal(data.delta.order());
  std::vector<IterationRecord> seen;
  const SolverResult result = run_stress2(
      data.delta, w, SolverOptions{}, [&](const IterationRecord& rec) { seen.push_back(rec); });
  REQUIRE(seen.size() == result.records.size());
  for (size_t k = 0; k < seen.size(); ++k) {
    REQUIRE(seen[k].itel == result.records[k].itel);
    REQUIRE(seen[k].sold == result.records[k].sold);
    REQUIRE(seen[k].snew == result.records[k].snew);
  }

  // an observer that throws aborts the run cleanly
  struct Abort {};
  REQUIRE_THROWS_AS(run_stress2(data.delta, w, SolverOptions{},
                                [](const IterationRecord&) { throw Abort{}; }),
                    Abort);
}

TEST_CASE("run_stress2 is deterministic") {
  const Dataset data = ekman();
  const WeightMatrix w = WeightMatrix::equal(data.delta.order());
  const SolverResult a = run_stress2(data.delta, w, SolverOptions{});
  const SolverResult b = run_stress2(data.delta, w, SolverOptions{});
  REQUIRE(a.x.coords.rows() == b.x.coords.rows());
  REQUIRE(std::memcmp(a.x.coords.data(), b.x.coords.data(),
                      sizeof(double) * static_cast<size_t>(a.x.coords.size())) == 0);
}

TEST_CASE("run_stress2 monotone descent on random instances") {
  Rng rng(239);
  int ran = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = rng.integer(4, 10);
    const DissimilarityMatrix delta = random_delta(rng, n);
    const WeightMatrix w = trial % 2 ? random_weights(rng, n) : WeightMatrix::equal(n);
    SolverOptions opt;
    opt.ndim = rng.integer(1, 3);
    SolverResult result;
    try {
      result = run_stress2(delta, w, opt);
    } catch (const Error& e) {
      // random dissimilarities sometimes lack enough positive spectrum, or
      // start the iteration outside the sigma2 <= 1 guarantee
      REQUIRE((e.code() == ErrorCode::InsufficientPositiveEigenvalues ||
               e.code() == ErrorCode::InitialStressAboveOne));
      continue;
    }
    for (const auto& rec : result.records) REQUIRE(rec.snew <= rec.sold + 1e-12);
    ++ran;
  }
  REQUIRE(ran >= 25);
}

TEST_CASE("random and user starts") {
  const Dataset data = ekman();
  const WeightMatrix w = WeightMatrix::equal(data.delta.order());

  // random starts on this data land well above sigma2 = 1, so they need the
  // indefinite pathway; from there every seed reaches the same basin
  SolverOptions opt;
  opt.allow_indefinite = true;
  opt.init = InitSpec::random_start(42);
  const SolverResult a = run_stress2(data.delta, w, opt);
  const SolverResult b = run_stress2(data.delta, w, opt);
  REQUIRE(std::memcmp(a.x.coords.data(), b.x.coords.data(),
                      sizeof(double) * static_cast<size_t>(a.x.coords.size())) == 0);
  REQUIRE(a.converged);

  opt.init = InitSpec::random_start(43);
  const SolverResult c = run_stress2(data.delta, w, opt);
  REQUIRE((a.x.coords - c.x.coords).cwiseAbs().maxCoeff() > 1e-12);

  // user-supplied start: exactly the reference trajectory when given the
  // scaled classical start, and a shape check otherwise
  const Configuration xs =
      initial_scale(data.delta, w, torgerson_init(data.delta, 2));
  opt.init = InitSpec::user_start(xs.coords);
  const SolverResult d = run_stress2(data.delta, w, opt);
  REQUIRE(d.itel == kEkmanS2Iters);
  REQUIRE(d.stress == Approx(kEkmanS2Final).margin(1e-10));

  opt.init = InitSpec::user_start(Matrix::Ones(5, 2));
  REQUIRE(code_of([&] { run_stress2(data.delta, w, opt); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("run_raw_smacof on the color data matches the reference trajectory") {
  const Dataset data = ekman();
  const WeightMatrix w = WeightMatrix::equal(data.delta.order());
  const SolverResult result = run_raw_smacof(data.delta, w, SolverOptions{});

  REQUIRE(result.converged);
  REQUIRE(result.itel == kEkmanRawIters);
  REQUIRE(result.stress == Approx(kEkmanRawFinal).margin(1e-10));
  REQUIRE(result.records.front().sold == Approx(kEkmanRawFirst).margin(1e-10));
  for (const auto& rec : result.records) REQUIRE(rec.snew <= rec.sold + 1e-12);
}

TEST_CASE("guttman_update drives the raw stress down step by step") {
  Rng rng(241);
  const Index n = 8;
  const DissimilarityMatrix delta = random_delta(rng, n);
  const WeightMatrix w = random_weights(rng, n);
  Configuration x = initial_scale(delta, w, torgerson_init(delta, 2));
  double previous = stress_report(delta, w, x).sigma_raw;
  for (int step = 0; step < 25; ++step) {
    x = guttman_update(delta, w, x);
    const double current = stress_report(delta, w, x).sigma_raw;
    REQUIRE(current <= previous + 1e-12);
    previous = current;
  }
}

TEST_CASE("raw and ratio solutions of the color data nearly coincide") {
  const Dataset data = ekman();
  const WeightMatrix w = WeightMatrix::equal(data.delta.order());
  const SolverResult s2 = run_stress2(data.delta, w, SolverOptions{});
  const SolverResult raw = run_raw_smacof(data.delta, w, SolverOptions{});
  const ProcrustesResult fit = procrustes_align(raw.x, s2.x, true);
  REQUIRE(fit.relative_residual < 0.05);
}

TEST_CASE("emergency_step minimizes the majorizer along the direction") {
  Rng rng(251);
  const Index n = 6;
  const Configuration x = random_config(rng, n, 2);
  // noisy distances keep sigma2 below one, so curvature along any direction
  // is nonnegative and the step is always admissible
  Matrix noisy = compute_distances(x);
  for (Index i = 1; i < n; ++i)
    for (Index j = 0; j < i; ++j) {
      const double v = noisy(i, j) * rng.uniform(0.7, 1.3);
      noisy(i, j) = v;
      noisy(j, i) = v;
    }
  const DissimilarityMatrix delta = DissimilarityMatrix::from_matrix(std::move(noisy));
  const WeightMatrix w = random_weights(rng, n);
  REQUIRE(stress_report(delta, w, x).sigma2 <= 1.0);
  const Configuration dir = random_config(rng, n, 2);
  Matrix y = dir.coords.rowwise() - dir.coords.colwise().mean();

  const Configuration stepped = emergency_step(delta, w, x, y);
  // recover alpha* and verify no other alpha does better
  const double alpha = y.cwiseProduct(stepped.coords - x.coords).sum() / y.squaredNorm();
  auto xi_at = [&](double a) {
    return xi(delta, w, Configuration(Matrix(x.coords + a * y)), x);
  };
  const double at_star = xi_at(alpha);
  for (int k = -10; k <= 10; ++k)
    REQUIRE(at_star <= xi_at(alpha + 0.2 * k) + 1e-10);
  // moving to the minimizer of the majorizer cannot raise sigma2
  REQUIRE(stress_report(delta, w, stepped).sigma2 <=
          stress_report(delta, w, x).sigma2 + 1e-12);

  // a zero direction goes nowhere
  const Configuration still = emergency_step(delta, w, x, Matrix::Zero(n, 2));
  REQUIRE((still.coords - x.coords).cwiseAbs().maxCoeff() == 0.0);
}

namespace {

// Near-regular simplex with wildly non-constant dissimilarities: the distance
// variance is tiny, so sigma2 starts far above one and the combined system
// matrix is indefinite.
struct IndefiniteInstance {
  DissimilarityMatrix delta;
  WeightMatrix w;
  Configuration x;

  IndefiniteInstance()
      : delta(DissimilarityMatrix::from_matrix([] {
          Matrix d = Matrix::Zero(4, 4);
          const double values[6] = {0.2, 0.9, 0.4, 1.1, 0.6, 0.3};
          int k = 0;
          for (Index i = 1; i < 4; ++i)
            for (Index j = 0; j < i; ++j) {
              d(i, j) = values[k];
              d(j, i) = values[k];
              ++k;
            }
          return d;
        }())),
        w(WeightMatrix::equal(4)),
        x([] {
          Matrix c(4, 3);  // unit-edge regular simplex, slightly perturbed
          c << 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.5, std::sqrt(3.0) / 2.0, 0.0, 0.5,
              std::sqrt(3.0) / 6.0, std::sqrt(6.0) / 3.0;
          Matrix bump(4, 3);
          bump << 1.0, -2.0, 0.5, -1.5, 0.7, 1.0, 0.3, 1.2, -0.8, -0.4, -0.6, 0.9;
          return Configuration(c + 1e-3 * bump);
        }()) {}
};

}  // namespace

TEST_CASE("emergency_step rejects negative-curvature directions") {
  const IndefiniteInstance inst;
  const StressReport rep = stress_report(inst.delta, inst.w, inst.x);
  REQUIRE(rep.sigma2 > 1.0);  // the premise of the whole scenario

  const Matrix u = (1.0 - rep.sigma2) * compute_V(inst.w) +
                   rep.sigma2 * compute_M(inst.w, inst.x);
  const EigenPair ep = sym_eigen(u);
  REQUIRE(ep.values.minCoeff() < 0.0);  // indefinite, as constructed

  // most negative eigenvector replicated across columns: curvature < 0
  Matrix bad = ep.vectors.col(3) * Matrix::Ones(1, 3);
  REQUIRE(code_of([&] { emergency_step(inst.delta, inst.w, inst.x, bad); }) ==
          ErrorCode::DirectionViolatesCondition);

  // dominant eigenvector direction is admissible and cannot raise sigma2
  Matrix good = ep.vectors.col(0) * Matrix::Ones(1, 3);
  const Configuration stepped = emergency_step(inst.delta, inst.w, inst.x, good);
  REQUIRE(stress_report(inst.delta, inst.w, stepped).sigma2 <= rep.sigma2 + 1e-9);
}

TEST_CASE("a bad start above sigma2 = 1 is refused unless allowed") {
  const IndefiniteInstance inst;
  SolverOptions opt;
  opt.ndim = 3;
  opt.init = InitSpec::user_start(inst.x.coords);
  REQUIRE(code_of([&] { run_stress2(inst.delta, inst.w, opt); }) ==
          ErrorCode::InitialStressAboveOne);

  opt.allow_indefinite = true;
  const double start = stress_report(inst.delta, inst.w, inst.x).sigma2;
  const SolverResult result = run_stress2(inst.delta, inst.w, opt);
  REQUIRE(result.stress <= start + 1e-12);
  for (const auto& rec : result.records) REQUIRE(rec.snew <= rec.sold + 1e-9);
}
