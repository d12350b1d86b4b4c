#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "subridge/theory_equicorr.hpp"
#include "subridge/theory_general.hpp"

using namespace subridge;

namespace {

SubsamplingPlan full_plan(Index m) {
  Mask all(static_cast<std::size_t>(m));
  std::iota(all.begin(), all.end(), Index{0});
  return SubsamplingPlan::from_masks({all}, m);
}

}  // namespace

TEST_CASE("effective covariance: identity for a full mask") {
  auto cov = CovarianceSpec::from_matrices(Matrix::Identity(6, 6), Matrix::Zero(6, 6));
  CHECK(effective_covariance(cov, full_plan(6), 0, 0).isApprox(Matrix::Identity(6, 6)));
}

TEST_CASE("effective covariance: off-diagonal equicorrelated block") {
  const Index m = 10;
  auto cov = build_equicorrelated_covariance(1.0, 0.6, 0.1, m);
  auto plan = SubsamplingPlan::from_masks({{0, 1, 2, 3}, {5, 6}}, m);
  const Matrix block = effective_covariance(cov, plan, 0, 1);
  CHECK(block.rows() == 4);
  CHECK(block.cols() == 2);
  // oracle: direct index selection on the explicit matrix
  const double expected = 1.0 * 0.6 / std::sqrt(0.4 * 0.2);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(block(i, j) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("effective covariance: toeplitz 4x4 instance") {
  auto cov = CovarianceSpec::toeplitz(4, 1.0, 0.8, 0.0, 0.0);
  auto plan = SubsamplingPlan::from_masks({{0, 2}}, 4);
  const Matrix block = effective_covariance(cov, plan, 0, 0);
  Matrix expected(2, 2);
  expected << 2.0, 1.28, 1.28, 2.0;
  CHECK(block.isApprox(expected, 1e-14));
}

TEST_CASE("saddle point: isotropic golden-ratio fixed point") {
  const Index m = 300;
  auto cov = CovarianceSpec::from_matrices(Matrix::Identity(m, m), Matrix::Zero(m, m));
  const auto p = solve_saddle_point(cov, full_plan(m), Vector::Constant(1, 1.0), 1.0);
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  CHECK(p.q[0] == doctest::Approx(golden).epsilon(1e-12));
  CHECK(p.q_hat[0] == doctest::Approx(golden).epsilon(1e-12));
  CHECK(p.q[0] * (1.0 + p.q_hat[0]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("saddle point: residuals and invariants on a structured instance") {
  const Index m = 120;
  auto cov = CovarianceSpec::toeplitz(m, 1.0, 0.8, 0.1, 0.3);
  auto plan = sample_subsampling_plan(PlanStrategy::replacement, 3, 0.0, m, 4,
                                      std::vector<double>{0.2, 0.4, 0.6});
  GeneralTheory theory(cov, plan);
  for (double alpha : {0.1, 0.5, 1.0, 3.0})
    for (double lambda : {1e-3, 1e-1, 2.0}) {
      const Vector lam = Vector::Constant(3, lambda);
      const auto p = theory.solve(lam, alpha);
      for (Index r = 0; r < 3; ++r) {
        CHECK(p.q[r] > 0.0);
        CHECK(p.q_hat[r] == doctest::Approx(alpha / (lambda + p.q[r])).epsilon(1e-10));
        CHECK(theory.residual(r, p.q[r], lambda, alpha) < 1e-10);
      }
      CHECK(p.gamma.isApprox(p.gamma.transpose()));
      CHECK(p.gamma.minCoeff() >= 0.0);
    }
}

TEST_CASE("saddle point: Newton and damped schemes agree") {
  const Index m = 80;
  auto cov = CovarianceSpec::toeplitz(m, 1.0, 0.7, 0.05, 0.2);
  auto plan = sample_subsampling_plan(PlanStrategy::homogeneous, 2, 0.0, m, 1);
  SaddleOptions damped;
  damped.scheme = SaddleScheme::damped;
  const Vector lam = Vector::Constant(2, 0.05);
  const auto a = GeneralTheory(cov, plan).solve(lam, 0.7);
  const auto b = GeneralTheory(cov, plan, damped).solve(lam, 0.7);
  CHECK((a.q - b.q).norm() < 1e-10);
  CHECK((a.gamma - b.gamma).norm() < 1e-10);
}

TEST_CASE("saddle point: matches the dense reference implementation") {
  const Index m = 40;
  auto cov = CovarianceSpec::toeplitz(m, 1.0, 0.8, 0.1, 0.3);
  auto plan = sample_subsampling_plan(PlanStrategy::replacement, 3, 0.0, m, 9,
                                      std::vector<double>{0.25, 0.5, 0.75});
  auto truth = sample_isotropic_truth(m, 5);
  const Vector lam(Vector::LinSpaced(3, 0.01, 0.3));
  const Vector eta = Vector::Constant(3, 0.2);
  const auto oracle = testing::general_oracle(cov.signal_matrix(), cov.noise_matrix(), plan.masks, lam, 1.3,
                                              truth.weights, 0.1, eta);
  const auto p = solve_saddle_point(cov, plan, lam, 1.3);
  const auto e = error_components(p, cov, plan, truth, 0.1, eta);
  CHECK((p.q - oracle.q).norm() < 1e-10);
  CHECK((p.gamma - oracle.gamma).norm() < 1e-10);
  CHECK((e.pairwise - oracle.pairwise).norm() < 1e-9);
  CHECK(e.ensemble == doctest::Approx(oracle.ensemble).epsilon(1e-10));
}

TEST_CASE("saddle point: frozen reference values") {
  // frozen from the dense reference implementation
  const Index m = 12;
  auto cov = CovarianceSpec::toeplitz(m, 1.0, 0.8, 0.1, 0.3);
  auto plan = SubsamplingPlan::from_masks({{0, 1, 2, 3, 4, 5}, {4, 5, 6, 7, 8, 9, 10, 11}}, m);
  Vector w = Vector::LinSpaced(m, -1.0, 1.0);
  GroundTruth truth;
  truth.weights = w;
  const Vector lam = Vector::Constant(2, 0.1);
  const Vector eta = Vector::Constant(2, 0.2);
  const auto p = solve_saddle_point(cov, plan, lam, 0.8);
  const auto e = error_components(p, cov, plan, truth, 0.1, eta);
  CHECK(p.q[0] == doctest::Approx(0.092630070084443086).epsilon(1e-10));
  CHECK(p.q[1] == doctest::Approx(0.1313743915083086).epsilon(1e-10));
  CHECK(p.gamma(0, 1) == doctest::Approx(0.13377332997863403).epsilon(1e-10));
  CHECK(e.pairwise(0, 0) == doctest::Approx(0.97466378476962934).epsilon(1e-10));
  CHECK(e.pairwise(0, 1) == doctest::Approx(0.14032760328084665).epsilon(1e-10));
  CHECK(e.ensemble == doctest::Approx(0.50407846123835465).epsilon(1e-10));
}

TEST_CASE("saddle point: readouts decouple") {
  const Index m = 60;
  auto cov = CovarianceSpec::toeplitz(m, 1.0, 0.6, 0.1, 0.2);
  auto plan = sample_subsampling_plan(PlanStrategy::replacement, 3, 0.0, m, 2,
                                      std::vector<double>{0.3, 0.5, 0.7});
  const Vector lam(Vector::LinSpaced(3, 0.02, 0.2));
  const auto joint = solve_saddle_point(cov, plan, lam, 0.9);
  for (Index r = 0; r < 3; ++r) {
    auto single = SubsamplingPlan::from_masks({plan.masks[static_cast<std::size_t>(r)]}, m);
    const auto alone = solve_saddle_point(cov, single, Vector::Constant(1, lam[r]), 0.9);
    CHECK(alone.q[0] == joint.q[r]);
    CHECK(alone.q_hat[0] == joint.q_hat[r]);
  }
}

TEST_CASE("saddle point: q increases with lambda") {
  const Index m = 50;
  auto cov = CovarianceSpec::toeplitz(m, 1.0, 0.8, 0.1, 0.3);
  auto plan = sample_subsampling_plan(PlanStrategy::homogeneous, 1, 0.0, m, 0);
  double prev = 0.0;
  for (double lambda : {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0}) {
    const double q = solve_saddle_point(cov, plan, Vector::Constant(1, lambda), 0.6).q[0];
    CHECK(q > prev);
    prev = q;
  }
}

TEST_CASE("errors: permuting readouts permutes the error matrix") {
  const Index m = 50;
  auto cov = CovarianceSpec::toeplitz(m, 1.0, 0.8, 0.1, 0.3);
  auto plan = sample_subsampling_plan(PlanStrategy::replacement, 3, 0.0, m, 6,
                                      std::vector<double>{0.2, 0.4, 0.6});
  auto truth = sample_isotropic_truth(m, 1);
  const Vector lam(Vector::LinSpaced(3, 0.05, 0.15));
  const Vector eta(Vector::LinSpaced(3, 0.1, 0.3));
  auto e = error_components(solve_saddle_point(cov, plan, lam, 1.1), cov, plan, truth, 0.1, eta);
  auto swapped = SubsamplingPlan::from_masks({plan.masks[2], plan.masks[0], plan.masks[1]}, m);
  const Vector lam2{{lam[2], lam[0], lam[1]}}, eta2{{eta[2], eta[0], eta[1]}};
  auto f = error_components(solve_saddle_point(cov, swapped, lam2, 1.1), cov, swapped, truth, 0.1, eta2);
  const int perm[3] = {2, 0, 1};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(f.pairwise(i, j) == doctest::Approx(e.pairwise(perm[i], perm[j])).epsilon(1e-12));
  CHECK(f.ensemble == doctest::Approx(e.ensemble).epsilon(1e-12));
}

TEST_CASE("errors: noiseless fully observed problem is learnable") {
  const Index m = 200;
  auto cov = CovarianceSpec::from_matrices(Matrix::Identity(m, m), Matrix::Zero(m, m));
  auto truth = sample_isotropic_truth(m, 3);
  const auto p = solve_saddle_point(cov, full_plan(m), Vector::Constant(1, 1e-8), 2.0);
  const auto e = error_components(p, cov, full_plan(m), truth, 0.0, Vector::Zero(1));
  CHECK(e.ensemble < 1e-3);
  const auto p10 = solve_saddle_point(cov, full_plan(m), Vector::Constant(1, 1e-6), 10.0);
  CHECK(error_components(p10, cov, full_plan(m), truth, 0.0, Vector::Zero(1)).ensemble < 1e-2);
}

TEST_CASE("errors: diagonal entries respect the readout-noise floor") {
  const Index m = 60;
  auto cov = CovarianceSpec::toeplitz(m, 1.0, 0.5, 0.2, 0.1);
  auto plan = sample_subsampling_plan(PlanStrategy::homogeneous, 3, 0.0, m, 3);
  auto truth = sample_isotropic_truth(m, 8);
  const Vector eta(Vector::LinSpaced(3, 0.3, 0.9));
  for (double alpha : {0.2, 1.0, 5.0}) {
    const auto e = error_components(solve_saddle_point(cov, plan, Vector::Constant(3, 0.01), alpha), cov, plan,
                                    truth, 0.2, eta);
    for (Index r = 0; r < 3; ++r) CHECK(e.pairwise(r, r) >= eta[r] * eta[r]);
  }
}

TEST_CASE("single ridge reduction matches the equicorrelated closed form") {
  const Index m = 400;
  auto cov = build_equicorrelated_covariance(1.0, 0.5, 0.2, m);
  auto plan = sample_subsampling_plan(PlanStrategy::homogeneous, 1, 0.0, m, 0);
  EquiTask task{1.0, 0.5, 0.2, 0.1, 0.4, Vector::Constant(1, 0.1), Vector::Constant(1, 0.05), 0.7,
                plan.fractions};
  const auto general = GeneralTheory(cov, plan);
  const auto p = general.solve(task.lambda, task.alpha);
  const auto e = general.errors(p, WeightMoments::spiked_average(0.4, m), 0.1, task.eta);
  const double closed = ensemble_error_equicorr(task).ensemble;
  CHECK(std::abs(e.ensemble - closed) / closed < 5.0 / m);
}

TEST_CASE("general solver rejects ridgeless input") {
  auto cov = CovarianceSpec::toeplitz(10, 1.0, 0.5, 0.0, 0.0);
  CHECK_THROWS_AS(solve_saddle_point(cov, full_plan(10), Vector::Constant(1, 0.0), 1.0), InvalidArgument);
}

TEST_CASE("ensemble error averaging and divergence") {
  CHECK(ensemble_error(Matrix::Constant(1, 1, 0.5)) == 0.5);
  CHECK(ensemble_error(Matrix::Identity(2, 2)) == 0.5);
  Matrix m = Matrix::Ones(3, 3);
  m(1, 2) = kInf;
  CHECK(ensemble_error(m) == kInf);
}

TEST_CASE("weight moments of the spiked average") {
  const Index m = 7;
  const auto wm = WeightMoments::spiked_average(0.5, m);
  Matrix omega = wm.beta * Matrix::Identity(m, m);
  for (const auto& [c, u] : wm.rank_one) omega += c * u * u.transpose();
  // oracle: average of w w^T over many sampled truths
  Matrix avg = Matrix::Zero(m, m);
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const Vector w = sample_ground_truth(0.5, m, static_cast<std::uint64_t>(i)).weights;
    avg += w * w.transpose();
  }
  avg /= n;
  CHECK((avg - omega).cwiseAbs().maxCoeff() < 0.03);
}
