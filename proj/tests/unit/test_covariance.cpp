#include <doctest.h>

#include <numeric>
#include <set>

#include "subridge/covariance.hpp"
#include "subridge/serialize.hpp"

using namespace subridge;

TEST_CASE("equicorrelated builder: isotropic and rank-one corners") {
  auto iso = build_equicorrelated_covariance(1.0, 0.0, 0.0, 3);
  CHECK(iso.signal_matrix().isApprox(Matrix::Identity(3, 3)));
  CHECK(iso.noise_matrix().isZero());

  auto rank_one = build_equicorrelated_covariance(2.0, 1.0, 0.0, 2);
  CHECK(rank_one.signal_matrix().isApprox(Matrix::Constant(2, 2, 2.0)));
}

TEST_CASE("equicorrelated builder: spectrum of the 4x4 instance") {
  auto cov = build_equicorrelated_covariance(1.0, 0.6, 0.1, 4);
  const Matrix& s = cov.signal_matrix();
  CHECK(s(0, 0) == doctest::Approx(1.0));
  CHECK(s(0, 3) == doctest::Approx(0.6));
  CHECK(cov.noise_matrix().isApprox(0.1 * Matrix::Identity(4, 4)));
  // frozen from a dense symmetric eigensolver run on the explicit matrix
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  CHECK(eig.eigenvalues()[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(eig.eigenvalues()[2] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(eig.eigenvalues()[3] == doctest::Approx(2.8).epsilon(1e-12));
}

TEST_CASE("equicorrelated builder rejects bad parameters") {
  CHECK_THROWS_AS(build_equicorrelated_covariance(0.0, 0.5, 0.0, 3), InvalidArgument);
  CHECK_THROWS_AS(build_equicorrelated_covariance(1.0, 1.5, 0.0, 3), InvalidArgument);
  CHECK_THROWS_AS(build_equicorrelated_covariance(1.0, -0.1, 0.0, 3), InvalidArgument);
  CHECK_THROWS_AS(build_equicorrelated_covariance(1.0, 0.5, -1.0, 3), InvalidArgument);
}

TEST_CASE("explicit covariances are validated") {
  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(CovarianceSpec::from_matrices(asym, Matrix::Zero(3, 3)), InvalidArgument);
  Matrix indefinite = Matrix::Identity(2, 2);
  indefinite(0, 1) = indefinite(1, 0) = 2.0;
  CHECK_THROWS_AS(CovarianceSpec::from_matrices(indefinite, Matrix::Zero(2, 2)), InvalidArgument);
  CHECK_THROWS_AS(CovarianceSpec::from_matrices(Matrix::Identity(3, 3), Matrix::Zero(2, 2)), Error);
}

TEST_CASE("toeplitz covariance entries") {
  auto cov = CovarianceSpec::toeplitz(5, 1.0, 0.8, 0.1, 0.3);
  CHECK(cov.signal(0, 2) == doctest::Approx(0.64));
  CHECK(cov.noise(1, 4) == doctest::Approx(0.1 * 0.027));
  CHECK(cov.signal(3, 3) == doctest::Approx(1.0));
}

TEST_CASE("equicorrelated fast paths agree with the dense form") {
  auto fast = CovarianceSpec::equicorrelated(1.3, 0.4, 0.2, 9);
  auto dense = fast.to_explicit();
  Mask rows{0, 3, 7}, cols{1, 3, 8};
  CHECK(fast.signal_block(rows, cols).isApprox(dense.signal_block(rows, cols)));
  CHECK(fast.total_block(rows, rows).isApprox(dense.total_block(rows, rows)));
  Vector v = Vector::LinSpaced(9, -1.0, 2.0);
  CHECK(fast.apply_signal(v).isApprox(dense.apply_signal(v)));
  CHECK(fast.apply_noise(v).isApprox(dense.apply_noise(v)));
}

TEST_CASE("ground truth: full alignment gives the all-ones vector") {
  auto t = sample_ground_truth(1.0, 5, 123);
  CHECK(t.weights.isApprox(Vector::Ones(5)));
}

TEST_CASE("ground truth: mean equals rho exactly") {
  auto t = sample_ground_truth(0.3, 1000, 3);
  CHECK(t.weights.mean() == doctest::Approx(0.3).epsilon(1e-12));
  auto t0 = sample_ground_truth(0.0, 1000, 9);
  CHECK(std::abs(t0.weights.sum()) < 1e-10);
}

TEST_CASE("ground truth: moments over many seeds") {
  const Index m = 1000;
  int mean_ok = 0, norm_ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto t = sample_ground_truth(0.0, m, seed);
    if (std::abs(t.weights.mean()) <= 5.0 / std::sqrt(double(m))) ++mean_ok;
    if (std::abs(t.weights.squaredNorm() / m - 1.0) <= 0.15) ++norm_ok;
  }
  CHECK(mean_ok == 100);
  CHECK(norm_ok == 100);
  auto t7 = sample_ground_truth(0.0, m, 7);
  CHECK(std::abs(t7.weights.squaredNorm() / m - 1.0) <= 0.15);
}

TEST_CASE("ground truth is deterministic in the seed") {
  CHECK(sample_ground_truth(0.4, 50, 11).weights == sample_ground_truth(0.4, 50, 11).weights);
  CHECK(sample_ground_truth(0.4, 50, 11).weights != sample_ground_truth(0.4, 50, 12).weights);
}

TEST_CASE("homogeneous plan: equal partition") {
  auto plan = sample_subsampling_plan(PlanStrategy::homogeneous, 4, 0.0, 100, 5);
  CHECK(plan.exclusive);
  CHECK(plan.is_partition());
  for (Index r = 0; r < 4; ++r) {
    CHECK(plan.readout_size(r) == 25);
    CHECK(plan.fractions(r, r) == doctest::Approx(0.25));
    for (Index q = 0; q < 4; ++q)
      if (q != r) CHECK(plan.fractions(r, q) == 0.0);
  }
  auto uneven = sample_subsampling_plan(PlanStrategy::homogeneous, 3, 0.0, 10, 5);
  std::vector<Index> sizes{uneven.readout_size(0), uneven.readout_size(1), uneven.readout_size(2)};
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<Index>{3, 3, 4});
}

TEST_CASE("plans: stored fractions equal a recomputation from the masks") {
  for (auto strategy : {PlanStrategy::homogeneous, PlanStrategy::heterogeneous, PlanStrategy::replacement}) {
    auto plan = sample_subsampling_plan(strategy, 5, 0.1, 200, 17,
                                        strategy == PlanStrategy::replacement
                                            ? std::optional<std::vector<double>>({0.2, 0.3, 0.4, 0.5, 0.6})
                                            : std::nullopt);
    CHECK(plan.fractions == fraction_matrix(plan.masks, 200));
    CHECK(plan.fractions.isApprox(plan.fractions.transpose()));
    for (Index r = 0; r < 5; ++r)
      for (Index q = 0; q < 5; ++q)
        CHECK(plan.fractions(r, q) <= std::min(plan.fractions(r, r), plan.fractions(q, q)));
  }
}

TEST_CASE("heterogeneous plan: partition, minimum size, determinism") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto plan = sample_subsampling_plan(PlanStrategy::heterogeneous, 10, 0.08, 60, seed);
    CHECK(plan.is_partition());
    for (Index r = 0; r < 10; ++r) CHECK(plan.readout_size(r) >= 1);
  }
  auto a = sample_subsampling_plan(PlanStrategy::heterogeneous, 6, 0.1, 300, 42);
  auto b = sample_subsampling_plan(PlanStrategy::heterogeneous, 6, 0.1, 300, 42);
  CHECK(a.masks == b.masks);
}

TEST_CASE("heterogeneous fractions sum to one before rounding") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto f = sample_heterogeneous_fractions(10, 0.05, seed);
    CHECK(std::accumulate(f.begin(), f.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("heterogeneous plan: mean fraction over many draws") {
  // oracle: Monte-Carlo mean of nu_rr over 10^4 draws of the sampler
  const int draws = 10000;
  double sum = 0.0;
  for (int d = 0; d < draws; ++d) {
    auto plan = sample_subsampling_plan(PlanStrategy::heterogeneous, 10, 0.5 / 10, 5000,
                                        static_cast<std::uint64_t>(d));
    CHECK(plan.fractions.diagonal().sum() == doctest::Approx(1.0));
    sum += plan.fractions(0, 0);
  }
  CHECK(std::abs(sum / draws - 0.1) < 0.005);
}

TEST_CASE("heterogeneous plan: vanishing spread recovers the even split") {
  int even = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto plan = sample_subsampling_plan(PlanStrategy::heterogeneous, 2, 1e-4, 10, seed);
    if (plan.readout_size(0) == 5 && plan.readout_size(1) == 5) ++even;
  }
  CHECK(even == 200);
}

TEST_CASE("plan sampler rejects invalid requests") {
  CHECK_THROWS_AS(sample_subsampling_plan(PlanStrategy::heterogeneous, 3, 0.0, 30, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_subsampling_plan(PlanStrategy::homogeneous, 31, 0.0, 30, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_subsampling_plan(PlanStrategy::homogeneous, 0, 0.0, 30, 1), InvalidArgument);
}

TEST_CASE("replacement plan: requested sizes, overlaps allowed") {
  auto plan = sample_subsampling_plan(PlanStrategy::replacement, 3, 0.0, 500, 8,
                                      std::vector<double>{0.2, 0.4, 0.6});
  CHECK(plan.readout_size(0) == 100);
  CHECK(plan.readout_size(1) == 200);
  CHECK(plan.readout_size(2) == 300);
  CHECK_FALSE(plan.exclusive);
  CHECK(plan.fractions(1, 2) > 0.0);
}

TEST_CASE("apportionment preserves the total and the minimum") {
  std::vector<double> w{0.001, 0.5, 0.499};
  auto n = apportion(w, 10);
  CHECK(std::accumulate(n.begin(), n.end(), Index{0}) == 10);
  CHECK(n[0] >= 1);
  std::vector<double> even{0.25, 0.25, 0.25, 0.25};
  CHECK(apportion(even, 100) == std::vector<Index>{25, 25, 25, 25});
}

TEST_CASE("plans from explicit masks validate their input") {
  CHECK_THROWS_AS(SubsamplingPlan::from_masks({{0, 1}, {}}, 4), InvalidArgument);
  CHECK_THROWS_AS(SubsamplingPlan::from_masks({{0, 4}}, 4), InvalidArgument);
  CHECK_THROWS_AS(SubsamplingPlan::from_masks({{1, 1}}, 4), InvalidArgument);
  auto plan = SubsamplingPlan::from_masks({{3, 0}, {1, 2}}, 4);
  CHECK(plan.masks[0] == Mask{0, 3});
  CHECK(plan.is_partition());
}

TEST_CASE("plans and truths round-trip through JSON") {
  auto plan = sample_subsampling_plan(PlanStrategy::heterogeneous, 4, 0.1, 40, 3);
  auto back = plan_from_json(Json::parse(to_json(plan).dump()));
  CHECK(back.masks == plan.masks);
  CHECK(back.fractions == plan.fractions);
  CHECK(back.seed == plan.seed);
  CHECK(back.strategy == PlanStrategy::heterogeneous);

  auto truth = sample_ground_truth(0.2, 30, 4);
  auto t2 = truth_from_json(Json::parse(to_json(truth).dump()));
  CHECK(t2.weights == truth.weights);
  CHECK(t2.rho == truth.rho);
}
