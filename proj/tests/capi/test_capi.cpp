#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "subridge/subridge.h"

TEST_CASE("version and status names") {
  CHECK(std::string(sr_version()).size() > 0);
  CHECK(std::string(sr_status_name(SR_OK)) == "ok");
  CHECK(std::string(sr_status_name(SR_VALIDATION)) == "validation");
}

TEST_CASE("errors set the thread-local message and leave outputs untouched") {
  sr_covariance* cov = nullptr;
  CHECK(sr_covariance_equicorrelated(-1.0, 0.0, 0.0, 10, &cov) == SR_INVALID_ARGUMENT);
  CHECK(cov == nullptr);
  CHECK(std::string(sr_last_error()).find("s") != std::string::npos);
  CHECK(sr_covariance_equicorrelated(1.0, 0.0, 0.0, 10, nullptr) == SR_INVALID_ARGUMENT);
  CHECK(sr_plan_size(nullptr) == 0);
}

TEST_CASE("covariances, plans and truths") {
  sr_covariance* cov = nullptr;
  REQUIRE(sr_covariance_toeplitz(12, 1.0, 0.5, 0.1, 0.2, &cov) == SR_OK);
  CHECK(sr_covariance_dimension(cov) == 12);

  const int64_t sizes[] = {3, 2};
  const int64_t idx[] = {0, 4, 7, 4, 11};
  sr_plan* plan = nullptr;
  REQUIRE(sr_plan_from_masks(2, sizes, idx, 12, &plan) == SR_OK);
  CHECK(sr_plan_size(plan) == 2);
  CHECK(sr_plan_mask_size(plan, 1) == 2);
  int64_t mask[2];
  REQUIRE(sr_plan_mask(plan, 1, mask) == SR_OK);
  CHECK(mask[0] == 4);
  CHECK(mask[1] == 11);
  double nu[4];
  REQUIRE(sr_plan_fractions(plan, nu) == SR_OK);
  CHECK(nu[0] == doctest::Approx(0.25));
  CHECK(nu[1] == doctest::Approx(1.0 / 12.0));

  sr_plan* sampled = nullptr;
  REQUIRE(sr_plan_sample(SR_PLAN_HOMOGENEOUS, 3, 0.0, 12, 5, nullptr, &sampled) == SR_OK);
  CHECK(sr_plan_mask_size(sampled, 0) == 4);

  sr_truth* truth = nullptr;
  REQUIRE(sr_truth_sample(SR_TRUTH_SPIKED, 1.0, 12, 1, &truth) == SR_OK);
  std::vector<double> w(12);
  REQUIRE(sr_truth_weights(truth, w.data()) == SR_OK);
  for (double v : w) CHECK(v == doctest::Approx(1.0));

  double lambda[] = {0.1, 0.2}, eta[] = {0.1, 0.0};
  double q[2], qh[2], gamma[4], pairwise[4], ens = 0.0;
  REQUIRE(sr_general_solve(cov, plan, lambda, 0.7, q, qh, gamma) == SR_OK);
  CHECK(q[0] > 0.0);
  CHECK(gamma[1] == doctest::Approx(gamma[2]));
  REQUIRE(sr_general_errors(cov, plan, truth, lambda, 0.7, 0.1, eta, pairwise, &ens) == SR_OK);
  CHECK(ens == doctest::Approx((pairwise[0] + pairwise[1] + pairwise[2] + pairwise[3]) / 4.0));

  double sim[4], sim_ens = 0.0;
  REQUIRE(sr_simulate_trial(cov, plan, truth, 0.1, lambda, eta, 20, 3, sim, &sim_ens) == SR_OK);
  CHECK(std::isfinite(sim_ens));

  sr_plan_free(sampled);
  sr_plan_free(plan);
  sr_truth_free(truth);
  sr_covariance_free(cov);
}

TEST_CASE("closed forms") {
  double q = 0.0, qh = 0.0;
  REQUIRE(sr_equicorr_order_params(1.0, 1.0, 1.0, 1.0, &q, &qh) == SR_OK);
  CHECK(q == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0));
  double nu[] = {0.5}, lambda[] = {0.0}, eta[] = {0.0}, pw = 0.0, e = 0.0;
  REQUIRE(sr_equicorr_errors(1.0, 0.0, 0.0, 0.0, 0.0, 1, nu, lambda, eta, 2.0, &pw, &e) == SR_OK);
  CHECK(e == doctest::Approx(2.0 / 3.0));
  double ls = -1.0;
  REQUIRE(sr_optimal_local_regularization(1.0, 0.0, 0.5, 0.0, std::sqrt(0.5), 0.0, 0.0, &ls) == SR_OK);
  CHECK(ls == doctest::Approx(2.0));
  double boundary = 0.0;
  REQUIRE(sr_noise_dominated_boundary(std::sqrt(0.5), 0.0, 0.0, &boundary) == SR_OK);
  CHECK(boundary == doctest::Approx(0.5));
  REQUIRE(sr_noise_dominated_boundary(0.5, 1.5, 0.0, &boundary) == SR_OK);
  CHECK(std::isinf(boundary));
  double ks = 0.0, ke = 0.0;
  REQUIRE(sr_optimal_k(1e3, 0.0, 0.0, 0.5, 1.0, SR_REG_LOCALLY_OPTIMAL, 50, 0.0, &ks, &ke) == SR_OK);
  CHECK(std::isinf(ks));
  const double fr[] = {0.3, 0.7};
  double inf_err = 0.0;
  REQUIRE(sr_infinite_data_error(2, fr, 1.0, 0.0, &inf_err) == SR_OK);
  CHECK(inf_err == doctest::Approx(0.25));
}

TEST_CASE("features and classifiers") {
  const double x[] = {1, 0, 0, 1, 1, 0.1, 0.1, 1};
  const int32_t y[] = {0, 1, 0, 1};
  sr_features* data = nullptr;
  REQUIRE(sr_features_create(4, 2, x, y, 2, &data) == SR_OK);
  CHECK(sr_features_rows(data) == 4);
  CHECK(sr_features_classes(data) == 2);
  const int64_t sizes[] = {2};
  const int64_t idx[] = {0, 1};
  sr_plan* plan = nullptr;
  REQUIRE(sr_plan_from_masks(1, sizes, idx, 2, &plan) == SR_OK);
  const double lambda[] = {0.01}, eta[] = {0.0};
  sr_classifier* clf = nullptr;
  REQUIRE(sr_classifier_train(data, plan, lambda, eta, 1, &clf) == SR_OK);
  int32_t pred[4];
  REQUIRE(sr_classifier_predict(clf, 4, x, 2, pred) == SR_OK);
  for (int i = 0; i < 4; ++i) CHECK(pred[i] == y[i]);
  double err = 1.0;
  REQUIRE(sr_classifier_error(clf, data, 2, &err) == SR_OK);
  CHECK(err == 0.0);
  const int32_t bad[] = {0, 1, 2, 0};
  sr_features* broken = nullptr;
  CHECK(sr_features_create(4, 2, x, bad, 2, &broken) == SR_INVALID_ARGUMENT);
  sr_features* missing = nullptr;
  CHECK(sr_features_load("/nonexistent/file.csv", "auto", 0, 0, &missing) == SR_IO);
  sr_classifier_free(clf);
  sr_plan_free(plan);
  sr_features_free(data);
}

TEST_CASE("configs and grids") {
  const char* config = R"({"kind": "phase", "reg_mode": "ridgeless",
    "axes": [{"name": "H", "values": [0.0, 0.5]}, {"name": "alpha", "values": [0.2, 2.0]}],
    "fixed": {"rho": 0.5}, "k_max": 8})";
  char* messages = nullptr;
  CHECK(sr_config_validate(config, &messages) == SR_OK);
  CHECK(sr_config_validate(R"({"kind": "phase", "k_max": 0})", &messages) == SR_VALIDATION);
  REQUIRE(messages != nullptr);
  CHECK(std::string(messages).find("/k_max") != std::string::npos);
  sr_string_free(messages);

  sr_run_options opts;
  sr_run_options_init(&opts);
  opts.threads = 1;
  sr_grid* grid = nullptr;
  REQUIRE(sr_run_config(config, &opts, &grid) == SR_OK);
  CHECK(sr_grid_cell_count(grid) == 4);
  CHECK(sr_grid_axis_count(grid) == 2);
  CHECK(std::string(sr_grid_axis_name(grid, 1)) == "alpha");
  CHECK(sr_grid_axis_value(grid, 1, 1) == 2.0);
  CHECK(std::string(sr_grid_column_name(grid, 0)) == "k_star");
  double k = 0.0;
  REQUIRE(sr_grid_value(grid, 1, "k_star", &k) == SR_OK);
  CHECK(k >= 1.0);
  CHECK(sr_grid_value(grid, 1, "nope", &k) == SR_INVALID_ARGUMENT);
  CHECK(std::string(sr_grid_cell_error(grid, 0)).empty());
  CHECK(std::string(sr_grid_config_hash(grid)).size() == 16);

  for (const char* fmt : {"csv", "json"}) {
    char* text = nullptr;
    REQUIRE(sr_grid_to_string(grid, fmt, &text) == SR_OK);
    sr_grid* back = nullptr;
    REQUIRE(sr_grid_parse(text, fmt, &back) == SR_OK);
    CHECK(sr_grid_equal(grid, back) == 1);
    sr_grid_free(back);
    sr_string_free(text);
  }
  const std::string path = "capi_grid_roundtrip.json";
  REQUIRE(sr_grid_emit(grid, "json", path.c_str()) == SR_OK);
  sr_grid* loaded = nullptr;
  REQUIRE(sr_grid_load(path.c_str(), &loaded) == SR_OK);
  CHECK(sr_grid_equal(grid, loaded) == 1);
  std::remove(path.c_str());
  sr_grid_free(loaded);

  char* op = nullptr;
  CHECK(sr_grid_order_params(grid, &op) == SR_OK);
  CHECK(op == nullptr);

  sr_grid* none = nullptr;
  CHECK(sr_run_config("{", &opts, &none) == SR_VALIDATION);
  CHECK(none == nullptr);
  sr_grid_free(grid);
}
