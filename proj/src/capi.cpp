#include "subridge/subridge.h"

#include <cstring>
#include <fstream>
#include <new>
#include <sstream>

#include "subridge/sweep.hpp"

using namespace subridge;

struct sr_covariance {
  CovarianceSpec spec;
};
struct sr_plan {
  SubsamplingPlan plan;
};
struct sr_truth {
  GroundTruth truth;
};
struct sr_features {
  FeatureDataset data;
};
struct sr_classifier {
  ClassifierEnsemble ensemble;
};
struct sr_grid {
  SweepGrid grid;
  std::optional<Json> order_params;
};

namespace {

thread_local std::string g_last_error;

sr_status fail(sr_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class Fn>
sr_status guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SR_OK;
  } catch (const Error& e) {
    return fail(static_cast<sr_status>(e.code()), e.what());
  } catch (const Json::exception& e) {
    return fail(SR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SR_INTERNAL, e.what());
  } catch (...) {
    return fail(SR_INTERNAL, "unknown exception");
  }
}

void need(const void* p, const char* name) {
  if (!p) throw InvalidArgument(std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Matrix read_matrix(const double* data, Index rows, Index cols) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data, rows, cols);
}

void write_matrix(const Matrix& m, double* out) {
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out, m.rows(), m.cols()) = m;
}

Vector read_vector(const double* data, Index n) { return Eigen::Map<const Vector>(data, n); }

PlanStrategy strategy_of(sr_plan_strategy s) {
  switch (s) {
    case SR_PLAN_HOMOGENEOUS: return PlanStrategy::homogeneous;
    case SR_PLAN_HETEROGENEOUS: return PlanStrategy::heterogeneous;
    case SR_PLAN_REPLACEMENT: return PlanStrategy::replacement;
  }
  throw InvalidArgument("unknown plan strategy");
}

RegMode mode_of(sr_reg_mode m) {
  switch (m) {
    case SR_REG_RIDGELESS: return RegMode::ridgeless;
    case SR_REG_LOCALLY_OPTIMAL: return RegMode::locally_optimal;
    case SR_REG_EXPLICIT: return RegMode::explicit_lambda;
  }
  throw InvalidArgument("unknown regularization mode");
}

const SweepGrid& grid_of(const sr_grid* g) {
  need(g, "grid");
  return g->grid;
}

}  // namespace

extern "C" {

const char* sr_version(void) { return kVersion; }

const char* sr_status_name(sr_status status) {
  switch (status) {
    case SR_OK: return "ok";
    case SR_INVALID_ARGUMENT: return "invalid_argument";
    case SR_VALIDATION: return "validation";
    case SR_NON_CONVERGENCE: return "non_convergence";
    case SR_SINGULAR_RESOLVENT: return "singular_resolvent";
    case SR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case SR_IO: return "io";
    case SR_PARSE: return "parse";
    case SR_NUMERICAL: return "numerical";
    case SR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sr_last_error(void) { return g_last_error.c_str(); }

void sr_string_free(char* text) { std::free(text); }

sr_status sr_covariance_equicorrelated(double s, double c, double omega2, int64_t dimension,
                                       sr_covariance** out) {
  return guard([&] {
    need(out, "out");
    *out = new sr_covariance{CovarianceSpec::equicorrelated(s, c, omega2, dimension)};
  });
}

sr_status sr_covariance_toeplitz(int64_t dimension, double signal_scale, double signal_decay,
                                 double noise_scale, double noise_decay, sr_covariance** out) {
  return guard([&] {
    need(out, "out");
    *out = new sr_covariance{
        CovarianceSpec::toeplitz(dimension, signal_scale, signal_decay, noise_scale, noise_decay)};
  });
}

sr_status sr_covariance_from_matrices(int64_t dimension, const double* signal, const double* noise,
                                      sr_covariance** out) {
  return guard([&] {
    need(out, "out");
    need(signal, "signal");
    require(dimension >= 1, "dimension must be >= 1");
    Matrix s = read_matrix(signal, dimension, dimension);
    Matrix n = noise ? read_matrix(noise, dimension, dimension) : Matrix::Zero(dimension, dimension);
    *out = new sr_covariance{CovarianceSpec::from_matrices(std::move(s), std::move(n))};
  });
}

int64_t sr_covariance_dimension(const sr_covariance* cov) { return cov ? cov->spec.dimension() : 0; }

void sr_covariance_free(sr_covariance* cov) { delete cov; }

sr_status sr_plan_sample(sr_plan_strategy strategy, int64_t k, double sigma, int64_t dimension,
                         uint64_t seed, const double* fractions, sr_plan** out) {
  return guard([&] {
    need(out, "out");
    std::optional<std::vector<double>> f;
    if (fractions) f = std::vector<double>(fractions, fractions + std::max<int64_t>(k, 0));
    *out = new sr_plan{sample_subsampling_plan(strategy_of(strategy), k, sigma, dimension, seed, f)};
  });
}

sr_status sr_plan_from_masks(int64_t k, const int64_t* sizes, const int64_t* indices, int64_t dimension,
                             sr_plan** out) {
  return guard([&] {
    need(out, "out");
    need(sizes, "sizes");
    need(indices, "indices");
    require(k >= 1, "k must be >= 1");
    std::vector<Mask> masks(static_cast<std::size_t>(k));
    std::size_t offset = 0;
    for (int64_t r = 0; r < k; ++r) {
      require(sizes[r] >= 0, "mask sizes must be >= 0");
      masks[static_cast<std::size_t>(r)].assign(indices + offset, indices + offset + sizes[r]);
      offset += static_cast<std::size_t>(sizes[r]);
    }
    *out = new sr_plan{SubsamplingPlan::from_masks(std::move(masks), dimension)};
  });
}

int64_t sr_plan_size(const sr_plan* plan) { return plan ? plan->plan.size() : 0; }

int64_t sr_plan_mask_size(const sr_plan* plan, int64_t r) {
  if (!plan || r < 0 || r >= plan->plan.size()) return -1;
  return plan->plan.readout_size(r);
}

sr_status sr_plan_mask(const sr_plan* plan, int64_t r, int64_t* indices) {
  return guard([&] {
    need(plan, "plan");
    need(indices, "indices");
    require(r >= 0 && r < plan->plan.size(), "readout index out of range");
    const Mask& m = plan->plan.masks[static_cast<std::size_t>(r)];
    std::copy(m.begin(), m.end(), indices);
  });
}

sr_status sr_plan_fractions(const sr_plan* plan, double* nu) {
  return guard([&] {
    need(plan, "plan");
    need(nu, "nu");
    write_matrix(plan->plan.fractions, nu);
  });
}

void sr_plan_free(sr_plan* plan) { delete plan; }

sr_status sr_truth_sample(sr_truth_scheme scheme, double rho, int64_t dimension, uint64_t seed,
                          sr_truth** out) {
  return guard([&] {
    need(out, "out");
    TruthSpec spec;
    spec.scheme = scheme == SR_TRUTH_SPIKED ? TruthScheme::spiked : TruthScheme::isotropic;
    spec.rho = rho;
    require(dimension >= 1, "dimension must be >= 1");
    *out = new sr_truth{realize_truth(spec, dimension, seed)};
  });
}

sr_status sr_truth_from_weights(int64_t dimension, const double* weights, sr_truth** out) {
  return guard([&] {
    need(out, "out");
    need(weights, "weights");
    require(dimension >= 1, "dimension must be >= 1");
    GroundTruth t;
    t.weights = read_vector(weights, dimension);
    *out = new sr_truth{std::move(t)};
  });
}

sr_status sr_truth_weights(const sr_truth* truth, double* weights) {
  return guard([&] {
    need(truth, "truth");
    need(weights, "weights");
    Eigen::Map<Vector>(weights, truth->truth.weights.size()) = truth->truth.weights;
  });
}

void sr_truth_free(sr_truth* truth) { delete truth; }

sr_status sr_general_solve(const sr_covariance* cov, const sr_plan* plan, const double* lambda, double alpha,
                           double* q, double* q_hat, double* gamma) {
  return guard([&] {
    need(cov, "cov");
    need(plan, "plan");
    need(lambda, "lambda");
    const Index k = plan->plan.size();
    const OrderParameters p = solve_saddle_point(cov->spec, plan->plan, read_vector(lambda, k), alpha);
    if (q) Eigen::Map<Vector>(q, k) = p.q;
    if (q_hat) Eigen::Map<Vector>(q_hat, k) = p.q_hat;
    if (gamma) write_matrix(p.gamma, gamma);
  });
}

sr_status sr_general_errors(const sr_covariance* cov, const sr_plan* plan, const sr_truth* truth,
                            const double* lambda, double alpha, double zeta, const double* eta,
                            double* pairwise, double* ensemble) {
  return guard([&] {
    need(cov, "cov");
    need(plan, "plan");
    need(truth, "truth");
    need(lambda, "lambda");
    need(eta, "eta");
    const Index k = plan->plan.size();
    if (truth->truth.weights.size() != cov->spec.dimension())
      throw DimensionMismatch("truth weights do not match the covariance dimension");
    const GeneralTheory theory(cov->spec, plan->plan);
    const OrderParameters p = theory.solve(read_vector(lambda, k), alpha);
    const ErrorMatrix e =
        theory.errors(p, WeightMoments::from_weights(truth->truth.weights), zeta, read_vector(eta, k));
    if (pairwise) write_matrix(e.pairwise, pairwise);
    if (ensemble) *ensemble = e.ensemble;
  });
}

sr_status sr_equicorr_order_params(double a, double nu, double alpha, double lambda, double* q,
                                   double* q_hat) {
  return guard([&] {
    const ClosedOrderParams p = solve_order_params_closed_form(a, nu, alpha, lambda);
    if (q) *q = p.q;
    if (q_hat) *q_hat = p.q_hat;
  });
}

sr_status sr_equicorr_errors(double s, double c, double omega2, double zeta, double rho, int64_t k,
                             const double* nu, const double* lambda, const double* eta, double alpha,
                             double* pairwise, double* ensemble) {
  return guard([&] {
    need(nu, "nu");
    need(lambda, "lambda");
    need(eta, "eta");
    require(k >= 1, "k must be >= 1");
    EquiTask task{s, c, omega2, zeta, rho, read_vector(eta, k), read_vector(lambda, k), alpha,
                  read_matrix(nu, k, k)};
    const ErrorMatrix e = ensemble_error_equicorr(task);
    if (pairwise) write_matrix(e.pairwise, pairwise);
    if (ensemble) *ensemble = e.ensemble;
  });
}

sr_status sr_optimal_local_regularization(double s, double c, double nu, double rho, double zeta, double eta,
                                          double omega2, double* lambda_star) {
  return guard([&] {
    need(lambda_star, "lambda_star");
    *lambda_star = optimal_local_regularization(s, c, nu, rho, zeta, eta, omega2).value;
  });
}

sr_status sr_optimal_k(double H, double W, double Z, double rho, double alpha, sr_reg_mode mode, int k_max,
                       double Lambda, double* k_star, double* error) {
  return guard([&] {
    const KStar best = optimal_k(H, W, Z, rho, alpha, mode_of(mode), k_max, Lambda);
    if (k_star) *k_star = best.k;
    if (error) *error = best.error;
  });
}

sr_status sr_noise_dominated_boundary(double rho, double H, double W, double* alpha) {
  return guard([&] {
    need(alpha, "alpha");
    const auto b = noise_dominated_boundary(rho, H, W);
    *alpha = b ? *b : kInf;
  });
}

sr_status sr_infinite_data_error(int k, const double* nu_diag, double s, double eta, double* error) {
  return guard([&] {
    need(nu_diag, "nu_diag");
    need(error, "error");
    require(k >= 1, "k must be >= 1");
    *error = infinite_data_error(k, std::span<const double>(nu_diag, static_cast<std::size_t>(k)), s, eta);
  });
}

sr_status sr_simulate_trial(const sr_covariance* cov, const sr_plan* plan, const sr_truth* truth, double zeta,
                            const double* lambda, const double* eta, int64_t P, uint64_t seed,
                            double* pairwise, double* ensemble) {
  return guard([&] {
    need(cov, "cov");
    need(plan, "plan");
    need(truth, "truth");
    need(lambda, "lambda");
    need(eta, "eta");
    require(P >= 1, "P must be >= 1");
    const Index k = plan->plan.size();
    const Vector lam = read_vector(lambda, k), et = read_vector(eta, k);
    const SyntheticDataset data = generate_dataset(cov->spec, truth->truth, zeta, P, seed, false);
    const TrainedEnsemble trained = train_ensemble(data, plan->plan, lam, et, seed);
    const ErrorMatrix e = exact_generalization_error(trained, cov->spec, truth->truth, et);
    if (pairwise) write_matrix(e.pairwise, pairwise);
    if (ensemble) *ensemble = e.ensemble;
  });
}

sr_status sr_features_load(const char* path, const char* format, int classes, int center, sr_features** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    LoadOptions o;
    o.format = feature_format_from_string(format ? format : "auto");
    o.classes = classes;
    o.center = center != 0;
    *out = new sr_features{load_feature_dataset(path, o)};
  });
}

sr_status sr_features_create(int64_t n, int64_t dimension, const double* features, const int32_t* labels,
                             int classes, sr_features** out) {
  return guard([&] {
    need(features, "features");
    need(labels, "labels");
    need(out, "out");
    require(n >= 1 && dimension >= 1, "dataset needs at least one row and one column");
    std::vector<int> l(labels, labels + n);
    *out = new sr_features{make_feature_dataset(read_matrix(features, n, dimension), std::move(l), classes)};
  });
}

sr_status sr_features_save(const sr_features* data, const char* path, const char* format) {
  return guard([&] {
    need(data, "data");
    need(path, "path");
    save_feature_dataset(data->data, path, feature_format_from_string(format ? format : "auto"));
  });
}

int64_t sr_features_rows(const sr_features* data) { return data ? data->data.size() : 0; }
int64_t sr_features_dimension(const sr_features* data) { return data ? data->data.dimension() : 0; }
int sr_features_classes(const sr_features* data) { return data ? data->data.classes : 0; }
void sr_features_free(sr_features* data) { delete data; }

sr_status sr_classifier_train(const sr_features* train, const sr_plan* plan, const double* lambda,
                              const double* eta, uint64_t seed, sr_classifier** out) {
  return guard([&] {
    need(train, "train");
    need(plan, "plan");
    need(lambda, "lambda");
    need(eta, "eta");
    need(out, "out");
    const Index k = plan->plan.size();
    *out = new sr_classifier{
        train_classifier_ensemble(train->data, plan->plan, read_vector(lambda, k), read_vector(eta, k), seed)};
  });
}

sr_status sr_classifier_predict(const sr_classifier* clf, int64_t n, const double* features, uint64_t eval_seed,
                                int32_t* labels) {
  return guard([&] {
    need(clf, "clf");
    need(features, "features");
    need(labels, "labels");
    require(n >= 0, "n must be >= 0");
    const Matrix x = read_matrix(features, n, clf->ensemble.plan.dimension);
    const std::vector<int> pred = majority_vote_predict(clf->ensemble, x, eval_seed);
    std::copy(pred.begin(), pred.end(), labels);
  });
}

sr_status sr_classifier_error(const sr_classifier* clf, const sr_features* test, uint64_t eval_seed,
                              double* error) {
  return guard([&] {
    need(clf, "clf");
    need(test, "test");
    need(error, "error");
    *error = classification_error(clf->ensemble, test->data, eval_seed);
  });
}

void sr_classifier_free(sr_classifier* clf) { delete clf; }

void sr_run_options_init(sr_run_options* options) {
  if (!options) return;
  options->command = "auto";
  options->has_seed = 0;
  options->seed = 0;
  options->threads = 0;
  options->full_matrix = 0;
  options->dump_order_params = 0;
}

sr_status sr_config_validate(const char* config_json, char** messages) {
  if (messages) *messages = nullptr;
  std::vector<std::string> problems;
  const sr_status st = guard([&] {
    need(config_json, "config_json");
    problems = validate_config(config_json);
  });
  if (st != SR_OK) return st;
  if (problems.empty()) return SR_OK;
  std::string joined;
  for (const auto& p : problems) joined += p + "\n";
  g_last_error = joined.substr(0, joined.size() - 1);
  if (messages) *messages = dup_string(joined);
  return SR_VALIDATION;
}

sr_status sr_run_config(const char* config_json, const sr_run_options* options, sr_grid** out) {
  return guard([&] {
    need(config_json, "config_json");
    need(out, "out");
    *out = nullptr;
    RunOptions o;
    if (options) {
      o.command = options->command ? options->command : "auto";
      if (options->has_seed) o.seed = options->seed;
      o.threads = options->threads;
      o.full_matrix = options->full_matrix != 0;
      o.dump_order_params = options->dump_order_params != 0;
    }
    SweepResult r = run_config(config_json, o);
    *out = new sr_grid{std::move(r.grid), std::move(r.order_params)};
  });
}

sr_status sr_grid_emit(const sr_grid* grid, const char* format, const char* path) {
  return guard([&] {
    need(path, "path");
    emit(grid_of(grid), grid_format_from_string(format ? format : "csv"), path);
  });
}

sr_status sr_grid_to_string(const sr_grid* grid, const char* format, char** out) {
  return guard([&] {
    need(out, "out");
    *out = dup_string(emit_string(grid_of(grid), grid_format_from_string(format ? format : "csv")));
  });
}

sr_status sr_grid_parse(const char* text, const char* format, sr_grid** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new sr_grid{parse_grid(text, grid_format_from_string(format ? format : "csv")), std::nullopt};
  });
}

sr_status sr_grid_load(const char* path, sr_grid** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new sr_grid{load_grid(path), std::nullopt};
  });
}

sr_status sr_grid_order_params(const sr_grid* grid, char** out) {
  return guard([&] {
    need(grid, "grid");
    need(out, "out");
    *out = grid->order_params ? dup_string(grid->order_params->dump(2) + "\n") : nullptr;
  });
}

size_t sr_grid_cell_count(const sr_grid* grid) { return grid ? grid->grid.cell_count() : 0; }
size_t sr_grid_failed_count(const sr_grid* grid) { return grid ? grid->grid.failed_count() : 0; }
size_t sr_grid_axis_count(const sr_grid* grid) { return grid ? grid->grid.axes.size() : 0; }

const char* sr_grid_axis_name(const sr_grid* grid, size_t axis) {
  if (!grid || axis >= grid->grid.axes.size()) return nullptr;
  return grid->grid.axes[axis].name.c_str();
}

size_t sr_grid_axis_length(const sr_grid* grid, size_t axis) {
  if (!grid || axis >= grid->grid.axes.size()) return 0;
  return grid->grid.axes[axis].values.size();
}

double sr_grid_axis_value(const sr_grid* grid, size_t axis, size_t i) {
  if (!grid || axis >= grid->grid.axes.size() || i >= grid->grid.axes[axis].values.size())
    return std::numeric_limits<double>::quiet_NaN();
  return grid->grid.axes[axis].values[i];
}

size_t sr_grid_column_count(const sr_grid* grid) { return grid ? grid->grid.columns.size() : 0; }

const char* sr_grid_column_name(const sr_grid* grid, size_t column) {
  if (!grid || column >= grid->grid.columns.size()) return nullptr;
  return grid->grid.columns[column].c_str();
}

sr_status sr_grid_value(const sr_grid* grid, size_t cell, const char* column, double* value) {
  return guard([&] {
    need(column, "column");
    need(value, "value");
    const SweepGrid& g = grid_of(grid);
    require(cell < g.cell_count(), "cell index out of range");
    *value = g.at(cell, column);
  });
}

const char* sr_grid_cell_error(const sr_grid* grid, size_t cell) {
  if (!grid || cell >= grid->grid.errors.size()) return nullptr;
  return grid->grid.errors[cell].c_str();
}

const char* sr_grid_config_hash(const sr_grid* grid) {
  return grid ? grid->grid.provenance.config_hash.c_str() : nullptr;
}

int sr_grid_equal(const sr_grid* a, const sr_grid* b) {
  if (!a || !b) return 0;
  return grids_equal(a->grid, b->grid) ? 1 : 0;
}

void sr_grid_free(sr_grid* grid) { delete grid; }

}  // extern "C"
