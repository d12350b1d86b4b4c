#include "subridge/simulator.hpp"

#include <algorithm>
#include <numeric>

#include "subridge/linalg.hpp"
#include "subridge/parallel.hpp"
#include "subridge/rng.hpp"

namespace subridge {

namespace {

bool is_zero(const Matrix& m) { return m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0; }

Matrix restrict_columns(const Matrix& data, const Mask& mask, double scale) {
  Matrix out(data.rows(), static_cast<Index>(mask.size()));
  for (Index j = 0; j < out.cols(); ++j)
    out.col(j) = scale * data.col(mask[static_cast<std::size_t>(j)]);
  return out;
}

// u_r = A_r^T w_r / sqrt(nu_rr), the readout embedded back into R^M.
Vector embed(const Vector& w, const Mask& mask, Index dimension) {
  const double scale = std::sqrt(static_cast<double>(dimension) / static_cast<double>(mask.size()));
  Vector u = Vector::Zero(dimension);
  for (std::size_t i = 0; i < mask.size(); ++i) u[mask[i]] = scale * w[static_cast<Index>(i)];
  return u;
}

Matrix pairwise_from_weights(const std::vector<Vector>& weights, const SubsamplingPlan& plan,
                             const CovarianceSpec& cov, const Vector& truth, const Vector& eta) {
  const Index k = plan.size();
  const Index m = cov.dimension();
  std::vector<Vector> u(static_cast<std::size_t>(k)), sig_d(static_cast<std::size_t>(k)),
      noise_u(static_cast<std::size_t>(k));
  std::vector<Vector> d(static_cast<std::size_t>(k));
  for (Index r = 0; r < k; ++r) {
    const auto i = static_cast<std::size_t>(r);
    u[i] = embed(weights[i], plan.masks[i], m);
    d[i] = u[i] - truth;
    sig_d[i] = cov.apply_signal(d[i]);
    noise_u[i] = cov.apply_noise(u[i]);
  }
  Matrix pairwise(k, k);
  for (Index r = 0; r < k; ++r)
    for (Index rp = r; rp < k; ++rp) {
      const auto i = static_cast<std::size_t>(r), j = static_cast<std::size_t>(rp);
      double e = (d[i].dot(sig_d[j]) + u[i].dot(noise_u[j])) / static_cast<double>(m);
      if (r == rp) e += eta[r] * eta[r];
      pairwise(r, rp) = pairwise(rp, r) = e;
    }
  return pairwise;
}

Vector broadcast_eta(const Vector& eta, Index k) {
  if (eta.size() == 0) return Vector::Zero(k);
  if (eta.size() == 1) return Vector::Constant(k, eta[0]);
  if (eta.size() != k) throw DimensionMismatch("eta needs one entry per readout or a single value");
  return eta;
}

struct MeanSem {
  double mean;
  double sem;
};

MeanSem mean_sem(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  if (xs.size() < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
  if (!std::isfinite(mean)) return {mean, kInf};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

}  // namespace

Index sample_size(double alpha, Index dimension) {
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be finite and > 0");
  return std::max<Index>(1, static_cast<Index>(std::llround(alpha * static_cast<double>(dimension))));
}

SyntheticDataset generate_dataset(const CovarianceSpec& cov, const GroundTruth& truth,
                                  double zeta, Index P, std::uint64_t seed, bool keep_clean) {
  const Index m = cov.dimension();
  require(P >= 1, "sample count P must be >= 1");
  require(zeta >= 0.0, "label noise zeta must be >= 0");
  if (truth.weights.size() != m) throw DimensionMismatch("ground truth length differs from M");

  Stream signal_stream(derive_seed(seed, StreamTag::dataset, 0));
  Stream noise_stream(derive_seed(seed, StreamTag::dataset, 1));
  Stream label_stream(derive_seed(seed, StreamTag::label_noise));

  Matrix clean(P, m);
  Matrix noise;
  if (cov.is_equicorrelated()) {
    const auto& eq = cov.equicorrelated_params();
    const double bulk = std::sqrt(eq.s * (1.0 - eq.c));
    const double shared = std::sqrt(eq.s * eq.c);
    for (Index i = 0; i < P; ++i) {
      const double g = signal_stream.normal();
      for (Index j = 0; j < m; ++j) clean(i, j) = bulk * signal_stream.normal() + shared * g;
    }
    if (eq.omega2 > 0.0) {
      noise.resize(P, m);
      noise_stream.fill_normal(noise);
      noise *= std::sqrt(eq.omega2);
    }
  } else {
    Matrix z(P, m);
    signal_stream.fill_normal(z);
    clean.noalias() = z * psd_sqrt(cov.signal_matrix()).transpose();
    if (!is_zero(cov.noise_matrix())) {
      noise_stream.fill_normal(z);
      noise.noalias() = z * psd_sqrt(cov.noise_matrix()).transpose();
    }
  }

  SyntheticDataset data;
  data.zeta = zeta;
  data.seed = seed;
  data.labels = clean * truth.weights / std::sqrt(static_cast<double>(m));
  for (Index i = 0; i < P; ++i) data.labels[i] += zeta * label_stream.normal();
  if (keep_clean) {
    data.noisy = clean;
    data.clean = std::move(clean);
  } else {
    data.noisy = std::move(clean);
  }
  if (noise.size() != 0) data.noisy += noise;
  return data;
}

Vector training_noise(Index P, double eta, std::uint64_t seed) {
  require(eta >= 0.0, "readout noise eta must be >= 0");
  Stream stream(seed);
  Vector xi(P);
  stream.fill_normal(xi);
  return eta * xi;
}

Vector train_readout(const SyntheticDataset& data, const Mask& mask, double lambda, double eta,
                     std::uint64_t noise_seed) {
  require(!mask.empty(), "mask must be nonempty");
  for (Index i : mask)
    require(i >= 0 && i < data.noisy.cols(), "mask index out of range");
  const Matrix X = restrict_columns(data.noisy, mask, 1.0 / std::sqrt(static_cast<double>(mask.size())));
  const Vector target = data.labels - training_noise(data.noisy.rows(), eta, noise_seed);
  return ridge_solve(X, target, lambda);
}

TrainedEnsemble train_ensemble(const SyntheticDataset& data, const SubsamplingPlan& plan,
                               const Vector& lambda, const Vector& eta, std::uint64_t seed) {
  const Index k = plan.size();
  if (lambda.size() != k || eta.size() != k)
    throw DimensionMismatch("lambda and eta need one entry per readout");
  if (plan.dimension != data.noisy.cols())
    throw DimensionMismatch("plan dimension differs from dataset width");
  TrainedEnsemble out;
  out.plan = plan;
  out.lambda = lambda;
  out.eta = eta;
  out.seed = seed;
  for (Index r = 0; r < k; ++r)
    out.weights.push_back(train_readout(data, plan.masks[static_cast<std::size_t>(r)], lambda[r],
                                        eta[r],
                                        derive_seed(seed, StreamTag::training_noise,
                                                    static_cast<std::uint64_t>(r))));
  return out;
}

ErrorMatrix exact_generalization_error(const TrainedEnsemble& ensemble, const CovarianceSpec& cov,
                                       const GroundTruth& truth, const Vector& eta) {
  const Index k = ensemble.plan.size();
  if (ensemble.plan.dimension != cov.dimension() || truth.weights.size() != cov.dimension())
    throw DimensionMismatch("ensemble, covariance and truth dimensions disagree");
  if (static_cast<Index>(ensemble.weights.size()) != k || eta.size() != k)
    throw DimensionMismatch("one weight vector and one eta per readout required");
  for (Index r = 0; r < k; ++r)
    if (ensemble.weights[static_cast<std::size_t>(r)].size() != ensemble.plan.readout_size(r))
      throw DimensionMismatch("weight vector length differs from its mask size");
  return make_error_matrix(pairwise_from_weights(ensemble.weights, ensemble.plan, cov,
                                                 truth.weights, eta));
}

EmpiricalError empirical_generalization_error(const TrainedEnsemble& ensemble,
                                              const CovarianceSpec& cov,
                                              const GroundTruth& truth, const Vector& eta,
                                              Index n_samples, std::uint64_t seed) {
  require(n_samples >= 2, "need at least two test samples");
  const Index k = ensemble.plan.size();
  const Index m = cov.dimension();
  if (eta.size() != k) throw DimensionMismatch("eta needs one entry per readout");
  Matrix U(m, k);
  for (Index r = 0; r < k; ++r)
    U.col(r) = embed(ensemble.weights[static_cast<std::size_t>(r)],
                     ensemble.plan.masks[static_cast<std::size_t>(r)], m);
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

  const Index chunk = 20000;
  double sum = 0.0, sum_sq = 0.0;
  Stream readout_stream(derive_seed(seed, StreamTag::eval_noise));
  for (Index start = 0, c = 0; start < n_samples; start += chunk, ++c) {
    const Index n = std::min(chunk, n_samples - start);
    const SyntheticDataset test = generate_dataset(
        cov, truth, 0.0, n, derive_seed(seed, StreamTag::dataset, static_cast<std::uint64_t>(c)), false);
    const Matrix scores = test.noisy * U * inv_sqrt_m;
    for (Index i = 0; i < n; ++i) {
      double f = 0.0;
      for (Index r = 0; r < k; ++r) f += scores(i, r) + eta[r] * readout_stream.normal();
      const double diff = f / static_cast<double>(k) - test.labels[i];
      sum += diff * diff;
      sum_sq += diff * diff * diff * diff;
    }
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

SubsamplingPlan realize_plan(const PlanSpec& spec, Index dimension, std::uint64_t seed) {
  if (spec.strategy == PlanStrategy::explicit_masks) {
    SubsamplingPlan plan = SubsamplingPlan::from_masks(spec.masks, dimension);
    plan.seed = seed;
    return plan;
  }
  return sample_subsampling_plan(spec.strategy, spec.k, spec.sigma, dimension, seed, spec.fractions);
}

GroundTruth realize_truth(const TruthSpec& spec, Index dimension, std::uint64_t seed) {
  return spec.scheme == TruthScheme::spiked ? sample_ground_truth(spec.rho, dimension, seed)
                                            : sample_isotropic_truth(dimension, seed);
}

TrialSummary run_trials(const TrialConfig& config) {
  require(config.n_trials >= 1, "n_trials must be >= 1");
  require(!config.alphas.empty(), "alpha grid must not be empty");
  require(!config.lambdas.empty(), "lambda list must not be empty");
  for (double l : config.lambdas) require(l >= 0.0, "lambda must be >= 0");
  require(config.zeta >= 0.0, "zeta must be >= 0");
  const Index m = config.cov.dimension();

  std::optional<SubsamplingPlan> fixed_plan;
  if (!config.plan.redraw_per_trial)
    fixed_plan = realize_plan(config.plan, m, derive_seed(config.seed, StreamTag::plan));
  std::optional<GroundTruth> fixed_truth;
  if (!config.truth.redraw_per_trial)
    fixed_truth = realize_truth(config.truth, m, derive_seed(config.seed, StreamTag::ground_truth));

  const std::size_t n_alpha = config.alphas.size();
  const std::size_t n_lambda = config.lambdas.size();
  std::vector<Index> sizes(n_alpha);
  for (std::size_t a = 0; a < n_alpha; ++a) sizes[a] = sample_size(config.alphas[a], m);
  const Index p_max = *std::max_element(sizes.begin(), sizes.end());
  std::vector<std::size_t> by_size(n_alpha);
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(),
                   [&](std::size_t x, std::size_t y) { return sizes[x] < sizes[y]; });

  const Index k = fixed_plan ? fixed_plan->size() : config.plan.k;
  const Vector eta = broadcast_eta(config.eta, k);
  const std::size_t cells = n_alpha * n_lambda;
  const std::size_t kk = static_cast<std::size_t>(k * k);
  // [trial][cell] and [trial][cell * k^2 + pair]
  std::vector<std::vector<double>> eg(static_cast<std::size_t>(config.n_trials));
  std::vector<std::vector<double>> pairs(static_cast<std::size_t>(config.n_trials));

  parallel_for(static_cast<std::size_t>(config.n_trials), config.threads, [&](std::size_t t) {
    const std::uint64_t trial_seed = config.forced_trial_seed
                                         ? *config.forced_trial_seed
                                         : derive_seed(config.seed, StreamTag::trial, t);
    const SubsamplingPlan plan = fixed_plan ? *fixed_plan
                                            : realize_plan(config.plan, m,
                                                           derive_seed(trial_seed, StreamTag::plan));
    const GroundTruth truth = fixed_truth ? *fixed_truth
                                          : realize_truth(config.truth, m,
                                                          derive_seed(trial_seed, StreamTag::ground_truth));
    if (plan.size() != k) throw InvalidArgument("plan size changed between trials");
    SyntheticDataset data = generate_dataset(config.cov, truth, config.zeta, p_max, trial_seed, false);

    // weights[cell][r]
    std::vector<std::vector<Vector>> weights(cells, std::vector<Vector>(static_cast<std::size_t>(k)));
    for (Index r = 0; r < k; ++r) {
      const Mask& mask = plan.masks[static_cast<std::size_t>(r)];
      const Index n = static_cast<Index>(mask.size());
      const Matrix X = restrict_columns(data.noisy, mask, 1.0 / std::sqrt(static_cast<double>(n)));
      const Vector target = data.labels -
          training_noise(p_max, eta[r], derive_seed(trial_seed, StreamTag::training_noise,
                                                    static_cast<std::uint64_t>(r)));
      Matrix gram = Matrix::Zero(n, n);
      Vector moment = Vector::Zero(n);
      Index consumed = 0;
      for (std::size_t a : by_size) {
        const Index P = sizes[a];
        std::vector<Vector> solved(n_lambda);
        if (P >= n) {
          if (P > consumed) {
            gram.selfadjointView<Eigen::Lower>().rankUpdate(X.middleRows(consumed, P - consumed).transpose());
            moment += X.middleRows(consumed, P - consumed).transpose() * target.segment(consumed, P - consumed);
            consumed = P;
          }
          Matrix full = gram;
          full.triangularView<Eigen::StrictlyUpper>() = full.transpose();
          for (std::size_t l = 0; l < n_lambda; ++l)
            solved[l] = solve_regularized_gram(full, moment, config.lambdas[l]);
        } else {
          const auto Xp = X.topRows(P);
          Matrix kernel = Matrix::Zero(P, P);
          kernel.selfadjointView<Eigen::Lower>().rankUpdate(Xp);
          kernel.triangularView<Eigen::StrictlyUpper>() = kernel.transpose();
          for (std::size_t l = 0; l < n_lambda; ++l)
            solved[l] = Xp.transpose() * solve_regularized_gram(kernel, target.head(P), config.lambdas[l]);
        }
        for (std::size_t l = 0; l < n_lambda; ++l)
          weights[l * n_alpha + a][static_cast<std::size_t>(r)] = std::move(solved[l]);
      }
    }

    auto& eg_t = eg[t];
    eg_t.resize(cells);
    if (config.full_matrix) pairs[t].resize(cells * kk);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const Matrix pw = pairwise_from_weights(weights[cell], plan, config.cov, truth.weights, eta);
      eg_t[cell] = ensemble_error(pw);
      if (config.full_matrix)
        for (Index r = 0; r < k; ++r)
          for (Index rp = 0; rp < k; ++rp)
            pairs[t][cell * kk + static_cast<std::size_t>(r * k + rp)] = pw(r, rp);
    }
  });

  TrialSummary out;
  out.alphas = config.alphas;
  out.lambdas = config.lambdas;
  out.sample_sizes = sizes;
  out.k = k;
  out.n_trials = config.n_trials;
  out.mean.resize(static_cast<Index>(n_lambda), static_cast<Index>(n_alpha));
  out.sem.resize(static_cast<Index>(n_lambda), static_cast<Index>(n_alpha));
  std::vector<double> column(static_cast<std::size_t>(config.n_trials));
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (std::size_t t = 0; t < column.size(); ++t) column[t] = eg[t][cell];
    const auto ms = mean_sem(column);
    const Index l = static_cast<Index>(cell / n_alpha), a = static_cast<Index>(cell % n_alpha);
    out.mean(l, a) = ms.mean;
    out.sem(l, a) = ms.sem;
  }
  if (config.full_matrix) {
    out.pair_mean.assign(kk, Matrix(static_cast<Index>(n_lambda), static_cast<Index>(n_alpha)));
    out.pair_sem = out.pair_mean;
    for (std::size_t cell = 0; cell < cells; ++cell)
      for (std::size_t p = 0; p < kk; ++p) {
        for (std::size_t t = 0; t < column.size(); ++t) column[t] = pairs[t][cell * kk + p];
        const auto ms = mean_sem(column);
        const Index l = static_cast<Index>(cell / n_alpha), a = static_cast<Index>(cell % n_alpha);
        out.pair_mean[p](l, a) = ms.mean;
        out.pair_sem[p](l, a) = ms.sem;
      }
  }
  return out;
}

}  // namespace subridge
