#pragma once

#include <optional>
#include <vector>

#include "subridge/covariance.hpp"
#include "subridge/results.hpp"

namespace subridge {

struct SyntheticDataset {
  Matrix clean;  // P x M signal features; empty when not retained
  Matrix noisy;  // P x M, clean plus feature noise
  Vector labels;
  double zeta = 0.0;
  std::uint64_t seed = 0;
};

// Rows are generated in order from per-seed streams, so the first P rows of
// a larger draw equal a draw of P rows up to rounding.
SyntheticDataset generate_dataset(const CovarianceSpec& cov, const GroundTruth& truth,
                                  double zeta, Index P, std::uint64_t seed,
                                  bool keep_clean = true);

// Training readout noise xi_r ~ N(0, eta^2), one entry per training row.
Vector training_noise(Index P, double eta, std::uint64_t seed);

Vector train_readout(const SyntheticDataset& data, const Mask& mask, double lambda,
                     double eta, std::uint64_t noise_seed);

struct TrainedEnsemble {
  std::vector<Vector> weights;
  SubsamplingPlan plan;
  Vector lambda;
  Vector eta;
  std::uint64_t seed = 0;
};

TrainedEnsemble train_ensemble(const SyntheticDataset& data, const SubsamplingPlan& plan,
                               const Vector& lambda, const Vector& eta, std::uint64_t seed);

ErrorMatrix exact_generalization_error(const TrainedEnsemble& ensemble,
                                       const CovarianceSpec& cov, const GroundTruth& truth,
                                       const Vector& eta);

// Monte-Carlo estimate of the same quantity from fresh test draws.
struct EmpiricalError {
  double mean = 0.0;
  double standard_error = 0.0;
};
EmpiricalError empirical_generalization_error(const TrainedEnsemble& ensemble,
                                              const CovarianceSpec& cov,
                                              const GroundTruth& truth, const Vector& eta,
                                              Index n_samples, std::uint64_t seed);

struct TruthSpec {
  TruthScheme scheme = TruthScheme::isotropic;
  double rho = 0.0;
  bool redraw_per_trial = false;
};

struct PlanSpec {
  PlanStrategy strategy = PlanStrategy::homogeneous;
  Index k = 1;
  double sigma = 0.0;
  std::optional<std::vector<double>> fractions;
  std::vector<Mask> masks;  // explicit strategy
  bool redraw_per_trial = false;
};

SubsamplingPlan realize_plan(const PlanSpec& spec, Index dimension, std::uint64_t seed);
GroundTruth realize_truth(const TruthSpec& spec, Index dimension, std::uint64_t seed);

struct TrialConfig {
  CovarianceSpec cov = CovarianceSpec::equicorrelated(1.0, 0.0, 0.0, 1);
  TruthSpec truth;
  PlanSpec plan;
  double zeta = 0.0;
  Vector eta;  // one per readout, or a single shared value
  std::vector<double> lambdas;
  std::vector<double> alphas;
  int n_trials = 2;
  std::uint64_t seed = 0;
  bool full_matrix = false;
  int threads = 1;
  std::optional<std::uint64_t> forced_trial_seed;  // every trial reuses this seed
};

struct TrialSummary {
  std::vector<double> alphas;
  std::vector<double> lambdas;
  std::vector<Index> sample_sizes;
  Matrix mean;  // lambdas x alphas, E_g
  Matrix sem;
  // Per pair (r*k + r') mean/SEM, filled with full_matrix.
  std::vector<Matrix> pair_mean;
  std::vector<Matrix> pair_sem;
  Index k = 0;
  int n_trials = 0;
};

TrialSummary run_trials(const TrialConfig& config);

Index sample_size(double alpha, Index dimension);

}  // namespace subridge
