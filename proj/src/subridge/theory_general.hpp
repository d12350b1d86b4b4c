#pragma once

#include <utility>
#include <vector>

#include "subridge/covariance.hpp"
#include "subridge/results.hpp"

namespace subridge {

// Second moment of the target weights, Omega = beta I + sum_j c_j u_j u_j^T.
// A fixed teacher is beta = 0 with a single unit term; averaging the spiked
// teacher over its random part gives a scaled identity plus a signed
// all-ones term.
struct WeightMoments {
  double beta = 0.0;
  std::vector<std::pair<double, Vector>> rank_one;

  static WeightMoments from_weights(const Vector& w);
  static WeightMoments spiked_average(double rho, Index dimension);
};

enum class SaddleScheme { newton, damped };

struct SaddleOptions {
  SaddleScheme scheme = SaddleScheme::newton;
  double damping = 0.5;  // damped scheme only
  int max_iterations = 10000;
  double residual_tol = 1e-10;
  double step_tol = 1e-12;
};

// Matrix (nu_rr nu_r'r')^(-1/2) A_r (Sigma_s + Sigma_0) A_r'^T.
Matrix effective_covariance(const CovarianceSpec& cov, const SubsamplingPlan& plan,
                            Index r, Index rp);

// Per-covariance precomputation for repeated (lambda, alpha) evaluations.
// Each diagonal block Sigma~_rr is diagonalized once; off-diagonal blocks and
// the signal contractions are stored in the eigenbases, after which a solve
// plus error assembly costs O(sum N_r N_r').
class GeneralTheory {
 public:
  GeneralTheory(const CovarianceSpec& cov, const SubsamplingPlan& plan,
                SaddleOptions options = {});

  Index size() const { return static_cast<Index>(readouts_.size()); }
  Index dimension() const { return dimension_; }

  OrderParameters solve(const Vector& lambda, double alpha) const;
  ErrorMatrix errors(const OrderParameters& params, const WeightMoments& moments,
                     double zeta, const Vector& eta) const;

  // Fixed-point residual |q - (1/M) tr[G^-1 Sigma~]| / q for readout r.
  double residual(Index r, double q, double lambda, double alpha) const;

 private:
  struct Readout {
    Vector eigenvalues;
    Matrix eigenvectors;
    Matrix signal_rotated;  // Sigma_s[:, mask] V, M x N_r
    double nu = 0.0;
  };

  double solve_readout(Index r, double lambda, double alpha, int& iterations,
                       double& residual) const;

  Index dimension_ = 0;
  CovarianceSpec cov_;
  std::vector<Readout> readouts_;
  std::vector<Matrix> cross_;         // V_r^T Sigma~_rr' V_r', index r*k + r'
  std::vector<Matrix> signal_cross_;  // V_r^T A_r Sigma_s^2 A_r'^T V_r'
  SaddleOptions options_;
};

OrderParameters solve_saddle_point(const CovarianceSpec& cov, const SubsamplingPlan& plan,
                                   const Vector& lambda, double alpha,
                                   SaddleOptions options = {});

ErrorMatrix error_components(const OrderParameters& params, const CovarianceSpec& cov,
                             const SubsamplingPlan& plan, const GroundTruth& truth,
                             double zeta, const Vector& eta);

}  // namespace subridge
