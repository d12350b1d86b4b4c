#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "subridge/common.hpp"

namespace subridge {

using Mask = std::vector<Index>;

enum class CovarianceKind { explicit_dense, equicorrelated };

struct EquicorrelatedParams {
  double s = 1.0;
  double c = 0.0;
  double omega2 = 0.0;

  // s(1-c) + omega^2, the bulk eigenvalue of a subsampled block.
  double bulk() const { return s * (1.0 - c) + omega2; }
};

// Signal covariance Sigma_s and feature-noise covariance Sigma_0, either as
// dense symmetric matrices or through the equicorrelated parameters
// (s, c, omega^2). Immutable once built.
class CovarianceSpec {
 public:
  static CovarianceSpec equicorrelated(double s, double c, double omega2,
                                       Index dimension);
  static CovarianceSpec from_matrices(Matrix signal, Matrix noise);
  // [Sigma]_ij = scale * decay^|i-j|
  static CovarianceSpec toeplitz(Index dimension, double signal_scale,
                                 double signal_decay, double noise_scale,
                                 double noise_decay);

  CovarianceKind kind() const { return kind_; }
  Index dimension() const { return dimension_; }
  bool is_equicorrelated() const {
    return kind_ == CovarianceKind::equicorrelated;
  }
  const EquicorrelatedParams& equicorrelated_params() const;

  // Dense matrices; only for explicit specs.
  const Matrix& signal_matrix() const;
  const Matrix& noise_matrix() const;

  CovarianceSpec to_explicit() const;

  double signal(Index i, Index j) const;
  double noise(Index i, Index j) const;

  Matrix signal_block(const Mask& rows, const Mask& cols) const;
  Matrix noise_block(const Mask& rows, const Mask& cols) const;
  // Sigma_s + Sigma_0 restricted to (rows, cols).
  Matrix total_block(const Mask& rows, const Mask& cols) const;

  Vector apply_signal(const Vector& v) const;
  Vector apply_noise(const Vector& v) const;
  double signal_trace() const;

 private:
  CovarianceSpec() = default;

  CovarianceKind kind_ = CovarianceKind::explicit_dense;
  Index dimension_ = 0;
  EquicorrelatedParams equi_;
  Matrix signal_;
  Matrix noise_;
};

// Explicit M x M matrices s[(1-c)I + c 11^T] and omega^2 I.
CovarianceSpec build_equicorrelated_covariance(double s, double c,
                                               double omega2, Index dimension);

enum class TruthScheme { isotropic, spiked };

struct GroundTruth {
  Vector weights;
  double rho = 0.0;
  TruthScheme scheme = TruthScheme::isotropic;
  std::uint64_t seed = 0;
};

// w* = sqrt(1 - rho^2) P_perp w0 + rho 1 with w0 ~ N(0, I).
GroundTruth sample_ground_truth(double rho, Index dimension, std::uint64_t seed);
// w* ~ N(0, I).
GroundTruth sample_isotropic_truth(Index dimension, std::uint64_t seed);

enum class PlanStrategy { homogeneous, heterogeneous, replacement, explicit_masks };

const char* to_string(PlanStrategy strategy);
PlanStrategy plan_strategy_from_string(const std::string& name);

struct SubsamplingPlan {
  std::vector<Mask> masks;  // each sorted ascending
  Matrix fractions;         // nu_rr' = |mask_r ∩ mask_r'| / M
  Index dimension = 0;
  bool exclusive = false;
  PlanStrategy strategy = PlanStrategy::explicit_masks;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  Index size() const { return static_cast<Index>(masks.size()); }
  Index readout_size(Index r) const {
    return static_cast<Index>(masks[static_cast<std::size_t>(r)].size());
  }
  bool is_partition() const;

  // Validates and sorts the masks, then derives nu.
  static SubsamplingPlan from_masks(std::vector<Mask> masks, Index dimension);
};

Matrix fraction_matrix(const std::vector<Mask>& masks, Index dimension);

// Largest-remainder apportionment of `total` units proportionally to
// `weights`, every share at least one.
std::vector<Index> apportion(std::span<const double> weights, Index total);

// i.i.d. Gamma(shape (k sigma)^-2, scale k sigma^2) draws rescaled to sum to 1.
std::vector<double> sample_heterogeneous_fractions(Index k, double sigma,
                                                   std::uint64_t seed);

SubsamplingPlan sample_subsampling_plan(
    PlanStrategy strategy, Index k, double sigma, Index dimension,
    std::uint64_t seed,
    const std::optional<std::vector<double>>& fractions_override = std::nullopt);

}  // namespace subridge
