#pragma once

#include <optional>
#include <span>

#include "subridge/results.hpp"

namespace subridge {

struct ClosedOrderParams {
  double q = 0.0;
  double q_hat = 0.0;  // +inf in the ridgeless, over-parameterized regime
  double S = 0.0;
};

// Positive-q root of q_hat = alpha/(lambda + q), q = a nu/(nu + a q_hat).
// Solved for r = nu/q_hat.
ClosedOrderParams solve_order_params_closed_form(double a, double nu,
                                                 double alpha, double lambda);

struct EquiTask {
  double s = 1.0;
  double c = 0.0;
  double omega2 = 0.0;
  double zeta = 0.0;
  double rho = 0.0;
  Vector eta;     // per readout
  Vector lambda;  // per readout
  double alpha = 1.0;
  Matrix nu;      // k x k fraction matrix

  double a() const { return s * (1.0 - c) + omega2; }
  Index size() const { return nu.rows(); }
  void validate() const;
};

double pairwise_error_equicorr(const EquiTask& task, Index r, Index rp);
ErrorMatrix ensemble_error_equicorr(const EquiTask& task);
OrderParameters order_parameters_equicorr(const EquiTask& task);

// Isotropic (s=1, c=0, omega=eta=0) ridgeless error of one readout.
double single_readout_ridgeless_error(double alpha, double nu, double zeta);

struct LambdaStar {
  double value = 0.0;
  double raw = 0.0;
  bool clamped = false;
};

LambdaStar optimal_local_regularization(double s, double c, double nu,
                                        double rho, double zeta, double eta,
                                        double omega2 = 0.0);

enum class RegMode { ridgeless, locally_optimal, explicit_lambda };

const char* to_string(RegMode mode);
RegMode reg_mode_from_string(const std::string& name);

struct ReducedPoint {
  double k = 1.0;  // kInf allowed
  double alpha = 1.0;  // kInf allowed
  double rho = 0.0;
  double Lambda = 0.0;
  double H = 0.0;
  double W = 0.0;
  double Z = 0.0;
};

// Noise ratios and Lambda from raw parameters; requires c < 1.
ReducedPoint reduce(double k, double alpha, double s, double c, double omega2,
                    double zeta, double eta, double rho, double lambda);

double reduced_S(double alpha, double nu, double W, double Lambda);
double reduced_lambda_star(double k, double rho, double H, double W, double Z);
double reduced_error(const ReducedPoint& point, RegMode mode);
// Value of the reduced error as k -> inf.
double reduced_error_asymptote(double rho, double W);

struct KStar {
  double k = 1.0;  // kInf when the asymptote wins
  double error = 0.0;
};

KStar optimal_k(double H, double W, double Z, double rho, double alpha,
                RegMode mode, int k_max = 100, double Lambda = 0.0);

// Ridgeless alpha below which k* = inf; nullopt if noise dominates at all alpha.
std::optional<double> noise_dominated_boundary(double rho, double H, double W);

double infinite_data_error(int k, std::span<const double> nu_diag, double s,
                           double eta);

}  // namespace subridge
