#pragma once

// Independent reference implementations used to derive frozen test values.
// They follow the textbook formulas literally (dense selection matrices,
// explicit inverses, plain damped iteration, bisection) and share no code
// with the library's solvers.

#include <vector>

#include "subridge/common.hpp"

namespace subridge::testing {

struct GeneralOracle {
  Vector q, q_hat;
  Matrix gamma;
  Matrix pairwise;
  double ensemble = 0.0;
};

GeneralOracle general_oracle(const Matrix& signal, const Matrix& noise,
                             const std::vector<std::vector<Index>>& masks, const Vector& lambda,
                             double alpha, const Vector& w, double zeta, const Vector& eta);

struct EquiOracle {
  Vector q, q_hat;
  Matrix pairwise;
  double ensemble = 0.0;
};

// Requires lambda > 0.
EquiOracle equicorr_oracle(double s, double c, double omega2, double zeta, double rho,
                           const Vector& eta, const Vector& lambda, double alpha, const Matrix& nu);

// Minimizer of |X w - y|^2 + lambda |w|^2 from the normal equations; the
// minimum-norm least-squares solution when lambda = 0.
Vector ridge_oracle(const Matrix& X, const Vector& y, double lambda);

}  // namespace subridge::testing
