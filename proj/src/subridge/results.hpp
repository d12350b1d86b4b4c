#pragma once

#include "subridge/common.hpp"

namespace subridge {

struct OrderParameters {
  Vector q;
  Vector q_hat;
  Matrix gamma;
  Vector lambda;
  double alpha = 0.0;
  Vector residual;    // |q - (1/M) tr[G^-1 Sigma~]| / q per readout
  Vector iterations;  // solver iterations per readout (0 for closed forms)
};

struct ErrorMatrix {
  Matrix pairwise;
  double ensemble = 0.0;
};

// (1/k^2) sum of all entries; +inf as soon as one entry is +inf.
double ensemble_error(const Matrix& pairwise);
ErrorMatrix make_error_matrix(Matrix pairwise);

}  // namespace subridge
