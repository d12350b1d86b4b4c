#pragma once

#include "subridge/common.hpp"

namespace subridge {

// Minimizer of ||X W - T||_F^2 + lambda ||W||_F^2. lambda = 0 gives the
// minimum-norm least-squares solution. The N x N (primal) or P x P (dual)
// system is used, whichever is smaller.
Matrix ridge_solve(const Matrix& X, const Matrix& T, double lambda);

// Solves (G + lambda I) W = B for symmetric PSD G. With lambda = 0 and G
// singular, returns G^+ B.
Matrix solve_regularized_gram(const Matrix& G, const Matrix& B, double lambda);

// Moore-Penrose pseudoinverse of a symmetric PSD matrix via its eigenbasis.
Matrix psd_pseudoinverse(const Matrix& G);

// Any square root R with R R^T = S for symmetric PSD S (Cholesky when it
// succeeds, eigen-based otherwise).
Matrix psd_sqrt(const Matrix& S);

}  // namespace subridge
