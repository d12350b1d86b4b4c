#include "subridge/linalg.hpp"

namespace subridge {

Matrix psd_pseudoinverse(const Matrix& G) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::numerical, "eigendecomposition failed");
  const Vector& ev = eig.eigenvalues();
  const double cutoff = std::numeric_limits<double>::epsilon() * static_cast<double>(G.rows()) *
                        std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Vector inv(ev.size());
  for (Index i = 0; i < ev.size(); ++i) inv[i] = ev[i] > cutoff ? 1.0 / ev[i] : 0.0;
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix solve_regularized_gram(const Matrix& G, const Matrix& B, double lambda) {
  require(lambda >= 0.0, "ridge strength must be >= 0");
  if (G.rows() != G.cols() || G.rows() != B.rows())
    throw DimensionMismatch("Gram system dimensions disagree");
  Matrix A = G;
  A.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() == Eigen::Success) {
    const Vector d = llt.matrixLLT().diagonal().cwiseAbs2();
    const bool well_posed = lambda > 0.0 ||
        d.minCoeff() > std::numeric_limits<double>::epsilon() * static_cast<double>(G.rows()) * d.maxCoeff();
    if (well_posed) {
      Matrix W = llt.solve(B);
      if (W.allFinite()) return W;
    }
  }
  if (lambda > 0.0) {
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() == Eigen::Success) return ldlt.solve(B);
    throw Error(ErrorCode::numerical, "regularized Gram system could not be factorized");
  }
  return psd_pseudoinverse(G) * B;
}

Matrix ridge_solve(const Matrix& X, const Matrix& T, double lambda) {
  if (X.rows() != T.rows()) throw DimensionMismatch("design and targets differ in row count");
  require(lambda >= 0.0, "ridge strength must be >= 0");
  if (X.cols() <= X.rows()) {
    Matrix G = Matrix::Zero(X.cols(), X.cols());
    G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
    return solve_regularized_gram(G, X.transpose() * T, lambda);
  }
  Matrix K = Matrix::Zero(X.rows(), X.rows());
  K.selfadjointView<Eigen::Lower>().rankUpdate(X);
  K.triangularView<Eigen::StrictlyUpper>() = K.transpose();
  return X.transpose() * solve_regularized_gram(K, T, lambda);
}

Matrix psd_sqrt(const Matrix& S) {
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::numerical, "eigendecomposition failed");
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace subridge
