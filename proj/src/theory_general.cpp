#include "subridge/theory_general.hpp"

#include <algorithm>

namespace subridge {

WeightMoments WeightMoments::from_weights(const Vector& w) {
  WeightMoments m;
  m.rank_one.emplace_back(1.0, w);
  return m;
}

WeightMoments WeightMoments::spiked_average(double rho, Index dimension) {
  require(std::abs(rho) <= 1.0, "rho must lie in [-1, 1]");
  require(dimension >= 1, "dimension must be positive");
  // E[w w^T] = (1-rho^2) P_perp + rho^2 11^T
  //          = (1-rho^2) I + [rho^2 - (1-rho^2)/M] 11^T
  const double r2 = rho * rho;
  WeightMoments m;
  m.beta = 1.0 - r2;
  const double coef = r2 - (1.0 - r2) / static_cast<double>(dimension);
  if (coef != 0.0) m.rank_one.emplace_back(coef, Vector::Ones(dimension));
  return m;
}

Matrix effective_covariance(const CovarianceSpec& cov, const SubsamplingPlan& plan,
                            Index r, Index rp) {
  if (plan.dimension != cov.dimension())
    throw DimensionMismatch("plan dimension differs from covariance dimension");
  require(r >= 0 && r < plan.size() && rp >= 0 && rp < plan.size(),
          "readout index out of range");
  const double scale = 1.0 / std::sqrt(plan.fractions(r, r) * plan.fractions(rp, rp));
  return scale * cov.total_block(plan.masks[static_cast<std::size_t>(r)],
                                 plan.masks[static_cast<std::size_t>(rp)]);
}

GeneralTheory::GeneralTheory(const CovarianceSpec& cov, const SubsamplingPlan& plan,
                             SaddleOptions options)
    : dimension_(cov.dimension()), cov_(cov), options_(options) {
  if (plan.dimension != cov.dimension())
    throw DimensionMismatch("plan dimension differs from covariance dimension");
  require(options.damping > 0.0 && options.damping <= 1.0, "damping must lie in (0, 1]");
  require(options.max_iterations >= 1, "iteration budget must be >= 1");

  const Index k = plan.size();
  readouts_.resize(static_cast<std::size_t>(k));
  for (Index r = 0; r < k; ++r) {
    auto& ro = readouts_[static_cast<std::size_t>(r)];
    const Mask& mask = plan.masks[static_cast<std::size_t>(r)];
    ro.nu = plan.fractions(r, r);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(effective_covariance(cov, plan, r, r));
    if (eig.info() != Eigen::Success)
      throw SingularResolvent("eigendecomposition of readout " + std::to_string(r) + " failed");
    ro.eigenvalues = eig.eigenvalues();
    ro.eigenvectors = eig.eigenvectors();

    Mask all(static_cast<std::size_t>(dimension_));
    for (Index i = 0; i < dimension_; ++i) all[static_cast<std::size_t>(i)] = i;
    ro.signal_rotated = cov.signal_block(all, mask) * ro.eigenvectors;
  }

  cross_.resize(static_cast<std::size_t>(k * k));
  signal_cross_.resize(static_cast<std::size_t>(k * k));
  for (Index r = 0; r < k; ++r) {
    const auto& a = readouts_[static_cast<std::size_t>(r)];
    for (Index rp = r; rp < k; ++rp) {
      const auto& b = readouts_[static_cast<std::size_t>(rp)];
      Matrix cross;
      if (r == rp)
        cross = a.eigenvalues.asDiagonal();
      else
        cross = a.eigenvectors.transpose() * effective_covariance(cov, plan, r, rp) *
                b.eigenvectors;
      Matrix sig = a.signal_rotated.transpose() * b.signal_rotated;
      if (r != rp) {
        cross_[static_cast<std::size_t>(rp * k + r)] = cross.transpose();
        signal_cross_[static_cast<std::size_t>(rp * k + r)] = sig.transpose();
      }
      cross_[static_cast<std::size_t>(r * k + rp)] = std::move(cross);
      signal_cross_[static_cast<std::size_t>(r * k + rp)] = std::move(sig);
    }
  }
}

double GeneralTheory::residual(Index r, double q, double lambda, double alpha) const {
  const Vector& ev = readouts_[static_cast<std::size_t>(r)].eigenvalues;
  const double q_hat = alpha / (lambda + q);
  const double F = (ev.array() / (1.0 + q_hat * ev.array())).sum() / static_cast<double>(dimension_);
  return std::abs(F - q) / q;
}

double GeneralTheory::solve_readout(Index r, double lambda, double alpha, int& iterations,
                                    double& residual_out) const {
  const Vector& ev = readouts_[static_cast<std::size_t>(r)].eigenvalues;
  const double inv_m = 1.0 / static_cast<double>(dimension_);
  const double q_max = ev.sum() * inv_m;
  if (!(q_max > 0.0))
    throw SingularResolvent("readout " + std::to_string(r) + " sees zero variance");
  if (ev.minCoeff() < -1e-10 * ev.maxCoeff())
    throw SingularResolvent("readout " + std::to_string(r) + " has an indefinite covariance block");

  auto evaluate = [&](double q, double& F, double& dF) {
    const double q_hat = alpha / (lambda + q);
    const auto denom = 1.0 + q_hat * ev.array();
    if (denom.minCoeff() <= 1e-12)
      throw SingularResolvent("resolvent of readout " + std::to_string(r) + " is singular");
    F = (ev.array() / denom).sum() * inv_m;
    dF = (ev.array().square() / denom.square()).sum() * inv_m * q_hat * q_hat / alpha;
  };

  double lo = 0.0, hi = q_max;
  double q = q_max;
  double F = 0.0, dF = 0.0;
  for (iterations = 1; iterations <= options_.max_iterations; ++iterations) {
    evaluate(q, F, dF);
    const double h = F - q;
    double next;
    if (options_.scheme == SaddleScheme::damped) {
      next = (1.0 - options_.damping) * q + options_.damping * F;
    } else {
      if (h > 0.0) lo = q; else hi = q;
      next = dF < 1.0 ? q - h / (dF - 1.0) : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    }
    const bool settled = std::abs(next - q) <= options_.step_tol * q;
    q = next;
    if (settled) {
      evaluate(q, F, dF);
      residual_out = std::abs(F - q) / q;
      if (residual_out <= options_.residual_tol) return q;
    }
  }
  evaluate(q, F, dF);
  residual_out = std::abs(F - q) / q;
  throw NonConvergence("saddle-point iteration for readout " + std::to_string(r) +
                           " did not converge (residual " + std::to_string(residual_out) + ")",
                       residual_out);
}

OrderParameters GeneralTheory::solve(const Vector& lambda, double alpha) const {
  const Index k = size();
  if (lambda.size() != k) throw DimensionMismatch("lambda needs one entry per readout");
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be finite and > 0");
  for (Index r = 0; r < k; ++r)
    require(lambda[r] >= 1e-8,
            "general theory needs lambda >= 1e-8; use the equicorrelated closed forms for ridgeless limits");

  OrderParameters out;
  out.q.resize(k);
  out.q_hat.resize(k);
  out.residual.resize(k);
  out.iterations.resize(k);
  out.lambda = lambda;
  out.alpha = alpha;
  for (Index r = 0; r < k; ++r) {
    int iterations = 0;
    double res = 0.0;
    out.q[r] = solve_readout(r, lambda[r], alpha, iterations, res);
    out.q_hat[r] = alpha / (lambda[r] + out.q[r]);
    out.residual[r] = res;
    out.iterations[r] = iterations;
  }

  out.gamma.resize(k, k);
  const double m = static_cast<double>(dimension_);
  for (Index r = 0; r < k; ++r) {
    const Vector dr = (1.0 + out.q_hat[r] * readouts_[static_cast<std::size_t>(r)].eigenvalues.array()).inverse();
    for (Index rp = r; rp < k; ++rp) {
      const Vector dp = (1.0 + out.q_hat[rp] * readouts_[static_cast<std::size_t>(rp)].eigenvalues.array()).inverse();
      const Matrix& B = cross_[static_cast<std::size_t>(r * k + rp)];
      const double tr = (dr.asDiagonal() * B.cwiseAbs2() * dp.asDiagonal()).sum();
      out.gamma(r, rp) = out.gamma(rp, r) =
          alpha / (m * (lambda[r] + out.q[r]) * (lambda[rp] + out.q[rp])) * tr;
    }
  }
  return out;
}

ErrorMatrix GeneralTheory::errors(const OrderParameters& params, const WeightMoments& moments,
                                  double zeta, const Vector& eta) const {
  const Index k = size();
  if (params.q.size() != k || params.gamma.rows() != k)
    throw DimensionMismatch("order parameters do not match the plan");
  if (eta.size() != k) throw DimensionMismatch("eta needs one entry per readout");
  for (const auto& term : moments.rank_one)
    if (term.second.size() != dimension_)
      throw DimensionMismatch("weight moment vector has the wrong length");
  require(zeta >= 0.0, "zeta must be >= 0");

  const double m = static_cast<double>(dimension_);
  double base = moments.beta * cov_.signal_trace();
  for (const auto& [coef, u] : moments.rank_one) base += coef * u.dot(cov_.apply_signal(u));
  base /= m;

  std::vector<Vector> D(static_cast<std::size_t>(k));
  std::vector<std::vector<Vector>> proj(static_cast<std::size_t>(k));
  std::vector<double> self(static_cast<std::size_t>(k));
  for (Index r = 0; r < k; ++r) {
    const auto& ro = readouts_[static_cast<std::size_t>(r)];
    Vector& d = D[static_cast<std::size_t>(r)];
    d = (1.0 + params.q_hat[r] * ro.eigenvalues.array()).inverse();
    auto& p = proj[static_cast<std::size_t>(r)];
    for (const auto& term : moments.rank_one) p.push_back(ro.signal_rotated.transpose() * term.second);

    // w^T Sigma_s A_r^T G_r^-1 A_r Sigma_s w, averaged over the moments.
    const Matrix& C = signal_cross_[static_cast<std::size_t>(r * k + r)];
    double quad = moments.beta * d.dot(C.diagonal());
    for (std::size_t j = 0; j < p.size(); ++j)
      quad += moments.rank_one[j].first * (d.array() * p[j].array().square()).sum();
    self[static_cast<std::size_t>(r)] = params.q_hat[r] / ro.nu * quad;
  }

  Matrix pairwise(k, k);
  for (Index r = 0; r < k; ++r) {
    for (Index rp = r; rp < k; ++rp) {
      const double gamma = params.gamma(r, rp);
      if (1.0 - gamma <= 1e-12) {
        pairwise(r, rp) = pairwise(rp, r) = kInf;
        continue;
      }
      const auto& dr = D[static_cast<std::size_t>(r)];
      const auto& dp = D[static_cast<std::size_t>(rp)];
      const Matrix mid = dr.asDiagonal() * cross_[static_cast<std::size_t>(r * k + rp)] * dp.asDiagonal();
      double quad = moments.beta * mid.cwiseProduct(signal_cross_[static_cast<std::size_t>(r * k + rp)]).sum();
      const auto& pr = proj[static_cast<std::size_t>(r)];
      const auto& pp = proj[static_cast<std::size_t>(rp)];
      for (std::size_t j = 0; j < pr.size(); ++j)
        quad += moments.rank_one[j].first * pr[j].dot(mid * pp[j]);
      const double nu_r = readouts_[static_cast<std::size_t>(r)].nu;
      const double nu_p = readouts_[static_cast<std::size_t>(rp)].nu;
      const double cross_term = params.q_hat[r] * params.q_hat[rp] / std::sqrt(nu_r * nu_p) * quad;

      const double signal = base - (self[static_cast<std::size_t>(r)] + self[static_cast<std::size_t>(rp)]) / m +
                            cross_term / m;
      const double noise = gamma * zeta * zeta + (r == rp ? eta[r] * eta[r] : 0.0);
      pairwise(r, rp) = pairwise(rp, r) = (noise + signal) / (1.0 - gamma);
    }
  }
  return make_error_matrix(std::move(pairwise));
}

OrderParameters solve_saddle_point(const CovarianceSpec& cov, const SubsamplingPlan& plan,
                                   const Vector& lambda, double alpha, SaddleOptions options) {
  return GeneralTheory(cov, plan, options).solve(lambda, alpha);
}

ErrorMatrix error_components(const OrderParameters& params, const CovarianceSpec& cov,
                             const SubsamplingPlan& plan, const GroundTruth& truth,
                             double zeta, const Vector& eta) {
  return GeneralTheory(cov, plan).errors(params, WeightMoments::from_weights(truth.weights),
                                         zeta, eta);
}

}  // namespace subridge
