#include "subridge/theory_equicorr.hpp"

#include <algorithm>

namespace subridge {

double ensemble_error(const Matrix& pairwise) {
  if (pairwise.size() == 0) throw InvalidArgument("empty error matrix");
  double total = 0.0;
  for (Index j = 0; j < pairwise.cols(); ++j)
    for (Index i = 0; i < pairwise.rows(); ++i) {
      const double e = pairwise(i, j);
      if (e == kInf) return kInf;
      total += e;
    }
  return total / static_cast<double>(pairwise.size());
}

ErrorMatrix make_error_matrix(Matrix pairwise) {
  ErrorMatrix out;
  out.ensemble = ensemble_error(pairwise);
  out.pairwise = std::move(pairwise);
  return out;
}

ClosedOrderParams solve_order_params_closed_form(double a, double nu,
                                                 double alpha, double lambda) {
  require(a > 0.0, "bulk eigenvalue a = s(1-c) + omega^2 must be > 0");
  require(nu > 0.0 && nu <= 1.0, "fraction nu must lie in (0, 1]");
  require(alpha > 0.0, "alpha must be > 0");
  require(lambda >= 0.0, "lambda must be >= 0");

  const double b = a * nu + lambda * nu - a * alpha;
  const double disc = std::sqrt(b * b + 4.0 * a * lambda * alpha * nu);
  double r;
  if (b > 0.0)
    r = (b + disc) / (2.0 * alpha);
  else
    r = lambda > 0.0 ? 2.0 * a * nu * lambda / (disc - b) : 0.0;

  ClosedOrderParams out;
  out.q = a * r / (r + a);
  out.S = 1.0 / (r + a);
  out.q_hat = r > 0.0 ? nu / r : kInf;
  return out;
}

void EquiTask::validate() const {
  require(s > 0.0, "s must be > 0");
  require(c >= 0.0 && c <= 1.0, "c must lie in [0, 1]");
  require(omega2 >= 0.0, "omega^2 must be >= 0");
  require(zeta >= 0.0, "zeta must be >= 0");
  require(std::abs(rho) <= 1.0, "rho must lie in [-1, 1]");
  require(alpha > 0.0, "alpha must be > 0");
  if (!(a() > 0.0))
    throw InvalidArgument("c = 1 with omega = 0 leaves no bulk variance (a = 0)");
  const Index k = nu.rows();
  require(k >= 1 && nu.cols() == k, "nu must be a nonempty square matrix");
  if (eta.size() != k || lambda.size() != k)
    throw DimensionMismatch("eta and lambda need one entry per readout");
  for (Index r = 0; r < k; ++r) {
    require(nu(r, r) > 0.0 && nu(r, r) <= 1.0, "diagonal fractions must lie in (0, 1]");
    require(lambda[r] >= 0.0, "lambda must be >= 0");
    require(eta[r] >= 0.0, "eta must be >= 0");
    for (Index rp = 0; rp < k; ++rp) {
      require(nu(r, rp) == nu(rp, r), "nu must be symmetric");
      require(nu(r, rp) >= 0.0 && nu(r, rp) <= std::min(nu(r, r), nu(rp, rp)) + 1e-15,
              "overlap fractions must not exceed either readout fraction");
    }
  }
}

namespace {

bool at_ridgeless_threshold(const EquiTask& t, Index r) {
  return t.lambda[r] == 0.0 && std::abs(t.alpha - t.nu(r, r)) < 1e-12;
}

double pairwise_unchecked(const EquiTask& t, Index r, Index rp, double Sr, double Sp) {
  if (r == rp && at_ridgeless_threshold(t, r)) return kInf;
  const double a = t.a();
  const double sc = t.s * (1.0 - t.c);
  const double nr = t.nu(r, r), np = t.nu(rp, rp), nrp = t.nu(r, rp);
  const double gamma = a * a * nrp * Sr * Sp / t.alpha;
  if (1.0 - gamma <= 1e-12) return kInf;

  const double i0 = sc * (1.0 - sc * nr * Sr - sc * np * Sp + a * sc * nrp * Sr * Sp);
  const double i1 = t.c > 0.0 ? (sc * (nrp - nr * np) + t.omega2 * nrp) / (nr * np) : i0;
  const double rho2 = t.rho * t.rho;
  const double noise = gamma * t.zeta * t.zeta + (r == rp ? t.eta[r] * t.eta[r] : 0.0);
  return ((1.0 - rho2) * i0 + rho2 * i1 + noise) / (1.0 - gamma);
}

}  // namespace

double pairwise_error_equicorr(const EquiTask& task, Index r, Index rp) {
  task.validate();
  require(r >= 0 && r < task.size() && rp >= 0 && rp < task.size(), "readout index out of range");
  const double a = task.a();
  const double Sr = solve_order_params_closed_form(a, task.nu(r, r), task.alpha, task.lambda[r]).S;
  const double Sp = solve_order_params_closed_form(a, task.nu(rp, rp), task.alpha, task.lambda[rp]).S;
  return pairwise_unchecked(task, r, rp, Sr, Sp);
}

ErrorMatrix ensemble_error_equicorr(const EquiTask& task) {
  task.validate();
  const Index k = task.size();
  Vector S(k);
  for (Index r = 0; r < k; ++r)
    S[r] = solve_order_params_closed_form(task.a(), task.nu(r, r), task.alpha, task.lambda[r]).S;
  Matrix pairwise(k, k);
  for (Index r = 0; r < k; ++r)
    for (Index rp = r; rp < k; ++rp)
      pairwise(r, rp) = pairwise(rp, r) = pairwise_unchecked(task, r, rp, S[r], S[rp]);
  return make_error_matrix(std::move(pairwise));
}

OrderParameters order_parameters_equicorr(const EquiTask& task) {
  task.validate();
  const Index k = task.size();
  const double a = task.a();
  OrderParameters out;
  out.q.resize(k);
  out.q_hat.resize(k);
  out.gamma.resize(k, k);
  out.lambda = task.lambda;
  out.alpha = task.alpha;
  out.residual = Vector::Zero(k);
  out.iterations = Vector::Zero(k);
  Vector S(k);
  for (Index r = 0; r < k; ++r) {
    const auto p = solve_order_params_closed_form(a, task.nu(r, r), task.alpha, task.lambda[r]);
    out.q[r] = p.q;
    out.q_hat[r] = p.q_hat;
    S[r] = p.S;
  }
  for (Index r = 0; r < k; ++r)
    for (Index rp = 0; rp < k; ++rp)
      out.gamma(r, rp) = a * a * task.nu(r, rp) * S[r] * S[rp] / task.alpha;
  return out;
}

double single_readout_ridgeless_error(double alpha, double nu, double zeta) {
  require(alpha > 0.0, "alpha must be > 0");
  require(nu > 0.0 && nu <= 1.0, "nu must lie in (0, 1]");
  require(zeta >= 0.0, "zeta must be >= 0");
  if (std::abs(alpha - nu) < 1e-12) return kInf;
  const double z2 = zeta * zeta;
  if (alpha < nu)
    return nu / (nu - alpha) * ((1.0 - nu) + (alpha - nu) * (alpha - nu) / nu) +
           alpha * z2 / (nu - alpha);
  return alpha / (alpha - nu) * (1.0 - nu) + nu * z2 / (alpha - nu);
}

LambdaStar optimal_local_regularization(double s, double c, double nu, double rho,
                                        double zeta, double eta, double omega2) {
  require(s > 0.0, "s must be > 0");
  require(c >= 0.0 && c < 1.0, "c must lie in [0, 1)");
  require(nu > 0.0 && nu <= 1.0, "nu must lie in (0, 1]");
  require(omega2 >= 0.0 && zeta >= 0.0 && eta >= 0.0, "noise scales must be >= 0");
  // With c = 0 the spike is absent and rho plays no role.
  const double r2 = c > 0.0 ? rho * rho : 0.0;
  if (c > 0.0 && !(r2 < 1.0))
    throw InvalidArgument("locally optimal regularization needs rho^2 < 1 when c > 0");
  const double a = s * (1.0 - c) + omega2;
  const double one_c = 1.0 - c;
  const double num = nu * (zeta * zeta + eta * eta) + a * r2 + s * one_c * nu * (1.0 - 2.0 * r2);
  LambdaStar out;
  out.raw = a * (a * num / (one_c * one_c * nu * nu * (1.0 - r2) * s * s) - 1.0);
  out.clamped = out.raw < 0.0;
  out.value = std::max(out.raw, 0.0);
  return out;
}

const char* to_string(RegMode mode) {
  switch (mode) {
    case RegMode::ridgeless: return "ridgeless";
    case RegMode::locally_optimal: return "locally_optimal";
    case RegMode::explicit_lambda: return "explicit";
  }
  return "unknown";
}

RegMode reg_mode_from_string(const std::string& name) {
  if (name == "ridgeless") return RegMode::ridgeless;
  if (name == "locally_optimal") return RegMode::locally_optimal;
  if (name == "explicit") return RegMode::explicit_lambda;
  throw InvalidArgument("unknown regularization mode '" + name + "'");
}

ReducedPoint reduce(double k, double alpha, double s, double c, double omega2,
                    double zeta, double eta, double rho, double lambda) {
  require(s > 0.0 && c >= 0.0 && c < 1.0, "reduced variables need s > 0 and 0 <= c < 1");
  const double sc = s * (1.0 - c);
  ReducedPoint p;
  p.k = k;
  p.alpha = alpha;
  p.rho = rho;
  p.Lambda = lambda / sc;
  p.H = eta * eta / sc;
  p.W = omega2 / sc;
  p.Z = zeta * zeta / sc;
  return p;
}

double reduced_S(double alpha, double nu, double W, double Lambda) {
  const double w1 = 1.0 + W;
  if (alpha == kInf) return 1.0 / w1;
  const double B = alpha * w1 - nu * w1 + nu * Lambda;
  const double X = std::sqrt(B * B + 4.0 * Lambda * nu * nu * w1);
  const double r = B > 0.0 ? nu * Lambda * (2.0 * nu * w1 / (X + B) + 1.0) / alpha
                           : (X - B + 2.0 * nu * Lambda) / (2.0 * alpha);
  return 1.0 / (r + w1);
}

double reduced_lambda_star(double k, double rho, double H, double W, double Z) {
  require(k >= 1.0, "k must be >= 1");
  const double r2 = rho * rho;
  require(r2 < 1.0, "locally optimal regularization needs rho^2 < 1");
  const double nu = 1.0 / k;
  const double w1 = 1.0 + W;
  return std::max(0.0, w1 * (w1 * (nu * (Z + H) + w1 * r2 + nu * (1.0 - 2.0 * r2)) /
                                 (nu * nu * (1.0 - r2)) - 1.0));
}

double reduced_error_asymptote(double rho, double W) {
  const double r2 = rho * rho;
  return 1.0 - r2 + r2 * W;
}

double reduced_error(const ReducedPoint& p, RegMode mode) {
  require(p.k >= 1.0, "k must be >= 1");
  require(p.alpha > 0.0, "alpha must be > 0");
  require(p.H >= 0.0 && p.W >= 0.0 && p.Z >= 0.0, "noise ratios must be >= 0");
  require(std::abs(p.rho) <= 1.0, "rho must lie in [-1, 1]");
  if (p.k == kInf) return reduced_error_asymptote(p.rho, p.W);

  const double k = p.k;
  const double nu = 1.0 / k;
  double Lambda = 0.0;
  switch (mode) {
    case RegMode::ridgeless: Lambda = 0.0; break;
    case RegMode::locally_optimal:
      Lambda = std::max(reduced_lambda_star(k, p.rho, p.H, p.W, p.Z), 1e-12);
      break;
    case RegMode::explicit_lambda:
      require(p.Lambda >= 0.0, "Lambda must be >= 0");
      Lambda = p.Lambda;
      break;
  }
  if (Lambda == 0.0 && std::abs(p.alpha - nu) < 1e-12) return kInf;

  const double S = reduced_S(p.alpha, nu, p.W, Lambda);
  const double w1 = 1.0 + p.W;
  const double r2 = p.rho * p.rho;
  const double n2_shape = r2 * (k - S) * (p.W * (k + S) + k + S - 2.0);
  double err_rr;
  if (p.alpha == kInf) {
    err_rr = ((p.H + 1.0) * k + S * S * w1 - 2.0 * S + n2_shape) / k;
  } else {
    const double a = p.alpha;
    const double N1 = a * k * (p.H + 1.0) + S * (S * w1 * (a + p.W * p.Z + p.Z) - 2.0 * a);
    const double N2 = a * n2_shape;
    const double D = a * k - S * S * w1 * w1;
    if (D < 1e-14) return kInf;
    err_rr = (N1 + N2) / D;
  }
  const double err_rrp = 2.0 * (r2 - 1.0) * S / k - 2.0 * r2 + 1.0;
  return err_rr / k + (k - 1.0) / k * err_rrp;
}

KStar optimal_k(double H, double W, double Z, double rho, double alpha, RegMode mode,
                int k_max, double Lambda) {
  require(k_max >= 1, "k_max must be >= 1");
  KStar best{1.0, kInf};
  ReducedPoint p;
  p.alpha = alpha;
  p.rho = rho;
  p.H = H;
  p.W = W;
  p.Z = Z;
  p.Lambda = Lambda;
  for (int k = 1; k <= k_max; ++k) {
    p.k = k;
    const double e = reduced_error(p, mode);
    if (std::isfinite(e) && e < best.error) best = {static_cast<double>(k), e};
  }
  const double asymptote = reduced_error_asymptote(rho, W);
  if (asymptote < best.error - 1e-12) best = {kInf, asymptote};
  return best;
}

std::optional<double> noise_dominated_boundary(double rho, double H, double W) {
  require(H >= 0.0 && W >= 0.0, "noise ratios must be >= 0");
  const double r2 = rho * rho;
  const double den = 2.0 * (1.0 - r2) - H * (1.0 + W);
  if (den <= 0.0) return std::nullopt;
  return (1.0 + W) * (1.0 + W) * r2 / den;
}

double infinite_data_error(int k, std::span<const double> nu_diag, double s, double eta) {
  require(k >= 1, "k must be >= 1");
  if (static_cast<int>(nu_diag.size()) != k)
    throw DimensionMismatch("nu_diag needs k entries");
  double mean = 0.0;
  for (double v : nu_diag) {
    require(v > 0.0 && v <= 1.0, "fractions must lie in (0, 1]");
    mean += v;
  }
  mean /= k;
  return s * (1.0 - (2.0 - 1.0 / k) * mean) + eta * eta / k;
}

}  // namespace subridge
