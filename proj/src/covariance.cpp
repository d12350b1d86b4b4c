#include "subridge/covariance.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "subridge/rng.hpp"

namespace subridge {

namespace {

void validate_equicorrelated(double s, double c, double omega2, Index dimension) {
  require(dimension >= 1, "covariance dimension must be positive");
  require(s > 0.0 && std::isfinite(s), "equicorrelated scale s must be > 0");
  require(c >= 0.0 && c <= 1.0, "equicorrelated correlation c must lie in [0, 1]");
  require(omega2 >= 0.0 && std::isfinite(omega2),
          "feature-noise variance omega^2 must be >= 0");
}

void validate_symmetric_psd(const Matrix& m, const char* name) {
  if (m.rows() != m.cols())
    throw DimensionMismatch(std::string(name) + " covariance must be square");
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw InvalidArgument(std::string(name) + " covariance is not symmetric");
  // Smallest eigenvalue >= -1e-10 * largest, tested by a Cholesky of the
  // shifted matrix. The row-sum norm bounds the largest eigenvalue.
  const double largest = m.cwiseAbs().rowwise().sum().maxCoeff();
  if (largest == 0.0) return;
  Matrix shifted = m;
  shifted.diagonal().array() += 1e-10 * largest;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw InvalidArgument(std::string(name) +
                          " covariance is not positive semidefinite");
}

Matrix toeplitz_matrix(Index n, double scale, double decay) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      m(i, j) = scale * std::pow(decay, static_cast<double>(std::abs(i - j)));
  return m;
}

}  // namespace

CovarianceSpec CovarianceSpec::equicorrelated(double s, double c, double omega2,
                                              Index dimension) {
  validate_equicorrelated(s, c, omega2, dimension);
  CovarianceSpec spec;
  spec.kind_ = CovarianceKind::equicorrelated;
  spec.dimension_ = dimension;
  spec.equi_ = {s, c, omega2};
  return spec;
}

CovarianceSpec CovarianceSpec::from_matrices(Matrix signal, Matrix noise) {
  if (signal.rows() < 1) throw InvalidArgument("covariance dimension must be positive");
  if (signal.rows() != noise.rows() || signal.cols() != noise.cols())
    throw DimensionMismatch("signal and noise covariances differ in shape");
  validate_symmetric_psd(signal, "signal");
  validate_symmetric_psd(noise, "noise");
  CovarianceSpec spec;
  spec.kind_ = CovarianceKind::explicit_dense;
  spec.dimension_ = signal.rows();
  spec.signal_ = std::move(signal);
  spec.noise_ = std::move(noise);
  return spec;
}

CovarianceSpec CovarianceSpec::toeplitz(Index dimension, double signal_scale,
                                        double signal_decay, double noise_scale,
                                        double noise_decay) {
  require(dimension >= 1, "covariance dimension must be positive");
  require(std::abs(signal_decay) < 1.0 && std::abs(noise_decay) < 1.0,
          "Toeplitz decay must satisfy |decay| < 1");
  require(signal_scale > 0.0 && noise_scale >= 0.0, "Toeplitz scales must be >= 0");
  return from_matrices(toeplitz_matrix(dimension, signal_scale, signal_decay),
                       toeplitz_matrix(dimension, noise_scale, noise_decay));
}

const EquicorrelatedParams& CovarianceSpec::equicorrelated_params() const {
  if (!is_equicorrelated())
    throw InvalidArgument("covariance is not parametric equicorrelated");
  return equi_;
}

const Matrix& CovarianceSpec::signal_matrix() const {
  if (is_equicorrelated())
    throw InvalidArgument("parametric covariance has no dense signal matrix");
  return signal_;
}

const Matrix& CovarianceSpec::noise_matrix() const {
  if (is_equicorrelated())
    throw InvalidArgument("parametric covariance has no dense noise matrix");
  return noise_;
}

CovarianceSpec CovarianceSpec::to_explicit() const {
  if (!is_equicorrelated()) return *this;
  return build_equicorrelated_covariance(equi_.s, equi_.c, equi_.omega2, dimension_);
}

double CovarianceSpec::signal(Index i, Index j) const {
  if (is_equicorrelated())
    return equi_.s * ((i == j ? 1.0 - equi_.c : 0.0) + equi_.c);
  return signal_(i, j);
}

double CovarianceSpec::noise(Index i, Index j) const {
  if (is_equicorrelated()) return i == j ? equi_.omega2 : 0.0;
  return noise_(i, j);
}

Matrix CovarianceSpec::signal_block(const Mask& rows, const Mask& cols) const {
  if (!is_equicorrelated()) return signal_(rows, cols);
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) = signal(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  return out;
}

Matrix CovarianceSpec::noise_block(const Mask& rows, const Mask& cols) const {
  if (!is_equicorrelated()) return noise_(rows, cols);
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) = noise(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  return out;
}

Matrix CovarianceSpec::total_block(const Mask& rows, const Mask& cols) const {
  if (!is_equicorrelated()) return signal_(rows, cols) + noise_(rows, cols);
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (Index i = 0; i < out.rows(); ++i) {
    const Index gi = rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < out.cols(); ++j) {
      const Index gj = cols[static_cast<std::size_t>(j)];
      out(i, j) = signal(gi, gj) + noise(gi, gj);
    }
  }
  return out;
}

Vector CovarianceSpec::apply_signal(const Vector& v) const {
  if (v.size() != dimension_) throw DimensionMismatch("vector length != covariance dimension");
  if (!is_equicorrelated()) return signal_.selfadjointView<Eigen::Lower>() * v;
  return equi_.s * ((1.0 - equi_.c) * v + Vector::Constant(dimension_, equi_.c * v.sum()));
}

Vector CovarianceSpec::apply_noise(const Vector& v) const {
  if (v.size() != dimension_) throw DimensionMismatch("vector length != covariance dimension");
  if (!is_equicorrelated()) return noise_.selfadjointView<Eigen::Lower>() * v;
  return equi_.omega2 * v;
}

double CovarianceSpec::signal_trace() const {
  if (is_equicorrelated()) return equi_.s * static_cast<double>(dimension_);
  return signal_.trace();
}

CovarianceSpec build_equicorrelated_covariance(double s, double c, double omega2,
                                               Index dimension) {
  validate_equicorrelated(s, c, omega2, dimension);
  Matrix signal = Matrix::Constant(dimension, dimension, s * c);
  signal.diagonal().array() = s;
  Matrix noise = Matrix::Zero(dimension, dimension);
  noise.diagonal().array() = omega2;
  return CovarianceSpec::from_matrices(std::move(signal), std::move(noise));
}

GroundTruth sample_ground_truth(double rho, Index dimension, std::uint64_t seed) {
  require(std::abs(rho) <= 1.0, "alignment rho must lie in [-1, 1]");
  require(dimension >= 1, "dimension must be positive");
  Stream stream(derive_seed(seed, StreamTag::ground_truth));
  Vector w0(dimension);
  stream.fill_normal(w0);
  w0.array() -= w0.mean();
  GroundTruth truth;
  truth.weights = std::sqrt(1.0 - rho * rho) * w0;
  truth.weights.array() += rho;
  truth.rho = rho;
  truth.scheme = TruthScheme::spiked;
  truth.seed = seed;
  return truth;
}

GroundTruth sample_isotropic_truth(Index dimension, std::uint64_t seed) {
  require(dimension >= 1, "dimension must be positive");
  Stream stream(derive_seed(seed, StreamTag::ground_truth));
  GroundTruth truth;
  truth.weights.resize(dimension);
  stream.fill_normal(truth.weights);
  truth.scheme = TruthScheme::isotropic;
  truth.seed = seed;
  return truth;
}

const char* to_string(PlanStrategy strategy) {
  switch (strategy) {
    case PlanStrategy::homogeneous: return "homogeneous";
    case PlanStrategy::heterogeneous: return "heterogeneous";
    case PlanStrategy::replacement: return "replacement";
    case PlanStrategy::explicit_masks: return "explicit";
  }
  return "unknown";
}

PlanStrategy plan_strategy_from_string(const std::string& name) {
  if (name == "homogeneous") return PlanStrategy::homogeneous;
  if (name == "heterogeneous") return PlanStrategy::heterogeneous;
  if (name == "replacement") return PlanStrategy::replacement;
  if (name == "explicit") return PlanStrategy::explicit_masks;
  throw InvalidArgument("unknown plan strategy '" + name + "'");
}

bool SubsamplingPlan::is_partition() const {
  if (!exclusive) return false;
  Index total = 0;
  for (const auto& m : masks) total += static_cast<Index>(m.size());
  return total == dimension;
}

Matrix fraction_matrix(const std::vector<Mask>& masks, Index dimension) {
  const Index k = static_cast<Index>(masks.size());
  Matrix nu = Matrix::Zero(k, k);
  const double inv_m = 1.0 / static_cast<double>(dimension);
  for (Index r = 0; r < k; ++r) {
    const auto& a = masks[static_cast<std::size_t>(r)];
    nu(r, r) = static_cast<double>(a.size()) * inv_m;
    for (Index s = r + 1; s < k; ++s) {
      const auto& b = masks[static_cast<std::size_t>(s)];
      // masks are sorted
      std::size_t i = 0, j = 0, shared = 0;
      while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++shared; ++i; ++j; }
      }
      nu(r, s) = nu(s, r) = static_cast<double>(shared) * inv_m;
    }
  }
  return nu;
}

SubsamplingPlan SubsamplingPlan::from_masks(std::vector<Mask> masks, Index dimension) {
  require(dimension >= 1, "plan dimension must be positive");
  require(!masks.empty(), "plan needs at least one mask");
  for (std::size_t r = 0; r < masks.size(); ++r) {
    auto& m = masks[r];
    if (m.empty())
      throw InvalidArgument("mask " + std::to_string(r) + " is empty");
    std::sort(m.begin(), m.end());
    if (m.front() < 0 || m.back() >= dimension)
      throw InvalidArgument("mask " + std::to_string(r) + " has an index out of range");
    if (std::adjacent_find(m.begin(), m.end()) != m.end())
      throw InvalidArgument("mask " + std::to_string(r) + " repeats an index");
  }
  SubsamplingPlan plan;
  plan.masks = std::move(masks);
  plan.dimension = dimension;
  plan.fractions = fraction_matrix(plan.masks, dimension);
  const Index k = plan.size();
  bool disjoint = true;
  for (Index r = 0; r < k && disjoint; ++r)
    for (Index s = r + 1; s < k; ++s)
      if (plan.fractions(r, s) != 0.0) { disjoint = false; break; }
  plan.exclusive = disjoint;
  return plan;
}

std::vector<Index> apportion(std::span<const double> weights, Index total) {
  const Index k = static_cast<Index>(weights.size());
  require(k >= 1, "apportion needs at least one share");
  require(total >= k, "cannot give every share at least one unit");
  double sum = 0.0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), "apportion weights must be finite and >= 0");
    sum += w;
  }
  require(sum > 0.0, "apportion weights must not all be zero");

  std::vector<double> quota(static_cast<std::size_t>(k));
  std::vector<Index> share(static_cast<std::size_t>(k));
  Index assigned = 0;
  for (std::size_t i = 0; i < quota.size(); ++i) {
    quota[i] = weights[i] / sum * static_cast<double>(total);
    share[i] = std::max<Index>(1, static_cast<Index>(std::floor(quota[i])));
    assigned += share[i];
  }
  std::vector<std::size_t> order(quota.size());
  std::iota(order.begin(), order.end(), 0);
  auto remainder = [&](std::size_t i) { return quota[i] - static_cast<double>(share[i]); };
  if (assigned < total) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder(a) > remainder(b); });
    for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
      ++share[order[i]];
      ++assigned;
    }
  }
  while (assigned > total) {
    // Take back from the share that most exceeds its quota.
    std::size_t worst = order.size();
    for (std::size_t i = 0; i < share.size(); ++i) {
      if (share[i] <= 1) continue;
      if (worst == order.size() || remainder(i) < remainder(worst)) worst = i;
    }
    --share[worst];
    --assigned;
  }
  return share;
}

std::vector<double> sample_heterogeneous_fractions(Index k, double sigma,
                                                   std::uint64_t seed) {
  require(k >= 1, "ensemble size k must be >= 1");
  require(sigma > 0.0 && std::isfinite(sigma),
          "heterogeneous sampling needs sigma > 0 (use homogeneous for sigma = 0)");
  const double ks = static_cast<double>(k) * sigma;
  std::gamma_distribution<double> gamma(1.0 / (ks * ks),
                                        static_cast<double>(k) * sigma * sigma);
  Stream stream(derive_seed(seed, StreamTag::plan, 0));
  std::vector<double> draws(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto& d : draws) {
    // A vanishing draw (possible for huge sigma) would make an empty readout.
    do { d = gamma(stream.engine()); } while (!(d > 0.0));
    total += d;
  }
  for (auto& d : draws) d /= total;
  return draws;
}

namespace {

Mask random_subset(Index dimension, Index size, std::uint64_t seed) {
  Stream stream(seed);
  std::vector<Index> pool(static_cast<std::size_t>(dimension));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < size; ++i) {
    std::uniform_int_distribution<Index> pick(i, dimension - 1);
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(pick(stream.engine()))]);
  }
  Mask m(pool.begin(), pool.begin() + size);
  std::sort(m.begin(), m.end());
  return m;
}

std::vector<Mask> disjoint_blocks(const std::vector<Index>& sizes, Index dimension,
                                  std::uint64_t seed) {
  Stream stream(derive_seed(seed, StreamTag::plan, 1));
  std::vector<Index> perm(static_cast<std::size_t>(dimension));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), stream.engine());
  std::vector<Mask> masks;
  std::size_t offset = 0;
  for (Index n : sizes) {
    Mask m(perm.begin() + static_cast<std::ptrdiff_t>(offset),
           perm.begin() + static_cast<std::ptrdiff_t>(offset + static_cast<std::size_t>(n)));
    std::sort(m.begin(), m.end());
    masks.push_back(std::move(m));
    offset += static_cast<std::size_t>(n);
  }
  return masks;
}

}  // namespace

SubsamplingPlan sample_subsampling_plan(
    PlanStrategy strategy, Index k, double sigma, Index dimension,
    std::uint64_t seed, const std::optional<std::vector<double>>& fractions_override) {
  require(k >= 1, "ensemble size k must be >= 1");
  require(dimension >= 1, "dimension must be positive");
  if (k > dimension)
    throw InvalidArgument("ensemble size k = " + std::to_string(k) +
                          " exceeds dimension M = " + std::to_string(dimension));
  if (fractions_override) {
    require(static_cast<Index>(fractions_override->size()) == k,
            "fractions override must have k entries");
    for (double f : *fractions_override)
      require(f > 0.0 && f <= 1.0, "override fractions must lie in (0, 1]");
  }

  std::vector<Mask> masks;
  bool exclusive = true;
  const double m = static_cast<double>(dimension);
  switch (strategy) {
    case PlanStrategy::homogeneous:
    case PlanStrategy::heterogeneous: {
      std::vector<double> fractions;
      Index total = dimension;
      if (fractions_override) {
        fractions = *fractions_override;
        const double sum = std::accumulate(fractions.begin(), fractions.end(), 0.0);
        require(sum <= 1.0 + 1e-12, "exclusive plan fractions must sum to at most 1");
        total = std::min<Index>(dimension, static_cast<Index>(std::llround(sum * m)));
      } else if (strategy == PlanStrategy::homogeneous) {
        fractions.assign(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
      } else {
        fractions = sample_heterogeneous_fractions(k, sigma, seed);
      }
      if (strategy == PlanStrategy::heterogeneous && !fractions_override)
        require(sigma > 0.0, "heterogeneous sampling needs sigma > 0");
      masks = disjoint_blocks(apportion(fractions, total), dimension, seed);
      break;
    }
    case PlanStrategy::replacement: {
      exclusive = false;
      for (Index r = 0; r < k; ++r) {
        const double f = fractions_override
                             ? (*fractions_override)[static_cast<std::size_t>(r)]
                             : 1.0 / static_cast<double>(k);
        const Index n = std::clamp<Index>(static_cast<Index>(std::llround(f * m)), 1, dimension);
        masks.push_back(random_subset(dimension, n,
                                      derive_seed(seed, StreamTag::plan, 2, static_cast<std::uint64_t>(r))));
      }
      break;
    }
    case PlanStrategy::explicit_masks:
      throw InvalidArgument("explicit plans are built from masks, not sampled");
  }

  SubsamplingPlan plan = SubsamplingPlan::from_masks(std::move(masks), dimension);
  plan.strategy = strategy;
  plan.sigma = strategy == PlanStrategy::heterogeneous ? sigma : 0.0;
  plan.seed = seed;
  if (exclusive) plan.exclusive = true;
  return plan;
}

}  // namespace subridge
