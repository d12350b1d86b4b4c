#include "subridge/sweep.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <set>

#include "subridge/parallel.hpp"
#include "subridge/rng.hpp"

namespace subridge {

namespace {

std::string one_line(std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  std::replace(message.begin(), message.end(), '\r', ' ');
  return message.empty() ? "unknown error" : message;
}

void record_failure(SweepGrid& grid, std::size_t cell, const std::string& message) {
  auto& slot = grid.errors[cell];
  slot = slot.empty() ? one_line(message) : slot + "; " + one_line(message);
}

std::string describe(const std::exception& e) {
  if (const auto* nc = dynamic_cast<const NonConvergence*>(&e))
    return std::string(nc->what()) + " (residual " + format_number(nc->last_residual()) + ")";
  return e.what();
}

Vector broadcast(const Vector& v, Index k) {
  if (v.size() == k) return v;
  require(v.size() == 1, "expected one value or one per readout");
  return Vector::Constant(k, v[0]);
}

std::string pair_column(const char* prefix, Index r, Index rp, const char* suffix) {
  return std::string(prefix) + std::to_string(r) + "_" + std::to_string(rp) + suffix;
}

Provenance provenance(const std::string& kind, const std::string& hash, std::uint64_t seed) {
  return {kind, hash, seed, kVersion};
}

// Theory-side model of the target weights.
WeightMoments theory_moments(const CurveConfig& c, std::uint64_t seed) {
  const Index m = c.dimension;
  const bool averaged = c.average_truth_in_theory || c.truth.redraw_per_trial;
  if (!averaged)
    return WeightMoments::from_weights(realize_truth(c.truth, m, derive_seed(seed, StreamTag::ground_truth)).weights);
  if (c.truth.scheme == TruthScheme::spiked) return WeightMoments::spiked_average(c.truth.rho, m);
  WeightMoments iso;
  iso.beta = 1.0;
  return iso;
}

}  // namespace

SweepGrid learning_curve_sweep(const CurveConfig& c, std::uint64_t seed, const RunOptions& options,
                               Json* order_params) {
  const std::size_t n_ens = c.ensembles.size();
  const int n_draws = n_ens ? c.ensembles.front().n_plan_draws : 1;
  const bool draw_axis = n_draws > 1;
  const std::size_t D = draw_axis ? static_cast<std::size_t>(n_draws) + 1 : 1;
  const std::size_t L = c.lambdas.size();
  const std::size_t A = c.alpha.values.size();
  const bool theory = c.theory != TheoryBackend::none;
  const bool simulate = c.sim_trials > 0;
  Index k_max = 0;
  for (const auto& e : c.ensembles)
    k_max = std::max<Index>(k_max, e.plan.strategy == PlanStrategy::explicit_masks
                                       ? static_cast<Index>(e.plan.masks.size())
                                       : e.plan.k);

  SweepGrid grid;
  Axis ens_axis{"ensemble", "list", {}};
  for (std::size_t e = 0; e < n_ens; ++e) ens_axis.values.push_back(static_cast<double>(e));
  grid.axes.push_back(ens_axis);
  if (draw_axis) {
    Axis draws{"draw", "list", {-1.0}};
    for (int d = 0; d < n_draws; ++d) draws.values.push_back(d);
    grid.axes.push_back(draws);
  }
  grid.axes.push_back(Axis{"lambda", "list", c.lambdas});
  Axis alpha = c.alpha;
  alpha.name = "alpha";
  grid.axes.push_back(alpha);

  if (theory) {
    grid.columns.push_back("E_g_theory");
    if (c.full_matrix)
      for (Index r = 0; r < k_max; ++r)
        for (Index rp = 0; rp < k_max; ++rp) grid.columns.push_back(pair_column("E_theory_", r, rp, ""));
  }
  if (simulate) {
    grid.columns.push_back("E_g_sim_mean");
    grid.columns.push_back("E_g_sim_sem");
    if (c.full_matrix)
      for (Index r = 0; r < k_max; ++r)
        for (Index rp = 0; rp < k_max; ++rp) {
          grid.columns.push_back(pair_column("E_sim_", r, rp, "_mean"));
          grid.columns.push_back(pair_column("E_sim_", r, rp, "_sem"));
        }
  }
  grid.allocate();

  auto cell_of = [&](std::size_t e, std::size_t d, std::size_t l, std::size_t a) {
    return ((e * D + d) * L + l) * A + a;
  };
  // draw slot 0 is the mean row when draws are enumerated
  auto draw_slot = [&](int draw) { return draw_axis ? static_cast<std::size_t>(draw + 1) : 0; };
  const std::size_t sim_slot = 0;

  if (theory) {
    struct Draw {
      std::size_t e;
      int d;
      std::optional<SubsamplingPlan> plan;
      std::unique_ptr<GeneralTheory> general;
      std::string error;
    };
    std::vector<Draw> draws;
    for (std::size_t e = 0; e < n_ens; ++e)
      for (int d = 0; d < n_draws; ++d) draws.push_back(Draw{e, d, std::nullopt, nullptr, ""});
    const WeightMoments moments = theory_moments(c, seed);

    parallel_for(draws.size(), options.threads, [&](std::size_t i) {
      Draw& dr = draws[i];
      try {
        dr.plan = realize_plan(c.ensembles[dr.e].plan, c.dimension,
                               derive_seed(seed, StreamTag::plan, static_cast<std::uint64_t>(dr.d)));
        if (c.theory == TheoryBackend::general)
          dr.general = std::make_unique<GeneralTheory>(c.cov, *dr.plan, c.saddle);
      } catch (const std::exception& ex) {
        dr.error = describe(ex);
      }
    });

    const std::size_t per_draw = L * A;
    std::vector<Json> dumps(order_params ? draws.size() * per_draw : 0);
    parallel_for(draws.size() * per_draw, options.threads, [&](std::size_t task) {
      const Draw& dr = draws[task / per_draw];
      const std::size_t l = (task % per_draw) / A, a = task % A;
      const std::size_t cell = cell_of(dr.e, draw_slot(dr.d), l, a);
      if (!dr.error.empty()) {
        grid.errors[cell] = one_line(dr.error);
        return;
      }
      try {
        const SubsamplingPlan& plan = *dr.plan;
        const Index k = plan.size();
        const Vector lambda = Vector::Constant(k, c.lambdas[l]);
        const Vector eta = broadcast(c.eta, k);
        const double alpha_v = c.alpha.values[a];
        OrderParameters params;
        ErrorMatrix err;
        if (c.theory == TheoryBackend::general) {
          params = dr.general->solve(lambda, alpha_v);
          err = dr.general->errors(params, moments, c.zeta, eta);
        } else {
          const auto& eq = c.cov.equicorrelated_params();
          EquiTask task{eq.s, eq.c, eq.omega2, c.zeta, c.truth.rho, eta, lambda, alpha_v, plan.fractions};
          err = ensemble_error_equicorr(task);
          if (order_params) params = order_parameters_equicorr(task);
        }
        auto& row = grid.values[cell];
        row[grid.column_index("E_g_theory")] = err.ensemble;
        if (c.full_matrix)
          for (Index r = 0; r < k; ++r)
            for (Index rp = 0; rp < k; ++rp)
              row[grid.column_index(pair_column("E_theory_", r, rp, ""))] = err.pairwise(r, rp);
        if (order_params)
          dumps[task] = Json{{"ensemble", dr.e},
                             {"draw", dr.d},
                             {"lambda", number_to_json(c.lambdas[l])},
                             {"alpha", number_to_json(alpha_v)},
                             {"order_parameters", to_json(params)},
                             {"errors", to_json(err)}};
      } catch (const std::exception& ex) {
        grid.errors[cell] = one_line(describe(ex));
      }
    });
    if (order_params) {
      *order_params = Json::array();
      for (auto& j : dumps)
        if (!j.is_null()) order_params->push_back(std::move(j));
    }

    if (draw_axis) {
      const std::size_t col = grid.column_index("E_g_theory");
      for (std::size_t e = 0; e < n_ens; ++e)
        for (std::size_t l = 0; l < L; ++l)
          for (std::size_t a = 0; a < A; ++a) {
            double sum = 0.0;
            int failed = 0;
            for (int d = 0; d < n_draws; ++d) {
              const std::size_t cell = cell_of(e, draw_slot(d), l, a);
              if (!grid.errors[cell].empty()) ++failed;
              else sum += grid.values[cell][col];
            }
            const std::size_t mean_cell = cell_of(e, 0, l, a);
            if (failed > 0)
              record_failure(grid, mean_cell, std::to_string(failed) + " of " + std::to_string(n_draws) +
                                                  " plan draws failed");
            else
              grid.values[mean_cell][col] = sum / n_draws;
          }
    }
  }

  if (simulate) {
    for (std::size_t e = 0; e < n_ens; ++e) {
      TrialConfig tc;
      tc.cov = c.cov;
      tc.truth = c.truth;
      tc.plan = c.ensembles[e].plan;
      tc.zeta = c.zeta;
      tc.eta = c.eta;
      tc.lambdas = c.lambdas;
      tc.alphas = c.alpha.values;
      tc.n_trials = c.sim_trials;
      tc.seed = seed;
      tc.full_matrix = c.full_matrix;
      tc.threads = options.threads;
      try {
        const TrialSummary s = run_trials(tc);
        for (std::size_t l = 0; l < L; ++l)
          for (std::size_t a = 0; a < A; ++a) {
            auto& row = grid.values[cell_of(e, sim_slot, l, a)];
            const Index li = static_cast<Index>(l), ai = static_cast<Index>(a);
            row[grid.column_index("E_g_sim_mean")] = s.mean(li, ai);
            row[grid.column_index("E_g_sim_sem")] = s.sem(li, ai);
            if (c.full_matrix)
              for (Index r = 0; r < s.k; ++r)
                for (Index rp = 0; rp < s.k; ++rp) {
                  const std::size_t p = static_cast<std::size_t>(r * s.k + rp);
                  row[grid.column_index(pair_column("E_sim_", r, rp, "_mean"))] = s.pair_mean[p](li, ai);
                  row[grid.column_index(pair_column("E_sim_", r, rp, "_sem"))] = s.pair_sem[p](li, ai);
                }
          }
      } catch (const std::exception& ex) {
        for (std::size_t l = 0; l < L; ++l)
          for (std::size_t a = 0; a < A; ++a)
            record_failure(grid, cell_of(e, sim_slot, l, a), "simulation: " + describe(ex));
      }
    }
  }
  return grid;
}

SweepGrid phase_diagram_sweep(const PhaseConfig& c, const RunOptions& options) {
  SweepGrid grid;
  grid.axes = {c.rows, c.columns};
  grid.columns = {"k_star", "E_k_star", "boundary_alpha"};
  if (c.emit_all_k) {
    for (int k = 1; k <= c.k_max; ++k) grid.columns.push_back("E_" + std::to_string(k));
    grid.columns.push_back("E_inf");
  }
  grid.allocate();
  const std::size_t n_cols = c.columns.values.size();

  parallel_for(grid.cell_count(), options.threads, [&](std::size_t cell) {
    double alpha = c.alpha, H = c.H, W = c.W, Z = c.Z, rho = c.rho;
    auto assign = [&](const std::string& name, double v) {
      if (name == "alpha") alpha = v;
      else if (name == "H") H = v;
      else if (name == "W") W = v;
      else if (name == "Z") Z = v;
      else rho = v;
    };
    assign(c.rows.name, c.rows.values[cell / n_cols]);
    assign(c.columns.name, c.columns.values[cell % n_cols]);
    try {
      if (c.mode == RegMode::ridgeless && std::isfinite(alpha))
        for (int k = 1; k <= c.k_max; ++k)
          if (std::abs(alpha - 1.0 / k) < 1e-12) {
            alpha += 1e-9;
            break;
          }
      auto& row = grid.values[cell];
      const KStar best = optimal_k(H, W, Z, rho, alpha, c.mode, c.k_max, c.Lambda);
      row[0] = best.k;
      row[1] = best.error;
      if (c.mode == RegMode::ridgeless && Z == 0.0) {
        const auto boundary = noise_dominated_boundary(rho, H, W);
        row[2] = boundary ? *boundary : kInf;
      }
      if (c.emit_all_k) {
        ReducedPoint p{1.0, alpha, rho, c.Lambda, H, W, Z};
        for (int k = 1; k <= c.k_max; ++k) {
          p.k = k;
          row[static_cast<std::size_t>(2 + k)] = reduced_error(p, c.mode);
        }
        row.back() = reduced_error_asymptote(rho, W);
      }
    } catch (const std::exception& ex) {
      grid.errors[cell] = one_line(describe(ex));
    }
  });
  return grid;
}

SweepGrid classification_sweep(const ClassifyConfig& c, std::uint64_t seed, const RunOptions& options) {
  const FeatureDataset train = load_feature_dataset(c.train_path, c.train_load);
  const FeatureDataset test = load_feature_dataset(c.test_path, c.test_load);
  if (train.dimension() != test.dimension())
    throw DimensionMismatch("train and test feature dimensions differ");
  const Index m = train.dimension();
  const Index k = c.ensemble.plan.strategy == PlanStrategy::explicit_masks
                      ? static_cast<Index>(c.ensemble.plan.masks.size())
                      : c.ensemble.plan.k;
  if (k > m) throw InvalidArgument("ensemble size k exceeds the feature dimension");

  std::set<double> sizes(c.sample_sizes.begin(), c.sample_sizes.end());
  if (c.include_threshold) sizes.insert(std::round(static_cast<double>(m) / static_cast<double>(k)));

  SweepGrid grid;
  grid.axes = {Axis{"lambda", "list", c.lambdas}, Axis{"eta", "list", c.etas},
               Axis{"P", "list", std::vector<double>(sizes.begin(), sizes.end())}};
  grid.columns = {"error_mean", "error_sem"};
  grid.allocate();
  const std::size_t cells = grid.cell_count();
  const std::size_t n_p = sizes.size(), n_eta = c.etas.size();
  const std::size_t trials = static_cast<std::size_t>(c.trials);

  std::vector<double> errors(cells * trials, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> failures(cells * trials);
  parallel_for(cells * trials, options.threads, [&](std::size_t task) {
    const std::size_t cell = task / trials, t = task % trials;
    try {
      const double lambda = c.lambdas[cell / (n_eta * n_p)];
      const double eta = c.etas[(cell / n_p) % n_eta];
      const Index P = static_cast<Index>(grid.axes[2].values[cell % n_p]);
      if (P > train.size())
        throw InvalidArgument("P = " + std::to_string(P) + " exceeds the " + std::to_string(train.size()) +
                              " training rows");
      const std::uint64_t trial_seed = derive_seed(seed, StreamTag::trial, t);
      const SubsamplingPlan plan =
          realize_plan(c.ensemble.plan, m,
                       c.ensemble.plan.redraw_per_trial ? derive_seed(trial_seed, StreamTag::plan)
                                                        : derive_seed(seed, StreamTag::plan));
      std::vector<Index> order(static_cast<std::size_t>(train.size()));
      std::iota(order.begin(), order.end(), Index{0});
      Stream subset(derive_seed(trial_seed, StreamTag::classifier_subset));
      std::shuffle(order.begin(), order.end(), subset.engine());
      order.resize(static_cast<std::size_t>(P));
      const FeatureDataset sub = select_rows(train, order);
      const ClassifierEnsemble ens =
          train_classifier_ensemble(sub, plan, Vector::Constant(k, lambda), Vector::Constant(k, eta),
                                    derive_seed(trial_seed, StreamTag::training_noise));
      errors[task] = classification_error(ens, test, derive_seed(trial_seed, StreamTag::eval_noise));
    } catch (const std::exception& ex) {
      failures[task] = describe(ex);
    }
  });

  for (std::size_t cell = 0; cell < cells; ++cell) {
    double sum = 0.0;
    std::string failure;
    for (std::size_t t = 0; t < trials && failure.empty(); ++t) {
      failure = failures[cell * trials + t];
      sum += errors[cell * trials + t];
    }
    if (!failure.empty()) {
      grid.errors[cell] = one_line(failure);
      continue;
    }
    const double mean = sum / static_cast<double>(trials);
    double ss = 0.0;
    for (std::size_t t = 0; t < trials; ++t) ss += (errors[cell * trials + t] - mean) * (errors[cell * trials + t] - mean);
    grid.values[cell][0] = mean;
    grid.values[cell][1] = trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials))
                                      : std::numeric_limits<double>::quiet_NaN();
  }
  return grid;
}

SweepResult run_parsed(const ParsedConfig& config, const RunOptions& options) {
  SweepResult out;
  if (const auto* curve = std::get_if<CurveConfig>(&config.body)) {
    Json dump;
    out.grid = learning_curve_sweep(*curve, config.seed, options, options.dump_order_params ? &dump : nullptr);
    if (options.dump_order_params) out.order_params = std::move(dump);
  } else if (const auto* phase = std::get_if<PhaseConfig>(&config.body)) {
    out.grid = phase_diagram_sweep(*phase, options);
  } else {
    out.grid = classification_sweep(std::get<ClassifyConfig>(config.body), config.seed, options);
  }
  out.grid.provenance = provenance(config.kind, config.hash, config.seed);
  out.grid.validate();
  return out;
}

SweepResult run_config(const std::string& config_text, const RunOptions& options) {
  return run_parsed(parse_config(config_text, options), options);
}

}  // namespace subridge
