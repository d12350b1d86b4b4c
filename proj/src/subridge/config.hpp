#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "subridge/classifier.hpp"
#include "subridge/grid.hpp"
#include "subridge/serialize.hpp"
#include "subridge/simulator.hpp"
#include "subridge/theory_equicorr.hpp"
#include "subridge/theory_general.hpp"

namespace subridge {

inline constexpr const char* kVersion = "0.1.0";

struct EnsembleSpec {
  PlanSpec plan;
  int n_plan_draws = 1;  // theory-level plan realizations (heterogeneous)
};

enum class TheoryBackend { none, equicorr, general };

struct CurveConfig {
  Index dimension = 0;
  CovarianceSpec cov = CovarianceSpec::equicorrelated(1.0, 0.0, 0.0, 1);
  TruthSpec truth;
  bool average_truth_in_theory = false;
  std::vector<EnsembleSpec> ensembles;
  double zeta = 0.0;
  Vector eta;  // one value, or one per readout
  std::vector<double> lambdas;
  Axis alpha;
  TheoryBackend theory = TheoryBackend::equicorr;
  SaddleOptions saddle;
  int sim_trials = 0;  // 0: no simulation overlay
  bool full_matrix = false;
};

struct PhaseConfig {
  RegMode mode = RegMode::ridgeless;
  Axis rows;     // first axis
  Axis columns;  // second axis
  double alpha = 1.0, H = 0.0, W = 0.0, Z = 0.0, rho = 0.0;
  double Lambda = 0.0;  // explicit mode
  int k_max = 100;
  bool emit_all_k = false;
};

struct ClassifyConfig {
  std::string train_path;
  std::string test_path;
  LoadOptions train_load;
  LoadOptions test_load;
  EnsembleSpec ensemble;
  std::vector<double> lambdas;
  std::vector<double> etas;
  std::vector<double> sample_sizes;
  bool include_threshold = false;
  int trials = 1;
};

struct RunOptions {
  std::string command = "auto";  // auto | theory | simulate | curve | phase | classify
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0: hardware concurrency
  bool full_matrix = false;
  bool dump_order_params = false;
};

struct ParsedConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::string hash;
  std::variant<CurveConfig, PhaseConfig, ClassifyConfig> body;
};

// Throws ValidationError listing every problem as "<json path>: <message>".
ParsedConfig parse_config(const std::string& text, const RunOptions& options = {});

// Empty when the config is valid.
std::vector<std::string> validate_config(const std::string& text);

}  // namespace subridge
