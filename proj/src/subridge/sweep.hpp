#pragma once

#include <optional>
#include <string>

#include "subridge/config.hpp"
#include "subridge/grid.hpp"

namespace subridge {

struct SweepResult {
  SweepGrid grid;
  std::optional<Json> order_params;  // filled with RunOptions::dump_order_params
};

SweepResult run_config(const std::string& config_text, const RunOptions& options = {});
SweepResult run_parsed(const ParsedConfig& config, const RunOptions& options = {});

SweepGrid learning_curve_sweep(const CurveConfig& config, std::uint64_t seed, const RunOptions& options,
                               Json* order_params = nullptr);
SweepGrid phase_diagram_sweep(const PhaseConfig& config, const RunOptions& options);
SweepGrid classification_sweep(const ClassifyConfig& config, std::uint64_t seed,
                               const RunOptions& options);

}  // namespace subridge
