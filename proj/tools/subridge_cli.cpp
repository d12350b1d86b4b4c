#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subridge/subridge.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitAllFailed = 2;

struct Common {
  std::string config;
  std::string out;
  std::string format;
  std::string dump;
  unsigned long long seed = 0;
  int threads = 0;
  bool full_matrix = false;
};

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void report(const char* what) {
  std::fprintf(stderr, "subridge: %s: %s\n", what, sr_last_error());
}

void note_divergence(const sr_grid* grid) {
  std::size_t diverged = 0;
  const std::size_t cells = sr_grid_cell_count(grid);
  for (std::size_t col = 0; col < sr_grid_column_count(grid); ++col) {
    const std::string name = sr_grid_column_name(grid, col);
    if (name.rfind("E_", 0) != 0 || ends_with(name, "_sem")) continue;
    for (std::size_t cell = 0; cell < cells; ++cell) {
      double v = 0.0;
      if (sr_grid_value(grid, cell, name.c_str(), &v) == SR_OK && std::isinf(v)) ++diverged;
    }
  }
  if (diverged > 0)
    std::fprintf(stderr, "subridge: note: %zu values diverge (inf) at interpolation thresholds\n", diverged);
}

int run(const std::string& command, const Common& c, bool seed_given) {
  std::string text;
  if (!read_file(c.config, text)) {
    std::fprintf(stderr, "subridge: cannot read config '%s'\n", c.config.c_str());
    return kExitValidation;
  }
  if (command == "validate-config") {
    char* messages = nullptr;
    const sr_status st = sr_config_validate(text.c_str(), &messages);
    if (st == SR_OK) {
      std::printf("%s: ok\n", c.config.c_str());
      return kExitOk;
    }
    std::fprintf(stderr, "%s", messages ? messages : (std::string(sr_last_error()) + "\n").c_str());
    sr_string_free(messages);
    return kExitValidation;
  }

  sr_run_options opts;
  sr_run_options_init(&opts);
  opts.command = command.c_str();
  opts.has_seed = seed_given ? 1 : 0;
  opts.seed = c.seed;
  opts.threads = c.threads;
  opts.full_matrix = c.full_matrix ? 1 : 0;
  opts.dump_order_params = c.dump.empty() ? 0 : 1;

  sr_grid* grid = nullptr;
  const sr_status st = sr_run_config(text.c_str(), &opts, &grid);
  if (st != SR_OK) {
    if (st == SR_VALIDATION) std::fprintf(stderr, "%s\n", sr_last_error());
    else report(sr_status_name(st));
    return kExitValidation;
  }

  std::string format = c.format;
  if (format.empty()) format = ends_with(c.out, ".json") ? "json" : "csv";
  int code = kExitOk;
  if (c.out.empty() || c.out == "-") {
    char* s = nullptr;
    if (sr_grid_to_string(grid, format.c_str(), &s) != SR_OK) {
      report("emit");
      code = kExitValidation;
    } else {
      std::fwrite(s, 1, std::strlen(s), stdout);
      sr_string_free(s);
    }
  } else if (sr_grid_emit(grid, format.c_str(), c.out.c_str()) != SR_OK) {
    report("emit");
    code = kExitValidation;
  }

  if (!c.dump.empty()) {
    char* s = nullptr;
    if (sr_grid_order_params(grid, &s) == SR_OK && s) {
      std::ofstream dump(c.dump, std::ios::binary);
      dump << s;
      if (!dump) {
        std::fprintf(stderr, "subridge: cannot write '%s'\n", c.dump.c_str());
        code = kExitValidation;
      }
      sr_string_free(s);
    } else {
      std::fprintf(stderr, "subridge: no order parameters for this sweep\n");
    }
  }

  note_divergence(grid);
  const std::size_t failed = sr_grid_failed_count(grid), cells = sr_grid_cell_count(grid);
  if (failed > 0) {
    std::fprintf(stderr, "subridge: %zu of %zu cells failed\n", failed, cells);
    for (std::size_t i = 0; i < cells; ++i) {
      const char* err = sr_grid_cell_error(grid, i);
      if (err && *err) {
        std::fprintf(stderr, "  first failure (cell %zu): %s\n", i, err);
        break;
      }
    }
    if (failed == cells && code == kExitOk) code = kExitAllFailed;
  }
  sr_grid_free(grid);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-subsampled ridge ensembles: learning curves, phase diagrams, classification sweeps"};
  app.set_version_flag("--version", std::string(sr_version()));
  app.require_subcommand(1);

  Common common;
  const char* names[][2] = {
      {"theory", "Theory-only learning curves"},
      {"simulate", "Simulated learning curves (theory overlay when configured)"},
      {"curve", "Learning curves as configured"},
      {"phase", "Optimal ensemble size over a two-axis grid"},
      {"classify", "Majority-vote classification learning curves"},
      {"validate-config", "Check a config and list every problem"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& n : names) {
    CLI::App* sub = app.add_subcommand(n[0], n[1]);
    sub->add_option("--config", common.config, "JSON config path")->required()->check(CLI::ExistingFile);
    if (std::string(n[0]) != "validate-config") {
      sub->add_option("--out", common.out, "Output path (stdout when omitted)");
      sub->add_option("--format", common.format, "csv or json (default from --out extension)")
          ->check(CLI::IsMember({"csv", "json"}));
      seed_opts.push_back(sub->add_option("--seed", common.seed, "Override the config seed"));
      sub->add_option("--threads", common.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
      sub->add_flag("--full-matrix", common.full_matrix, "Emit every pairwise error");
      sub->add_option("--dump-order-params", common.dump, "Write solved order parameters as JSON");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) {
      bool seed_given = false;
      for (auto* o : seed_opts)
        if (o->count() > 0) seed_given = true;
      return run(names[i][0], common, seed_given);
    }
  return kExitValidation;
}
