#pragma once

#include <string>
#include <vector>

#include "subridge/common.hpp"

namespace subridge {

struct Axis {
  std::string name;
  std::string scale = "list";  // linear | log | list
  std::vector<double> values;

  bool operator==(const Axis&) const = default;
};

struct Provenance {
  std::string kind;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;

  bool operator==(const Provenance&) const = default;
};

// Cells are stored row-major over the axes (last axis varies fastest).
struct SweepGrid {
  std::vector<Axis> axes;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // [cell][column]
  std::vector<std::string> errors;          // empty string: cell succeeded
  Provenance provenance;

  std::size_t cell_count() const;
  std::vector<std::size_t> coordinates(std::size_t cell) const;
  std::size_t column_index(const std::string& name) const;  // throws if absent
  double at(std::size_t cell, const std::string& column) const;
  std::size_t failed_count() const;

  // Allocates NaN-filled cells for the current axes and columns.
  void allocate();
  void validate() const;
};

// Grids compare equal when every value matches bitwise, NaN included.
bool grids_equal(const SweepGrid& a, const SweepGrid& b);

enum class GridFormat { csv, json };

GridFormat grid_format_from_string(const std::string& name);

std::string emit_string(const SweepGrid& grid, GridFormat format);
void emit(const SweepGrid& grid, GridFormat format, const std::string& path);
SweepGrid parse_grid(const std::string& text, GridFormat format);
SweepGrid load_grid(const std::string& path);  // format sniffed from content

std::vector<double> linear_values(double lo, double hi, int count);
std::vector<double> log_values(double lo, double hi, int count);

}  // namespace subridge
