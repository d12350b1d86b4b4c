#include "subridge/grid.hpp"

#include <fstream>
#include <sstream>

#include "subridge/serialize.hpp"

namespace subridge {

std::size_t SweepGrid::cell_count() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

std::vector<std::size_t> SweepGrid::coordinates(std::size_t cell) const {
  std::vector<std::size_t> out(axes.size());
  for (std::size_t i = axes.size(); i-- > 0;) {
    const std::size_t n = axes[i].values.size();
    out[i] = cell % n;
    cell /= n;
  }
  return out;
}

std::size_t SweepGrid::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw InvalidArgument("grid has no column '" + name + "'");
}

double SweepGrid::at(std::size_t cell, const std::string& column) const {
  return values.at(cell).at(column_index(column));
}

std::size_t SweepGrid::failed_count() const {
  std::size_t n = 0;
  for (const auto& e : errors) n += !e.empty();
  return n;
}

void SweepGrid::allocate() {
  const std::size_t n = cell_count();
  values.assign(n, std::vector<double>(columns.size(), std::numeric_limits<double>::quiet_NaN()));
  errors.assign(n, std::string());
}

namespace {

bool plain_token(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (ch == ',' || ch == '"' || ch == ' ' || ch == '\n' || ch == '\r' || ch == '\t' || ch == '=')
      return false;
  return true;
}

}  // namespace

void SweepGrid::validate() const {
  if (axes.empty()) throw InvalidArgument("grid needs at least one axis");
  for (const auto& a : axes) {
    if (!plain_token(a.name)) throw InvalidArgument("axis name '" + a.name + "' is not a plain token");
    if (a.values.empty()) throw InvalidArgument("axis '" + a.name + "' is empty");
    if (a.scale != "linear" && a.scale != "log" && a.scale != "list")
      throw InvalidArgument("axis '" + a.name + "' has unknown scale '" + a.scale + "'");
  }
  for (const auto& c : columns)
    if (!plain_token(c)) throw InvalidArgument("column name '" + c + "' is not a plain token");
  const std::size_t n = cell_count();
  if (values.size() != n || errors.size() != n)
    throw InvalidArgument("grid cell count differs from the axis product");
  for (const auto& row : values)
    if (row.size() != columns.size()) throw InvalidArgument("grid row width differs from column count");
  for (const auto& e : errors)
    if (e.find('\n') != std::string::npos || e.find('\r') != std::string::npos)
      throw InvalidArgument("cell error strings must be single-line");
  if (!plain_token(provenance.kind) || !plain_token(provenance.version) ||
      !plain_token(provenance.config_hash))
    throw InvalidArgument("provenance fields must be plain tokens");
}

namespace {

bool same_value(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b && std::signbit(a) == std::signbit(b);
}

bool same_values(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_value(a[i], b[i])) return false;
  return true;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  out.push_back(std::move(cell));
  return out;
}

std::string emit_csv(const SweepGrid& g) {
  std::ostringstream out;
  out << "# subridge-grid 1\n";
  out << "# kind=" << g.provenance.kind << " version=" << g.provenance.version
      << " seed=" << g.provenance.seed << " config_hash=" << g.provenance.config_hash << '\n';
  for (const auto& a : g.axes) out << "# axis " << a.name << ' ' << a.scale << ' ' << a.values.size() << '\n';
  for (const auto& a : g.axes) out << a.name << ',';
  for (const auto& c : g.columns) out << c << ',';
  out << "error\n";
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    const auto coords = g.coordinates(cell);
    for (std::size_t i = 0; i < g.axes.size(); ++i) out << format_number(g.axes[i].values[coords[i]]) << ',';
    for (double v : g.values[cell]) out << format_number(v) << ',';
    out << csv_field(g.errors[cell]) << '\n';
  }
  return out.str();
}

std::string emit_json(const SweepGrid& g) {
  Json axes = Json::array();
  for (const auto& a : g.axes) {
    Json values = Json::array();
    for (double v : a.values) values.push_back(number_to_json(v));
    axes.push_back(Json{{"name", a.name}, {"scale", a.scale}, {"values", values}});
  }
  Json cells = Json::array();
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    const auto coords = g.coordinates(cell);
    Json at = Json::array();
    for (std::size_t i = 0; i < g.axes.size(); ++i) at.push_back(number_to_json(g.axes[i].values[coords[i]]));
    Json values = Json::array();
    for (double v : g.values[cell]) values.push_back(number_to_json(v));
    cells.push_back(Json{{"coords", at}, {"values", values}, {"error", g.errors[cell]}});
  }
  Json doc{{"format", "subridge-grid"},
           {"format_version", 1},
           {"provenance", Json{{"kind", g.provenance.kind},
                               {"version", g.provenance.version},
                               {"seed", g.provenance.seed},
                               {"config_hash", g.provenance.config_hash}}},
           {"axes", axes},
           {"columns", g.columns},
           {"cells", cells}};
  return doc.dump(2) + "\n";
}

SweepGrid parse_csv_grid(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  SweepGrid g;
  std::vector<std::size_t> axis_sizes;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t cell = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError("grid CSV line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string word;
      ls >> word;
      if (word == "axis") {
        Axis a;
        std::size_t n = 0;
        if (!(ls >> a.name >> a.scale >> n) || n == 0) fail("malformed axis line");
        g.axes.push_back(a);
        axis_sizes.push_back(n);
      } else if (word.rfind("kind=", 0) == 0) {
        std::istringstream kv(line.substr(1));
        std::string tok;
        while (kv >> tok) {
          const auto eq = tok.find('=');
          if (eq == std::string::npos) fail("malformed provenance token");
          const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
          if (key == "kind") g.provenance.kind = value;
          else if (key == "version") g.provenance.version = value;
          else if (key == "seed") g.provenance.seed = std::stoull(value);
          else if (key == "config_hash") g.provenance.config_hash = value;
        }
      }
      continue;
    }
    const auto fields = parse_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < g.axes.size() + 1 || fields.back() != "error") fail("bad header row");
      for (std::size_t i = 0; i < g.axes.size(); ++i)
        if (fields[i] != g.axes[i].name) fail("header does not match axis declarations");
      g.columns.assign(fields.begin() + static_cast<std::ptrdiff_t>(g.axes.size()), fields.end() - 1);
      for (std::size_t i = 0; i < g.axes.size(); ++i)
        g.axes[i].values.assign(axis_sizes[i], std::numeric_limits<double>::quiet_NaN());
      g.allocate();
      continue;
    }
    if (fields.size() != g.axes.size() + g.columns.size() + 1) fail("wrong field count");
    if (cell >= g.cell_count()) fail("more rows than the axes allow");
    const auto coords = g.coordinates(cell);
    for (std::size_t i = 0; i < g.axes.size(); ++i) {
      const double v = parse_number(fields[i]);
      double& slot = g.axes[i].values[coords[i]];
      if (std::isnan(slot) && !std::isnan(v)) slot = v;
      else if (!same_value(slot, v) && !(std::isnan(slot) && std::isnan(v))) fail("inconsistent axis value");
    }
    for (std::size_t c = 0; c < g.columns.size(); ++c)
      g.values[cell][c] = parse_number(fields[g.axes.size() + c]);
    g.errors[cell] = fields.back();
    ++cell;
  }
  if (!header_seen) throw ParseError("grid CSV has no header row");
  if (cell != g.cell_count()) throw ParseError("grid CSV has fewer rows than the axes require");
  return g;
}

SweepGrid parse_json_grid(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("grid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "subridge-grid") throw ParseError("not a subridge grid");
    SweepGrid g;
    const auto& p = doc.at("provenance");
    g.provenance.kind = p.at("kind").get<std::string>();
    g.provenance.version = p.at("version").get<std::string>();
    g.provenance.seed = p.at("seed").get<std::uint64_t>();
    g.provenance.config_hash = p.at("config_hash").get<std::string>();
    for (const auto& a : doc.at("axes")) {
      Axis axis;
      axis.name = a.at("name").get<std::string>();
      axis.scale = a.at("scale").get<std::string>();
      for (const auto& v : a.at("values")) axis.values.push_back(number_from_json(v));
      g.axes.push_back(std::move(axis));
    }
    g.columns = doc.at("columns").get<std::vector<std::string>>();
    const auto& cells = doc.at("cells");
    g.allocate();
    if (cells.size() != g.cell_count()) throw ParseError("grid JSON cell count differs from the axes");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& vals = cells[c].at("values");
      if (vals.size() != g.columns.size()) throw ParseError("grid JSON row width differs from columns");
      for (std::size_t j = 0; j < vals.size(); ++j) g.values[c][j] = number_from_json(vals[j]);
      g.errors[c] = cells[c].at("error").get<std::string>();
    }
    return g;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("grid JSON: ") + e.what());
  }
}

}  // namespace

bool grids_equal(const SweepGrid& a, const SweepGrid& b) {
  if (!(a.provenance == b.provenance) || a.columns != b.columns || a.errors != b.errors) return false;
  if (a.axes.size() != b.axes.size() || a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.axes.size(); ++i)
    if (a.axes[i].name != b.axes[i].name || a.axes[i].scale != b.axes[i].scale ||
        !same_values(a.axes[i].values, b.axes[i].values))
      return false;
  for (std::size_t c = 0; c < a.values.size(); ++c)
    if (!same_values(a.values[c], b.values[c])) return false;
  return true;
}

GridFormat grid_format_from_string(const std::string& name) {
  if (name == "csv") return GridFormat::csv;
  if (name == "json") return GridFormat::json;
  throw InvalidArgument("unknown output format '" + name + "' (expected csv or json)");
}

std::string emit_string(const SweepGrid& grid, GridFormat format) {
  grid.validate();
  return format == GridFormat::csv ? emit_csv(grid) : emit_json(grid);
}

void emit(const SweepGrid& grid, GridFormat format, const std::string& path) {
  const std::string text = emit_string(grid, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

SweepGrid parse_grid(const std::string& text, GridFormat format) {
  SweepGrid g = format == GridFormat::csv ? parse_csv_grid(text) : parse_json_grid(text);
  g.validate();
  return g;
}

SweepGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const GridFormat format = first != std::string::npos && text[first] == '{' ? GridFormat::json : GridFormat::csv;
  return parse_grid(text, format);
}

std::vector<double> linear_values(double lo, double hi, int count) {
  require(count >= 1, "axis count must be >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  out.back() = hi;
  return out;
}

std::vector<double> log_values(double lo, double hi, int count) {
  require(lo > 0.0 && hi > 0.0, "log axis bounds must be > 0");
  auto out = linear_values(std::log(lo), std::log(hi), count);
  for (auto& v : out) v = std::exp(v);
  out.front() = lo;
  if (count > 1) out.back() = hi;
  return out;
}

}  // namespace subridge
