#include <doctest.h>

#include <filesystem>

#include "subridge/grid.hpp"
#include "subridge/serialize.hpp"

using namespace subridge;

namespace {

SweepGrid sample_grid() {
  SweepGrid g;
  g.axes = {{"lambda", "list", {0.0, 0.1}}, {"alpha", "log", {0.5, 1.0, 2.0}}};
  g.columns = {"E_g_theory", "E_g_sim_mean"};
  g.provenance = {"curve", "00ff00ff00ff00ff", 42, "1.0.0"};
  g.allocate();
  g.values[0] = {0.1 + 0.2, kInf};
  g.values[1] = {-0.0, 1e-300};
  g.values[2] = {std::numeric_limits<double>::quiet_NaN(), -kInf};
  g.values[4] = {1.0 / 3.0, 2.5e10};
  g.errors[3] = "non-convergence: residual 1e-3, \"q\" stalled";
  return g;
}

}  // namespace

TEST_CASE("grid coordinates are row-major with the last axis fastest") {
  const auto g = sample_grid();
  CHECK(g.cell_count() == 6);
  CHECK(g.coordinates(0) == std::vector<std::size_t>{0, 0});
  CHECK(g.coordinates(2) == std::vector<std::size_t>{0, 2});
  CHECK(g.coordinates(4) == std::vector<std::size_t>{1, 1});
  CHECK(g.failed_count() == 1);
  CHECK(g.at(4, "E_g_theory") == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(g.column_index("nope"), InvalidArgument);
  CHECK(std::isnan(g.at(5, "E_g_sim_mean")));
}

TEST_CASE("grids round-trip bitwise through both formats") {
  const auto g = sample_grid();
  for (auto f : {GridFormat::csv, GridFormat::json}) {
    const auto back = parse_grid(emit_string(g, f), f);
    CHECK(grids_equal(g, back));
    CHECK(back.errors[3] == g.errors[3]);
    CHECK(std::signbit(back.values[1][0]));
    CHECK(emit_string(back, f) == emit_string(g, f));
  }
}

TEST_CASE("grid files are sniffed by content") {
  const auto g = sample_grid();
  const auto dir = std::filesystem::temp_directory_path() / "subridge_unit";
  std::filesystem::create_directories(dir);
  emit(g, GridFormat::json, (dir / "g.txt").string());
  CHECK(grids_equal(load_grid((dir / "g.txt").string()), g));
  emit(g, GridFormat::csv, (dir / "g2.txt").string());
  CHECK(grids_equal(load_grid((dir / "g2.txt").string()), g));
  CHECK_THROWS_AS(load_grid((dir / "absent").string()), IoError);
}

TEST_CASE("grid equality is bitwise") {
  auto a = sample_grid(), b = sample_grid();
  CHECK(grids_equal(a, b));
  b.values[1][0] = 0.0;
  CHECK_FALSE(grids_equal(a, b));
  b = sample_grid();
  b.values[4][0] = std::nextafter(b.values[4][0], 1.0);
  CHECK_FALSE(grids_equal(a, b));
  b = sample_grid();
  b.provenance.seed = 43;
  CHECK_FALSE(grids_equal(a, b));
}

TEST_CASE("malformed grid text is rejected") {
  const auto csv = emit_string(sample_grid(), GridFormat::csv);
  const auto truncated = csv.substr(0, csv.rfind('\n', csv.size() - 2) + 1);
  CHECK_THROWS_AS(parse_grid(truncated, GridFormat::csv), ParseError);
  CHECK_THROWS_AS(parse_grid("not a grid", GridFormat::csv), ParseError);
  CHECK_THROWS_AS(parse_grid("{", GridFormat::json), ParseError);
  CHECK_THROWS_AS(parse_grid("{\"format\": \"other\"}", GridFormat::json), ParseError);
}

TEST_CASE("grid validation") {
  auto g = sample_grid();
  CHECK_NOTHROW(g.validate());
  g.columns[0] = "bad name";
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  g = sample_grid();
  g.errors[0] = "two\nlines";
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  g = sample_grid();
  g.values.pop_back();
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  g = sample_grid();
  g.axes[0].scale = "cubic";
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  CHECK(grid_format_from_string("json") == GridFormat::json);
  CHECK_THROWS_AS(grid_format_from_string("xml"), InvalidArgument);
}

TEST_CASE("axis value helpers") {
  CHECK(linear_values(0.0, 1.0, 5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const auto lv = log_values(0.01, 100.0, 5);
  CHECK(lv.front() == 0.01);
  CHECK(lv.back() == 100.0);
  CHECK(lv[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(linear_values(3.0, 7.0, 1) == std::vector<double>{3.0});
  CHECK_THROWS_AS(log_values(0.0, 1.0, 3), InvalidArgument);
}

TEST_CASE("number text forms") {
  for (double v : {0.1, -2.5e-310, 1e308, kInf, -kInf, 123456789.123456789}) {
    CHECK(parse_number(format_number(v)) == v);
    CHECK(number_from_json(number_to_json(v)) == v);
  }
  CHECK(std::isnan(parse_number(format_number(std::nan("")))));
  CHECK(number_to_json(kInf) == Json("inf"));
  CHECK_THROWS(parse_number("1.5x"));
}

TEST_CASE("plans and truths round-trip through JSON") {
  const auto plan = SubsamplingPlan::from_masks({{0, 2, 4}, {1, 2}}, 6);
  const auto back = plan_from_json(to_json(plan));
  CHECK(back.masks == plan.masks);
  CHECK(back.fractions == plan.fractions);
  const auto truth = sample_ground_truth(0.3, 8, 5);
  const auto t2 = truth_from_json(to_json(truth));
  CHECK(t2.weights == truth.weights);
  CHECK(t2.rho == truth.rho);
  CHECK(matrix_from_json(matrix_to_json(plan.fractions)) == plan.fractions);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}
