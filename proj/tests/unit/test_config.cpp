#include <doctest.h>

#include "subridge/config.hpp"

using namespace subridge;

namespace {

const char* kCurve = R"({
  "kind": "curve", "seed": 7, "dimension": 50,
  "covariance": {"type": "equicorrelated", "s": 1.0, "c": 0.3, "omega2": 0.1},
  "truth": {"scheme": "spiked", "rho": 0.4},
  "ensemble": [{"k": 1}, {"k": 2}],
  "zeta": 0.1, "eta": 0.2, "lambda": [0.0, 0.1],
  "alpha": {"scale": "log", "min": 0.1, "max": 10, "count": 5}
})";

Json curve() { return Json::parse(kCurve); }

std::vector<std::string> problems(const Json& j) { return validate_config(j.dump()); }

bool mentions(const std::vector<std::string>& messages, const std::string& path) {
  for (const auto& m : messages)
    if (m.rfind(path + ":", 0) == 0) return true;
  return false;
}

}  // namespace

TEST_CASE("a learning-curve config parses with defaults") {
  const auto p = parse_config(kCurve);
  CHECK(p.kind == "curve");
  CHECK(p.seed == 7);
  CHECK(p.hash.size() == 16);
  const auto& c = std::get<CurveConfig>(p.body);
  CHECK(c.dimension == 50);
  CHECK(c.cov.is_equicorrelated());
  CHECK(c.ensembles.size() == 2);
  CHECK(c.ensembles[1].plan.k == 2);
  CHECK(c.ensembles[1].plan.strategy == PlanStrategy::homogeneous);
  CHECK(c.theory == TheoryBackend::equicorr);
  CHECK(c.sim_trials == 0);
  CHECK(c.alpha.values.size() == 5);
  CHECK(c.alpha.scale == "log");
  CHECK(c.eta.size() == 1);
}

TEST_CASE("commands adjust the simulation overlay") {
  RunOptions sim;
  sim.command = "simulate";
  CHECK(std::get<CurveConfig>(parse_config(kCurve, sim).body).sim_trials == 100);
  auto j = curve();
  j["simulate"] = Json{{"trials", 12}};
  CHECK(std::get<CurveConfig>(parse_config(j.dump()).body).sim_trials == 12);
  RunOptions theory;
  theory.command = "theory";
  CHECK(std::get<CurveConfig>(parse_config(j.dump(), theory).body).sim_trials == 0);
  RunOptions phase;
  phase.command = "phase";
  CHECK_THROWS_AS(parse_config(kCurve, phase), ValidationError);
}

TEST_CASE("seed override changes the hash") {
  RunOptions o;
  o.seed = 8;
  const auto a = parse_config(kCurve), b = parse_config(kCurve, o);
  CHECK(b.seed == 8);
  CHECK(a.hash != b.hash);
  CHECK(parse_config(kCurve).hash == a.hash);
  auto j = curve();
  j["zeta"] = 0.11;
  CHECK(parse_config(j.dump()).hash != a.hash);
}

TEST_CASE("every problem is reported with its path") {
  auto j = curve();
  j["zeta"] = -1;
  j["lambda"] = Json::array({0.1, -2});
  j["alpha"] = Json::array();
  j["ensemble"][1]["k"] = 0;
  j["bogus"] = 1;
  const auto msgs = problems(j);
  CHECK(mentions(msgs, "/zeta"));
  CHECK(mentions(msgs, "/lambda/1"));
  CHECK(mentions(msgs, "/alpha"));
  CHECK(mentions(msgs, "/ensemble/1/k"));
  CHECK(mentions(msgs, "/bogus"));
  CHECK(msgs.size() >= 5);
  CHECK(problems(curve()).empty());
}

TEST_CASE("config-level rule checks") {
  auto j = curve();
  j["covariance"] = Json{{"type", "toeplitz"}, {"signal_decay", 0.5}};
  j["theory"] = "equicorr";
  CHECK(mentions(problems(j), "/theory"));
  j.erase("theory");
  CHECK(mentions(problems(j), "/lambda"));  // general backend is the default and needs lambda > 0
  j["lambda"] = 0.1;
  CHECK(problems(j).empty());

  j = curve();
  j["theory"] = "none";
  CHECK(mentions(problems(j), "/"));
  j["simulate"] = true;
  CHECK(problems(j).empty());

  j = curve();
  j["ensemble"] = Json{{"strategy", "heterogeneous"}, {"k", 3}};
  CHECK(mentions(problems(j), "/ensemble/sigma"));
  j["ensemble"]["sigma"] = 0.2;
  j["ensemble"]["n_plan_draws"] = 4;
  CHECK(problems(j).empty());
  j["ensemble"] = Json{{"k", 2}, {"n_plan_draws", 4}};
  CHECK(mentions(problems(j), "/ensemble/n_plan_draws"));

  j = curve();
  j["ensemble"] = Json{{"k", 2}, {"fractions", {0.7, 0.6}}};
  CHECK(mentions(problems(j), "/ensemble/fractions"));
  j["ensemble"]["strategy"] = "replacement";
  CHECK(problems(j).empty());

  j = curve();
  j["eta"] = Json::array({0.1, 0.2, 0.3});
  CHECK(mentions(problems(j), "/eta"));

  j = curve();
  j["covariance"]["c"] = 1.0;
  j["covariance"]["omega2"] = 0.0;
  CHECK(mentions(problems(j), "/covariance"));
}

TEST_CASE("explicit masks and matrices") {
  auto j = curve();
  j["dimension"] = 3;
  j["covariance"] = Json{{"type", "explicit"}, {"signal", {{1, 0.5, 0}, {0.5, 1, 0}, {0, 0, 1}}}};
  j["ensemble"] = Json{{"strategy", "explicit"}, {"masks", {{0, 1}, {1, 2}}}};
  j["lambda"] = 0.1;
  const auto p = parse_config(j.dump());
  const auto& c = std::get<CurveConfig>(p.body);
  CHECK(c.ensembles[0].plan.k == 2);
  CHECK(c.theory == TheoryBackend::general);
  j["ensemble"]["masks"][1] = Json::array({1, 3});
  CHECK(mentions(problems(j), "/ensemble/masks/1"));
  j["ensemble"]["masks"][1] = Json::array({1, 2});
  j["covariance"]["signal"] = Json::array({{1, 2}, {2, 1}});
  CHECK(mentions(problems(j), "/covariance/signal"));
}

TEST_CASE("phase configs") {
  const char* text = R"({"kind": "phase", "reg_mode": "ridgeless",
    "axes": [{"name": "H", "values": [0, 0.5]}, {"name": "alpha", "scale": "linear", "min": 0.1, "max": 1, "count": 4, "append_infinity": true}],
    "fixed": {"rho": 0.7}, "k_max": 20})";
  const auto p = parse_config(text);
  const auto& c = std::get<PhaseConfig>(p.body);
  CHECK(c.rows.name == "H");
  CHECK(c.columns.values.size() == 5);
  CHECK(c.columns.values.back() == kInf);
  CHECK(c.rho == 0.7);
  CHECK(c.k_max == 20);

  auto j = Json::parse(text);
  j["axes"][0]["append_infinity"] = true;
  j["fixed"]["Lambda"] = 0.3;
  j["fixed"]["rho"] = 1.0;
  const auto msgs = problems(j);
  CHECK(mentions(msgs, "/axes/0/append_infinity"));
  CHECK(mentions(msgs, "/fixed/Lambda"));
  CHECK(mentions(msgs, "/fixed/rho"));
  j = Json::parse(text);
  j["axes"][1]["name"] = "H";
  CHECK(mentions(problems(j), "/axes/1/name"));
  j = Json::parse(text);
  j["axes"][1]["name"] = "W";
  CHECK(mentions(problems(j), "/fixed/alpha"));
}

TEST_CASE("classify configs") {
  const char* text = R"({"kind": "classify", "train": {"path": "a.csv"}, "test": {"path": "b.bin", "center": true},
    "ensemble": {"k": 4}, "lambda": [0.1], "P": {"scale": "log", "min": 10, "max": 1000, "count": 3}, "trials": 5})";
  const auto c = std::get<ClassifyConfig>(parse_config(text).body);
  CHECK(c.train_path == "a.csv");
  CHECK(c.test_load.center);
  CHECK(c.sample_sizes == std::vector<double>{10, 100, 1000});
  CHECK(c.trials == 5);
  CHECK(c.etas == std::vector<double>{0.0});
  auto j = Json::parse(text);
  j.erase("train");
  j["P"] = Json::array({0.5});
  const auto msgs = problems(j);
  CHECK(mentions(msgs, "/train"));
  CHECK(mentions(msgs, "/P/0"));
}

TEST_CASE("structural errors") {
  CHECK_FALSE(validate_config("{not json").empty());
  CHECK_FALSE(validate_config("[]").empty());
  CHECK(mentions(validate_config(R"({"kind": "other"})"), "/kind"));
  CHECK(mentions(validate_config(R"({"kind": "phase", "seed": -1})"), "/seed"));
  CHECK_THROWS_AS(parse_config("{"), ValidationError);
}
