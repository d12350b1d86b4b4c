#include "subridge/config.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace subridge {

namespace {

class Checker {
 public:
  void fail(const std::string& path, const std::string& message) {
    errors.push_back((path.empty() ? std::string("/") : path) + ": " + message);
  }
  bool ok() const { return errors.empty(); }

  void allow_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) return;
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(path + "/" + it.key(), "unknown key");
  }

  const Json* object(const Json& parent, const std::string& path, const char* key, bool required) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (required) fail(path + "/" + key, "required object is missing");
      return nullptr;
    }
    const Json& j = parent.at(key);
    if (!j.is_object()) {
      fail(path + "/" + key, "must be an object");
      return nullptr;
    }
    return &j;
  }

  double number(const Json& parent, const std::string& path, const char* key,
                std::optional<double> fallback,
                const std::function<bool(double)>& valid = nullptr, const char* rule = "") {
    const std::string here = path + "/" + key;
    if (!parent.is_object() || !parent.contains(key)) {
      if (!fallback) {
        fail(here, "required number is missing");
        return 0.0;
      }
      return *fallback;
    }
    const Json& j = parent.at(key);
    if (!j.is_number()) {
      fail(here, "must be a number");
      return fallback.value_or(0.0);
    }
    const double v = j.get<double>();
    if (!std::isfinite(v) || (valid && !valid(v))) {
      fail(here, std::string("must be ") + rule);
      return fallback.value_or(0.0);
    }
    return v;
  }

  long long integer(const Json& parent, const std::string& path, const char* key,
                    std::optional<long long> fallback, long long lo, long long hi) {
    const std::string here = path + "/" + key;
    if (!parent.is_object() || !parent.contains(key)) {
      if (!fallback) {
        fail(here, "required integer is missing");
        return lo;
      }
      return *fallback;
    }
    const Json& j = parent.at(key);
    if (!j.is_number_integer()) {
      fail(here, "must be an integer");
      return fallback.value_or(lo);
    }
    const long long v = j.get<long long>();
    if (v < lo || v > hi) {
      fail(here, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return fallback.value_or(lo);
    }
    return v;
  }

  bool boolean(const Json& parent, const std::string& path, const char* key, bool fallback) {
    if (!parent.is_object() || !parent.contains(key)) return fallback;
    const Json& j = parent.at(key);
    if (!j.is_boolean()) {
      fail(path + "/" + key, "must be true or false");
      return fallback;
    }
    return j.get<bool>();
  }

  std::string text(const Json& parent, const std::string& path, const char* key,
                   std::optional<std::string> fallback, std::initializer_list<const char*> choices = {}) {
    const std::string here = path + "/" + key;
    if (!parent.is_object() || !parent.contains(key)) {
      if (!fallback) {
        fail(here, "required string is missing");
        return "";
      }
      return *fallback;
    }
    const Json& j = parent.at(key);
    if (!j.is_string()) {
      fail(here, "must be a string");
      return fallback.value_or("");
    }
    std::string v = j.get<std::string>();
    if (choices.size() != 0 &&
        std::none_of(choices.begin(), choices.end(), [&](const char* c) { return v == c; })) {
      std::string list;
      for (const char* c : choices) list += (list.empty() ? "" : ", ") + std::string(c);
      fail(here, "must be one of: " + list);
      return fallback.value_or(*choices.begin());
    }
    return v;
  }

  // A number or an array of numbers.
  std::vector<double> numbers(const Json& parent, const std::string& path, const char* key,
                              std::optional<std::vector<double>> fallback,
                              const std::function<bool(double)>& valid, const char* rule) {
    const std::string here = path + "/" + key;
    if (!parent.is_object() || !parent.contains(key)) {
      if (!fallback) fail(here, "required value is missing");
      return fallback.value_or(std::vector<double>{});
    }
    const Json& j = parent.at(key);
    std::vector<double> out;
    if (j.is_number()) {
      out.push_back(j.get<double>());
    } else if (j.is_array()) {
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
          fail(here + "/" + std::to_string(i), "must be a number");
          return {};
        }
        out.push_back(j[i].get<double>());
      }
    } else {
      fail(here, "must be a number or an array of numbers");
      return {};
    }
    if (out.empty()) fail(here, "must not be empty");
    for (std::size_t i = 0; i < out.size(); ++i)
      if (!std::isfinite(out[i]) || !valid(out[i])) {
        fail(j.is_array() ? here + "/" + std::to_string(i) : here, std::string("must be ") + rule);
        return {};
      }
    return out;
  }

  Axis axis(const Json& j, const std::string& path, const std::string& name,
            const std::function<bool(double)>& valid, const char* rule) {
    Axis a;
    a.name = name;
    if (j.is_array() || j.is_number()) {
      const std::string key = path.substr(path.rfind('/') + 1);
      Json wrapper{{key, j}};
      a.values = numbers(wrapper, path.substr(0, path.rfind('/')), key.c_str(), std::nullopt, valid, rule);
      return a;
    }
    if (!j.is_object()) {
      fail(path, "must be an array of values or an axis object");
      return a;
    }
    allow_keys(j, path, {"values", "scale", "min", "max", "count", "append_infinity", "name"});
    if (j.contains("values")) {
      a.values = numbers(j, path, "values", std::nullopt, valid, rule);
      return a;
    }
    a.scale = text(j, path, "scale", std::string("linear"), {"linear", "log"});
    const double lo = number(j, path, "min", std::nullopt);
    const double hi = number(j, path, "max", std::nullopt);
    const int count = static_cast<int>(integer(j, path, "count", std::nullopt, 1, 1000000));
    if (!ok()) return a;
    if (hi < lo) {
      fail(path + "/max", "must be >= min");
      return a;
    }
    if (a.scale == "log" && !(lo > 0.0)) {
      fail(path + "/min", "must be > 0 on a log axis");
      return a;
    }
    a.values = a.scale == "log" ? log_values(lo, hi, count) : linear_values(lo, hi, count);
    for (double v : a.values)
      if (!valid(v)) {
        fail(path, std::string("values must be ") + rule);
        break;
      }
    return a;
  }

  std::vector<std::string> errors;
};

auto positive = [](double v) { return v > 0.0; };
auto nonneg = [](double v) { return v >= 0.0; };

std::optional<CovarianceSpec> parse_covariance(Checker& ck, const Json& root, Index dimension) {
  const Json* j = ck.object(root, "", "covariance", true);
  if (!j) return std::nullopt;
  const std::string p = "/covariance";
  const std::string type = ck.text(*j, p, "type", std::nullopt, {"equicorrelated", "toeplitz", "explicit"});
  if (type == "equicorrelated") {
    ck.allow_keys(*j, p, {"type", "s", "c", "omega2"});
    const double s = ck.number(*j, p, "s", 1.0, positive, "> 0");
    const double c = ck.number(*j, p, "c", 0.0, [](double v) { return v >= 0.0 && v <= 1.0; }, "in [0, 1]");
    const double w = ck.number(*j, p, "omega2", 0.0, nonneg, ">= 0");
    if (c == 1.0 && w == 0.0) ck.fail(p, "c = 1 with omega2 = 0 leaves no bulk variance");
    if (!ck.ok() || dimension < 1) return std::nullopt;
    return CovarianceSpec::equicorrelated(s, c, w, dimension);
  }
  if (type == "toeplitz") {
    ck.allow_keys(*j, p, {"type", "signal_scale", "signal_decay", "noise_scale", "noise_decay"});
    auto decay = [](double v) { return std::abs(v) < 1.0; };
    const double ss = ck.number(*j, p, "signal_scale", 1.0, positive, "> 0");
    const double sd = ck.number(*j, p, "signal_decay", std::nullopt, decay, "in (-1, 1)");
    const double ns = ck.number(*j, p, "noise_scale", 0.0, nonneg, ">= 0");
    const double nd = ck.number(*j, p, "noise_decay", 0.0, decay, "in (-1, 1)");
    if (!ck.ok() || dimension < 1) return std::nullopt;
    return CovarianceSpec::toeplitz(dimension, ss, sd, ns, nd);
  }
  if (type == "explicit") {
    ck.allow_keys(*j, p, {"type", "signal", "noise"});
    try {
      if (!j->contains("signal")) {
        ck.fail(p + "/signal", "required matrix is missing");
        return std::nullopt;
      }
      Matrix signal = matrix_from_json(j->at("signal"));
      Matrix noise = j->contains("noise") ? matrix_from_json(j->at("noise"))
                                          : Matrix::Zero(signal.rows(), signal.cols());
      if (signal.rows() != dimension) {
        ck.fail(p + "/signal", "must be dimension x dimension");
        return std::nullopt;
      }
      return CovarianceSpec::from_matrices(std::move(signal), std::move(noise));
    } catch (const Error& e) {
      ck.fail(p, e.what());
    }
  }
  return std::nullopt;
}

std::optional<EnsembleSpec> parse_ensemble(Checker& ck, const Json& j, const std::string& p,
                                           Index dimension) {
  if (!j.is_object()) {
    ck.fail(p, "must be an object");
    return std::nullopt;
  }
  ck.allow_keys(j, p, {"strategy", "k", "sigma", "fractions", "masks", "n_plan_draws", "redraw_per_trial"});
  EnsembleSpec e;
  const std::string strategy = ck.text(j, p, "strategy", std::string("homogeneous"),
                                       {"homogeneous", "heterogeneous", "replacement", "explicit"});
  e.plan.strategy = plan_strategy_from_string(strategy);
  const Index k_max = std::max<Index>(dimension, 1);
  if (e.plan.strategy == PlanStrategy::explicit_masks) {
    if (!j.contains("masks") || !j.at("masks").is_array() || j.at("masks").empty()) {
      ck.fail(p + "/masks", "explicit strategy needs a nonempty array of index arrays");
      return std::nullopt;
    }
    for (std::size_t r = 0; r < j.at("masks").size(); ++r) {
      const Json& m = j.at("masks")[r];
      const std::string mp = p + "/masks/" + std::to_string(r);
      if (!m.is_array() || m.empty()) {
        ck.fail(mp, "must be a nonempty array of feature indices");
        continue;
      }
      Mask mask;
      for (const auto& idx : m) {
        if (!idx.is_number_integer() || idx.get<long long>() < 0 || idx.get<long long>() >= dimension) {
          ck.fail(mp, "indices must be integers in [0, dimension)");
          break;
        }
        mask.push_back(idx.get<Index>());
      }
      e.plan.masks.push_back(std::move(mask));
    }
    e.plan.k = static_cast<Index>(e.plan.masks.size());
  } else {
    e.plan.k = ck.integer(j, p, "k", std::nullopt, 1, k_max);
  }
  if (e.plan.strategy == PlanStrategy::heterogeneous)
    e.plan.sigma = ck.number(j, p, "sigma", std::nullopt, positive, "> 0 (use homogeneous for sigma = 0)");
  if (j.contains("fractions")) {
    e.plan.fractions = ck.numbers(j, p, "fractions", std::nullopt,
                                  [](double v) { return v > 0.0 && v <= 1.0; }, "in (0, 1]");
    if (e.plan.fractions->size() != static_cast<std::size_t>(e.plan.k))
      ck.fail(p + "/fractions", "needs exactly k entries");
    double sum = 0.0;
    for (double f : *e.plan.fractions) sum += f;
    if (e.plan.strategy != PlanStrategy::replacement && sum > 1.0 + 1e-12)
      ck.fail(p + "/fractions", "exclusive fractions must sum to at most 1");
    if (e.plan.strategy == PlanStrategy::explicit_masks)
      ck.fail(p + "/fractions", "not allowed with explicit masks");
  }
  e.n_plan_draws = static_cast<int>(ck.integer(j, p, "n_plan_draws", 1, 1, 100000));
  if (e.n_plan_draws > 1 && e.plan.strategy != PlanStrategy::heterogeneous &&
      e.plan.strategy != PlanStrategy::replacement)
    ck.fail(p + "/n_plan_draws", "plan draws only apply to random-size or replacement plans");
  e.plan.redraw_per_trial = ck.boolean(j, p, "redraw_per_trial",
                                       e.plan.strategy == PlanStrategy::heterogeneous);
  return e;
}

CurveConfig parse_curve(Checker& ck, const Json& root, const RunOptions& options) {
  ck.allow_keys(root, "", {"kind", "seed", "description", "dimension", "covariance", "truth", "ensemble",
                           "zeta", "eta", "lambda", "alpha", "theory", "saddle", "simulate", "full_matrix"});
  CurveConfig c;
  c.dimension = ck.integer(root, "", "dimension", std::nullopt, 1, 100000);
  if (auto cov = parse_covariance(ck, root, c.dimension)) c.cov = *cov;

  if (const Json* t = ck.object(root, "", "truth", false)) {
    ck.allow_keys(*t, "/truth", {"scheme", "rho", "redraw_per_trial", "theory_moments"});
    const std::string scheme = ck.text(*t, "/truth", "scheme", std::string("spiked"), {"spiked", "isotropic"});
    c.truth.scheme = scheme == "spiked" ? TruthScheme::spiked : TruthScheme::isotropic;
    c.truth.rho = ck.number(*t, "/truth", "rho", 0.0, [](double v) { return std::abs(v) <= 1.0; }, "in [-1, 1]");
    if (c.truth.scheme == TruthScheme::isotropic && t->contains("rho"))
      ck.fail("/truth/rho", "only meaningful for the spiked scheme");
    c.truth.redraw_per_trial = ck.boolean(*t, "/truth", "redraw_per_trial", false);
    c.average_truth_in_theory =
        ck.text(*t, "/truth", "theory_moments", std::string("sampled"), {"sampled", "averaged"}) == "averaged";
  } else {
    c.truth.scheme = TruthScheme::spiked;
  }

  if (!root.contains("ensemble")) {
    ck.fail("/ensemble", "required ensemble description is missing");
  } else if (root.at("ensemble").is_array()) {
    const Json& arr = root.at("ensemble");
    if (arr.empty()) ck.fail("/ensemble", "must not be empty");
    for (std::size_t i = 0; i < arr.size(); ++i)
      if (auto e = parse_ensemble(ck, arr[i], "/ensemble/" + std::to_string(i), c.dimension))
        c.ensembles.push_back(*e);
  } else if (auto e = parse_ensemble(ck, root.at("ensemble"), "/ensemble", c.dimension)) {
    c.ensembles.push_back(*e);
  }
  const bool any_het = std::any_of(c.ensembles.begin(), c.ensembles.end(), [](const EnsembleSpec& e) {
    return e.n_plan_draws > 1;
  });
  if (any_het) {
    for (const auto& e : c.ensembles)
      if (e.n_plan_draws != c.ensembles.front().n_plan_draws) {
        ck.fail("/ensemble", "all ensembles in one sweep must use the same n_plan_draws");
        break;
      }
  }

  c.zeta = ck.number(root, "", "zeta", 0.0, nonneg, ">= 0");
  const auto eta = ck.numbers(root, "", "eta", std::vector<double>{0.0}, nonneg, ">= 0");
  c.eta = Eigen::Map<const Vector>(eta.data(), static_cast<Index>(eta.size()));
  if (c.eta.size() > 1)
    for (const auto& e : c.ensembles)
      if (e.plan.k != c.eta.size()) ck.fail("/eta", "needs one value or exactly k values");
  c.lambdas = ck.numbers(root, "", "lambda", std::nullopt, nonneg, ">= 0");

  if (!root.contains("alpha")) ck.fail("/alpha", "required alpha grid is missing");
  else c.alpha = ck.axis(root.at("alpha"), "/alpha", "alpha", positive, "> 0");

  const std::string default_backend = c.cov.is_equicorrelated() ? "equicorr" : "general";
  const std::string backend = ck.text(root, "", "theory", default_backend, {"equicorr", "general", "none"});
  c.theory = backend == "equicorr" ? TheoryBackend::equicorr
             : backend == "general" ? TheoryBackend::general
                                    : TheoryBackend::none;
  if (c.theory == TheoryBackend::equicorr) {
    if (!c.cov.is_equicorrelated()) ck.fail("/theory", "equicorr backend needs an equicorrelated covariance");
    if (c.truth.scheme != TruthScheme::spiked) ck.fail("/theory", "equicorr backend needs the spiked truth scheme");
    if (c.cov.is_equicorrelated() && c.cov.equicorrelated_params().bulk() <= 0.0)
      ck.fail("/covariance", "bulk variance s(1-c) + omega2 must be > 0");
  }
  if (c.theory == TheoryBackend::general)
    for (std::size_t i = 0; i < c.lambdas.size(); ++i)
      if (c.lambdas[i] < 1e-8)
        ck.fail("/lambda", "general backend needs lambda >= 1e-8 (ridgeless limits come from equicorr)");

  if (const Json* s = ck.object(root, "", "saddle", false)) {
    ck.allow_keys(*s, "/saddle", {"scheme", "damping", "max_iterations"});
    c.saddle.scheme = ck.text(*s, "/saddle", "scheme", std::string("newton"), {"newton", "damped"}) == "damped"
                          ? SaddleScheme::damped
                          : SaddleScheme::newton;
    c.saddle.damping = ck.number(*s, "/saddle", "damping", 0.5, [](double v) { return v > 0.0 && v <= 1.0; },
                                 "in (0, 1]");
    c.saddle.max_iterations = static_cast<int>(ck.integer(*s, "/saddle", "max_iterations", 10000, 1, 100000000));
  }

  if (root.contains("simulate")) {
    const Json& s = root.at("simulate");
    if (s.is_boolean()) {
      c.sim_trials = s.get<bool>() ? 100 : 0;
    } else if (s.is_object()) {
      ck.allow_keys(s, "/simulate", {"trials"});
      c.sim_trials = static_cast<int>(ck.integer(s, "/simulate", "trials", 100, 1, 1000000));
    } else {
      ck.fail("/simulate", "must be a boolean or an object");
    }
  }
  if (options.command == "simulate" && c.sim_trials == 0) c.sim_trials = 100;
  if (options.command == "theory") c.sim_trials = 0;
  if (options.command == "simulate" && c.ensembles.size() > 0 && c.sim_trials > 0 && any_het)
    for (const auto& e : c.ensembles)
      if (!e.plan.redraw_per_trial) ck.fail("/ensemble", "heterogeneous simulations redraw plans per trial");
  if (options.command == "theory" && c.theory == TheoryBackend::none)
    ck.fail("/theory", "the theory command needs a theory backend");
  if (c.theory == TheoryBackend::none && c.sim_trials == 0)
    ck.fail("/", "nothing to compute: no theory backend and no simulation");
  c.full_matrix = ck.boolean(root, "", "full_matrix", false) || options.full_matrix;
  return c;
}

Axis phase_axis(Checker& ck, const Json& j, const std::string& p) {
  if (!j.is_object()) {
    ck.fail(p, "must be an axis object with a name");
    return {};
  }
  const std::string name = ck.text(j, p, "name", std::nullopt, {"alpha", "H", "W", "Z", "rho"});
  auto valid = [name](double v) {
    if (name == "alpha") return v > 0.0;
    if (name == "rho") return std::abs(v) < 1.0;
    return v >= 0.0;
  };
  const char* rule = name == "alpha" ? "> 0" : name == "rho" ? "in (-1, 1)" : ">= 0";
  Axis a = ck.axis(j, p, name, valid, rule);
  if (ck.boolean(j, p, "append_infinity", false)) {
    if (name != "alpha") ck.fail(p + "/append_infinity", "only the alpha axis can append infinity");
    else a.values.push_back(kInf);
  }
  return a;
}

PhaseConfig parse_phase(Checker& ck, const Json& root) {
  ck.allow_keys(root, "", {"kind", "seed", "description", "reg_mode", "axes", "fixed", "k_max", "emit_all_k"});
  PhaseConfig c;
  const std::string mode = ck.text(root, "", "reg_mode", std::nullopt, {"ridgeless", "locally_optimal", "explicit"});
  if (!mode.empty()) c.mode = reg_mode_from_string(mode);
  if (!root.contains("axes") || !root.at("axes").is_array() || root.at("axes").size() != 2) {
    ck.fail("/axes", "must be an array of exactly two axis objects");
  } else {
    c.rows = phase_axis(ck, root.at("axes")[0], "/axes/0");
    c.columns = phase_axis(ck, root.at("axes")[1], "/axes/1");
    if (c.rows.name == c.columns.name && !c.rows.name.empty()) ck.fail("/axes/1/name", "axes must differ");
  }
  Json empty = Json::object();
  const Json* fixed = ck.object(root, "", "fixed", false);
  const Json& f = fixed ? *fixed : empty;
  ck.allow_keys(f, "/fixed", {"alpha", "H", "W", "Z", "rho", "Lambda"});
  const bool alpha_on_axis = c.rows.name == "alpha" || c.columns.name == "alpha";
  c.alpha = ck.number(f, "/fixed", "alpha", alpha_on_axis ? std::optional<double>(1.0) : std::nullopt,
                      positive, "> 0");
  c.H = ck.number(f, "/fixed", "H", 0.0, nonneg, ">= 0");
  c.W = ck.number(f, "/fixed", "W", 0.0, nonneg, ">= 0");
  c.Z = ck.number(f, "/fixed", "Z", 0.0, nonneg, ">= 0");
  c.rho = ck.number(f, "/fixed", "rho", 0.0, [](double v) { return std::abs(v) < 1.0; }, "in (-1, 1)");
  c.Lambda = ck.number(f, "/fixed", "Lambda", 0.0, nonneg, ">= 0");
  if (c.mode != RegMode::explicit_lambda && f.contains("Lambda"))
    ck.fail("/fixed/Lambda", "only used with reg_mode explicit");
  c.k_max = static_cast<int>(ck.integer(root, "", "k_max", 100, 1, 100000));
  c.emit_all_k = ck.boolean(root, "", "emit_all_k", false);
  return c;
}

LoadOptions parse_load(Checker& ck, const Json& root, const char* key, std::string& path_out) {
  LoadOptions o;
  const Json* j = ck.object(root, "", key, true);
  if (!j) return o;
  const std::string p = std::string("/") + key;
  ck.allow_keys(*j, p, {"path", "format", "label_column", "classes", "center"});
  path_out = ck.text(*j, p, "path", std::nullopt);
  o.format = feature_format_from_string(ck.text(*j, p, "format", std::string("auto"), {"auto", "csv", "binary"}));
  o.label_column = ck.text(*j, p, "label_column", std::string("label"));
  o.classes = static_cast<int>(ck.integer(*j, p, "classes", 0, 0, 1000000));
  o.center = ck.boolean(*j, p, "center", false);
  o.split = key;
  return o;
}

ClassifyConfig parse_classify(Checker& ck, const Json& root) {
  ck.allow_keys(root, "", {"kind", "seed", "description", "train", "test", "ensemble", "lambda", "eta",
                           "P", "include_threshold", "trials"});
  ClassifyConfig c;
  c.train_load = parse_load(ck, root, "train", c.train_path);
  c.test_load = parse_load(ck, root, "test", c.test_path);
  if (!root.contains("ensemble")) ck.fail("/ensemble", "required ensemble description is missing");
  else if (auto e = parse_ensemble(ck, root.at("ensemble"), "/ensemble", 1000000)) c.ensemble = *e;
  c.lambdas = ck.numbers(root, "", "lambda", std::nullopt, nonneg, ">= 0");
  c.etas = ck.numbers(root, "", "eta", std::vector<double>{0.0}, nonneg, ">= 0");
  if (!root.contains("P")) ck.fail("/P", "required training-size grid is missing");
  else c.sample_sizes = ck.axis(root.at("P"), "/P", "P", [](double v) { return v >= 1.0; }, ">= 1").values;
  for (auto& v : c.sample_sizes) v = std::round(v);
  c.include_threshold = ck.boolean(root, "", "include_threshold", false);
  c.trials = static_cast<int>(ck.integer(root, "", "trials", 1, 1, 1000000));
  return c;
}

}  // namespace

ParsedConfig parse_config(const std::string& text, const RunOptions& options) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("/: invalid JSON: ") + e.what());
  }
  Checker ck;
  if (!root.is_object()) throw ValidationError("/: config must be a JSON object");
  if (options.seed) root["seed"] = *options.seed;
  if (options.full_matrix && root.value("kind", "") == "curve") root["full_matrix"] = true;

  ParsedConfig out;
  out.kind = ck.text(root, "", "kind", std::nullopt, {"curve", "phase", "classify"});
  if (root.contains("seed") && !(root.at("seed").is_number_unsigned() || root.at("seed").is_number_integer()))
    ck.fail("/seed", "must be a nonnegative integer");
  else if (root.contains("seed") && root.at("seed").is_number_integer() && root.at("seed").get<long long>() < 0)
    ck.fail("/seed", "must be a nonnegative integer");
  else
    out.seed = root.value("seed", std::uint64_t{0});
  if (root.contains("description") && !root.at("description").is_string())
    ck.fail("/description", "must be a string");

  const std::string& cmd = options.command;
  const bool curve_cmd = cmd == "curve" || cmd == "theory" || cmd == "simulate";
  if (ck.ok()) {
    if (curve_cmd && out.kind != "curve")
      ck.fail("/kind", "command '" + cmd + "' needs kind \"curve\"");
    if ((cmd == "phase" || cmd == "classify") && out.kind != cmd)
      ck.fail("/kind", "command '" + cmd + "' needs kind \"" + cmd + "\"");
  }
  if (ck.ok()) {
    try {
      if (out.kind == "curve") out.body = parse_curve(ck, root, options);
      else if (out.kind == "phase") out.body = parse_phase(ck, root);
      else out.body = parse_classify(ck, root);
    } catch (const Error& e) {
      ck.fail("/", e.what());
    }
  }
  if (!ck.ok()) {
    std::string joined;
    for (const auto& e : ck.errors) joined += (joined.empty() ? "" : "\n") + e;
    throw ValidationError(joined);
  }
  out.hash = hex64(fnv1a64(root.dump()));
  return out;
}

std::vector<std::string> validate_config(const std::string& text) {
  try {
    parse_config(text);
    return {};
  } catch (const ValidationError& e) {
    std::vector<std::string> out;
    std::string all = e.what();
    std::size_t start = 0;
    while (start <= all.size()) {
      const auto nl = all.find('\n', start);
      out.push_back(all.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
    return out;
  }
}

}  // namespace subridge
