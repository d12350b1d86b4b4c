#include "subridge/serialize.hpp"

#include <charconv>
#include <cstdio>

namespace subridge {

Json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_number(j.get<std::string>());
  throw ParseError("expected a number or one of \"inf\", \"-inf\", \"nan\"");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& text) {
  if (text == "inf") return kInf;
  if (text == "-inf") return -kInf;
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ParseError("cannot parse number '" + text + "'");
  return v;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v[i]));
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = number_from_json(j[i]);
  return v;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ParseError("ragged matrix rows");
    m.row(static_cast<Index>(i)) = vector_from_json(j[i]).transpose();
  }
  return m;
}

Json to_json(const SubsamplingPlan& plan) {
  Json masks = Json::array();
  for (const auto& m : plan.masks) masks.push_back(m);
  Json fractions = Json::array();
  for (Index i = 0; i < plan.fractions.rows(); ++i)
    for (Index j = 0; j < plan.fractions.cols(); ++j) fractions.push_back(plan.fractions(i, j));
  return Json{{"dimension", plan.dimension},
              {"exclusive", plan.exclusive},
              {"strategy", to_string(plan.strategy)},
              {"sigma", plan.sigma},
              {"seed", plan.seed},
              {"masks", masks},
              {"fractions", fractions}};
}

SubsamplingPlan plan_from_json(const Json& j) {
  std::vector<Mask> masks;
  for (const auto& m : j.at("masks")) masks.push_back(m.get<Mask>());
  SubsamplingPlan plan = SubsamplingPlan::from_masks(std::move(masks), j.at("dimension").get<Index>());
  plan.strategy = plan_strategy_from_string(j.value("strategy", std::string("explicit")));
  plan.sigma = j.value("sigma", 0.0);
  plan.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("fractions")) {
    const auto& f = j.at("fractions");
    const Index k = plan.size();
    if (f.size() != static_cast<std::size_t>(k * k)) throw ParseError("fractions must have k*k entries");
    for (Index r = 0; r < k; ++r)
      for (Index c = 0; c < k; ++c)
        if (f[static_cast<std::size_t>(r * k + c)].get<double>() != plan.fractions(r, c))
          throw ParseError("stored fractions disagree with the masks");
  }
  return plan;
}

Json to_json(const GroundTruth& truth) {
  return Json{{"scheme", truth.scheme == TruthScheme::spiked ? "spiked" : "isotropic"},
              {"rho", truth.rho},
              {"seed", truth.seed},
              {"weights", vector_to_json(truth.weights)}};
}

GroundTruth truth_from_json(const Json& j) {
  GroundTruth t;
  const std::string scheme = j.value("scheme", std::string("isotropic"));
  if (scheme != "spiked" && scheme != "isotropic") throw ParseError("unknown truth scheme '" + scheme + "'");
  t.scheme = scheme == "spiked" ? TruthScheme::spiked : TruthScheme::isotropic;
  t.rho = j.value("rho", 0.0);
  t.seed = j.value("seed", std::uint64_t{0});
  t.weights = vector_from_json(j.at("weights"));
  return t;
}

Json to_json(const OrderParameters& p) {
  return Json{{"alpha", number_to_json(p.alpha)},
              {"lambda", vector_to_json(p.lambda)},
              {"q", vector_to_json(p.q)},
              {"q_hat", vector_to_json(p.q_hat)},
              {"gamma", matrix_to_json(p.gamma)},
              {"residual", vector_to_json(p.residual)},
              {"iterations", vector_to_json(p.iterations)}};
}

Json to_json(const ErrorMatrix& e) {
  return Json{{"pairwise", matrix_to_json(e.pairwise)}, {"ensemble", number_to_json(e.ensemble)}};
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace subridge
