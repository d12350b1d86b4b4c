#pragma once

#include <string>

#include <json.hpp>

#include "subridge/covariance.hpp"
#include "subridge/results.hpp"

namespace subridge {

using Json = nlohmann::json;

// Finite values become JSON numbers; inf/-inf/nan become the strings
// "inf", "-inf" and "nan".
Json number_to_json(double v);
double number_from_json(const Json& j);

// Text form used in CSV cells: %.17g, or inf / -inf / nan.
std::string format_number(double v);
double parse_number(const std::string& text);

Json vector_to_json(const Vector& v);
Json matrix_to_json(const Matrix& m);  // row-major nested arrays
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

Json to_json(const SubsamplingPlan& plan);
SubsamplingPlan plan_from_json(const Json& j);
Json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const Json& j);
Json to_json(const OrderParameters& params);
Json to_json(const ErrorMatrix& errors);

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace subridge
