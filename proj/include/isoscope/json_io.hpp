#pragma once

#include <json.hpp>

#include "isoscope/geometry.hpp"
#include "isoscope/measures.hpp"

namespace isoscope {

using json = nlohmann::json;

/// Body-specification language, e.g. {"type":"cube","n":16},
/// {"type":"polar","child":{...}}, {"type":"hpolytope","A":[[..]],"b":[..]}.
/// Throws ConfigError naming the offending key on malformed input.
BodyPtr body_from_json(const json& j);
json body_to_json(const BodyPtr& d);

/// Measure language: {"type":"uniform","body":{...}}, {"type":"gaussian",
/// "n":16}, {"type":"laplace","n":16}, {"type":"pushforward",...},
/// {"type":"marginal",...}, {"type":"mu_k","body":{...}}.
MeasurePtr measure_from_json(const json& j);
json measure_to_json(const MeasurePtr& d);

Mat mat_from_json(const json& j, const char* key);
json mat_to_json(const Mat& m);
Vec vec_from_json(const json& j, const char* key);
json vec_to_json(const Vec& v);

}  // namespace isoscope
