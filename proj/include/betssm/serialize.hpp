#pragma once

#include <nlohmann/json.hpp>

#include "betssm/estimation.hpp"
#include "betssm/model.hpp"

namespace betssm {

using json = nlohmann::ordered_json;

json to_json(const ModelParams& params);
// Rebuilds the spline basis from the stored coefficient count.
ModelParams params_from_json(const json& j);

json to_json(const FitResult& fit);
json to_json(const TuneResult& tune);

// Parameters of a fit or tune result document (the selected fit for tune).
ModelParams params_from_result(const json& j);

// Reads a number written by to_json; null stands for NaN.
double number_or_nan(const json& j);

}  // namespace betssm
