#pragma once

#include <json.hpp>

#include "bnpreg/design.hpp"
#include "bnpreg/funcspace.hpp"

namespace bnpreg {

/// {"basis": name, "params": {...}, "coefficients": [...]}; round-trips exactly.
nlohmann::json to_json(const SeriesFunction& f);
SeriesFunction series_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AdditiveFunction& f);
AdditiveFunction additive_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Design& design);
Design design_from_json(const nlohmann::json& j);

}  // namespace bnpreg
