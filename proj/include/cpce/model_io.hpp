#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cpce/pce.hpp"

namespace cpce {

/// { input_spec, multi_index_set, coefficients, hat_diag, loo_residuals,
///   loo_corrections }. The training snapshot is not serialized.
nlohmann::ordered_json model_to_json(const PceModel& model);

/// Throws std::invalid_argument on schema violations.
PceModel model_from_json(const nlohmann::json& doc);

void save_model(const PceModel& model, const std::filesystem::path& path);
PceModel load_model(const std::filesystem::path& path);

}  // namespace cpce
