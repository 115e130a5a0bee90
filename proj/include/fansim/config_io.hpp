#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fansim/experiment.hpp"

namespace fansim {

// Config file schema (JSON with fan / modulation / channel / demod /
// experiment sections; see README). Derived receiver fields left out of the
// file are computed from the fan and modulation sections.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Throws ConfigError for unreadable files, parse errors, or invalid values.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace fansim
