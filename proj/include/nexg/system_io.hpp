#pragma once

#include "nexg/dynamics.hpp"

#include <json.hpp>

#include <string>

namespace nexg {

/// Controller file: {"layers": [{weights, bias, activation}, ...]}.
NeuralController controller_from_json(const nlohmann::json& j, const std::string& path = "");
NeuralController load_controller(const std::string& file_path);
nlohmann::json controller_to_json(const NeuralController& c);

/// System file: {name, dimension, plant, controller_file?, h, T, domain?, initial_set?}.
/// A relative controller_file is resolved against `base_dir`.
ClosedLoopSystem system_from_json(const nlohmann::json& j, const std::string& base_dir = "");
ClosedLoopSystem load_system(const std::string& file_path);
/// Inline-controller form; CustomPlant cannot be serialized.
nlohmann::json system_to_json(const ClosedLoopSystem& system);

}  // namespace nexg
