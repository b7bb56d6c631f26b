// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "imcvit/cost_model.hpp"
#include "imcvit/func_sim.hpp"
#include "imcvit/workload.hpp"
#include "imcvit/xbar_map.hpp"

namespace imcvit {

/// Contents of an INI-style config file. Recognised sections: [model],
/// [device], [matmul_device], [tiles], [softmax_unit], [noise], [cost].
/// A file may carry any subset.
struct ConfigFile {
    std::optional<ModelConfig> model;
    std::optional<DeviceParams> device;
    std::optional<DeviceParams> matmul_device;  ///< present => hybrid mapping
    std::optional<TileConfig> tiles;
    std::optional<MappingOptions> mapping;  ///< [tiles] differential_columns
    std::optional<SoftmaxUnitParams> softmax;
    std::optional<NoiseModel> noise;
    std::optional<CostOptions> cost;
};

ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::string& path);

std::vector<std::string> preset_model_names();
/// "deit_s", "lvvit_s", "bert_base".
ModelConfig preset_model(const std::string& name);
/// "fefet", "sram".
DeviceParams preset_device(const std::string& name);

/// Conventions under which the cost model reproduces the published tables.
CostOptions calibrated_cost_options();
SoftmaxUnitParams calibrated_softmax();
HardwareConfig calibrated_hardware(const DeviceAssignment& devices);

/// "fefet", "sram", "hybrid" or a path to a config file with a [device]
/// (and optionally [matmul_device]) section.
DeviceAssignment resolve_devices(const std::string& spec);
/// Preset name or a path to a config file with a [model] section.
ModelConfig resolve_model(const std::string& spec);

/// Applies the optional sections of `file` on top of `hw`.
void apply_overrides(const ConfigFile& file, HardwareConfig& hw);

}  // namespace imcvit
