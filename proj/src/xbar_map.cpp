// SPDX-License-Identifier: Apache-2.0
#include "imcvit/xbar_map.hpp"

#include <algorithm>
#include <cctype>

#include "imcvit/error.hpp"

namespace imcvit {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

std::string to_string(DeviceKind kind) {
    return kind == DeviceKind::FeFET ? "fefet" : "sram";
}

DeviceKind device_kind_from_string(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "fefet") return DeviceKind::FeFET;
    if (lower == "sram") return DeviceKind::SRAM;
    throw Error("unknown device kind '" + name + "'");
}

void DeviceParams::validate() const {
    require(bits_per_cell >= 1 && bits_per_cell <= 8, "device bits_per_cell must be in [1, 8]");
    require(e_read_pj > 0 && e_write_pj > 0 && d_read_us > 0 && d_write_us > 0 && area_mm2 > 0,
            "device energy, delay and area constants must be positive");
    require(read_var >= 0 && read_var < 1 && write_var >= 0 && write_var < 1,
            "device read_var and write_var must be in [0, 1)");
    require(r_on_ohm > 0 && r_off_ohm > r_on_ohm, "device needs 0 < r_on < r_off");
}

DeviceParams DeviceParams::fefet() { return DeviceParams{}; }

DeviceParams DeviceParams::sram() {
    DeviceParams p;
    p.kind = DeviceKind::SRAM;
    p.bits_per_cell = 1;
    p.e_read_pj = 29.0;
    p.e_write_pj = 13.0;
    p.d_read_us = 0.018;
    p.d_write_us = 0.018;
    p.area_mm2 = 0.07;
    p.read_var = 0.0;
    p.write_var = 0.0;
    return p;
}

void TileConfig::validate() const {
    require(xbar_size >= 1 && n_x_pe >= 1 && n_pe_tile >= 1 && adc_bits >= 1,
            "tile parameters must be >= 1");
}

std::int64_t crossbar_count(std::int64_t in_dim, std::int64_t out_dim, int xbar_size) {
    require(in_dim >= 1 && out_dim >= 1 && xbar_size >= 1, "crossbar_count needs positive dims");
    return ceil_div(in_dim, xbar_size) * ceil_div(out_dim, xbar_size);
}

std::int64_t tiles_for(std::int64_t physical_xbars, const TileConfig& tiles) {
    return ceil_div(physical_xbars, tiles.xbars_per_tile());
}

MappingResult crossbars_for_layer(const LayerSpec& layer, const TileConfig& tiles,
                                  const DeviceParams& dev, int weight_bits,
                                  const MappingOptions& options) {
    require(layer.kind != LayerKind::Softmax,
            "SOFTMAX runs on the digital softmax unit and cannot be mapped to crossbars");
    require(weight_bits >= 1, "weight_bits must be >= 1");
    MappingResult r;
    r.n_xbar_logical = crossbar_count(layer.in_dim, layer.out_dim, tiles.xbar_size);
    r.slice_factor = ceil_div(weight_bits, dev.bits_per_cell);
    r.n_xbar_physical = r.n_xbar_logical * r.slice_factor * (options.differential_columns ? 2 : 1);
    r.n_tiles = tiles_for(r.n_xbar_physical, tiles);
    return r;
}

DeviceAssignment DeviceAssignment::uniform(const DeviceParams& dev) {
    return hybrid(dev, dev);
}

DeviceAssignment DeviceAssignment::hybrid(const DeviceParams& weight_dev,
                                          const DeviceParams& matmul_dev) {
    DeviceAssignment a{Empty{}};
    for (LayerKind k : kAllLayerKinds) {
        if (k == LayerKind::Softmax) continue;
        a.devices_[k] = is_dynamic_matmul(k) ? matmul_dev : weight_dev;
    }
    return a;
}

const DeviceParams& DeviceAssignment::for_layer(LayerKind kind) const {
    auto it = devices_.find(kind);
    require(it != devices_.end(),
            "no device assigned to layer kind " + std::string(to_string(kind)));
    return it->second;
}

void DeviceAssignment::assign(LayerKind kind, const DeviceParams& dev) {
    require(kind != LayerKind::Softmax, "SOFTMAX cannot be assigned to a crossbar device");
    dev.validate();
    devices_[kind] = dev;
}

bool DeviceAssignment::is_uniform() const {
    return std::all_of(devices_.begin(), devices_.end(),
                       [&](const auto& kv) { return kv.second == devices_.begin()->second; });
}

std::string DeviceAssignment::label() const {
    if (is_uniform()) return to_string(devices_.begin()->second.kind);
    const auto& w = for_layer(LayerKind::FcQ);
    const auto& m = for_layer(LayerKind::MatmulQKT);
    if (w.kind != m.kind && for_layer(LayerKind::MatmulSV) == m) {
        return "hybrid-" + to_string(w.kind) + "-" + to_string(m.kind);
    }
    return "custom";
}

CrossbarTotals model_crossbar_total(const Workload& workload, const TileConfig& tiles,
                                    const DeviceAssignment& devices,
                                    const MappingOptions& options) {
    CrossbarTotals total;
    auto add = [&](const LayerSpec& layer) {
        if (layer.kind == LayerKind::Softmax) return;
        const auto m = crossbars_for_layer(layer, tiles, devices.for_layer(layer.kind),
                                           workload.config.weight_bits, options);
        const std::int64_t copies = layer.per_head ? workload.config.n_heads : 1;
        total.logical += m.n_xbar_logical * copies;
        total.physical += m.n_xbar_physical * copies;
        total.tiles += tiles_for(m.n_xbar_physical * copies, tiles);
    };
    for (const auto& enc : workload.encoders)
        for (const auto& layer : enc.layers) add(layer);
    for (const auto& layer : workload.stem) add(layer);
    return total;
}

}  // namespace imcvit
