// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "imcvit/workload.hpp"

namespace imcvit {

enum class DeviceKind { FeFET, SRAM };

std::string to_string(DeviceKind kind);
DeviceKind device_kind_from_string(const std::string& name);

/// Per-crossbar device constants. Energies in pJ, delays in us, area in mm^2.
struct DeviceParams {
    DeviceKind kind = DeviceKind::FeFET;
    int bits_per_cell = 2;
    double e_read_pj = 25.0;
    double e_write_pj = 118.0;
    double d_read_us = 0.02;
    double d_write_us = 3.3;
    double area_mm2 = 0.03;
    double read_var = 0.10;   ///< relative std-dev of read current
    double write_var = 0.20;  ///< relative std-dev of programmed conductance
    double r_on_ohm = 100e3;
    double r_off_ohm = 10e6;

    double g_min() const { return 1.0 / r_off_ohm; }
    double g_max() const { return 1.0 / r_on_ohm; }
    int cell_levels() const { return 1 << bits_per_cell; }
    bool has_variation() const { return read_var > 0.0 || write_var > 0.0; }
    void validate() const;

    static DeviceParams fefet();
    static DeviceParams sram();

    friend bool operator==(const DeviceParams&, const DeviceParams&) = default;
};

struct TileConfig {
    int xbar_size = 64;
    int n_x_pe = 8;
    int n_pe_tile = 8;
    int adc_bits = 6;

    int xbars_per_tile() const { return n_x_pe * n_pe_tile; }
    void validate() const;

    friend bool operator==(const TileConfig&, const TileConfig&) = default;
};

struct MappingOptions {
    /// Count a positive and a negative column set per signed weight.
    bool differential_columns = false;
};

struct MappingResult {
    std::int64_t n_xbar_logical = 0;
    std::int64_t slice_factor = 1;
    std::int64_t n_xbar_physical = 0;
    std::int64_t n_tiles = 0;
};

/// ceil(in/xbar) * ceil(out/xbar).
std::int64_t crossbar_count(std::int64_t in_dim, std::int64_t out_dim, int xbar_size);
std::int64_t tiles_for(std::int64_t physical_xbars, const TileConfig& tiles);

/// Mapping of one layer instance (one head for per-head layers).
/// Softmax runs on the digital unit and is rejected.
MappingResult crossbars_for_layer(const LayerSpec& layer, const TileConfig& tiles,
                                  const DeviceParams& dev, int weight_bits,
                                  const MappingOptions& options = {});

/// Which device each crossbar-mapped layer kind lives on.
class DeviceAssignment {
public:
    DeviceAssignment() : DeviceAssignment(uniform(DeviceParams::fefet())) {}

    static DeviceAssignment uniform(const DeviceParams& dev);
    /// Dynamic matmuls on `matmul_dev`, every static-weight layer on `weight_dev`.
    static DeviceAssignment hybrid(const DeviceParams& weight_dev, const DeviceParams& matmul_dev);

    const DeviceParams& for_layer(LayerKind kind) const;
    void assign(LayerKind kind, const DeviceParams& dev);
    bool is_uniform() const;
    std::string label() const;

    friend bool operator==(const DeviceAssignment&, const DeviceAssignment&) = default;

private:
    struct Empty {};
    explicit DeviceAssignment(Empty) {}

    std::map<LayerKind, DeviceParams> devices_;
};

struct CrossbarTotals {
    std::int64_t logical = 0;
    std::int64_t physical = 0;
    std::int64_t tiles = 0;  ///< summed per layer (a tile never holds two layers)
};

CrossbarTotals model_crossbar_total(const Workload& workload, const TileConfig& tiles,
                                    const DeviceAssignment& devices,
                                    const MappingOptions& options = {});

}  // namespace imcvit
