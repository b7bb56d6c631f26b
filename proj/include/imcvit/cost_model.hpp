// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "imcvit/workload.hpp"
#include "imcvit/xbar_map.hpp"

namespace imcvit {

/// Digital softmax unit: per-element cost of the max-select, LUT exponent
/// and divide stages. Energies in pJ, delays in ns.
struct SoftmaxUnitParams {
    double e_select_pj = 1.6446;
    double e_exponent_pj = 2.6314;
    double e_div_pj = 2.3024;
    double d_select_ns = 3.8975;
    double d_exponent_ns = 6.2361;
    double d_div_ns = 5.4566;

    double energy_per_element_pj() const { return e_select_pj + e_exponent_pj + e_div_pj; }
    double delay_per_element_ns() const { return d_select_ns + d_exponent_ns + d_div_ns; }
    void validate() const;

    friend bool operator==(const SoftmaxUnitParams&, const SoftmaxUnitParams&) = default;
};

struct CostOptions {
    /// Multiply read energy/delay by input_bits / input_split_bits.
    bool scale_reads_by_input_cycles = true;
    /// Keep the N_X,PE factor of the read/write delay equations.
    bool read_delay_uses_n_x_pe = true;
    /// Round every layer's area up to whole tiles.
    bool tile_padding = false;
    /// Add transformation-block cost of reusing encoders to the totals.
    bool include_tb_cost = true;

    friend bool operator==(const CostOptions&, const CostOptions&) = default;
};

struct HardwareConfig {
    DeviceAssignment devices;
    TileConfig tiles;
    SoftmaxUnitParams softmax;
    CostOptions options;
    MappingOptions mapping;
};

/// Energy in uJ, delay in us, area in mm^2.
struct LayerCost {
    double e_read_uj = 0.0;
    double e_write_uj = 0.0;
    double d_read_us = 0.0;
    double d_write_us = 0.0;
    double area_mm2 = 0.0;

    double energy_uj() const { return e_read_uj + e_write_uj; }
    double delay_us() const { return d_read_us + d_write_us; }
};

/// Read/write/area equations for one mapped layer. `instances` is the number
/// of parallel copies (heads) sharing the read/write delay.
LayerCost layer_cost(const LayerSpec& layer, const MappingResult& map, const DeviceParams& dev,
                     const TileConfig& tiles, int input_cycles, int instances = 1,
                     const CostOptions& options = {});

struct SoftmaxCost {
    double energy_uj = 0.0;
    double delay_us = 0.0;
};

/// One softmax unit per head: energy scales with heads, delay does not.
SoftmaxCost softmax_cost(int n_heads, int t_l, const SoftmaxUnitParams& sp);
SoftmaxCost softmax_cost(const ModelConfig& cfg, const SoftmaxUnitParams& sp);

enum class Block { Attention, Transform, Projection, Mlp, Stem, Predictor };

std::string to_string(Block block);
Block block_of(LayerKind kind);

struct BlockCost {
    double energy_uj = 0.0;
    double delay_us = 0.0;
    double area_mm2 = 0.0;

    BlockCost& operator+=(const BlockCost& other);
};

struct ModelCost {
    double energy_mj = 0.0;
    double delay_ms = 0.0;
    double area_mm2 = 0.0;
    double edap = 0.0;  ///< mJ * ms * mm^2
    double tops_per_w = 0.0;
    double tops_per_mm2 = 0.0;
    std::int64_t macs = 0;
    int n_reuse = 0;
    bool tb_in_totals = true;  ///< Transform block counted in E/D/A
    std::map<Block, BlockCost> blocks;
};

struct BlockShare {
    double energy = 0.0;
    double delay = 0.0;
    double area = 0.0;
    /// Block's own E*D*A normalised over all blocks.
    double edap = 0.0;

    friend bool operator==(const BlockShare&, const BlockShare&) = default;
};

std::map<Block, BlockShare> breakdown(const ModelCost& cost);

/// Aggregates E/D/A over all encoders (and stem) and derives EDAP and the
/// throughput metrics. Throws if `n_reuse` disagrees with the workload.
ModelCost model_cost(const Workload& workload, const HardwareConfig& hw, int n_reuse);
ModelCost model_cost(const Workload& workload, const HardwareConfig& hw);

/// Convenience: build the model with reuse of encoders 1..n_reuse and cost it.
/// Encoders are isotropic, so any valid pattern of the same size costs the same.
ModelCost model_cost_for_reuse(const ModelConfig& cfg, const HardwareConfig& hw, int n_reuse);

/// `ws` encoders share one copy of each static weight matrix: the area of
/// those layers is divided by `ws`, energy and delay are untouched.
ModelCost apply_weight_sharing(const Workload& workload, const HardwareConfig& hw, int ws);

struct TokenPruning {
    double ratio = 0.0;             ///< fraction of tokens dropped
    int first_pruned_encoder = 3;   ///< encoders from here on see the pruned count
    BlockCost predictor_overhead;   ///< constant cost of the token predictors
};

/// Workload with t_L (and the token-sized matmul dims) reduced from
/// `first_pruned_encoder` onwards.
Workload prune_tokens(const Workload& workload, double ratio, int first_pruned_encoder);

ModelCost apply_token_pruning(const Workload& workload, const HardwareConfig& hw,
                              const TokenPruning& pruning);

/// Crossbar cost of `stages` token predictors, each a d -> d -> d/2 -> d/4 -> 2
/// MLP over the tokens alive at its stage.
BlockCost predictor_overhead(const ModelConfig& cfg, const HardwareConfig& hw, int stages = 3,
                             double keep_per_stage = 1.0);

}  // namespace imcvit
