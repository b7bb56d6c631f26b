// SPDX-License-Identifier: Apache-2.0
#include "imcvit/cost_model.hpp"

#include <cmath>
#include <numeric>

#include "imcvit/error.hpp"

namespace imcvit {

void SoftmaxUnitParams::validate() const {
    require(e_select_pj >= 0 && e_exponent_pj >= 0 && e_div_pj >= 0 && d_select_ns >= 0 &&
                d_exponent_ns >= 0 && d_div_ns >= 0,
            "softmax unit constants must be non-negative");
}

LayerCost layer_cost(const LayerSpec& layer, const MappingResult& map, const DeviceParams& dev,
                     const TileConfig& tiles, int input_cycles, int instances,
                     const CostOptions& options) {
    require(instances >= 1, "layer_cost needs instances >= 1");
    const double n = static_cast<double>(map.n_xbar_physical) * instances;
    const double cycles = options.scale_reads_by_input_cycles ? input_cycles : 1.0;
    const double pe = options.read_delay_uses_n_x_pe ? tiles.n_x_pe : 1.0;

    LayerCost c;
    c.e_read_uj = layer.t_l * n * dev.e_read_pj * cycles * 1e-6;
    c.d_read_us = layer.t_l * dev.d_read_us * pe * cycles;
    if (layer.requires_write) {
        c.e_write_uj = n * dev.e_write_pj * 1e-6;
        c.d_write_us = dev.d_write_us * pe;
    }
    if (options.tile_padding) {
        const auto padded = tiles_for(map.n_xbar_physical * instances, tiles) * tiles.xbars_per_tile();
        c.area_mm2 = static_cast<double>(padded) * dev.area_mm2;
    } else {
        c.area_mm2 = n * dev.area_mm2;
    }
    return c;
}

SoftmaxCost softmax_cost(int n_heads, int t_l, const SoftmaxUnitParams& sp) {
    const double elems = static_cast<double>(t_l) * t_l;
    return {n_heads * elems * sp.energy_per_element_pj() * 1e-6,
            elems * sp.delay_per_element_ns() * 1e-3};
}

SoftmaxCost softmax_cost(const ModelConfig& cfg, const SoftmaxUnitParams& sp) {
    return softmax_cost(cfg.n_heads, cfg.t, sp);
}

std::string to_string(Block block) {
    switch (block) {
        case Block::Attention: return "attention";
        case Block::Transform: return "transform";
        case Block::Projection: return "projection";
        case Block::Mlp: return "mlp";
        case Block::Stem: return "stem";
        case Block::Predictor: return "predictor";
    }
    return "unknown";
}

Block block_of(LayerKind kind) {
    if (is_attention_layer(kind)) return Block::Attention;
    switch (kind) {
        case LayerKind::TbFc: return Block::Transform;
        case LayerKind::FcProj: return Block::Projection;
        case LayerKind::FcMlp1:
        case LayerKind::FcMlp2: return Block::Mlp;
        default: return Block::Stem;
    }
}

BlockCost& BlockCost::operator+=(const BlockCost& other) {
    energy_uj += other.energy_uj;
    delay_us += other.delay_us;
    area_mm2 += other.area_mm2;
    return *this;
}

namespace {

bool is_static_weight(LayerKind kind) {
    return kind != LayerKind::Softmax && !is_dynamic_matmul(kind);
}

bool counted(Block b, bool tb_in_totals) { return tb_in_totals || b != Block::Transform; }

BlockCost cost_of(const LayerSpec& layer, const ModelConfig& cfg, const HardwareConfig& hw) {
    if (layer.kind == LayerKind::Softmax) {
        const auto s = softmax_cost(cfg.n_heads, layer.t_l, hw.softmax);
        return {s.energy_uj, s.delay_us, 0.0};
    }
    const auto& dev = hw.devices.for_layer(layer.kind);
    const auto map = crossbars_for_layer(layer, hw.tiles, dev, cfg.weight_bits, hw.mapping);
    const auto c = layer_cost(layer, map, dev, hw.tiles, cfg.input_cycles(),
                              layer.per_head ? cfg.n_heads : 1, hw.options);
    return {c.energy_uj(), c.delay_us(), c.area_mm2};
}

// Sums the counted blocks into E/D/A and derives EDAP and throughput.
void finalize(ModelCost& mc) {
    BlockCost total;
    for (const auto& [block, c] : mc.blocks)
        if (counted(block, mc.tb_in_totals)) total += c;
    mc.energy_mj = total.energy_uj * 1e-3;
    mc.delay_ms = total.delay_us * 1e-3;
    mc.area_mm2 = total.area_mm2;
    mc.edap = mc.energy_mj * mc.delay_ms * mc.area_mm2;
    const double ops = static_cast<double>(mc.macs);
    mc.tops_per_w = mc.energy_mj > 0 ? ops / (mc.energy_mj * 1e-3) / 1e12 : 0.0;
    mc.tops_per_mm2 =
        mc.delay_ms > 0 && mc.area_mm2 > 0 ? ops / (mc.delay_ms * 1e-3) / mc.area_mm2 / 1e12 : 0.0;
}

ModelCost accumulate(const Workload& w, const HardwareConfig& hw, int weight_share) {
    hw.tiles.validate();
    hw.softmax.validate();
    ModelCost mc;
    mc.n_reuse = w.n_reuse();
    mc.tb_in_totals = hw.options.include_tb_cost;
    const auto& cfg = w.config;
    for (const auto& enc : w.encoders) {
        for (const auto& layer : enc.layers) {
            BlockCost c = cost_of(layer, cfg, hw);
            if (weight_share > 1 && is_static_weight(layer.kind)) c.area_mm2 /= weight_share;
            const Block b = block_of(layer.kind);
            mc.blocks[b] += c;
            if (counted(b, mc.tb_in_totals)) mc.macs += layer_macs(layer, cfg.n_heads);
        }
    }
    for (const auto& layer : w.stem) {
        mc.blocks[Block::Stem] += cost_of(layer, cfg, hw);
        mc.macs += layer_macs(layer, cfg.n_heads);
    }
    finalize(mc);
    return mc;
}

}  // namespace

std::map<Block, BlockShare> breakdown(const ModelCost& cost) {
    BlockCost total;
    double edap_sum = 0.0;
    for (const auto& [block, c] : cost.blocks) {
        if (!counted(block, cost.tb_in_totals)) continue;
        total += c;
        edap_sum += c.energy_uj * c.delay_us * c.area_mm2;
    }
    auto frac = [](double part, double whole) { return whole > 0 ? part / whole : 0.0; };
    std::map<Block, BlockShare> out;
    for (const auto& [block, c] : cost.blocks) {
        out[block] = {frac(c.energy_uj, total.energy_uj), frac(c.delay_us, total.delay_us),
                      frac(c.area_mm2, total.area_mm2),
                      frac(c.energy_uj * c.delay_us * c.area_mm2, edap_sum)};
    }
    return out;
}

ModelCost model_cost(const Workload& workload, const HardwareConfig& hw, int n_reuse) {
    require(n_reuse == workload.n_reuse(),
            "n_reuse " + std::to_string(n_reuse) + " disagrees with the workload, which has " +
                std::to_string(workload.n_reuse()) + " reusing encoders");
    return accumulate(workload, hw, 1);
}

ModelCost model_cost(const Workload& workload, const HardwareConfig& hw) {
    return accumulate(workload, hw, 1);
}

ModelCost model_cost_for_reuse(const ModelConfig& cfg, const HardwareConfig& hw, int n_reuse) {
    require(n_reuse >= 0 && (n_reuse == 0 || n_reuse < cfg.n_encoders),
            "n_reuse must be in [0, n_encoders - 1]");
    std::vector<int> set(static_cast<std::size_t>(n_reuse));
    std::iota(set.begin(), set.end(), 1);
    return model_cost(build_model(cfg, ReusePattern::explicit_set(std::move(set))), hw, n_reuse);
}

ModelCost apply_weight_sharing(const Workload& workload, const HardwareConfig& hw, int ws) {
    require(ws >= 1, "weight sharing factor must be >= 1");
    require(workload.config.n_encoders % ws == 0,
            "weight sharing factor " + std::to_string(ws) + " must divide n_encoders");
    return accumulate(workload, hw, ws);
}

Workload prune_tokens(const Workload& workload, double ratio, int first_pruned_encoder) {
    require(ratio >= 0.0 && ratio < 1.0, "token pruning ratio must be in [0, 1)");
    require(first_pruned_encoder >= 0, "first pruned encoder must be >= 0");
    Workload out = workload;
    const int t = workload.config.t;
    const int kept = t - static_cast<int>(std::floor(ratio * t));
    for (auto& enc : out.encoders) {
        if (enc.index < first_pruned_encoder) continue;
        for (auto& layer : enc.layers) {
            layer.t_l = kept;
            if (layer.kind == LayerKind::MatmulQKT) layer.out_dim = kept;
            if (layer.kind == LayerKind::MatmulSV) layer.in_dim = kept;
            if (layer.kind == LayerKind::Softmax) layer.in_dim = layer.out_dim = kept;
        }
    }
    return out;
}

ModelCost apply_token_pruning(const Workload& workload, const HardwareConfig& hw,
                              const TokenPruning& pruning) {
    ModelCost mc = accumulate(prune_tokens(workload, pruning.ratio, pruning.first_pruned_encoder),
                              hw, 1);
    const auto& o = pruning.predictor_overhead;
    if (o.energy_uj != 0.0 || o.delay_us != 0.0 || o.area_mm2 != 0.0) {
        mc.blocks[Block::Predictor] += o;
        finalize(mc);
    }
    return mc;
}

BlockCost predictor_overhead(const ModelConfig& cfg, const HardwareConfig& hw, int stages,
                             double keep_per_stage) {
    require(stages >= 0, "predictor stages must be >= 0");
    require(keep_per_stage > 0.0 && keep_per_stage <= 1.0, "keep_per_stage must be in (0, 1]");
    const int d = cfg.d;
    const int dims[] = {d, d, std::max(1, d / 2), std::max(1, d / 4), 2};
    BlockCost total;
    double alive = cfg.t;
    for (int s = 0; s < stages; ++s) {
        const int t_l = std::max(1, static_cast<int>(std::lround(alive)));
        for (int i = 0; i + 1 < 5; ++i) {
            const LayerSpec fc{LayerKind::TbFc, dims[i], dims[i + 1], t_l, false, false};
            const auto& dev = hw.devices.for_layer(LayerKind::FcMlp1);
            const auto map = crossbars_for_layer(fc, hw.tiles, dev, cfg.weight_bits, hw.mapping);
            const auto c = layer_cost(fc, map, dev, hw.tiles, cfg.input_cycles(), 1, hw.options);
            total += BlockCost{c.energy_uj(), c.delay_us(), c.area_mm2};
        }
        alive *= keep_per_stage;
    }
    return total;
}

}  // namespace imcvit
