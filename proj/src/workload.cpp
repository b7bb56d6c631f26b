// SPDX-License-Identifier: Apache-2.0
#include "imcvit/workload.hpp"

#include <cmath>

#include "imcvit/error.hpp"

namespace imcvit {

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::FcQ: return "FC_Q";
        case LayerKind::FcK: return "FC_K";
        case LayerKind::FcV: return "FC_V";
        case LayerKind::MatmulQKT: return "MATMUL_QKT";
        case LayerKind::Softmax: return "SOFTMAX";
        case LayerKind::MatmulSV: return "MATMUL_SV";
        case LayerKind::FcProj: return "FC_PROJ";
        case LayerKind::FcMlp1: return "FC_MLP1";
        case LayerKind::FcMlp2: return "FC_MLP2";
        case LayerKind::TbFc: return "TB_FC";
        case LayerKind::PatchEmbed: return "PATCH_EMBED";
        case LayerKind::Classifier: return "CLASSIFIER";
    }
    return "UNKNOWN";
}

LayerKind layer_kind_from_string(std::string_view name) {
    for (LayerKind k : kAllLayerKinds)
        if (to_string(k) == name) return k;
    throw Error("unknown layer kind '" + std::string(name) + "'");
}

bool is_attention_layer(LayerKind kind) {
    switch (kind) {
        case LayerKind::FcQ:
        case LayerKind::FcK:
        case LayerKind::FcV:
        case LayerKind::MatmulQKT:
        case LayerKind::Softmax:
        case LayerKind::MatmulSV: return true;
        default: return false;
    }
}

bool is_dynamic_matmul(LayerKind kind) {
    return kind == LayerKind::MatmulQKT || kind == LayerKind::MatmulSV;
}

int ModelConfig::mlp_hidden() const {
    return static_cast<int>(std::llround(mlp_ratio * d));
}

void ModelConfig::validate() const {
    require(d >= 1 && t >= 1 && n_heads >= 1, "model '" + name + "': d, t and n_heads must be >= 1");
    require(n_encoders >= 0, "model '" + name + "': n_encoders must be >= 0");
    require(d % n_heads == 0, "model '" + name + "': d must be divisible by n_heads");
    require(mlp_ratio > 0.0 && mlp_hidden() >= 1, "model '" + name + "': mlp_ratio must be positive");
    require(weight_bits >= 1 && input_bits >= 1 && input_split_bits >= 1,
            "model '" + name + "': bit widths must be >= 1");
    require(input_bits % input_split_bits == 0,
            "model '" + name + "': input_split_bits must divide input_bits");
    if (include_stem) {
        require(patch_dim >= 1 && n_classes >= 1, "model '" + name + "': stem dims must be >= 1");
        require(cls_tokens >= 0 && cls_tokens < t, "model '" + name + "': cls_tokens must be < t");
    }
}

namespace {

LayerSpec fc(LayerKind kind, int in, int out, int t) {
    return LayerSpec{kind, in, out, t, false, false};
}

}  // namespace

EncoderSpec build_encoder(const ModelConfig& cfg, bool reuses, int index) {
    const int d = cfg.d;
    const int t = cfg.t;
    const int hidden = cfg.mlp_hidden();
    EncoderSpec enc;
    enc.index = index;
    enc.reuses_attention = reuses;
    if (reuses) {
        enc.layers.push_back(fc(LayerKind::TbFc, d, d, t));
    } else {
        const int dh = cfg.head_dim();
        enc.layers.push_back(fc(LayerKind::FcQ, d, d, t));
        enc.layers.push_back(fc(LayerKind::FcK, d, d, t));
        enc.layers.push_back(fc(LayerKind::FcV, d, d, t));
        enc.layers.push_back(LayerSpec{LayerKind::MatmulQKT, dh, t, t, true, true});
        enc.layers.push_back(LayerSpec{LayerKind::Softmax, t, t, t, false, false});
        enc.layers.push_back(LayerSpec{LayerKind::MatmulSV, t, dh, t, true, true});
    }
    enc.layers.push_back(fc(LayerKind::FcProj, d, d, t));
    enc.layers.push_back(fc(LayerKind::FcMlp1, d, hidden, t));
    enc.layers.push_back(fc(LayerKind::FcMlp2, hidden, d, t));
    return enc;
}

Workload build_model(const ModelConfig& cfg, const ReusePattern& pattern) {
    cfg.validate();
    validate(pattern, cfg.n_encoders);

    Workload w;
    w.config = cfg;
    w.encoders.reserve(static_cast<std::size_t>(cfg.n_encoders));
    int last_source = 0;
    for (int i = 0; i < cfg.n_encoders; ++i) {
        const bool reuses = pattern.reuses(i);
        EncoderSpec enc = build_encoder(cfg, reuses, i);
        if (reuses) {
            enc.reuse_source = last_source;
        } else {
            last_source = i;
        }
        w.encoders.push_back(std::move(enc));
    }
    if (cfg.include_stem) {
        w.stem.push_back(fc(LayerKind::PatchEmbed, cfg.patch_dim, cfg.d, cfg.t - cfg.cls_tokens));
        w.stem.push_back(fc(LayerKind::Classifier, cfg.d, cfg.n_classes, 1));
    }
    return w;
}

int Workload::n_reuse() const {
    int n = 0;
    for (const auto& e : encoders) n += e.reuses_attention ? 1 : 0;
    return n;
}

ReusePattern Workload::pattern() const {
    std::vector<int> set;
    for (const auto& e : encoders)
        if (e.reuses_attention) set.push_back(e.index);
    return ReusePattern::explicit_set(std::move(set));
}

std::int64_t layer_macs(const LayerSpec& layer, int n_heads) {
    if (layer.kind == LayerKind::Softmax) return 0;
    const std::int64_t macs = static_cast<std::int64_t>(layer.t_l) * layer.in_dim * layer.out_dim;
    return layer.per_head ? macs * n_heads : macs;
}

std::int64_t mac_count(const Workload& workload) {
    std::int64_t total = 0;
    const int heads = workload.config.n_heads;
    for (const auto& enc : workload.encoders)
        for (const auto& layer : enc.layers) total += layer_macs(layer, heads);
    for (const auto& layer : workload.stem) total += layer_macs(layer, heads);
    return total;
}

std::int64_t mac_count(const ModelConfig& cfg, const ReusePattern& pattern) {
    return mac_count(build_model(cfg, pattern));
}

}  // namespace imcvit
