// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imcvit/reuse_pattern.hpp"

namespace imcvit {

enum class LayerKind {
    FcQ,
    FcK,
    FcV,
    MatmulQKT,
    Softmax,
    MatmulSV,
    FcProj,
    FcMlp1,
    FcMlp2,
    TbFc,
    PatchEmbed,
    Classifier,
};

inline constexpr LayerKind kAllLayerKinds[] = {
    LayerKind::FcQ,    LayerKind::FcK,    LayerKind::FcV,    LayerKind::MatmulQKT,
    LayerKind::Softmax, LayerKind::MatmulSV, LayerKind::FcProj, LayerKind::FcMlp1,
    LayerKind::FcMlp2, LayerKind::TbFc,   LayerKind::PatchEmbed, LayerKind::Classifier,
};

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

/// Q/K/V, the two dynamic matmuls and softmax: the block removed by reuse.
bool is_attention_layer(LayerKind kind);
bool is_dynamic_matmul(LayerKind kind);

/// Transformer workload shape.
struct ModelConfig {
    std::string name = "custom";
    int d = 384;            ///< embedding dimension
    int t = 197;            ///< tokens per input, class token included
    double mlp_ratio = 4.0;
    int n_encoders = 12;
    int n_heads = 6;
    int weight_bits = 8;
    int input_bits = 8;
    int input_split_bits = 1;
    bool include_stem = true;  ///< account patch embedding and classifier
    int patch_dim = 768;       ///< flattened patch size fed to the embedding
    int n_classes = 1000;
    int cls_tokens = 1;        ///< tokens not produced by the patch embedding

    int head_dim() const { return d / n_heads; }
    int mlp_hidden() const;
    int input_cycles() const { return input_bits / input_split_bits; }
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LayerSpec {
    LayerKind kind = LayerKind::FcQ;
    int in_dim = 0;
    int out_dim = 0;
    int t_l = 0;  ///< tokens processed
    bool per_head = false;
    bool requires_write = false;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct EncoderSpec {
    int index = 0;
    bool reuses_attention = false;
    std::optional<int> reuse_source;
    std::vector<LayerSpec> layers;

    friend bool operator==(const EncoderSpec&, const EncoderSpec&) = default;
};

/// A model instance: encoders in order plus the optional stem layers.
struct Workload {
    ModelConfig config;
    std::vector<EncoderSpec> encoders;
    std::vector<LayerSpec> stem;

    int n_reuse() const;
    ReusePattern pattern() const;

    friend bool operator==(const Workload&, const Workload&) = default;
};

EncoderSpec build_encoder(const ModelConfig& cfg, bool reuses, int index = 0);

/// Reusing encoders take the attention output of the nearest preceding
/// non-reusing encoder. Throws Error for an invalid pattern.
Workload build_model(const ModelConfig& cfg, const ReusePattern& pattern);

std::int64_t layer_macs(const LayerSpec& layer, int n_heads);
std::int64_t mac_count(const Workload& workload);
std::int64_t mac_count(const ModelConfig& cfg, const ReusePattern& pattern);

}  // namespace imcvit
