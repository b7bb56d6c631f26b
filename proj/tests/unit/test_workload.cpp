#include <doctest.h>

#include <set>

#include "imcvit/config.hpp"
#include "imcvit/error.hpp"
#include "imcvit/workload.hpp"

using namespace imcvit;

namespace {

ModelConfig deit() {
    ModelConfig c;
    c.name = "deit";
    return c;
}

const LayerSpec* find(const EncoderSpec& e, LayerKind k) {
    for (const auto& l : e.layers)
        if (l.kind == k) return &l;
    return nullptr;
}

}  // namespace

TEST_CASE("standard encoder has all nine layer kinds") {
    const auto e = build_encoder(deit(), false);
    REQUIRE(e.layers.size() == 9);
    std::set<LayerKind> kinds;
    for (const auto& l : e.layers) kinds.insert(l.kind);
    CHECK(kinds.size() == 9);
    const auto* qk = find(e, LayerKind::MatmulQKT);
    REQUIRE(qk);
    CHECK(qk->in_dim == 64);
    CHECK(qk->out_dim == 197);
    CHECK(qk->per_head);
    CHECK(qk->requires_write);
    const auto* sv = find(e, LayerKind::MatmulSV);
    CHECK(sv->in_dim == 197);
    CHECK(sv->out_dim == 64);
    CHECK(find(e, LayerKind::FcMlp1)->out_dim == 1536);
    CHECK(find(e, LayerKind::TbFc) == nullptr);
    for (const auto& l : e.layers) {
        CHECK(l.per_head == is_dynamic_matmul(l.kind));
        CHECK(l.requires_write == is_dynamic_matmul(l.kind));
        CHECK(l.t_l == 197);
    }
}

TEST_CASE("reusing encoder keeps only TB, projection and MLP") {
    const auto e = build_encoder(deit(), true);
    REQUIRE(e.layers.size() == 4);
    CHECK(e.layers[0] == LayerSpec{LayerKind::TbFc, 384, 384, 197, false, false});
    CHECK(e.layers[1].kind == LayerKind::FcProj);
    CHECK(e.layers[2] == LayerSpec{LayerKind::FcMlp1, 384, 1536, 197, false, false});
    CHECK(e.layers[3] == LayerSpec{LayerKind::FcMlp2, 1536, 384, 197, false, false});
    for (const auto& l : e.layers) CHECK_FALSE(is_attention_layer(l.kind));
}

TEST_CASE("single head matmul spans the full width") {
    auto c = deit();
    c.n_heads = 1;
    CHECK(find(build_encoder(c, false), LayerKind::MatmulQKT)->in_dim == 384);
}

TEST_CASE("reuse sources are the nearest preceding non-reuser") {
    auto c = deit();
    c.n_encoders = 4;
    auto w = build_model(c, ReusePattern::explicit_set({1, 3}));
    CHECK(w.encoders[1].reuse_source == 0);
    CHECK(w.encoders[3].reuse_source == 2);
    CHECK_FALSE(w.encoders[0].reuse_source.has_value());
    CHECK(w.n_reuse() == 2);

    w = build_model(c, ReusePattern::explicit_set({1, 2}));
    CHECK(w.encoders[1].reuse_source == 0);
    CHECK(w.encoders[2].reuse_source == 0);

    w = build_model(c, ReusePattern::none());
    for (const auto& e : w.encoders) CHECK_FALSE(e.reuses_attention);
}

TEST_CASE("invalid patterns are rejected") {
    auto c = deit();
    c.n_encoders = 4;
    CHECK_THROWS_AS(build_model(c, ReusePattern::explicit_set({0, 2})), Error);
    CHECK_THROWS_AS(build_model(c, ReusePattern::explicit_set({4})), Error);
    ReusePattern dup;
    dup.reuse_set = {1, 1};
    CHECK_THROWS_AS(build_model(c, dup), Error);
    ReusePattern bad_strided;
    bad_strided.kind = PatternKind::Strided;
    bad_strided.sl = 2;
    bad_strided.start = 1;
    bad_strided.reuse_set = {1, 2};
    CHECK_THROWS_AS(build_model(c, bad_strided), Error);
}

TEST_CASE("config validation") {
    auto c = deit();
    c.n_heads = 5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = deit();
    c.input_split_bits = 3;
    CHECK_THROWS_AS(c.validate(), Error);
    c = deit();
    c.d = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("mac_count matches a hand summation") {
    auto c = deit();
    c.include_stem = false;
    const std::int64_t d = 384, t = 197, h = 1536, dh = 64, heads = 6;
    const std::int64_t attn = 3 * t * d * d + 2 * heads * t * dh * t;
    const std::int64_t rest = t * d * d + 2 * t * d * h;
    CHECK(mac_count(c, ReusePattern::none()) == 12 * (attn + rest));

    c.include_stem = true;
    CHECK(mac_count(c, ReusePattern::none()) ==
          12 * (attn + rest) + (t - 1) * 768 * d + d * 1000);
    // 4.6e9 order of magnitude for the DeiT-S shape with stem
    CHECK(mac_count(c, ReusePattern::none()) == doctest::Approx(4.6e9).epsilon(0.01));
}

TEST_CASE("reuse removes attention MACs and adds one TB") {
    auto c = deit();
    c.include_stem = false;
    const std::int64_t d = 384, t = 197;
    const std::int64_t attn = 3 * t * d * d + 2 * 6 * t * 64 * t;
    const auto base = mac_count(c, ReusePattern::none());
    const auto one = mac_count(c, ReusePattern::explicit_set({5}));
    CHECK(base - one == attn - t * d * d);

    std::int64_t prev = base;
    std::vector<int> set;
    for (int i = 1; i < c.n_encoders; ++i) {
        set.push_back(i);
        const auto now = mac_count(c, ReusePattern::explicit_set(set));
        CHECK(now < prev);
        prev = now;
    }
}

TEST_CASE("empty model has zero MACs") {
    auto c = deit();
    c.n_encoders = 0;
    c.include_stem = false;
    CHECK(mac_count(c, ReusePattern::none()) == 0);
}

TEST_CASE("build_model is deterministic") {
    const auto c = deit();
    const auto p = ReusePattern::explicit_set({2, 4, 6});
    CHECK(build_model(c, p) == build_model(c, p));
    CHECK(build_model(c, p).pattern().reuse_set == p.reuse_set);
}

TEST_CASE("layer kind names round trip") {
    for (LayerKind k : kAllLayerKinds) CHECK(layer_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(layer_kind_from_string("FC_X"), Error);
}

TEST_CASE("stem layers") {
    auto c = deit();
    c.include_stem = true;
    const auto w = build_model(c, ReusePattern::none());
    REQUIRE(w.stem.size() == 2);
    CHECK(w.stem[0] == LayerSpec{LayerKind::PatchEmbed, 768, 384, 196, false, false});
    CHECK(w.stem[1] == LayerSpec{LayerKind::Classifier, 384, 1000, 1, false, false});
    c.include_stem = false;
    CHECK(build_model(c, ReusePattern::none()).stem.empty());
}
