#include <doctest.h>

#include <random>

#include "imcvit/error.hpp"
#include "imcvit/xbar_map.hpp"

using namespace imcvit;

namespace {

// Counts the xbar x xbar blocks that overlap at least one weight.
std::int64_t brute_force_tiles(int in, int out, int xbar) {
    std::int64_t n = 0;
    for (int r = 0; r < in; r += xbar)
        for (int c = 0; c < out; c += xbar) ++n;
    return n;
}

LayerSpec fc(int in, int out) { return {LayerKind::FcQ, in, out, 1, false, false}; }

}  // namespace

TEST_CASE("crossbar count examples") {
    CHECK(crossbar_count(384, 384, 64) == 36);
    CHECK(crossbar_count(64, 64, 64) == 1);
    CHECK(crossbar_count(1, 1, 64) == 1);
    CHECK(crossbar_count(1, 1, 1) == 1);
    CHECK(crossbar_count(65, 64, 64) == 2);
}

TEST_CASE("crossbar count equals brute-force tiling") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> dim(1, 4096);
    std::uniform_int_distribution<int> xb(1, 256);
    for (int i = 0; i < 500; ++i) {
        const int in = dim(rng), out = dim(rng), x = xb(rng);
        CHECK(crossbar_count(in, out, x) == brute_force_tiles(in, out, x));
    }
}

TEST_CASE("crossbar count is monotone") {
    for (int x : {8, 32, 64, 128}) {
        for (int d = 1; d < 400; d += 7) {
            CHECK(crossbar_count(d + 1, 100, x) >= crossbar_count(d, 100, x));
            CHECK(crossbar_count(100, d + 1, x) >= crossbar_count(100, d, x));
            CHECK(crossbar_count(d, 300, x) >= crossbar_count(d, 300, x * 2));
        }
    }
}

TEST_CASE("slicing by bits per cell") {
    TileConfig t;
    const auto fe = crossbars_for_layer(fc(384, 384), t, DeviceParams::fefet(), 8);
    CHECK(fe.n_xbar_logical == 36);
    CHECK(fe.slice_factor == 4);
    CHECK(fe.n_xbar_physical == 144);
    CHECK(fe.n_tiles == 3);

    const auto sr = crossbars_for_layer(fc(384, 384), t, DeviceParams::sram(), 8);
    CHECK(sr.slice_factor == 8);
    CHECK(sr.n_xbar_physical == 288);
    CHECK(sr.n_tiles == 5);

    MappingOptions diff;
    diff.differential_columns = true;
    CHECK(crossbars_for_layer(fc(384, 384), t, DeviceParams::fefet(), 8, diff).n_xbar_physical == 288);

    auto odd = DeviceParams::fefet();
    odd.bits_per_cell = 3;
    CHECK(crossbars_for_layer(fc(64, 64), t, odd, 8).slice_factor == 3);
}

TEST_CASE("softmax cannot be mapped") {
    const LayerSpec sm{LayerKind::Softmax, 197, 197, 197, false, false};
    CHECK_THROWS_AS(crossbars_for_layer(sm, TileConfig{}, DeviceParams::fefet(), 8), Error);
}

TEST_CASE("DeiT-S per encoder logical totals") {
    ModelConfig c;
    c.include_stem = false;
    c.n_encoders = 2;
    const auto devs = DeviceAssignment::uniform(DeviceParams::fefet());
    const auto base = model_crossbar_total(build_model(c, ReusePattern::none()), TileConfig{}, devs);
    CHECK(base.logical == 2 * 480);
    CHECK(base.physical == 2 * 480 * 4);
    const auto reuse =
        model_crossbar_total(build_model(c, ReusePattern::explicit_set({1})), TileConfig{}, devs);
    CHECK(reuse.logical == 480 + 360);
}

TEST_CASE("hybrid assignment changes slicing only for matmuls") {
    ModelConfig c;
    c.include_stem = false;
    c.n_encoders = 1;
    const auto w = build_model(c, ReusePattern::none());
    const auto uni = DeviceAssignment::uniform(DeviceParams::fefet());
    const auto hyb = DeviceAssignment::hybrid(DeviceParams::fefet(), DeviceParams::sram());
    CHECK(hyb.label() == "hybrid-fefet-sram");
    CHECK(uni.label() == "fefet");
    CHECK(uni.is_uniform());
    CHECK_FALSE(hyb.is_uniform());
    for (const auto& l : w.encoders[0].layers) {
        if (l.kind == LayerKind::Softmax) continue;
        const auto a = crossbars_for_layer(l, TileConfig{}, uni.for_layer(l.kind), 8);
        const auto b = crossbars_for_layer(l, TileConfig{}, hyb.for_layer(l.kind), 8);
        CHECK(a.n_xbar_logical == b.n_xbar_logical);
        if (is_dynamic_matmul(l.kind))
            CHECK(b.slice_factor == 8);
        else
            CHECK(b.slice_factor == a.slice_factor);
    }
    // 6 heads x 4 crossbars each for QK^T and SV, 8x sliced instead of 4x
    const auto tu = model_crossbar_total(w, TileConfig{}, uni);
    const auto th = model_crossbar_total(w, TileConfig{}, hyb);
    CHECK(th.physical - tu.physical == 2 * 6 * 4 * 4);
}

TEST_CASE("device presets") {
    const auto fe = DeviceParams::fefet();
    CHECK(fe.bits_per_cell == 2);
    CHECK(fe.e_read_pj == 25.0);
    CHECK(fe.e_write_pj == 118.0);
    CHECK(fe.d_read_us == 0.02);
    CHECK(fe.d_write_us == 3.3);
    CHECK(fe.area_mm2 == 0.03);
    CHECK(fe.read_var == 0.10);
    CHECK(fe.write_var == 0.20);
    const auto sr = DeviceParams::sram();
    CHECK(sr.bits_per_cell == 1);
    CHECK(sr.read_var == 0.0);
    CHECK(sr.write_var == 0.0);
    CHECK_FALSE(sr.has_variation());
    fe.validate();
    sr.validate();
    auto bad = fe;
    bad.read_var = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK(device_kind_from_string("FeFET") == DeviceKind::FeFET);
    CHECK_THROWS_AS(device_kind_from_string("rram"), Error);
}
