// imcvit command line: cost sweeps, reuse optimisation, functional simulation
// and baseline-technique comparison.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "imcvit/config.hpp"
#include "imcvit/error.hpp"
#include "imcvit/func_sim.hpp"
#include "imcvit/report.hpp"
#include "imcvit/reuse_opt.hpp"
#include "imcvit/tensor_io.hpp"

using namespace imcvit;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string model = "deit_s";
    std::string device = "fefet";
    std::string config;
    std::vector<double> targets;
    std::string patterns = "all";
    std::string scorer = "cka";
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    std::string id;
    bool quiet = false;
};

void add_common(CLI::App* app, Common& c, bool with_targets = true) {
    app->add_option("--model", c.model, "Model preset (deit_s, lvvit_s, bert_base) or config file")
        ->capture_default_str();
    app->add_option("--device", c.device, "fefet, sram, hybrid or a device config file")
        ->capture_default_str();
    app->add_option("--config", c.config,
                    "Config file whose [tiles]/[softmax_unit]/[cost]/[noise] sections override the "
                    "calibrated defaults");
    if (with_targets)
        app->add_option("--target-delay", c.targets, "Target delay in ms (repeatable)")
            ->check(CLI::PositiveNumber);
    app->add_option("--patterns", c.patterns,
                    "strided, continuous, pyramid, all (comma separated) or explicit:1;3;5")
        ->capture_default_str();
    app->add_option("--scorer", c.scorer, "cka or external:<path>")->capture_default_str();
    app->add_option("--seed", c.seed, "Seed for synthetic activations and noise")->capture_default_str();
    app->add_option("--out", c.out, "Output directory (default $IMCVIT_OUT_DIR or .)");
    app->add_option("--format", c.format, "csv, json or both")->capture_default_str();
    app->add_option("--id", c.id, "Scenario id (default: model name)");
    app->add_flag("-q,--quiet", c.quiet, "Do not print the table");
}

std::optional<ConfigFile> overrides(const Common& c) {
    if (c.config.empty()) return std::nullopt;
    return load_config(c.config);
}

std::string device_label(const std::string& spec) {
    const fs::path p(spec);
    return p.has_extension() ? p.stem().string() : spec;
}

Scenario make_scenario(const Common& c) {
    Scenario s;
    s.model = resolve_model(c.model);
    if (auto f = overrides(c); f && f->model) s.model = *f->model;
    s.id = c.id.empty() ? device_label(c.model) : c.id;
    s.device_label = device_label(c.device);
    s.hardware = calibrated_hardware(resolve_devices(c.device));
    if (auto f = overrides(c)) apply_overrides(*f, s.hardware);
    s.target_delays_ms = c.targets;
    s.patterns = parse_patterns(c.patterns);
    s.scorer = parse_scorer(c.scorer);
    s.seed = c.seed;
    return s;
}

void print_rows(const std::vector<ReportRow>& rows) {
    std::printf("%-22s %7s %-34s %9s %9s %9s %10s %8s %10s %7s\n", "scenario", "n_reuse", "pattern",
                "E(mJ)", "D(ms)", "A(mm2)", "EDAP", "TOPS/W", "TOPS/mm2", "EDAPx");
    for (const auto& r : rows)
        std::printf("%-22s %7d %-34s %9.4f %9.3f %9.1f %10.2f %8.2f %10.6f %7.2f\n",
                    r.scenario.c_str(), r.n_reuse, r.pattern.c_str(), r.energy_mj, r.delay_ms,
                    r.area_mm2, r.edap, r.tops_per_w, r.tops_per_mm2, r.edap_reduction);
}

void emit(const Common& c, const Scenario& s, const std::vector<ReportRow>& rows,
          const std::string& stem) {
    if (!c.quiet) print_rows(rows);
    const auto paths = write_report(rows, report_header(s), resolve_output_dir(c.out), stem,
                                    parse_format(c.format));
    for (const auto& p : paths) std::fprintf(stderr, "wrote %s\n", p.c_str());
}

int cmd_simulate(const Common& c) {
    const auto s = make_scenario(c);
    emit(c, s, run_scenario(s), s.id + ".simulate");
    return 0;
}

int cmd_optimize(const Common& c, int top) {
    const auto s = make_scenario(c);
    require(!s.target_delays_ms.empty(), "optimize needs at least one --target-delay");
    const auto rows = run_scenario(s);

    // full ranking per target
    const auto scorer =
        s.scorer.kind == ScorerKind::External
            ? external_scorer(s.scorer.path)
            : cka_proxy_scorer(synthetic_attention_outputs(
                  s.model.n_encoders, std::min(s.model.t, 64), std::min(s.model.d, 64), s.seed));
    std::string csv = "target_delay_ms,n_reuse,achieved_delay_ms,rank,pattern,score\n";
    for (double t : s.target_delays_ms) {
        const auto search = find_optimal_n_reuse(s.model, s.hardware, t);
        char head[160];
        std::snprintf(head, sizeof head, "%.2f,%d,%.4f,", t, search.n_reuse, search.achieved_delay_ms);
        if (!search.feasible || search.n_reuse == 0) {
            csv += head + std::string("0,") + (search.feasible ? "baseline" : "infeasible") + ",0\n";
            continue;
        }
        auto scored = score_patterns(
            enumerate_patterns(s.model.n_encoders, search.n_reuse, s.patterns.families), scorer);
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            return a.score != b.score ? a.score < b.score : a.pattern.reuse_set < b.pattern.reuse_set;
        });
        if (!c.quiet)
            std::printf("target %.2f ms: n_reuse=%d, %zu candidate patterns\n", t, search.n_reuse,
                        scored.size());
        for (std::size_t i = 0; i < scored.size(); ++i) {
            char line[64];
            std::snprintf(line, sizeof line, ",%.6f\n", scored[i].score);
            csv += head + std::to_string(i + 1) + "," + scored[i].pattern.label() + line;
            if (!c.quiet && static_cast<int>(i) < top)
                std::printf("  %3zu  %-40s %.6f\n", i + 1, scored[i].pattern.label().c_str(),
                            scored[i].score);
        }
    }
    emit(c, s, rows, s.id + ".optimize");
    const fs::path dir = resolve_output_dir(c.out);
    const auto path = (dir / (s.id + ".ranking.csv")).string();
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os << csv), "cannot write " + path);
    std::fprintf(stderr, "wrote %s\n", path.c_str());
    return 0;
}

int cmd_compare(const Common& c, const std::vector<int>& ws, const std::vector<double>& prune) {
    const auto s = make_scenario(c);
    emit(c, s, run_comparison(s, ws, prune), s.id + ".compare");
    return 0;
}

struct FuncsimArgs {
    std::string mode = "crossbar";
    bool noise_off = false;
    int adc_bits = 6;
    int n_reuse = 2;
    std::string weights;
    std::string save_weights;
    bool toy = true;
};

int cmd_funcsim(const Common& c, const FuncsimArgs& a) {
    ModelConfig cfg = a.toy ? toy_model_config() : resolve_model(c.model);
    HardwareConfig hw = calibrated_hardware(resolve_devices(c.device));
    NoiseModel noise;
    if (auto f = overrides(c)) {
        apply_overrides(*f, hw);
        if (f->noise) noise = *f->noise;
        if (f->model) cfg = *f->model;
    }
    noise.rng_seed = c.seed;
    noise.adc_bits = a.adc_bits;
    if (a.noise_off) noise.enabled = false;

    const ModelWeights weights = a.weights.empty() ? toy_model_weights(cfg, c.seed)
                                                   : weights_from_tensors(read_tensors(a.weights));
    if (!a.save_weights.empty()) write_tensors(a.save_weights, weights_to_tensors(weights));
    const Matrix x = toy_input(cfg, c.seed);

    SimOptions exact;
    SimOptions sim;
    sim.mode = a.mode == "exact" ? SimMode::Exact : SimMode::Crossbar;
    require(a.mode == "exact" || a.mode == "crossbar", "--mode must be exact or crossbar");
    sim.devices = hw.devices;
    sim.tiles = hw.tiles;
    sim.noise = noise;
    sim.weight_bits = cfg.weight_bits;
    sim.input_bits = cfg.input_bits;
    sim.input_split_bits = cfg.input_split_bits;

    const auto reference = model_forward(build_model(cfg, ReusePattern::none()), weights, x, exact);
    const auto sel = parse_patterns(c.patterns);
    std::vector<ReusePattern> pats{ReusePattern::none()};
    if (sel.explicit_pattern) {
        pats.push_back(*sel.explicit_pattern);
    } else if (a.n_reuse > 0) {
        const auto more = enumerate_patterns(cfg.n_encoders, a.n_reuse, sel.families);
        pats.insert(pats.end(), more.begin(), more.end());
    }

    std::string csv =
        "pattern,n_reuse,rel_error_vs_baseline,mean_attention_cka,attention_evaluations,"
        "tb_evaluations,noisy_reads\n";
    if (!c.quiet)
        std::printf("%-36s %7s %12s %10s %6s %12s\n", "pattern", "n_reuse", "rel_error", "attn_cka",
                    "attn", "noisy_reads");
    for (const auto& p : pats) {
        const auto r = model_forward(build_model(cfg, p), weights, x, sim);
        const double err = (r.output - reference.output).norm() / reference.output.norm();
        double cka = 0;
        for (std::size_t i = 0; i < r.attention_outputs.size(); ++i)
            cka += cka_score(r.attention_outputs[i], reference.attention_outputs[i]);
        cka /= static_cast<double>(r.attention_outputs.size());
        std::int64_t reads = 0;
        for (const auto& [k, n] : r.stats.noisy_reads) reads += n;
        char line[256];
        std::snprintf(line, sizeof line, "%s,%d,%.10g,%.10g,%d,%d,%lld\n", p.label().c_str(),
                      p.n_reuse(), err, cka, r.stats.attention_evaluations, r.stats.tb_evaluations,
                      static_cast<long long>(reads));
        csv += line;
        if (!c.quiet)
            std::printf("%-36s %7d %12.6f %10.4f %6d %12lld\n", p.label().c_str(), p.n_reuse(), err,
                        cka, r.stats.attention_evaluations, static_cast<long long>(reads));
    }
    const fs::path dir = resolve_output_dir(c.out);
    fs::create_directories(dir);
    const std::string stem = c.id.empty() ? cfg.name : c.id;
    const auto path = (dir / (stem + ".funcsim.csv")).string();
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os << csv), "cannot write " + path);
    std::fprintf(stderr, "wrote %s\n", path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crossbar cost model and attention-reuse explorer for vision transformers"};
    app.require_subcommand(1);

    Common sim_c, opt_c, cmp_c, fs_c;
    auto* sim = app.add_subcommand("simulate", "Baseline and target-delay cost sweep");
    add_common(sim, sim_c);

    auto* opt = app.add_subcommand("optimize", "Optimal reuse count and pattern ranking per target");
    add_common(opt, opt_c);
    int top = 10;
    opt->add_option("--top", top, "Patterns printed per target")->capture_default_str();

    auto* cmp = app.add_subcommand("compare", "Weight sharing, token pruning and attention reuse");
    add_common(cmp, cmp_c);
    std::vector<int> ws{2};
    std::vector<double> prune{0.3};
    cmp->add_option("--ws", ws, "Weight-sharing factor (repeatable)")->capture_default_str();
    cmp->add_option("--prune", prune, "Token pruning ratio (repeatable)")
        ->check(CLI::Range(0.0, 0.99))
        ->capture_default_str();

    auto* fsim = app.add_subcommand("funcsim", "Functional crossbar simulation of the toy model");
    add_common(fsim, fs_c, false);
    FuncsimArgs fa;
    fsim->add_option("--mode", fa.mode, "exact or crossbar")->capture_default_str();
    fsim->add_flag("--noise-off", fa.noise_off, "Disable read/write variation");
    fsim->add_option("--adc-bits", fa.adc_bits, "ADC resolution")->capture_default_str();
    fsim->add_option("--n-reuse", fa.n_reuse, "Reuse count of the enumerated patterns")
        ->capture_default_str();
    fsim->add_option("--weights", fa.weights, "Load weights from a tensor file");
    fsim->add_option("--save-weights", fa.save_weights, "Write the weights used to a tensor file");
    fsim->add_flag("!--full-model", fa.toy, "Use --model instead of the toy model");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*sim) return cmd_simulate(sim_c);
        if (*opt) return cmd_optimize(opt_c, top);
        if (*cmp) return cmd_compare(cmp_c, ws, prune);
        if (*fsim) return cmd_funcsim(fs_c, fa);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
