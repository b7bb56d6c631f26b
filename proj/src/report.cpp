// SPDX-License-Identifier: Apache-2.0
#include "imcvit/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "imcvit/error.hpp"

namespace imcvit {

using nlohmann::json;

ScorerSpec parse_scorer(const std::string& text) {
    if (text == "cka") return {};
    const std::string prefix = "external:";
    if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size())
        return {ScorerKind::External, text.substr(prefix.size())};
    throw Error("unknown scorer '" + text + "' (expected cka or external:<path>)");
}

PatternSelection parse_patterns(const std::string& text) {
    PatternSelection sel;
    const std::string prefix = "explicit:";
    if (text.rfind(prefix, 0) == 0) {
        sel.explicit_pattern = ReusePattern::explicit_set(parse_indices(text.substr(prefix.size())));
        return sel;
    }
    sel.families.clear();
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok == "all") {
            sel.families = {PatternKind::Strided, PatternKind::Continuous, PatternKind::Pyramid};
            return sel;
        }
        PatternKind k;
        if (tok == "strided") k = PatternKind::Strided;
        else if (tok == "continuous") k = PatternKind::Continuous;
        else if (tok == "pyramid") k = PatternKind::Pyramid;
        else throw Error("unknown pattern family '" + tok + "'");
        if (std::find(sel.families.begin(), sel.families.end(), k) == sel.families.end())
            sel.families.push_back(k);
    }
    require(!sel.families.empty(), "no pattern family selected");
    return sel;
}

void Scenario::validate() const {
    require(!id.empty() && id.find_first_of(",\n\"") == std::string::npos,
            "scenario id must be non-empty and free of commas, quotes and newlines");
    model.validate();
    hardware.tiles.validate();
    hardware.softmax.validate();
    for (double t : target_delays_ms)
        require(t > 0.0 && std::isfinite(t), "target delays must be positive");
    require(!patterns.families.empty() || patterns.explicit_pattern, "no reuse pattern family selected");
    if (patterns.explicit_pattern) imcvit::validate(*patterns.explicit_pattern, model.n_encoders);
}

ReportRow make_row(const std::string& scenario, const std::string& model,
                   const std::string& device, const ModelCost& cost, const ModelCost& baseline) {
    auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    ReportRow r;
    r.scenario = scenario;
    r.model = model;
    r.device = device;
    r.n_reuse = cost.n_reuse;
    r.energy_mj = cost.energy_mj;
    r.delay_ms = cost.delay_ms;
    r.area_mm2 = cost.area_mm2;
    r.edap = cost.edap;
    r.tops_per_w = cost.tops_per_w;
    r.tops_per_mm2 = cost.tops_per_mm2;
    r.energy_reduction = ratio(baseline.energy_mj, cost.energy_mj);
    r.delay_reduction = ratio(baseline.delay_ms, cost.delay_ms);
    r.area_reduction = ratio(baseline.area_mm2, cost.area_mm2);
    r.edap_reduction = ratio(baseline.edap, cost.edap);
    r.tops_per_w_gain = ratio(cost.tops_per_w, baseline.tops_per_w);
    r.tops_per_mm2_gain = ratio(cost.tops_per_mm2, baseline.tops_per_mm2);
    r.breakdown = breakdown(cost);
    return r;
}

namespace {

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string target_label(double ms) {
    std::ostringstream os;
    os << ms;
    return os.str() + "ms";
}

PatternScorer make_scorer(const Scenario& s) {
    if (s.scorer.kind == ScorerKind::External) return external_scorer(s.scorer.path);
    // Activations are synthetic; their size only affects runtime, not the ranking trend.
    const int t = std::min(s.model.t, 64);
    const int d = std::min(s.model.d, 64);
    return cka_proxy_scorer(synthetic_attention_outputs(s.model.n_encoders, t, d, s.seed));
}

}  // namespace

std::vector<ReportRow> run_scenario(const Scenario& s) {
    s.validate();
    const auto& cfg = s.model;
    const auto baseline_workload = build_model(cfg, ReusePattern::none());
    const ModelCost baseline = model_cost(baseline_workload, s.hardware, 0);

    std::vector<ReportRow> rows;
    ReportRow base = make_row(s.id, cfg.name, s.device_label, baseline, baseline);
    base.pattern = "baseline";
    rows.push_back(base);

    std::optional<PatternScorer> scorer;
    for (double target : s.target_delays_ms) {
        const auto search = find_optimal_n_reuse(cfg, s.hardware, target);
        ReusePattern chosen;
        if (search.n_reuse > 0) {
            if (!scorer) scorer = make_scorer(s);
            const auto candidates = enumerate_patterns(cfg.n_encoders, search.n_reuse,
                                                       s.patterns.families);
            chosen = candidates.empty()
                         ? *gen_continuous(cfg.n_encoders, search.n_reuse, 1)
                         : select_best(score_patterns(candidates, *scorer));
        }
        const auto cost = model_cost(build_model(cfg, chosen), s.hardware, search.n_reuse);
        ReportRow row = make_row(s.id + "@" + target_label(target), cfg.name, s.device_label, cost,
                                 baseline);
        row.target_delay_ms = target;
        row.feasible = search.feasible;
        row.pattern = search.feasible ? chosen.label() : "infeasible";
        rows.push_back(row);
    }
    if (s.patterns.explicit_pattern) {
        const auto& p = *s.patterns.explicit_pattern;
        const auto cost = model_cost(build_model(cfg, p), s.hardware, p.n_reuse());
        ReportRow row = make_row(s.id + "@explicit", cfg.name, s.device_label, cost, baseline);
        row.pattern = p.label();
        rows.push_back(row);
    }
    return rows;
}

std::vector<ReportRow> run_comparison(const Scenario& s, const std::vector<int>& weight_sharing,
                                      const std::vector<double>& pruning_ratios) {
    auto rows = run_scenario(s);
    const ReportRow base_row = rows.front();
    std::vector<ReportRow> reuse_rows(rows.begin() + 1, rows.end());
    rows.resize(1);

    const auto& cfg = s.model;
    const auto workload = build_model(cfg, ReusePattern::none());
    const ModelCost baseline = model_cost(workload, s.hardware, 0);
    for (int ws : weight_sharing) {
        ReportRow row = make_row(s.id + "@ws" + std::to_string(ws), cfg.name, s.device_label,
                                 apply_weight_sharing(workload, s.hardware, ws), baseline);
        row.pattern = "weight-sharing-ws" + std::to_string(ws);
        rows.push_back(row);
    }
    for (double p : pruning_ratios) {
        TokenPruning tp;
        tp.ratio = p;
        tp.predictor_overhead = predictor_overhead(cfg, s.hardware, 3, 1.0 - p);
        ReportRow row = make_row(s.id + "@prune" + fmt(p, 2), cfg.name, s.device_label,
                                 apply_token_pruning(workload, s.hardware, tp), baseline);
        row.pattern = "token-pruning-p" + fmt(p, 2);
        rows.push_back(row);
    }
    rows.insert(rows.end(), reuse_rows.begin(), reuse_rows.end());
    return rows;
}

json report_header(const Scenario& s) {
    const auto& o = s.hardware.options;
    const auto& sp = s.hardware.softmax;
    const auto& t = s.hardware.tiles;
    json h;
    h["scenario"] = s.id;
    h["model"] = {{"name", s.model.name},         {"d", s.model.d},
                  {"t", s.model.t},               {"mlp_ratio", s.model.mlp_ratio},
                  {"n_encoders", s.model.n_encoders}, {"n_heads", s.model.n_heads},
                  {"weight_bits", s.model.weight_bits}, {"input_bits", s.model.input_bits},
                  {"input_split_bits", s.model.input_split_bits},
                  {"include_stem", s.model.include_stem}};
    h["device"] = s.device_label;
    h["tiles"] = {{"xbar_size", t.xbar_size}, {"n_x_pe", t.n_x_pe}, {"n_pe_tile", t.n_pe_tile},
                  {"adc_bits", t.adc_bits}};
    h["cost_options"] = {{"scale_reads_by_input_cycles", o.scale_reads_by_input_cycles},
                         {"read_delay_uses_n_x_pe", o.read_delay_uses_n_x_pe},
                         {"tile_padding", o.tile_padding},
                         {"include_tb_cost", o.include_tb_cost},
                         {"differential_columns", s.hardware.mapping.differential_columns}};
    h["softmax_unit_pj_ns"] = {{"e_select", sp.e_select_pj}, {"e_exponent", sp.e_exponent_pj},
                               {"e_div", sp.e_div_pj},       {"d_select", sp.d_select_ns},
                               {"d_exponent", sp.d_exponent_ns}, {"d_div", sp.d_div_ns}};
    h["scorer"] = s.scorer.kind == ScorerKind::Cka ? "cka(synthetic activations)"
                                                   : "external:" + s.scorer.path;
    h["seed"] = s.seed;
    h["conventions"] = {
        {"ops", "one multiply-accumulate counts as one operation"},
        {"pipeline", "encoders and their stages execute sequentially; totals are plain sums"},
        {"energy", "absolute energy and TOPS/W depend on which read/write terms the reference "
                   "energy contains, which is not recoverable; treat as approximate"},
        {"write_cost", "K^T and V writes charged once per attention execution"}};
    h["accuracy"] = "accuracy columns omitted: not computable without trained models";
    return h;
}

std::string to_csv(const std::vector<ReportRow>& rows) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : rows) {
        out += r.scenario + "," + r.model + "," + r.device + "," + std::to_string(r.n_reuse) + "," +
               r.pattern + "," + fmt(r.energy_mj, 4) + "," + fmt(r.delay_ms, 2) + "," +
               fmt(r.area_mm2, 2) + "," + fmt(r.edap, 2) + "," + fmt(r.tops_per_w, 2) + "," +
               fmt(r.tops_per_mm2, 6) + "," + fmt(r.edap_reduction, 2) + "\n";
    }
    return out;
}

std::string breakdown_csv(const std::vector<ReportRow>& rows) {
    std::string out = "scenario,pattern,block,energy_share,delay_share,area_share,edap_share\n";
    for (const auto& r : rows) {
        for (const auto& [block, sh] : r.breakdown) {
            out += r.scenario + "," + r.pattern + "," + to_string(block) + "," + fmt(sh.energy, 4) +
                   "," + fmt(sh.delay, 4) + "," + fmt(sh.area, 4) + "," + fmt(sh.edap, 4) + "\n";
        }
    }
    return out;
}

namespace {

Block block_from_string(const std::string& name) {
    for (Block b : {Block::Attention, Block::Transform, Block::Projection, Block::Mlp, Block::Stem,
                    Block::Predictor})
        if (to_string(b) == name) return b;
    throw Error("unknown block '" + name + "'");
}

}  // namespace

json to_json(const std::vector<ReportRow>& rows, const json& header) {
    json doc;
    doc["header"] = header;
    doc["rows"] = json::array();
    for (const auto& r : rows) {
        json j;
        j["scenario"] = r.scenario;
        j["model"] = r.model;
        j["device"] = r.device;
        j["target_delay_ms"] = r.target_delay_ms ? json(*r.target_delay_ms) : json(nullptr);
        j["feasible"] = r.feasible;
        j["n_reuse"] = r.n_reuse;
        j["pattern"] = r.pattern;
        j["energy_mJ"] = r.energy_mj;
        j["delay_ms"] = r.delay_ms;
        j["area_mm2"] = r.area_mm2;
        j["edap"] = r.edap;
        j["tops_per_w"] = r.tops_per_w;
        j["tops_per_mm2"] = r.tops_per_mm2;
        j["reduction"] = {{"energy", r.energy_reduction}, {"delay", r.delay_reduction},
                          {"area", r.area_reduction},     {"edap", r.edap_reduction},
                          {"tops_per_w_gain", r.tops_per_w_gain},
                          {"tops_per_mm2_gain", r.tops_per_mm2_gain}};
        json bd = json::object();
        for (const auto& [block, sh] : r.breakdown)
            bd[to_string(block)] = {{"energy", sh.energy}, {"delay", sh.delay}, {"area", sh.area},
                                    {"edap", sh.edap}};
        j["breakdown"] = bd;
        doc["rows"].push_back(j);
    }
    return doc;
}

std::vector<ReportRow> rows_from_json(const json& doc) {
    std::vector<ReportRow> rows;
    try {
        for (const auto& j : doc.at("rows")) {
            ReportRow r;
            r.scenario = j.at("scenario").get<std::string>();
            r.model = j.at("model").get<std::string>();
            r.device = j.at("device").get<std::string>();
            if (!j.at("target_delay_ms").is_null()) r.target_delay_ms = j["target_delay_ms"].get<double>();
            r.feasible = j.at("feasible").get<bool>();
            r.n_reuse = j.at("n_reuse").get<int>();
            r.pattern = j.at("pattern").get<std::string>();
            r.energy_mj = j.at("energy_mJ").get<double>();
            r.delay_ms = j.at("delay_ms").get<double>();
            r.area_mm2 = j.at("area_mm2").get<double>();
            r.edap = j.at("edap").get<double>();
            r.tops_per_w = j.at("tops_per_w").get<double>();
            r.tops_per_mm2 = j.at("tops_per_mm2").get<double>();
            const auto& red = j.at("reduction");
            r.energy_reduction = red.at("energy").get<double>();
            r.delay_reduction = red.at("delay").get<double>();
            r.area_reduction = red.at("area").get<double>();
            r.edap_reduction = red.at("edap").get<double>();
            r.tops_per_w_gain = red.at("tops_per_w_gain").get<double>();
            r.tops_per_mm2_gain = red.at("tops_per_mm2_gain").get<double>();
            for (const auto& [name, sh] : j.at("breakdown").items()) {
                r.breakdown[block_from_string(name)] = {sh.at("energy").get<double>(),
                                                        sh.at("delay").get<double>(),
                                                        sh.at("area").get<double>(),
                                                        sh.at("edap").get<double>()};
            }
            rows.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("malformed report JSON: ") + e.what());
    }
    return rows;
}

ReportFormat parse_format(const std::string& text) {
    if (text == "csv") return ReportFormat::Csv;
    if (text == "json") return ReportFormat::Json;
    if (text == "both") return ReportFormat::Both;
    throw Error("unknown format '" + text + "' (expected csv, json or both)");
}

std::vector<std::string> write_report(const std::vector<ReportRow>& rows, const json& header,
                                      const std::string& dir, const std::string& stem,
                                      ReportFormat format) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, "cannot create output directory '" + dir + "': " + ec.message());

    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& body) {
        const auto path = (fs::path(dir) / name).string();
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        require(os.good(), "cannot write '" + path + "'");
        os << body;
        os.close();
        require(!os.fail(), "failed writing '" + path + "'");
        written.push_back(path);
    };
    if (format != ReportFormat::Json) {
        emit(stem + ".csv", to_csv(rows));
        emit(stem + ".breakdown.csv", breakdown_csv(rows));
    }
    if (format != ReportFormat::Csv) emit(stem + ".json", to_json(rows, header).dump(2) + "\n");
    return written;
}

std::string resolve_output_dir(const std::string& cli_value) {
    if (!cli_value.empty()) return cli_value;
    if (const char* env = std::getenv("IMCVIT_OUT_DIR"); env && *env) return env;
    return ".";
}

}  // namespace imcvit
