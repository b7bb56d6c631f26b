// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imcvit/cost_model.hpp"
#include "imcvit/reuse_opt.hpp"

namespace imcvit {

enum class ScorerKind { Cka, External };

struct ScorerSpec {
    ScorerKind kind = ScorerKind::Cka;
    std::string path;  ///< External only
};

ScorerSpec parse_scorer(const std::string& text);

struct PatternSelection {
    std::vector<PatternKind> families{PatternKind::Strided, PatternKind::Continuous,
                                      PatternKind::Pyramid};
    std::optional<ReusePattern> explicit_pattern;
};

/// "strided", "continuous", "pyramid", "all" (comma separated) or "explicit:1;3;5".
PatternSelection parse_patterns(const std::string& text);

struct Scenario {
    std::string id = "scenario";
    ModelConfig model;
    std::string device_label;
    HardwareConfig hardware;
    std::vector<double> target_delays_ms;
    PatternSelection patterns;
    ScorerSpec scorer;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ReportRow {
    std::string scenario;
    std::string model;
    std::string device;
    std::optional<double> target_delay_ms;
    bool feasible = true;
    int n_reuse = 0;
    std::string pattern;
    double energy_mj = 0.0;
    double delay_ms = 0.0;
    double area_mm2 = 0.0;
    double edap = 0.0;
    double tops_per_w = 0.0;
    double tops_per_mm2 = 0.0;
    // baseline / row for E, D, A, EDAP; row / baseline for the TOPS metrics
    double energy_reduction = 1.0;
    double delay_reduction = 1.0;
    double area_reduction = 1.0;
    double edap_reduction = 1.0;
    double tops_per_w_gain = 1.0;
    double tops_per_mm2_gain = 1.0;
    std::map<Block, BlockShare> breakdown;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

ReportRow make_row(const std::string& scenario, const std::string& model,
                   const std::string& device, const ModelCost& cost, const ModelCost& baseline);

/// Baseline row, then one row per target delay in the given order, then an
/// extra row for an explicit pattern if one was requested.
std::vector<ReportRow> run_scenario(const Scenario& s);

/// Baseline, weight sharing for each `ws`, token pruning for each ratio and
/// attention reuse for each target delay of the scenario.
std::vector<ReportRow> run_comparison(const Scenario& s, const std::vector<int>& weight_sharing,
                                      const std::vector<double>& pruning_ratios);

/// Conventions the numbers were produced under, plus the accuracy footnote.
nlohmann::json report_header(const Scenario& s);

inline constexpr const char* kCsvHeader =
    "scenario,model,device,n_reuse,pattern,energy_mJ,delay_ms,area_mm2,edap,tops_per_w,"
    "tops_per_mm2,edap_reduction";

std::string to_csv(const std::vector<ReportRow>& rows);
std::string breakdown_csv(const std::vector<ReportRow>& rows);
nlohmann::json to_json(const std::vector<ReportRow>& rows, const nlohmann::json& header);
std::vector<ReportRow> rows_from_json(const nlohmann::json& doc);

enum class ReportFormat { Csv, Json, Both };
ReportFormat parse_format(const std::string& text);

/// Writes <dir>/<stem>.csv, <dir>/<stem>.breakdown.csv and/or <dir>/<stem>.json.
/// Returns the paths written.
std::vector<std::string> write_report(const std::vector<ReportRow>& rows,
                                      const nlohmann::json& header, const std::string& dir,
                                      const std::string& stem, ReportFormat format);

/// `cli_value` if given, else $IMCVIT_OUT_DIR, else ".".
std::string resolve_output_dir(const std::string& cli_value);

}  // namespace imcvit
