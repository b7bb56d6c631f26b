#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "imcvit/config.hpp"
#include "imcvit/cost_model.hpp"
#include "imcvit/error.hpp"
#include "imcvit/func_sim.hpp"
#include "imcvit/report.hpp"
#include "imcvit/reuse_opt.hpp"

namespace py = pybind11;
using namespace imcvit;

namespace {

HardwareConfig hardware(const std::string& device, const std::string& config) {
    auto hw = calibrated_hardware(resolve_devices(device));
    if (!config.empty()) apply_overrides(load_config(config), hw);
    return hw;
}

py::dict cost_dict(const ModelCost& c) {
    py::dict d;
    d["energy_mj"] = c.energy_mj;
    d["delay_ms"] = c.delay_ms;
    d["area_mm2"] = c.area_mm2;
    d["edap"] = c.edap;
    d["tops_per_w"] = c.tops_per_w;
    d["tops_per_mm2"] = c.tops_per_mm2;
    d["macs"] = c.macs;
    d["n_reuse"] = c.n_reuse;
    py::dict shares;
    for (const auto& [b, s] : breakdown(c))
        shares[py::str(to_string(b))] =
            py::dict(py::arg("energy") = s.energy, py::arg("delay") = s.delay,
                     py::arg("area") = s.area, py::arg("edap") = s.edap);
    d["breakdown"] = shares;
    return d;
}

py::dict row_dict(const ReportRow& r) {
    py::dict d;
    d["scenario"] = r.scenario;
    d["model"] = r.model;
    d["device"] = r.device;
    d["target_delay_ms"] = r.target_delay_ms ? py::object(py::float_(*r.target_delay_ms)) : py::none();
    d["feasible"] = r.feasible;
    d["n_reuse"] = r.n_reuse;
    d["pattern"] = r.pattern;
    d["energy_mj"] = r.energy_mj;
    d["delay_ms"] = r.delay_ms;
    d["area_mm2"] = r.area_mm2;
    d["edap"] = r.edap;
    d["tops_per_w"] = r.tops_per_w;
    d["tops_per_mm2"] = r.tops_per_mm2;
    d["edap_reduction"] = r.edap_reduction;
    return d;
}

Scenario scenario(const std::string& model, const std::string& device,
                  const std::vector<double>& targets, const std::string& patterns,
                  const std::string& scorer, std::uint64_t seed, const std::string& config) {
    Scenario s;
    s.model = resolve_model(model);
    s.id = s.model.name;
    s.device_label = device;
    s.hardware = hardware(device, config);
    s.target_delays_ms = targets;
    s.patterns = parse_patterns(patterns);
    s.scorer = parse_scorer(scorer);
    s.seed = seed;
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Crossbar cost model and attention-reuse explorer";
    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    m.def("preset_models", &preset_model_names);
    m.def(
        "model_config",
        [](const std::string& spec) {
            const auto c = resolve_model(spec);
            return py::dict(py::arg("name") = c.name, py::arg("d") = c.d, py::arg("t") = c.t,
                            py::arg("mlp_ratio") = c.mlp_ratio, py::arg("n_encoders") = c.n_encoders,
                            py::arg("n_heads") = c.n_heads, py::arg("include_stem") = c.include_stem);
        },
        py::arg("model"));

    m.def("crossbar_count", &crossbar_count, py::arg("in_dim"), py::arg("out_dim"),
          py::arg("xbar_size") = 64);

    m.def(
        "model_cost",
        [](const std::string& model, const std::string& device, int n_reuse, const std::string& config) {
            return cost_dict(model_cost_for_reuse(resolve_model(model), hardware(device, config), n_reuse));
        },
        py::arg("model") = "deit_s", py::arg("device") = "fefet", py::arg("n_reuse") = 0,
        py::arg("config") = "");

    m.def(
        "find_optimal_n_reuse",
        [](const std::string& model, double target_ms, const std::string& device,
           const std::string& config) {
            const auto r = find_optimal_n_reuse(resolve_model(model), hardware(device, config), target_ms);
            return py::dict(py::arg("feasible") = r.feasible, py::arg("n_reuse") = r.n_reuse,
                            py::arg("achieved_delay_ms") = r.achieved_delay_ms,
                            py::arg("baseline_delay_ms") = r.baseline_delay_ms);
        },
        py::arg("model"), py::arg("target_delay_ms"), py::arg("device") = "fefet",
        py::arg("config") = "");

    m.def(
        "enumerate_patterns",
        [](int n_encoders, int n_reuse) {
            std::vector<std::pair<std::string, std::vector<int>>> out;
            for (const auto& p : enumerate_patterns(n_encoders, n_reuse))
                out.emplace_back(p.label(), p.reuse_set);
            return out;
        },
        py::arg("n_encoders"), py::arg("n_reuse"));

    m.def(
        "run_scenario",
        [](const std::string& model, const std::string& device, const std::vector<double>& targets,
           const std::string& patterns, const std::string& scorer, std::uint64_t seed,
           const std::string& config) {
            py::list rows;
            for (const auto& r : run_scenario(scenario(model, device, targets, patterns, scorer, seed, config)))
                rows.append(row_dict(r));
            return rows;
        },
        py::arg("model") = "deit_s", py::arg("device") = "fefet",
        py::arg("target_delays_ms") = std::vector<double>{}, py::arg("patterns") = "all",
        py::arg("scorer") = "cka", py::arg("seed") = 0, py::arg("config") = "");

    m.def(
        "scenario_csv",
        [](const std::string& model, const std::string& device, const std::vector<double>& targets,
           std::uint64_t seed) {
            return to_csv(run_scenario(scenario(model, device, targets, "all", "cka", seed, "")));
        },
        py::arg("model") = "deit_s", py::arg("device") = "fefet",
        py::arg("target_delays_ms") = std::vector<double>{}, py::arg("seed") = 0);

    m.def(
        "cka", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return cka_score(a, b); },
        py::arg("a"), py::arg("b"));
    m.def("stable_softmax", &stable_softmax, py::arg("x"));

    m.def(
        "toy_forward",
        [](std::vector<int> reuse_set, bool crossbar, bool noise, int adc_bits, std::uint64_t seed) {
            const auto cfg = toy_model_config();
            SimOptions o;
            if (crossbar) {
                o.mode = SimMode::Crossbar;
                o.noise = noise ? NoiseModel{} : NoiseModel::off(adc_bits);
                o.noise.adc_bits = adc_bits;
                o.noise.rng_seed = seed;
            }
            const auto w = build_model(cfg, ReusePattern::explicit_set(std::move(reuse_set)));
            auto r = model_forward(w, toy_model_weights(cfg, seed), toy_input(cfg, seed), o);
            return py::dict(py::arg("output") = r.output,
                            py::arg("attention_outputs") = r.attention_outputs,
                            py::arg("attention_evaluations") = r.stats.attention_evaluations);
        },
        py::arg("reuse_set") = std::vector<int>{}, py::arg("crossbar") = false,
        py::arg("noise") = false, py::arg("adc_bits") = 16, py::arg("seed") = 0);
}
