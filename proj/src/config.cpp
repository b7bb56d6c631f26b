// SPDX-License-Identifier: Apache-2.0
#include "imcvit/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "imcvit/error.hpp"

namespace imcvit {

namespace pt = boost::property_tree;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Typed view of one INI section that rejects unknown keys.
class Section {
public:
    Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

    template <typename T>
    void read(const std::string& key, T& out) {
        seen_.insert(key);
        auto v = tree_.get_optional<std::string>(key);
        if (!v) return;
        out = convert<T>(key, *v);
    }

    template <typename T>
    void read(const std::string& key, std::optional<T>& out) {
        seen_.insert(key);
        auto v = tree_.get_optional<std::string>(key);
        if (v) out = convert<T>(key, *v);
    }

    std::optional<std::string> text(const std::string& key) {
        seen_.insert(key);
        if (auto v = tree_.get_optional<std::string>(key)) return *v;
        return std::nullopt;
    }

    void finish() const {
        for (const auto& kv : tree_)
            require(seen_.count(kv.first) > 0, "unknown key '" + kv.first + "' in [" + name_ + "]");
    }

private:
    template <typename T>
    T convert(const std::string& key, const std::string& raw) const {
        const std::string where = "[" + name_ + "] " + key + " = '" + raw + "'";
        if constexpr (std::is_same_v<T, bool>) {
            const auto v = lower(raw);
            if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
            if (v == "false" || v == "0" || v == "no" || v == "off") return false;
            throw Error(where + ": expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            return raw;
        } else {
            std::istringstream is(raw);
            T value{};
            is >> value;
            require(!is.fail() && (is >> std::ws).eof(), where + ": expected a number");
            return value;
        }
    }

    std::string name_;
    const pt::ptree& tree_;
    std::set<std::string> seen_;
};

ModelConfig read_model(Section& s) {
    ModelConfig m;
    if (auto base = s.text("preset")) m = preset_model(*base);
    s.read("name", m.name);
    s.read("d", m.d);
    s.read("t", m.t);
    s.read("mlp_ratio", m.mlp_ratio);
    s.read("n_encoders", m.n_encoders);
    s.read("n_heads", m.n_heads);
    s.read("weight_bits", m.weight_bits);
    s.read("input_bits", m.input_bits);
    s.read("input_split_bits", m.input_split_bits);
    s.read("include_stem", m.include_stem);
    s.read("patch_dim", m.patch_dim);
    s.read("n_classes", m.n_classes);
    s.read("cls_tokens", m.cls_tokens);
    m.validate();
    return m;
}

DeviceParams read_device(Section& s) {
    DeviceParams d;
    if (auto base = s.text("preset")) d = preset_device(*base);
    if (auto kind = s.text("kind")) d.kind = device_kind_from_string(*kind);
    s.read("bits_per_cell", d.bits_per_cell);
    s.read("e_read_pj", d.e_read_pj);
    s.read("e_write_pj", d.e_write_pj);
    s.read("d_read_us", d.d_read_us);
    s.read("d_write_us", d.d_write_us);
    s.read("area_mm2", d.area_mm2);
    s.read("read_var", d.read_var);
    s.read("write_var", d.write_var);
    s.read("r_on_ohm", d.r_on_ohm);
    s.read("r_off_ohm", d.r_off_ohm);
    d.validate();
    return d;
}

}  // namespace

ConfigFile parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(std::string("config parse error: ") + e.what());
    }

    ConfigFile cfg;
    for (const auto& [name, body] : tree) {
        require(!body.empty() || body.data().empty(), "config key '" + name + "' outside a section");
        Section s(name, body);
        if (name == "model") {
            cfg.model = read_model(s);
        } else if (name == "device") {
            cfg.device = read_device(s);
        } else if (name == "matmul_device") {
            cfg.matmul_device = read_device(s);
        } else if (name == "tiles") {
            TileConfig t;
            s.read("xbar_size", t.xbar_size);
            s.read("n_x_pe", t.n_x_pe);
            s.read("n_pe_tile", t.n_pe_tile);
            s.read("adc_bits", t.adc_bits);
            t.validate();
            cfg.tiles = t;
            MappingOptions m;
            s.read("differential_columns", m.differential_columns);
            cfg.mapping = m;
        } else if (name == "softmax_unit") {
            SoftmaxUnitParams p;
            s.read("e_select_pj", p.e_select_pj);
            s.read("e_exponent_pj", p.e_exponent_pj);
            s.read("e_div_pj", p.e_div_pj);
            s.read("d_select_ns", p.d_select_ns);
            s.read("d_exponent_ns", p.d_exponent_ns);
            s.read("d_div_ns", p.d_div_ns);
            p.validate();
            cfg.softmax = p;
        } else if (name == "noise") {
            NoiseModel n;
            s.read("enabled", n.enabled);
            s.read("read_var", n.read_var);
            s.read("write_var", n.write_var);
            s.read("adc_bits", n.adc_bits);
            s.read("seed", n.rng_seed);
            if (auto form = s.text("form")) {
                const auto f = lower(*form);
                require(f == "multiplicative" || f == "additive",
                        "[noise] form must be multiplicative or additive");
                n.form = f == "additive" ? NoiseForm::Additive : NoiseForm::Multiplicative;
            }
            cfg.noise = n;
        } else if (name == "cost") {
            CostOptions c;
            s.read("scale_reads_by_input_cycles", c.scale_reads_by_input_cycles);
            s.read("read_delay_uses_n_x_pe", c.read_delay_uses_n_x_pe);
            s.read("tile_padding", c.tile_padding);
            s.read("include_tb_cost", c.include_tb_cost);
            cfg.cost = c;
        } else {
            throw Error("unknown config section [" + name + "]");
        }
        s.finish();
    }
    return cfg;
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::vector<std::string> preset_model_names() { return {"deit_s", "lvvit_s", "bert_base"}; }

ModelConfig preset_model(const std::string& name) {
    const auto key = lower(name);
    ModelConfig m;
    m.include_stem = false;  // calibrated convention, see configs/
    if (key == "deit_s") {
        m.name = "DeiT-S";
    } else if (key == "lvvit_s") {
        m.name = "LV-ViT-S";
        m.mlp_ratio = 3.0;
        m.n_encoders = 16;
    } else if (key == "bert_base") {
        m.name = "BERT-Base";
        m.d = 768;
        m.t = 128;
        m.n_heads = 12;
    } else {
        throw Error("unknown model preset '" + name + "'");
    }
    return m;
}

DeviceParams preset_device(const std::string& name) {
    const auto key = lower(name);
    if (key == "fefet") return DeviceParams::fefet();
    if (key == "sram") return DeviceParams::sram();
    throw Error("unknown device preset '" + name + "'");
}

CostOptions calibrated_cost_options() {
    CostOptions c;
    c.scale_reads_by_input_cycles = false;
    c.read_delay_uses_n_x_pe = true;
    c.tile_padding = true;
    c.include_tb_cost = false;
    return c;
}

SoftmaxUnitParams calibrated_softmax() { return SoftmaxUnitParams{}; }

HardwareConfig calibrated_hardware(const DeviceAssignment& devices) {
    HardwareConfig hw;
    hw.devices = devices;
    hw.softmax = calibrated_softmax();
    hw.options = calibrated_cost_options();
    return hw;
}

DeviceAssignment resolve_devices(const std::string& spec) {
    const auto key = lower(spec);
    if (key == "fefet" || key == "sram") return DeviceAssignment::uniform(preset_device(key));
    if (key == "hybrid") return DeviceAssignment::hybrid(DeviceParams::fefet(), DeviceParams::sram());
    const auto file = load_config(spec);
    require(file.device.has_value(), spec + ": device config needs a [device] section");
    if (file.matmul_device) return DeviceAssignment::hybrid(*file.device, *file.matmul_device);
    return DeviceAssignment::uniform(*file.device);
}

ModelConfig resolve_model(const std::string& spec) {
    const auto names = preset_model_names();
    if (std::find(names.begin(), names.end(), lower(spec)) != names.end()) return preset_model(spec);
    const auto file = load_config(spec);
    require(file.model.has_value(), spec + ": model config needs a [model] section");
    return *file.model;
}

void apply_overrides(const ConfigFile& file, HardwareConfig& hw) {
    if (file.device && file.matmul_device)
        hw.devices = DeviceAssignment::hybrid(*file.device, *file.matmul_device);
    else if (file.device)
        hw.devices = DeviceAssignment::uniform(*file.device);
    else if (file.matmul_device)
        hw.devices = DeviceAssignment::hybrid(hw.devices.for_layer(LayerKind::FcQ), *file.matmul_device);
    if (file.tiles) hw.tiles = *file.tiles;
    if (file.mapping) hw.mapping = *file.mapping;
    if (file.softmax) hw.softmax = *file.softmax;
    if (file.cost) hw.options = *file.cost;
}

}  // namespace imcvit
