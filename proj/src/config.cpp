#include "chainflow/config.hpp"

#include "chainflow/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace chainflow {

using json = nlohmann::ordered_json;

VdwEos EosParams::make() const {
    validate();
    return VdwEos(a, b, R, T_ref);
}

void EosParams::validate() const {
    auto bad = [](double x) { return !(x > 0.0) || !std::isfinite(x); };
    if (bad(a) || bad(b) || bad(R) || bad(T_ref))
        throw ConfigError("eos: a, b, R, T_ref must all be positive and finite");
}

namespace {

// Consume obj[key] into dst with a type check, then erase the key. After a
// section has been consumed, leftover keys are reported as unknown.
void take(json& obj, const std::string& sec, const char* key, double& dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number())
        throw ConfigError(sec + "." + key + ": expected a number");
    dst = it->get<double>();
    obj.erase(it);
}

void take(json& obj, const std::string& sec, const char* key, std::size_t& dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_unsigned())
        throw ConfigError(sec + "." + key + ": expected a non-negative integer");
    dst = it->get<std::size_t>();
    obj.erase(it);
}

void take(json& obj, const std::string& sec, const char* key, int& dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_integer())
        throw ConfigError(sec + "." + key + ": expected an integer");
    dst = it->get<int>();
    obj.erase(it);
}

void take(json& obj, const std::string& sec, const char* key, bool& dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_boolean())
        throw ConfigError(sec + "." + key + ": expected true or false");
    dst = it->get<bool>();
    obj.erase(it);
}

void take(json& obj, const std::string& sec, const char* key, std::string& dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_string())
        throw ConfigError(sec + "." + key + ": expected a string");
    dst = it->get<std::string>();
    obj.erase(it);
}

// (rho, v) pair, e.g. "inflow_left": [1.8, 0.0].
bool take_state(json& obj, const std::string& sec, const char* key, double& rho, double& v) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
        throw ConfigError(sec + "." + key + ": expected [density, velocity]");
    rho = (*it)[0].get<double>();
    v = (*it)[1].get<double>();
    obj.erase(it);
    return true;
}

void reject_leftovers(const json& obj, const std::string& sec) {
    if (obj.empty()) return;
    std::string names;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!names.empty()) names += ", ";
        names += it.key();
    }
    throw ConfigError(sec + ": unknown key(s): " + names);
}

// Pull a section object out of the root; absent sections mean all defaults.
json take_section(json& root, const char* name) {
    auto it = root.find(name);
    if (it == root.end()) return json::object();
    if (!it->is_object())
        throw ConfigError(std::string(name) + ": expected an object");
    json sec = *it;
    root.erase(it);
    return sec;
}

void parse_eos(json sec, EosParams& e) {
    take(sec, "eos", "a", e.a);
    take(sec, "eos", "b", e.b);
    take(sec, "eos", "R", e.R);
    take(sec, "eos", "T_ref", e.T_ref);
    reject_leftovers(sec, "eos");
    e.validate();
}

void parse_micro(json sec, MicroConfig& m, RiemannInput& input) {
    take(sec, "micro", "n", m.n);
    take(sec, "micro", "m", m.m);
    take(sec, "micro", "dt", m.dt);
    take(sec, "micro", "dt_cap", m.dt_cap);
    take(sec, "micro", "t_end", m.t_end);
    take(sec, "micro", "t_end_safety", m.t_end_safety);
    take(sec, "micro", "snapshots", m.snapshots);
    take(sec, "micro", "bin_spacings", m.bin_spacings);
    take(sec, "micro", "field_bin_spacings", m.field_bin_spacings);
    take(sec, "micro", "window_spacings", m.window_spacings);
    take(sec, "micro", "offset_spacings", m.offset_spacings);
    take(sec, "micro", "refine_halfwidth_spacings", m.refine_halfwidth_spacings);
    take(sec, "micro", "refine_anchor_spacings", m.refine_anchor_spacings);
    take(sec, "micro", "fit_fraction", m.fit_fraction);
    take(sec, "micro", "search_lo_frac", m.search_lo_frac);
    take(sec, "micro", "search_hi_frac", m.search_hi_frac);
    take(sec, "micro", "noise_mult", m.noise_mult);
    take(sec, "micro", "rh_sanity", m.rh_sanity);

    double rho_l = 1.9, v_l = 0.0, rho_r = 0.3, v_r = 0.0;
    take(sec, "micro", "rho_left", rho_l);
    take(sec, "micro", "v_left", v_l);
    take(sec, "micro", "rho_right", rho_r);
    take(sec, "micro", "v_right", v_r);
    reject_leftovers(sec, "micro");
    m.validate();
    if (!(rho_l > 0.0) || !(rho_r > 0.0))
        throw ConfigError("micro: rho_left and rho_right must be positive");
    input.u_L = {rho_l, rho_l * v_l};
    input.u_R = {rho_r, rho_r * v_r};
}

void parse_gate(json sec, const VdwEos& eos, GateConfig& g) {
    take(sec, "gate", "epsilon_model", g.epsilon_model);
    take(sec, "gate", "gamma_k", g.gamma_k);
    take(sec, "gate", "lambda_reg", g.lambda_reg);
    auto it = sec.find("input_scaling");
    if (it == sec.end()) {
        g.input_scaling = default_input_scaling(eos);
    } else if (it->is_string() && it->get<std::string>() == "auto") {
        g.input_scaling = default_input_scaling(eos);
        sec.erase(it);
    } else if (it->is_array() && it->size() == 4) {
        for (std::size_t k = 0; k < 4; ++k) {
            if (!(*it)[k].is_number())
                throw ConfigError("gate.input_scaling: expected four numbers or \"auto\"");
            g.input_scaling[k] = (*it)[k].get<double>();
        }
        sec.erase(it);
    } else {
        throw ConfigError("gate.input_scaling: expected four numbers or \"auto\"");
    }
    reject_leftovers(sec, "gate");
    g.validate();
}

void parse_macro(json sec, const VdwEos& eos, MacroConfig& m, MacroScenario& sc) {
    take(sec, "macro", "x_lo", m.x_lo);
    take(sec, "macro", "x_hi", m.x_hi);
    take(sec, "macro", "n_cells", m.n_cells);
    take(sec, "macro", "cfl", m.cfl);
    take(sec, "macro", "t_end", m.t_end);
    take(sec, "macro", "output_stride", m.output_stride);
    take(sec, "macro", "merge_frac", m.merge_frac);
    take(sec, "macro", "split_frac", m.split_frac);
    take(sec, "macro", "max_halvings", m.max_halvings);

    std::string bc = "reflecting";
    take(sec, "macro", "bc", bc);
    if (bc == "reflecting")
        m.bc = BoundaryKind::Reflecting;
    else if (bc == "inflow")
        m.bc = BoundaryKind::ConstantInflow;
    else
        throw ConfigError("macro.bc: expected \"reflecting\" or \"inflow\"");

    take(sec, "macro", "interface_pos", sc.interface_pos);
    bool have_l = take_state(sec, "macro", "left_state", sc.rho_left, sc.v_left);
    bool have_r = take_state(sec, "macro", "right_state", sc.rho_right, sc.v_right);
    if (!have_l) {
        sc.rho_left = 1.0 / eos.maxwell().tau_l;
        sc.v_left = 0.0;
    }
    if (!have_r) {
        sc.rho_right = 1.0 / eos.maxwell().tau_v;
        sc.v_right = 0.0;
    }

    double ir = 0.0, iv = 0.0;
    if (take_state(sec, "macro", "inflow_left", ir, iv))
        m.inflow_left = {ir, ir * iv};
    else
        m.inflow_left = {sc.rho_left, sc.rho_left * sc.v_left};
    if (take_state(sec, "macro", "inflow_right", ir, iv))
        m.inflow_right = {ir, ir * iv};
    else
        m.inflow_right = {sc.rho_right, sc.rho_right * sc.v_right};

    reject_leftovers(sec, "macro");
    if (!(sc.rho_left > 0.0) || !(sc.rho_right > 0.0))
        throw ConfigError("macro: initial densities must be positive");
    if (!(m.inflow_left.rho > 0.0) || !(m.inflow_right.rho > 0.0))
        throw ConfigError("macro: inflow densities must be positive");
    m.validate(eos);
}

void parse_io(json sec, IoConfig& io) {
    take(sec, "io", "out_dir", io.out_dir);
    take(sec, "io", "store", io.store);
    take(sec, "io", "dump_fields", io.dump_fields);
    take(sec, "io", "deterministic", io.deterministic);
    reject_leftovers(sec, "io");
    if (!io.deterministic)
        throw ConfigError("io.deterministic: there is no nondeterministic mode; "
                          "every run is reproducible by construction");
}

void parse_inputs(json& root, std::vector<std::array<double, 4>>& rows) {
    auto it = root.find("inputs");
    if (it == root.end()) return;
    if (!it->is_array())
        throw ConfigError("inputs: expected an array of [rho_left, v_left, rho_right, v_right]");
    for (std::size_t i = 0; i < it->size(); ++i) {
        const json& row = (*it)[i];
        if (!row.is_array() || row.size() != 4)
            throw ConfigError("inputs[" + std::to_string(i) +
                              "]: expected [rho_left, v_left, rho_right, v_right]");
        std::array<double, 4> r{};
        for (std::size_t k = 0; k < 4; ++k) {
            if (!row[k].is_number())
                throw ConfigError("inputs[" + std::to_string(i) + "]: expected numbers");
            r[k] = row[k].get<double>();
        }
        rows.push_back(r);
    }
    root.erase(it);
}

} // namespace

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");

    RunConfig cfg;
    parse_eos(take_section(root, "eos"), cfg.eos);
    VdwEos eos = cfg.eos.make();
    parse_micro(take_section(root, "micro"), cfg.micro, cfg.micro_input);
    parse_gate(take_section(root, "gate"), eos, cfg.gate);
    parse_macro(take_section(root, "macro"), eos, cfg.macro, cfg.scenario);
    parse_io(take_section(root, "io"), cfg.io);
    parse_inputs(root, cfg.inputs);
    reject_leftovers(root, "config");

    cfg.macro.gate = cfg.gate;
    cfg.macro.micro = cfg.micro;
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
    json root;
    root["eos"] = {{"a", cfg.eos.a}, {"b", cfg.eos.b}, {"R", cfg.eos.R}, {"T_ref", cfg.eos.T_ref}};

    const MicroConfig& m = cfg.micro;
    const FluidState& ul = cfg.micro_input.u_L;
    const FluidState& ur = cfg.micro_input.u_R;
    root["micro"] = {{"n", m.n},
                     {"m", m.m},
                     {"dt", m.dt},
                     {"dt_cap", m.dt_cap},
                     {"t_end", m.t_end},
                     {"t_end_safety", m.t_end_safety},
                     {"snapshots", m.snapshots},
                     {"bin_spacings", m.bin_spacings},
                     {"field_bin_spacings", m.field_bin_spacings},
                     {"window_spacings", m.window_spacings},
                     {"offset_spacings", m.offset_spacings},
                     {"refine_halfwidth_spacings", m.refine_halfwidth_spacings},
                     {"refine_anchor_spacings", m.refine_anchor_spacings},
                     {"fit_fraction", m.fit_fraction},
                     {"search_lo_frac", m.search_lo_frac},
                     {"search_hi_frac", m.search_hi_frac},
                     {"noise_mult", m.noise_mult},
                     {"rh_sanity", m.rh_sanity},
                     {"rho_left", ul.rho},
                     {"v_left", ul.velocity()},
                     {"rho_right", ur.rho},
                     {"v_right", ur.velocity()}};

    root["gate"] = {{"epsilon_model", cfg.gate.epsilon_model},
                    {"gamma_k", cfg.gate.gamma_k},
                    {"lambda_reg", cfg.gate.lambda_reg},
                    {"input_scaling", cfg.gate.input_scaling}};

    const MacroConfig& mc = cfg.macro;
    const MacroScenario& sc = cfg.scenario;
    root["macro"] = {
        {"x_lo", mc.x_lo},
        {"x_hi", mc.x_hi},
        {"n_cells", mc.n_cells},
        {"cfl", mc.cfl},
        {"t_end", mc.t_end},
        {"bc", mc.bc == BoundaryKind::Reflecting ? "reflecting" : "inflow"},
        {"output_stride", mc.output_stride},
        {"merge_frac", mc.merge_frac},
        {"split_frac", mc.split_frac},
        {"max_halvings", mc.max_halvings},
        {"interface_pos", sc.interface_pos},
        {"left_state", json::array({sc.rho_left, sc.v_left})},
        {"right_state", json::array({sc.rho_right, sc.v_right})},
        {"inflow_left", json::array({mc.inflow_left.rho, mc.inflow_left.velocity()})},
        {"inflow_right", json::array({mc.inflow_right.rho, mc.inflow_right.velocity()})}};

    root["io"] = {{"out_dir", cfg.io.out_dir},
                  {"store", cfg.io.store},
                  {"dump_fields", cfg.io.dump_fields},
                  {"deterministic", cfg.io.deterministic}};

    if (!cfg.inputs.empty()) {
        json rows = json::array();
        for (const auto& r : cfg.inputs) rows.push_back(json::array({r[0], r[1], r[2], r[3]}));
        root["inputs"] = rows;
    }
    return root.dump(2) + "\n";
}

} // namespace chainflow
