#ifndef CHAINFLOW_CONFIG_HPP
#define CHAINFLOW_CONFIG_HPP

#include "chainflow/eos.hpp"
#include "chainflow/macro.hpp"
#include "chainflow/micro.hpp"
#include "chainflow/surrogate.hpp"

#include <array>
#include <string>
#include <vector>

namespace chainflow {

// Isotherm parameters as they appear in the config file. Defaults are the
// calibrated set used throughout: a = 3, b = 1/3, R = 8/3 puts the critical
// point at tau_c = 1, p_c = 1, T_c = 1, and T_ref = 0.85 gives a realistic
// liquid/vapor density contrast.
struct EosParams {
    double a = 3.0;
    double b = 1.0 / 3.0;
    double R = 8.0 / 3.0;
    double T_ref = 0.85;

    VdwEos make() const;
    void validate() const; // positivity and finiteness only; subcritical is
                           // checked by the operations that need it
};

// Initial data for the front-tracking run: one jump at interface_pos.
// States are given as (density, velocity) pairs; parsing fills anything
// omitted with the saturated states at rest.
struct MacroScenario {
    double interface_pos = 0.0;
    double rho_left = 0.0;
    double v_left = 0.0;
    double rho_right = 0.0;
    double v_right = 0.0;
};

struct IoConfig {
    std::string out_dir = "out";
    std::string store;         // sample store CSV; empty disables persistence
    bool dump_fields = false;  // also write per-snapshot field CSVs
    // There is no randomness anywhere in the pipeline; the flag records
    // that contract in the artifact and cannot be turned off.
    bool deterministic = true;
};

// Everything a run needs, parsed from one JSON document with sections
// "eos", "micro", "gate", "macro", "io" and an optional top-level "inputs"
// list for batch sampling. Unknown keys are rejected.
struct RunConfig {
    EosParams eos;
    MicroConfig micro;
    RiemannInput micro_input;  // left/right states for the single micro run
    GateConfig gate;           // input_scaling resolved at parse time
    MacroConfig macro;         // its gate/micro members mirror the above
    MacroScenario scenario;
    IoConfig io;
    // Batch rows as (rho_left, v_left, rho_right, v_right).
    std::vector<std::array<double, 4>> inputs;
};

// Parse a JSON document. Throws ConfigError on syntax errors, wrong types,
// unknown keys, or section-level invariant violations. Scenario and inflow
// defaults that depend on the saturation states are computed here, so a
// supercritical isotherm with an incomplete macro section throws DomainError.
RunConfig parse_config(const std::string& text);

// Read and parse a file; IoError if unreadable.
RunConfig load_config_file(const std::string& path);

// Emit the fully resolved config as JSON. parse(serialize(parse(x))) equals
// parse(x) field for field; doubles survive exactly.
std::string serialize_config(const RunConfig& cfg);

} // namespace chainflow

#endif
