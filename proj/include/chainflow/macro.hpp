#pragma once

#include "chainflow/micro.hpp"
#include "chainflow/surrogate.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace chainflow {

// Finite-volume mesh whose cells never straddle the phase boundary: the
// boundary IS an edge, and it moves. Pure single-phase meshes (no interface)
// are allowed so the scheme can be compared against plain Lax-Friedrichs.
struct FrontMesh {
    std::vector<double> edges;       // n_cells + 1, strictly increasing
    std::vector<FluidState> cells;   // one average per cell
    std::vector<Phase> phase;        // per cell; uniform on each side of the wall
    bool has_interface = false;
    std::size_t interface_edge = 0;  // interior edge index when has_interface
    double h0 = 0.0;                 // initial uniform width, merge/split yardstick
    double last_speed = 0.0;         // interface speed from the previous step

    std::size_t n_cells() const { return cells.size(); }
    double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
    double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
    double interface_pos() const { return edges[interface_edge]; }
    double total_mass() const;
    double total_momentum() const;
    void validate(const VdwEos& eos) const;
};

// Uniform two-phase mesh; the interface lands on the interior edge nearest
// interface_pos. Left state fills cells left of it, right state the rest.
FrontMesh make_two_phase_mesh(const VdwEos& eos, double x_lo, double x_hi,
                              std::size_t n_cells, double interface_pos,
                              const FluidState& left, const FluidState& right);

FrontMesh make_single_phase_mesh(const VdwEos& eos, double x_lo, double x_hi,
                                 std::size_t n_cells, const FluidState& u);

enum class BoundaryKind { Reflecting, ConstantInflow };

struct MacroConfig {
    double x_lo = -1.0;
    double x_hi = 1.0;
    std::size_t n_cells = 200;
    double cfl = 0.4;
    double t_end = 0.1;
    BoundaryKind bc = BoundaryKind::Reflecting;
    FluidState inflow_left{};   // ghost states for constant-inflow runs
    FluidState inflow_right{};
    std::size_t output_stride = 10;
    double merge_frac = 0.3;    // adjacent cell merges below merge_frac * h0
    double split_frac = 1.7;    // and splits above split_frac * h0
    int max_halvings = 5;
    GateConfig gate;
    MicroConfig micro;
    void validate(const VdwEos& eos) const;
};

using Flux = std::array<double, 2>; // mass, momentum

Flux lax_friedrichs_flux(const VdwEos& eos, const FluidState& u_l, const FluidState& u_r,
                         double alpha);
double max_signal_speed(const VdwEos& eos, const FluidState& u);

// Average of the two moving-frame fluxes f(u*) - s u*; they coincide when the
// jump conditions hold exactly, and the residual is reported by the micro side.
Flux interface_flux(const VdwEos& eos, const RiemannResponse& resp);

double cfl_dt(const VdwEos& eos, const FrontMesh& mesh, double cfl);

struct StepOutcome {
    double dt_used = 0.0;
    int halvings = 0;
    bool micro_called = false;
    double score = 0.0;   // gate score of this step's interface query
    double s = 0.0;       // interface speed applied (0 without interface)
    double gate_ms = 0.0; // wall time inside the gate, oracle time included
};

// One explicit step: gate query, fluxes, conservative update with the moving
// edge, merge/split maintenance. Throws StepRejectionError when halving dt
// max_halvings times still leaves an inadmissible cell.
StepOutcome macro_step(const VdwEos& eos, FrontMesh& mesh, double dt, Surrogate& sur,
                       const Surrogate::Oracle& oracle, const MacroConfig& cfg);

// Exposed for direct testing; macro_step calls it after every update.
void enforce_cell_bounds(FrontMesh& mesh, const MacroConfig& cfg);

struct ReportRow {
    std::size_t step = 0;
    double t = 0.0;
    std::size_t micro_calls_total = 0;
    double score_min = 0.0; // smallest gate score seen so far
    double wall_ms_bulk = 0.0;
    double wall_ms_micro = 0.0;
    double wall_ms_surrogate = 0.0;
};

struct MacroRunResult {
    std::vector<std::pair<double, FrontMesh>> snapshots;
    std::vector<std::pair<double, double>> interface_track; // (t, position)
    std::vector<ReportRow> report;
    FrontMesh final_mesh;
    double t_final = 0.0;
    std::size_t steps = 0;
    std::size_t micro_calls = 0;
    double wall_ms_bulk = 0.0;
    double wall_ms_micro = 0.0;
    double wall_ms_surrogate = 0.0;
};

MacroRunResult run_macro(const VdwEos& eos, const MacroConfig& cfg, FrontMesh initial,
                         Surrogate& sur, const Surrogate::Oracle& oracle);

// Convenience overload: the oracle is the particle-chain solver under cfg.micro.
MacroRunResult run_macro(const VdwEos& eos, const MacroConfig& cfg, FrontMesh initial,
                         Surrogate& sur);

void write_mesh_csv(const std::string& path, const FrontMesh& mesh);
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);
void write_track_csv(const std::string& path,
                     const std::vector<std::pair<double, double>>& track);

} // namespace chainflow
