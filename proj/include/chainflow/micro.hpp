#ifndef CHAINFLOW_MICRO_HPP
#define CHAINFLOW_MICRO_HPP

#include "chainflow/eos.hpp"
#include "chainflow/kirkwood.hpp"
#include "chainflow/state.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace chainflow {

// Two-phase Riemann data: one side liquid, one side vapor, both admissible.
struct RiemannInput {
    FluidState u_L;
    FluidState u_R;

    // Throws ConfigError unless both densities are admissible and the sides
    // carry distinct phases.
    void validate(const VdwEos& eos) const;
};

// Measured response of one microscale Riemann problem. The starred states
// are the plateaus flanking the phase boundary; rh_mass/rh_mom are the
// Rankine-Hugoniot defects of the measured jump, reported as diagnostics.
// A response whose residual exceeds the configured sanity bound is flagged
// but still returned; downstream layers decide what to do with it.
struct RiemannResponse {
    double s = 0.0;
    FluidState star_L;
    FluidState star_R;
    double rh_mass = 0.0;
    double rh_mom = 0.0;
    bool flagged = false;
    std::string flag_note;
};

struct MicroConfig {
    std::size_t n = 16000;  // particles; desk-scale runs use 4000
    double m = 1.0;
    double dt = 0.0;       // 0: pick from the stiffness rule below
    double dt_cap = 0.1;   // dt * sqrt(|phi''(r_min)|) <= dt_cap
    double t_end = 0.0;    // 0: as long as the no-reflection bound allows
    double t_end_safety = 0.7;
    std::size_t snapshots = 200;

    // Measurement scales, all in units of the mean initial spacing.
    double bin_spacings = 20.0;        // track grid bin width
    double field_bin_spacings = 20.0;  // final extraction grid bin width
    double window_spacings = 50.0;     // plateau averaging window
    double offset_spacings = 25.0;     // gap between interface and window
    double refine_halfwidth_spacings = 30.0;
    double refine_anchor_spacings = 40.0;

    double fit_fraction = 0.5;     // trailing share of the track in the speed fit
    double search_lo_frac = 0.25;  // interface search window within the grid
    double search_hi_frac = 0.75;
    double noise_mult = 10.0;
    double rh_sanity = 0.05;  // mass-residual bound above which the response is flagged

    void validate() const;
};

// Diagnostics a caller can request from solve_micro_riemann. The track and
// final field are always filled; per-snapshot fields only when
// keep_snapshots is set (memory: n_bins per snapshot).
struct MicroTrace {
    InterfaceTrack track;
    AveragedField final_field;
    std::vector<std::pair<double, AveragedField>> snapshots;
    bool keep_snapshots = false;
    double t_end = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
};

// Runs the full micro pipeline: chain init, Verlet integration with
// periodic snapshots, per-snapshot interface tracking, least-squares speed
// over the trailing fit window, and plateau extraction on the final field.
// Deterministic. Throws ExtractionError when no usable interface or plateau
// exists, HardCoreError if the dynamics break, ConfigError for bad setup.
RiemannResponse solve_micro_riemann(const VdwEos& eos, const RiemannInput& input,
                                    const MicroConfig& cfg, MicroTrace* trace = nullptr);

// Spatial reflection x -> -x.
RiemannInput mirror(const RiemannInput& in);
RiemannResponse mirror(const RiemannResponse& resp);

} // namespace chainflow

#endif
