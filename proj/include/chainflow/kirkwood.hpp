#ifndef CHAINFLOW_KIRKWOOD_HPP
#define CHAINFLOW_KIRKWOOD_HPP

#include "chainflow/chain.hpp"
#include "chainflow/state.hpp"

#include <optional>
#include <vector>

namespace chainflow {

struct BinGrid {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t n_bins = 0;

    double h() const { return (x_max - x_min) / double(n_bins); }
    double center(std::size_t j) const { return x_min + (double(j) + 0.5) * h(); }
    // Position of the edge between bins j and j+1.
    double inner_edge(std::size_t j) const { return x_min + double(j + 1) * h(); }
};

BinGrid make_grid(double x_min, double x_max, std::size_t n_bins);

// Binned continuum fields measured from one chain snapshot. rho and momentum
// are delta depositions (sum of m/h per bin); velocity is momentum/rho where
// there is mass and 0 elsewhere; pressure combines the kinetic part (velocity
// fluctuation about the bin mean) with the pair virial spread across bins in
// proportion to each pair segment's overlap.
struct AveragedField {
    BinGrid grid;
    std::vector<double> rho;
    std::vector<double> momentum;
    std::vector<double> velocity;
    std::vector<double> pressure;
};

AveragedField bin_fields(const VdwEos& eos, const ParticleChain& chain, const BinGrid& grid);

struct DetectConfig {
    // Search restricted to bin edges whose flanking bins lie inside
    // [lo_frac, hi_frac] of the grid span; keeps free-end artifacts out.
    double lo_frac = 0.25;
    double hi_frac = 0.75;
    // Largest jump must exceed noise_mult times the median absolute
    // neighboring-bin difference, or the field counts as flat.
    double noise_mult = 10.0;
    // Tie breaking: prefer the edge nearest this position, else nearest 0.
    std::optional<double> previous;
};

// Position of the bin edge with the largest |rho[j+1] - rho[j]| inside the
// search window. Throws ExtractionError for flat fields.
double detect_interface(const AveragedField& field, const DetectConfig& cfg = {});

// Sub-bin interface position. The edge position from detect_interface is
// quantized to the grid; this refines it by placing an equivalent sharp step
// between plateau anchors so that it carries the same mass as the measured
// field over [edge - halfwidth, edge + halfwidth]. Exact for clean steps,
// robust against the grid phase; falls back to the edge position when the
// anchors do not separate.
double refine_interface(const AveragedField& field, double edge_pos, double halfwidth,
                        double anchor_window);

struct InterfaceTrack {
    std::vector<double> times;
    std::vector<double> positions;
};

// Least-squares slope of position vs. time over the trailing fit_fraction of
// the samples. Exact for affine tracks.
double estimate_speed(const InterfaceTrack& track, double fit_fraction = 0.5);

// Window averages of (rho, rho v) over [pos-offset-window, pos-offset] and
// [pos+offset, pos+offset+window], bin overlap weighted. Throws
// ExtractionError when a window leaves the grid or holds no mass.
std::pair<FluidState, FluidState> extract_states(const AveragedField& field, double pos,
                                                 double window, double offset);

} // namespace chainflow

#endif
