#include "chainflow/kirkwood.hpp"
#include "chainflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chainflow {
namespace {

// Sum of values[j] * |bin_j ∩ [lo, hi]| — the integral of the piecewise
// constant field over the window.
double window_integral(const BinGrid& grid, const std::vector<double>& values, double lo,
                       double hi) {
    double h = grid.h();
    double acc = 0.0;
    auto first = static_cast<long>(std::floor((lo - grid.x_min) / h));
    auto last = static_cast<long>(std::floor((hi - grid.x_min) / h));
    first = std::max(first, 0L);
    last = std::min(last, static_cast<long>(grid.n_bins) - 1L);
    for (long j = first; j <= last; ++j) {
        double bin_lo = grid.x_min + double(j) * h;
        double overlap = std::min(hi, bin_lo + h) - std::max(lo, bin_lo);
        if (overlap > 0.0) acc += values[std::size_t(j)] * overlap;
    }
    return acc;
}

bool inside_grid(const BinGrid& grid, double lo, double hi) {
    return lo >= grid.x_min && hi <= grid.x_max && lo < hi;
}

} // namespace

BinGrid make_grid(double x_min, double x_max, std::size_t n_bins) {
    if (!(x_min < x_max)) throw ConfigError("bin grid needs x_min < x_max");
    if (n_bins < 4) throw ConfigError("bin grid needs at least 4 bins");
    return BinGrid{x_min, x_max, n_bins};
}

AveragedField bin_fields(const VdwEos& eos, const ParticleChain& chain, const BinGrid& grid) {
    if (grid.n_bins < 4) throw ConfigError("bin grid needs at least 4 bins");
    AveragedField f;
    f.grid = grid;
    f.rho.assign(grid.n_bins, 0.0);
    f.momentum.assign(grid.n_bins, 0.0);
    f.velocity.assign(grid.n_bins, 0.0);
    f.pressure.assign(grid.n_bins, 0.0);
    double h = grid.h();
    double inv_h = 1.0 / h;
    std::size_t n = chain.size();

    // Bin index per particle, reused by the fluctuation pass; -1 marks
    // out-of-grid particles.
    std::vector<long> bin_of(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        double idx = (chain.x[i] - grid.x_min) * inv_h;
        if (idx < 0.0 || idx >= double(grid.n_bins)) continue;
        auto j = static_cast<std::size_t>(idx);
        bin_of[i] = long(j);
        f.rho[j] += chain.m * inv_h;
        f.momentum[j] += chain.m * chain.v[i] * inv_h;
    }
    for (std::size_t j = 0; j < grid.n_bins; ++j)
        f.velocity[j] = f.rho[j] > 0.0 ? f.momentum[j] / f.rho[j] : 0.0;

    // Kinetic pressure: fluctuation about the particle's own bin mean.
    for (std::size_t i = 0; i < n; ++i) {
        if (bin_of[i] < 0) continue;
        auto j = static_cast<std::size_t>(bin_of[i]);
        double vbar = chain.v[i] - f.velocity[j];
        f.pressure[j] += chain.m * vbar * vbar * inv_h;
    }

    // Pair virial: f_pair * r = -phi'(r) * r, spread over the bins the pair
    // segment [x_i, x_{i+1}] overlaps, in proportion to the overlap. For a
    // uniform chain the segments tile the line and every interior bin
    // collects exactly -phi'(r).
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double xl = chain.x[i];
        double xr = chain.x[i + 1];
        double r = xr - xl;
        double w = -eos.dphi(r) * r;
        if (xr <= grid.x_min || xl >= grid.x_max) continue;
        double deposit = w / (r * h);
        auto first = static_cast<long>(std::floor((xl - grid.x_min) * inv_h));
        auto last = static_cast<long>(std::floor((xr - grid.x_min) * inv_h));
        first = std::max(first, 0L);
        last = std::min(last, static_cast<long>(grid.n_bins) - 1L);
        for (long j = first; j <= last; ++j) {
            double bin_lo = grid.x_min + double(j) * h;
            double overlap = std::min(xr, bin_lo + h) - std::max(xl, bin_lo);
            if (overlap > 0.0) f.pressure[std::size_t(j)] += deposit * overlap;
        }
    }
    return f;
}

double detect_interface(const AveragedField& field, const DetectConfig& cfg) {
    const BinGrid& grid = field.grid;
    if (grid.n_bins < 4) throw ConfigError("interface detection needs at least 4 bins");
    if (!(cfg.lo_frac >= 0.0 && cfg.lo_frac < cfg.hi_frac && cfg.hi_frac <= 1.0))
        throw ConfigError("detection window fractions must satisfy 0 <= lo < hi <= 1");
    double span = grid.x_max - grid.x_min;
    double win_lo = grid.x_min + cfg.lo_frac * span;
    double win_hi = grid.x_min + cfg.hi_frac * span;
    double target = cfg.previous.value_or(0.0);

    double best = -1.0;
    double best_pos = 0.0;
    std::vector<double> diffs;
    diffs.reserve(grid.n_bins);
    for (std::size_t j = 0; j + 1 < grid.n_bins; ++j) {
        double e = grid.inner_edge(j);
        if (e < win_lo || e > win_hi) continue;
        double d = std::abs(field.rho[j + 1] - field.rho[j]);
        diffs.push_back(d);
        if (d > best || (d == best && std::abs(e - target) < std::abs(best_pos - target))) {
            best = d;
            best_pos = e;
        }
    }
    if (diffs.empty()) throw ExtractionError("detection window contains no bin edges");
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
    double median = diffs[diffs.size() / 2];
    if (!(best > cfg.noise_mult * median)) {
        std::ostringstream os;
        os << "no interface: largest density jump " << best << " does not clear the noise floor "
           << cfg.noise_mult << " x " << median;
        throw ExtractionError(os.str());
    }
    return best_pos;
}

double refine_interface(const AveragedField& field, double edge_pos, double halfwidth,
                        double anchor_window) {
    if (!(halfwidth > 0.0) || !(anchor_window > 0.0))
        throw ConfigError("refinement windows must be positive");
    const BinGrid& grid = field.grid;
    double xl = edge_pos - halfwidth;
    double xr = edge_pos + halfwidth;
    if (!inside_grid(grid, xl - anchor_window, xr + anchor_window)) return edge_pos;
    double rho_l = window_integral(grid, field.rho, xl - anchor_window, xl) / anchor_window;
    double rho_r = window_integral(grid, field.rho, xr, xr + anchor_window) / anchor_window;
    double denom = rho_l - rho_r;
    if (std::abs(denom) <= 1e-12 * (std::abs(rho_l) + std::abs(rho_r))) return edge_pos;
    // Place the sharp step between the anchor plateaus that carries the same
    // mass over [xl, xr] as the measured field.
    double mass = window_integral(grid, field.rho, xl, xr);
    double pos = xl + (mass - rho_r * (xr - xl)) / denom;
    return std::clamp(pos, xl, xr);
}

double estimate_speed(const InterfaceTrack& track, double fit_fraction) {
    std::size_t n = track.times.size();
    if (n != track.positions.size()) throw ConfigError("track arrays differ in length");
    if (n < 2) throw ExtractionError("speed estimation needs at least 2 track points");
    if (!(fit_fraction > 0.0 && fit_fraction <= 1.0))
        throw ConfigError("fit fraction must lie in (0, 1]");
    auto span = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(fit_fraction * double(n))));
    span = std::min(span, n);
    std::size_t k0 = n - span;

    double t_mean = 0.0, p_mean = 0.0;
    for (std::size_t i = k0; i < n; ++i) {
        t_mean += track.times[i];
        p_mean += track.positions[i];
    }
    t_mean /= double(span);
    p_mean /= double(span);
    double num = 0.0, den = 0.0;
    for (std::size_t i = k0; i < n; ++i) {
        double dt = track.times[i] - t_mean;
        num += dt * (track.positions[i] - p_mean);
        den += dt * dt;
    }
    if (den == 0.0) throw ExtractionError("speed estimation degenerate: all fit times equal");
    return num / den;
}

std::pair<FluidState, FluidState> extract_states(const AveragedField& field, double pos,
                                                 double window, double offset) {
    if (!(window > 0.0) || !(offset > 0.0))
        throw ConfigError("extraction window and offset must be positive");
    const BinGrid& grid = field.grid;
    double l_lo = pos - offset - window;
    double l_hi = pos - offset;
    double r_lo = pos + offset;
    double r_hi = pos + offset + window;
    if (!inside_grid(grid, l_lo, l_hi) || !inside_grid(grid, r_lo, r_hi)) {
        std::ostringstream os;
        os << "extraction windows [" << l_lo << ", " << l_hi << "] / [" << r_lo << ", " << r_hi
           << "] leave the grid [" << grid.x_min << ", " << grid.x_max << "]";
        throw ExtractionError(os.str());
    }
    FluidState u_l{window_integral(grid, field.rho, l_lo, l_hi) / window,
                   window_integral(grid, field.momentum, l_lo, l_hi) / window};
    FluidState u_r{window_integral(grid, field.rho, r_lo, r_hi) / window,
                   window_integral(grid, field.momentum, r_lo, r_hi) / window};
    if (!(u_l.rho > 0.0) || !(u_r.rho > 0.0))
        throw ExtractionError("extraction window holds no mass");
    return {u_l, u_r};
}

} // namespace chainflow
