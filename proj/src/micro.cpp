#include "chainflow/micro.hpp"
#include "chainflow/chain.hpp"
#include "chainflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chainflow {

void RiemannInput::validate(const VdwEos& eos) const {
    if (!(u_L.rho > 0.0) || !(u_R.rho > 0.0))
        throw ConfigError("Riemann input needs positive densities");
    if (!eos.admissible_rho(u_L.rho) || !eos.admissible_rho(u_R.rho)) {
        std::ostringstream os;
        os << "Riemann input (" << u_L.rho << ", " << u_R.rho << ") has an inadmissible density";
        throw ConfigError(os.str());
    }
    if (eos.phase_of_rho(u_L.rho) == eos.phase_of_rho(u_R.rho)) {
        std::ostringstream os;
        os << "Riemann input (" << u_L.rho << ", " << u_R.rho
           << ") is single-phase; the micro problem needs one liquid and one vapor side";
        throw ConfigError(os.str());
    }
}

void MicroConfig::validate() const {
    if (n < 4 || n % 2 != 0) throw ConfigError("micro particle count must be even and >= 4");
    if (!(m > 0.0)) throw ConfigError("micro particle mass must be positive");
    if (dt < 0.0 || t_end < 0.0) throw ConfigError("micro dt and t_end must be nonnegative");
    if (!(dt_cap > 0.0)) throw ConfigError("micro dt cap must be positive");
    if (!(t_end_safety > 0.0 && t_end_safety < 1.0))
        throw ConfigError("micro t_end safety factor must lie in (0, 1)");
    if (snapshots < 4) throw ConfigError("micro needs at least 4 snapshots for the speed fit");
    if (!(bin_spacings > 0.0) || !(field_bin_spacings > 0.0) || !(window_spacings > 0.0) ||
        !(offset_spacings > 0.0) || !(refine_halfwidth_spacings > 0.0) ||
        !(refine_anchor_spacings > 0.0))
        throw ConfigError("micro measurement scales must be positive");
    if (!(fit_fraction > 0.0 && fit_fraction <= 1.0))
        throw ConfigError("micro fit fraction must lie in (0, 1]");
    if (!(search_lo_frac >= 0.0 && search_lo_frac < search_hi_frac && search_hi_frac <= 1.0))
        throw ConfigError("micro search window fractions invalid");
    if (!(noise_mult >= 1.0)) throw ConfigError("micro noise multiplier must be >= 1");
    if (!(rh_sanity > 0.0)) throw ConfigError("micro RH sanity bound must be positive");
}

namespace {

std::size_t grid_bins(double span, double target_width) {
    auto n = static_cast<std::size_t>(std::llround(span / target_width));
    return std::max<std::size_t>(n, 8);
}

} // namespace

RiemannResponse solve_micro_riemann(const VdwEos& eos, const RiemannInput& input,
                                    const MicroConfig& cfg, MicroTrace* trace) {
    input.validate(eos);
    cfg.validate();

    double r_l = cfg.m / input.u_L.rho;
    double r_r = cfg.m / input.u_R.rho;
    double rbar = 0.5 * (r_l + r_r);
    double half_n = double(cfg.n / 2);
    double len_l = half_n * r_l;
    double len_r = half_n * r_r;
    double len_min = std::min(len_l, len_r);

    // Fastest signal leaving the jump, estimated from the input states.
    double c_max = std::max(std::abs(input.u_L.velocity()) + eos.sound_speed(input.u_L.rho),
                            std::abs(input.u_R.velocity()) + eos.sound_speed(input.u_R.rho));
    double t_reflect = len_min / c_max;
    double t_end = cfg.t_end > 0.0 ? cfg.t_end : cfg.t_end_safety * t_reflect;
    if (!(t_end < t_reflect)) {
        std::ostringstream os;
        os << "micro t_end = " << t_end << " reaches the chain ends (reflection bound "
           << t_reflect << " for N = " << cfg.n << "); enlarge N or shorten t_end";
        throw ConfigError(os.str());
    }

    ParticleChain chain = init_riemann_chain(eos, input.u_L, input.u_R, cfg.n, cfg.m);
    double dt = cfg.dt > 0.0 ? cfg.dt : stable_dt(eos, chain, cfg.dt_cap);

    // Symmetric measurement grid about the jump so the default search window
    // always brackets the interface.
    BinGrid track_grid = make_grid(-len_min, len_min, grid_bins(2.0 * len_min, cfg.bin_spacings * rbar));
    double refine_half = cfg.refine_halfwidth_spacings * rbar;
    double refine_anchor = cfg.refine_anchor_spacings * rbar;

    auto n_steps = static_cast<std::size_t>(std::ceil(t_end / dt));
    std::size_t stride = std::max<std::size_t>(1, n_steps / cfg.snapshots);

    InterfaceTrack track;
    std::optional<double> prev_edge;
    ChainObserver observer = [&](double t, const ParticleChain& ch) {
        AveragedField f = bin_fields(eos, ch, track_grid);
        DetectConfig dc{cfg.search_lo_frac, cfg.search_hi_frac, cfg.noise_mult, prev_edge};
        double edge = detect_interface(f, dc);
        prev_edge = edge;
        track.times.push_back(t);
        track.positions.push_back(refine_interface(f, edge, refine_half, refine_anchor));
        if (trace && trace->keep_snapshots) trace->snapshots.emplace_back(t, std::move(f));
    };
    run_chain(eos, chain, dt, t_end, stride, observer);

    double s = estimate_speed(track, cfg.fit_fraction);

    // Final field on its own grid; the extraction windows ride on the last
    // tracked position.
    BinGrid field_grid =
        make_grid(-len_min, len_min, grid_bins(2.0 * len_min, cfg.field_bin_spacings * rbar));
    AveragedField field = bin_fields(eos, chain, field_grid);
    DetectConfig dc{cfg.search_lo_frac, cfg.search_hi_frac, cfg.noise_mult, prev_edge};
    double pos = refine_interface(field, detect_interface(field, dc), refine_half, refine_anchor);
    auto [star_l, star_r] =
        extract_states(field, pos, cfg.window_spacings * rbar, cfg.offset_spacings * rbar);

    // The plateau on each side must stay in that side's phase; anything else
    // means the measurement landed on the wrong structure.
    if (!eos.admissible_rho(star_l.rho) || !eos.admissible_rho(star_r.rho) ||
        eos.phase_of_rho(star_l.rho) != eos.phase_of_rho(input.u_L.rho) ||
        eos.phase_of_rho(star_r.rho) != eos.phase_of_rho(input.u_R.rho)) {
        std::ostringstream os;
        os << "extracted plateau states (" << star_l.rho << ", " << star_r.rho
           << ") do not match the input phases";
        throw ExtractionError(os.str());
    }

    RiemannResponse resp;
    resp.s = s;
    resp.star_L = star_l;
    resp.star_R = star_r;
    double v_l = star_l.velocity();
    double v_r = star_r.velocity();
    resp.rh_mass = std::abs(star_l.rho * (v_l - s) - star_r.rho * (v_r - s));
    resp.rh_mom = std::abs(star_l.rho * (v_l - s) * v_l + eos.pressure_rho(star_l.rho) -
                           (star_r.rho * (v_r - s) * v_r + eos.pressure_rho(star_r.rho)));
    if (resp.rh_mass > cfg.rh_sanity) {
        resp.flagged = true;
        std::ostringstream os;
        os << "RH mass residual " << resp.rh_mass << " above sanity bound " << cfg.rh_sanity;
        resp.flag_note = os.str();
    }

    if (trace) {
        trace->track = std::move(track);
        trace->final_field = std::move(field);
        trace->t_end = t_end;
        trace->dt = dt;
        trace->steps = n_steps;
    }
    return resp;
}

RiemannInput mirror(const RiemannInput& in) {
    return RiemannInput{{in.u_R.rho, -in.u_R.mom}, {in.u_L.rho, -in.u_L.mom}};
}

RiemannResponse mirror(const RiemannResponse& resp) {
    RiemannResponse out = resp;
    out.s = -resp.s;
    out.star_L = {resp.star_R.rho, -resp.star_R.mom};
    out.star_R = {resp.star_L.rho, -resp.star_L.mom};
    return out;
}

} // namespace chainflow
