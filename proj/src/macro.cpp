#include "chainflow/macro.hpp"

#include "chainflow/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace chainflow {

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool cell_ok(const VdwEos& eos, const FluidState& u, Phase label) {
    if (!(u.rho > 0.0) || !std::isfinite(u.rho) || !std::isfinite(u.mom)) return false;
    if (!eos.admissible_rho(u.rho)) return false;
    return eos.phase_of_rho(u.rho) == label;
}

} // namespace

double FrontMesh::total_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) m += width(i) * cells[i].rho;
    return m;
}

double FrontMesh::total_momentum() const {
    double m = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) m += width(i) * cells[i].mom;
    return m;
}

void FrontMesh::validate(const VdwEos& eos) const {
    if (cells.size() < 2) throw ConfigError("mesh: need at least two cells");
    if (edges.size() != cells.size() + 1 || phase.size() != cells.size())
        throw ConfigError("mesh: edges/cells/phase sizes disagree");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        if (!(edges[i] < edges[i + 1])) throw ConfigError("mesh: edges must increase strictly");
    if (!(h0 > 0.0)) throw ConfigError("mesh: h0 must be positive");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cell_ok(eos, cells[i], phase[i]))
            throw ConfigError("mesh: cell " + std::to_string(i) +
                              " state is outside its phase, rho = " + std::to_string(cells[i].rho));
    }
    if (has_interface) {
        if (interface_edge == 0 || interface_edge >= cells.size())
            throw ConfigError("mesh: interface edge must be interior");
        for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
            bool flip = phase[i] != phase[i + 1];
            bool at_wall = (i + 1 == interface_edge);
            if (flip != at_wall)
                throw ConfigError("mesh: phase label must change exactly at the interface edge");
        }
    } else {
        for (std::size_t i = 1; i < cells.size(); ++i)
            if (phase[i] != phase[0])
                throw ConfigError("mesh: mixed phases require an interface edge");
    }
}

FrontMesh make_two_phase_mesh(const VdwEos& eos, double x_lo, double x_hi,
                              std::size_t n_cells, double interface_pos,
                              const FluidState& left, const FluidState& right) {
    if (!(x_lo < x_hi)) throw ConfigError("mesh: domain bounds out of order");
    if (n_cells < 4) throw ConfigError("mesh: need at least four cells");
    Phase pl = eos.phase_of_rho(left.rho);
    Phase pr = eos.phase_of_rho(right.rho);
    if (pl == pr) throw ConfigError("mesh: two-phase setup needs distinct phases");

    FrontMesh m;
    m.h0 = (x_hi - x_lo) / double(n_cells);
    m.edges.resize(n_cells + 1);
    for (std::size_t i = 0; i <= n_cells; ++i)
        m.edges[i] = x_lo + double(i) * m.h0;
    m.edges.back() = x_hi;

    double rel = (interface_pos - x_lo) / m.h0;
    long ie = std::lround(rel);
    ie = std::clamp(ie, 1l, long(n_cells) - 1);
    m.has_interface = true;
    m.interface_edge = std::size_t(ie);

    m.cells.resize(n_cells);
    m.phase.resize(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
        bool is_left = i < m.interface_edge;
        m.cells[i] = is_left ? left : right;
        m.phase[i] = is_left ? pl : pr;
    }
    m.validate(eos);
    return m;
}

FrontMesh make_single_phase_mesh(const VdwEos& eos, double x_lo, double x_hi,
                                 std::size_t n_cells, const FluidState& u) {
    if (!(x_lo < x_hi)) throw ConfigError("mesh: domain bounds out of order");
    if (n_cells < 4) throw ConfigError("mesh: need at least four cells");
    FrontMesh m;
    m.h0 = (x_hi - x_lo) / double(n_cells);
    m.edges.resize(n_cells + 1);
    for (std::size_t i = 0; i <= n_cells; ++i)
        m.edges[i] = x_lo + double(i) * m.h0;
    m.edges.back() = x_hi;
    m.cells.assign(n_cells, u);
    m.phase.assign(n_cells, eos.phase_of_rho(u.rho));
    m.validate(eos);
    return m;
}

void MacroConfig::validate(const VdwEos& eos) const {
    if (!(x_lo < x_hi)) throw ConfigError("macro: domain bounds out of order");
    if (n_cells < 4) throw ConfigError("macro: need at least four cells");
    if (!(cfl > 0.0) || !(cfl < 1.0)) throw ConfigError("macro: cfl must lie in (0, 1)");
    if (!(t_end >= 0.0)) throw ConfigError("macro: end time must be nonnegative");
    if (output_stride < 1) throw ConfigError("macro: output stride must be at least 1");
    if (!(merge_frac > 0.0) || !(merge_frac < 1.0) || !(split_frac > 1.0))
        throw ConfigError("macro: merge/split fractions must bracket 1");
    if (max_halvings < 0) throw ConfigError("macro: max_halvings must be nonnegative");
    gate.validate();
    micro.validate();
    if (bc == BoundaryKind::ConstantInflow) {
        if (!(inflow_left.rho > 0.0) || !eos.admissible_rho(inflow_left.rho) ||
            !(inflow_right.rho > 0.0) || !eos.admissible_rho(inflow_right.rho))
            throw ConfigError("macro: inflow ghost states must be admissible");
    }
}

double max_signal_speed(const VdwEos& eos, const FluidState& u) {
    return std::abs(u.velocity()) + eos.sound_speed(u.rho);
}

Flux lax_friedrichs_flux(const VdwEos& eos, const FluidState& u_l, const FluidState& u_r,
                         double alpha) {
    FluidState fl = euler_flux(eos, u_l);
    FluidState fr = euler_flux(eos, u_r);
    return {0.5 * (fl.rho + fr.rho) - 0.5 * alpha * (u_r.rho - u_l.rho),
            0.5 * (fl.mom + fr.mom) - 0.5 * alpha * (u_r.mom - u_l.mom)};
}

Flux interface_flux(const VdwEos& eos, const RiemannResponse& resp) {
    FluidState fl = euler_flux(eos, resp.star_L);
    FluidState fr = euler_flux(eos, resp.star_R);
    double s = resp.s;
    return {0.5 * (fl.rho + fr.rho) - 0.5 * s * (resp.star_L.rho + resp.star_R.rho),
            0.5 * (fl.mom + fr.mom) - 0.5 * s * (resp.star_L.mom + resp.star_R.mom)};
}

double cfl_dt(const VdwEos& eos, const FrontMesh& mesh, double cfl) {
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.n_cells(); ++i) {
        double sp = max_signal_speed(eos, mesh.cells[i]);
        dt = std::min(dt, mesh.width(i) / sp);
    }
    dt *= cfl;
    if (mesh.has_interface && mesh.last_speed != 0.0) {
        // keep the moving edge inside its neighbors at the previously seen speed
        double w_adj = std::min(mesh.width(mesh.interface_edge - 1),
                                mesh.width(mesh.interface_edge));
        dt = std::min(dt, cfl * w_adj / std::abs(mesh.last_speed));
    }
    return dt;
}

void enforce_cell_bounds(FrontMesh& mesh, const MacroConfig& cfg) {
    if (!mesh.has_interface) return;
    double lo = cfg.merge_frac * mesh.h0;
    double hi = cfg.split_frac * mesh.h0;

    auto merge_into_neighbor = [&](std::size_t i, std::size_t nb) {
        // conservative: the union cell keeps combined mass and momentum
        double wi = mesh.width(i), wn = mesh.width(nb);
        FluidState u{(wi * mesh.cells[i].rho + wn * mesh.cells[nb].rho) / (wi + wn),
                     (wi * mesh.cells[i].mom + wn * mesh.cells[nb].mom) / (wi + wn)};
        std::size_t keep = std::min(i, nb);
        mesh.cells[keep] = u;
        mesh.cells.erase(mesh.cells.begin() + long(std::max(i, nb)));
        mesh.phase.erase(mesh.phase.begin() + long(std::max(i, nb)));
        mesh.edges.erase(mesh.edges.begin() + long(std::max(i, nb))); // shared edge
    };
    auto split_cell = [&](std::size_t i) {
        double mid = mesh.center(i);
        FluidState u = mesh.cells[i];
        Phase p = mesh.phase[i];
        mesh.edges.insert(mesh.edges.begin() + long(i) + 1, mid);
        mesh.cells.insert(mesh.cells.begin() + long(i), u);
        mesh.phase.insert(mesh.phase.begin() + long(i), p);
    };

    // left-adjacent cell
    std::size_t li = mesh.interface_edge - 1;
    if (mesh.width(li) < lo) {
        if (li == 0) throw StepRejectionError("interface reached the left boundary");
        merge_into_neighbor(li, li - 1);
        mesh.interface_edge -= 1;
    } else if (mesh.width(li) > hi) {
        split_cell(li);
        mesh.interface_edge += 1;
    }
    // right-adjacent cell
    std::size_t ri = mesh.interface_edge;
    if (mesh.width(ri) < lo) {
        if (ri + 1 >= mesh.n_cells())
            throw StepRejectionError("interface reached the right boundary");
        merge_into_neighbor(ri, ri + 1);
    } else if (mesh.width(ri) > hi) {
        split_cell(ri);
    }
}

StepOutcome macro_step(const VdwEos& eos, FrontMesh& mesh, double dt, Surrogate& sur,
                       const Surrogate::Oracle& oracle, const MacroConfig& cfg) {
    StepOutcome out;
    const std::size_t n = mesh.n_cells();

    RiemannResponse resp;
    if (mesh.has_interface) {
        const FluidState& al = mesh.cells[mesh.interface_edge - 1];
        const FluidState& ar = mesh.cells[mesh.interface_edge];
        InputPoint q{al.rho, al.mom, ar.rho, ar.mom};
        double t0 = now_ms();
        out.score = sur.score(q);
        GatedResult g = sur.evaluate_gated(q, oracle);
        out.gate_ms = now_ms() - t0;
        out.micro_called = g.sampled;
        resp = from_output(g.y);
        out.s = resp.s;
    }

    // ghost states
    FluidState ghost_l, ghost_r;
    if (cfg.bc == BoundaryKind::Reflecting) {
        ghost_l = {mesh.cells[0].rho, -mesh.cells[0].mom};
        ghost_r = {mesh.cells[n - 1].rho, -mesh.cells[n - 1].mom};
    } else {
        ghost_l = cfg.inflow_left;
        ghost_r = cfg.inflow_right;
    }

    // edge fluxes, interface edge handled separately
    std::vector<Flux> F(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        if (mesh.has_interface && j == mesh.interface_edge) continue;
        const FluidState& ul = (j == 0) ? ghost_l : mesh.cells[j - 1];
        const FluidState& ur = (j == n) ? ghost_r : mesh.cells[j];
        double alpha = std::max(max_signal_speed(eos, ul), max_signal_speed(eos, ur));
        F[j] = lax_friedrichs_flux(eos, ul, ur, alpha);
    }
    Flux g{};
    if (mesh.has_interface) {
        if (!(resp.star_L.rho > 0.0) || !eos.admissible_rho(resp.star_L.rho) ||
        !(resp.star_R.rho > 0.0) || !eos.admissible_rho(resp.star_R.rho))
            throw StepRejectionError("interface response has inadmissible starred states");
        g = interface_flux(eos, resp);
    }

    double try_dt = dt;
    for (int attempt = 0; attempt <= cfg.max_halvings; ++attempt, try_dt *= 0.5) {
        std::vector<FluidState> nc(n);
        bool ok = true;

        if (mesh.has_interface) {
            std::size_t ie = mesh.interface_edge;
            double shift = resp.s * try_dt;
            double wl = mesh.width(ie - 1), wr = mesh.width(ie);
            // the moving edge must stay strictly inside its neighbors
            if (shift <= -0.9 * wl || shift >= 0.9 * wr) continue;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == ie - 1 || i == ie) continue;
                double w = mesh.width(i);
                nc[i] = {mesh.cells[i].rho + (try_dt / w) * (F[i][0] - F[i + 1][0]),
                         mesh.cells[i].mom + (try_dt / w) * (F[i][1] - F[i + 1][1])};
            }
            double nwl = wl + shift, nwr = wr - shift;
            nc[ie - 1] = {(wl * mesh.cells[ie - 1].rho + try_dt * (F[ie - 1][0] - g[0])) / nwl,
                          (wl * mesh.cells[ie - 1].mom + try_dt * (F[ie - 1][1] - g[1])) / nwl};
            nc[ie] = {(wr * mesh.cells[ie].rho + try_dt * (g[0] - F[ie + 1][0])) / nwr,
                      (wr * mesh.cells[ie].mom + try_dt * (g[1] - F[ie + 1][1])) / nwr};
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                double w = mesh.width(i);
                nc[i] = {mesh.cells[i].rho + (try_dt / w) * (F[i][0] - F[i + 1][0]),
                         mesh.cells[i].mom + (try_dt / w) * (F[i][1] - F[i + 1][1])};
            }
        }

        for (std::size_t i = 0; i < n && ok; ++i)
            ok = cell_ok(eos, nc[i], mesh.phase[i]);
        if (!ok) continue;

        mesh.cells = std::move(nc);
        if (mesh.has_interface) {
            mesh.edges[mesh.interface_edge] += resp.s * try_dt;
            mesh.last_speed = resp.s;
        }
        out.dt_used = try_dt;
        out.halvings = attempt;
        enforce_cell_bounds(mesh, cfg);
        return out;
    }
    throw StepRejectionError(
        "macro step rejected after " + std::to_string(cfg.max_halvings) +
        " dt halvings; interface response s = " + std::to_string(resp.s) +
        ", starred densities " + std::to_string(resp.star_L.rho) + ", " +
        std::to_string(resp.star_R.rho));
}

MacroRunResult run_macro(const VdwEos& eos, const MacroConfig& cfg, FrontMesh initial,
                         Surrogate& sur, const Surrogate::Oracle& oracle) {
    cfg.validate(eos);
    initial.validate(eos);
    MacroRunResult res;

    double micro_ms = 0.0;
    std::size_t micro_calls = 0;
    auto timed_oracle = [&](const InputPoint& x) {
        double t0 = now_ms();
        Sample s = oracle(x);
        micro_ms += now_ms() - t0;
        ++micro_calls;
        return s;
    };

    FrontMesh mesh = std::move(initial);
    double t = 0.0;
    double score_min = std::numeric_limits<double>::infinity();
    res.snapshots.emplace_back(t, mesh);
    if (mesh.has_interface) res.interface_track.emplace_back(t, mesh.interface_pos());

    std::size_t step = 0;
    while (t < cfg.t_end * (1.0 - 1e-12)) {
        double dt = std::min(cfl_dt(eos, mesh, cfg.cfl), cfg.t_end - t);
        double t0 = now_ms();
        double micro_before = micro_ms;
        StepOutcome so = macro_step(eos, mesh, dt, sur, timed_oracle, cfg);
        double step_ms = now_ms() - t0;
        double gate_micro_ms = micro_ms - micro_before;
        res.wall_ms_micro += gate_micro_ms;
        res.wall_ms_surrogate += so.gate_ms - gate_micro_ms;
        res.wall_ms_bulk += step_ms - so.gate_ms;
        t += so.dt_used;
        ++step;
        if (mesh.has_interface) {
            score_min = std::min(score_min, so.score);
            res.interface_track.emplace_back(t, mesh.interface_pos());
        }

        ReportRow row;
        row.step = step;
        row.t = t;
        row.micro_calls_total = micro_calls;
        row.score_min = score_min;
        row.wall_ms_bulk = res.wall_ms_bulk;
        row.wall_ms_micro = res.wall_ms_micro;
        row.wall_ms_surrogate = res.wall_ms_surrogate;
        res.report.push_back(row);

        if (step % cfg.output_stride == 0) res.snapshots.emplace_back(t, mesh);
    }
    if (res.snapshots.back().first != t) res.snapshots.emplace_back(t, mesh);

    res.final_mesh = std::move(mesh);
    res.t_final = t;
    res.steps = step;
    res.micro_calls = micro_calls;
    return res;
}

MacroRunResult run_macro(const VdwEos& eos, const MacroConfig& cfg, FrontMesh initial,
                         Surrogate& sur) {
    auto oracle = [&eos, &cfg](const InputPoint& x) {
        RiemannInput in{{x[0], x[1]}, {x[2], x[3]}};
        RiemannResponse r = solve_micro_riemann(eos, in, cfg.micro);
        return to_sample(in, r);
    };
    return run_macro(eos, cfg, std::move(initial), sur, oracle);
}

void write_mesh_csv(const std::string& path, const FrontMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "x_center,width,rho,v,phase\n";
    for (std::size_t i = 0; i < mesh.n_cells(); ++i) {
        out << fmt17(mesh.center(i)) << ',' << fmt17(mesh.width(i)) << ','
            << fmt17(mesh.cells[i].rho) << ',' << fmt17(mesh.cells[i].velocity()) << ','
            << (mesh.phase[i] == Phase::Liquid ? "liquid" : "vapor") << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "step,t,micro_calls_total,score_min,wall_ms_bulk,wall_ms_micro,wall_ms_surrogate\n";
    for (const ReportRow& r : rows) {
        out << r.step << ',' << fmt17(r.t) << ',' << r.micro_calls_total << ','
            << fmt17(r.score_min) << ',' << fmt17(r.wall_ms_bulk) << ','
            << fmt17(r.wall_ms_micro) << ',' << fmt17(r.wall_ms_surrogate) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_track_csv(const std::string& path,
                     const std::vector<std::pair<double, double>>& track) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "t,pos\n";
    for (const auto& [t, p] : track) out << fmt17(t) << ',' << fmt17(p) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

} // namespace chainflow
