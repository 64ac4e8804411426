// chainflow: command-line driver for the two-phase chain flow toolkit.
//
//   chainflow maxwell      --config c.json            saturation states
//   chainflow micro        --config c.json            one particle-chain Riemann run
//   chainflow macro        --config c.json            front-tracking run with gated sampling
//   chainflow sample-table --config c.json --store s  batch micro runs into a store
//
// Exit codes: 0 success, 1 bad input (config, paths, arguments),
// 2 a computation that started but could not finish.

#include "chainflow/config.hpp"
#include "chainflow/errors.hpp"
#include "chainflow/kirkwood.hpp"
#include "chainflow/macro.hpp"
#include "chainflow/micro.hpp"
#include "chainflow/surrogate.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace chainflow;

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::string store;
    bool dump_fields = false;
};

RunConfig load_with_overrides(const CliOptions& opt) {
    RunConfig cfg = load_config_file(opt.config_path);
    if (!opt.out_dir.empty()) cfg.io.out_dir = opt.out_dir;
    if (!opt.store.empty()) cfg.io.store = opt.store;
    if (opt.dump_fields) cfg.io.dump_fields = true;
    return cfg;
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.io.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::ofstream open_csv(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

void write_field_csv(const fs::path& path, const AveragedField& f) {
    std::ofstream out = open_csv(path);
    out << "x,rho,v,p\n";
    for (std::size_t j = 0; j < f.grid.n_bins; ++j)
        out << num(f.grid.center(j)) << ',' << num(f.rho[j]) << ',' << num(f.velocity[j]) << ','
            << num(f.pressure[j]) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

int cmd_maxwell(const RunConfig& cfg) {
    VdwEos eos = cfg.eos.make();
    const MaxwellState& mx = eos.maxwell();
    std::printf("T_ref        %s\n", num(eos.temperature()).c_str());
    std::printf("T_crit       %s\n", num(eos.critical_temperature()).c_str());
    std::printf("p_sat        %s\n", num(mx.p_sat).c_str());
    std::printf("tau_liquid   %s\n", num(mx.tau_l).c_str());
    std::printf("tau_vapor    %s\n", num(mx.tau_v).c_str());
    std::printf("rho_liquid   %s\n", num(1.0 / mx.tau_l).c_str());
    std::printf("rho_vapor    %s\n", num(1.0 / mx.tau_v).c_str());
    return 0;
}

int cmd_micro(const RunConfig& cfg) {
    VdwEos eos = cfg.eos.make();
    cfg.micro_input.validate(eos);

    MicroTrace trace;
    trace.keep_snapshots = cfg.io.dump_fields;
    RiemannResponse r = solve_micro_riemann(eos, cfg.micro_input, cfg.micro, &trace);

    std::printf("particles    %zu\n", cfg.micro.n);
    std::printf("t_end        %s\n", num(trace.t_end).c_str());
    std::printf("steps        %zu\n", trace.steps);
    std::printf("s            %s\n", num(r.s).c_str());
    std::printf("star_L       rho=%s v=%s\n", num(r.star_L.rho).c_str(),
                num(r.star_L.velocity()).c_str());
    std::printf("star_R       rho=%s v=%s\n", num(r.star_R.rho).c_str(),
                num(r.star_R.velocity()).c_str());
    std::printf("rh_mass      %s\n", num(r.rh_mass).c_str());
    std::printf("rh_mom       %s\n", num(r.rh_mom).c_str());
    std::printf("flagged      %s\n", r.flagged ? r.flag_note.c_str() : "no");

    // Field output on request, and unconditionally for flagged runs so a
    // suspicious extraction always leaves something to look at.
    if (cfg.io.dump_fields || r.flagged) {
        fs::path dir = ensure_out_dir(cfg);
        write_field_csv(dir / "micro_field.csv", trace.final_field);
        {
            std::ofstream out = open_csv(dir / "micro_track.csv");
            out << "t,pos\n";
            for (std::size_t i = 0; i < trace.track.times.size(); ++i)
                out << num(trace.track.times[i]) << ',' << num(trace.track.positions[i]) << '\n';
            if (!out) throw IoError("write failed: micro_track.csv");
        }
        if (trace.keep_snapshots) {
            std::ofstream out = open_csv(dir / "micro_snapshots.csv");
            out << "t,x,rho,v,p\n";
            for (const auto& [t, f] : trace.snapshots)
                for (std::size_t j = 0; j < f.grid.n_bins; ++j)
                    out << num(t) << ',' << num(f.grid.center(j)) << ',' << num(f.rho[j]) << ','
                        << num(f.velocity[j]) << ',' << num(f.pressure[j]) << '\n';
            if (!out) throw IoError("write failed: micro_snapshots.csv");
        }
        std::printf("fields       %s\n", dir.string().c_str());
    }
    return 0;
}

int cmd_macro(const RunConfig& cfg) {
    VdwEos eos = cfg.eos.make();
    const MacroScenario& sc = cfg.scenario;
    FrontMesh mesh = make_two_phase_mesh(eos, cfg.macro.x_lo, cfg.macro.x_hi, cfg.macro.n_cells,
                                         sc.interface_pos,
                                         {sc.rho_left, sc.rho_left * sc.v_left},
                                         {sc.rho_right, sc.rho_right * sc.v_right});

    Surrogate sur(cfg.macro.gate);
    if (!cfg.io.store.empty() && fs::exists(cfg.io.store)) sur.load_csv(cfg.io.store);
    std::size_t preloaded = sur.size();

    MacroRunResult res = run_macro(eos, cfg.macro, std::move(mesh), sur);

    fs::path dir = ensure_out_dir(cfg);
    write_track_csv((dir / "macro_track.csv").string(), res.interface_track);
    write_report_csv((dir / "macro_report.csv").string(), res.report);
    write_mesh_csv((dir / "macro_final.csv").string(), res.final_mesh);
    if (cfg.io.dump_fields) {
        std::ofstream out = open_csv(dir / "macro_snapshots.csv");
        out << "t,x_center,width,rho,v,phase\n";
        for (const auto& [t, snap] : res.snapshots)
            for (std::size_t i = 0; i < snap.n_cells(); ++i)
                out << num(t) << ',' << num(snap.center(i)) << ',' << num(snap.width(i)) << ','
                    << num(snap.cells[i].rho) << ',' << num(snap.cells[i].velocity()) << ','
                    << (snap.phase[i] == Phase::Liquid ? "liquid" : "vapor") << '\n';
        if (!out) throw IoError("write failed: macro_snapshots.csv");
    }
    if (!cfg.io.store.empty()) sur.save_csv(cfg.io.store);

    std::printf("steps        %zu\n", res.steps);
    std::printf("t_final      %s\n", num(res.t_final).c_str());
    std::printf("cells        %zu\n", res.final_mesh.n_cells());
    std::printf("micro_calls  %zu\n", res.micro_calls);
    if (res.final_mesh.has_interface && res.interface_track.size() >= 2) {
        InterfaceTrack tr;
        for (const auto& [t, p] : res.interface_track) {
            tr.times.push_back(t);
            tr.positions.push_back(p);
        }
        std::printf("interface    %s -> %s\n", num(tr.positions.front()).c_str(),
                    num(tr.positions.back()).c_str());
        std::printf("speed_fit    %s\n", num(estimate_speed(tr, cfg.micro.fit_fraction)).c_str());
    }
    std::printf("wall_ms      bulk=%.1f micro=%.1f surrogate=%.1f\n", res.wall_ms_bulk,
                res.wall_ms_micro, res.wall_ms_surrogate);
    if (!cfg.io.store.empty())
        std::printf("store        %zu samples (%zu preloaded) -> %s\n", sur.size(), preloaded,
                    cfg.io.store.c_str());
    std::printf("out          %s\n", dir.string().c_str());
    return 0;
}

unsigned thread_budget(std::size_t rows) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("CHAINFLOW_THREADS")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || v == 0)
            throw ConfigError("CHAINFLOW_THREADS must be a positive integer");
        hw = static_cast<unsigned>(std::min(v, 1024ul));
    }
    if (rows == 0) return 1;
    return static_cast<unsigned>(std::min<std::size_t>(hw, rows));
}

int cmd_sample_table(const RunConfig& cfg) {
    if (cfg.io.store.empty())
        throw ConfigError("sample-table needs a store path (io.store or --store)");
    VdwEos eos = cfg.eos.make();

    Surrogate sur(cfg.gate);
    if (fs::exists(cfg.io.store)) sur.load_csv(cfg.io.store);
    std::size_t preloaded = sur.size();

    const auto& rows = cfg.inputs;
    std::vector<std::optional<Sample>> results(rows.size());
    std::vector<std::string> failures(rows.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= rows.size()) return;
            try {
                const auto& r = rows[i];
                RiemannInput in{{r[0], r[0] * r[1]}, {r[2], r[2] * r[3]}};
                in.validate(eos);
                results[i] = to_sample(in, solve_micro_riemann(eos, in, cfg.micro));
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    unsigned n_threads = thread_budget(rows.size());
    std::vector<std::thread> pool;
    for (unsigned k = 0; k + 1 < n_threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    // Append in row order so the store contents never depend on scheduling.
    std::size_t ok = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (results[i]) {
            sur.add(*results[i]);
            ++ok;
            std::printf("row %zu: s=%s rho*=(%s, %s)\n", i, num(results[i]->y[0]).c_str(),
                        num(results[i]->y[1]).c_str(), num(results[i]->y[3]).c_str());
        } else {
            std::fprintf(stderr, "row %zu failed: %s\n", i, failures[i].c_str());
        }
    }
    sur.save_csv(cfg.io.store);
    std::printf("store        %zu samples (%zu preloaded, %zu of %zu rows added) -> %s\n",
                sur.size(), preloaded, ok, rows.size(), cfg.io.store.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"isothermal two-phase flow: particle-chain sampling and front tracking"};
    app.require_subcommand(1);

    CliOptions opt;
    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory (overrides io.out_dir)");
        sub->add_option("--store", opt.store, "sample store CSV (overrides io.store)");
        sub->add_flag("--dump-fields", opt.dump_fields, "write field snapshot CSVs");
    };
    CLI::App* maxwell = app.add_subcommand("maxwell", "print the saturation states");
    CLI::App* micro = app.add_subcommand("micro", "run one particle-chain Riemann problem");
    CLI::App* macro = app.add_subcommand("macro", "run the front-tracking solver");
    CLI::App* table = app.add_subcommand("sample-table", "batch micro runs into a sample store");
    for (CLI::App* sub : {maxwell, micro, macro, table}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg = load_with_overrides(opt);
        if (app.got_subcommand(maxwell)) return cmd_maxwell(cfg);
        if (app.got_subcommand(micro)) return cmd_micro(cfg);
        if (app.got_subcommand(macro)) return cmd_macro(cfg);
        return cmd_sample_table(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
}
