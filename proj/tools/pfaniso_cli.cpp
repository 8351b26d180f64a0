#include "pfaniso/pfaniso.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace pfaniso;

namespace {

int cmd_verify(const std::string& suite, std::uint64_t seed, int cases, const std::string& json_out) {
    std::vector<std::string> names;
    if (suite == "all") {
        names = suite_names();
    } else {
        names.push_back(suite);
    }
    nlohmann::json report = nlohmann::json::array();
    bool ok = true;
    for (const auto& n : names) {
        SuiteReport r;
        try {
            r = run_suite(n, seed, cases);
        } catch (const UnknownSuite& e) {
            std::cerr << "error: " << e.what() << " (available: all";
            for (const auto& s : suite_names()) std::cerr << ", " << s;
            std::cerr << ")\n";
            return kExitUsage;
        }
        ok = ok && r.passed();
        report.push_back(r.to_json());
    }
    const std::string text = (names.size() == 1 ? report[0] : report).dump(2);
    if (json_out.empty()) {
        std::cout << text << "\n";
    } else {
        auto out = open_out(json_out);
        out << text << "\n";
    }
    return ok ? kExitOk : kExitFailed;
}

int cmd_run(const std::string& config, const std::string& out_dir, bool quiet) {
    const RunConfig cfg = load_config(config);
    RunOptions opt;
    if (!out_dir.empty()) opt.out_dir = out_dir;
    if (!quiet) opt.log = &std::cerr;
    const RunResult r = run_benchmark(cfg, opt);
    if (!quiet) {
        std::cerr << r.records.size() << " steps written to " << r.out_dir;
        if (r.stopped_early) std::cerr << " (stopped: tip advance reached)";
        std::cerr << "\n";
        if (r.exit_code == kExitNotConverged) std::cerr << "warning: some steps did not converge (see load_displacement.csv)\n";
    }
    return r.exit_code;
}

int cmd_sweep(const std::string& state_path, const std::string& config, const std::vector<double>& tip_xy,
              const std::string& csv_out) {
    const RunConfig cfg = load_config(config);
    const SimState s = read_state(state_path);
    const ElasticModel model = cfg.material.model();
    const Point2 tip = tip_xy.size() == 2 ? Point2(tip_xy[0], tip_xy[1]) : locate_tip(s, cfg.output.tip_threshold);
    const GThetaCurve c = sweep(s, model, cfg.law, tip, cfg.output.gtheta.fan_deg, cfg.r_i(), cfg.r_o(), cfg.pf.Gc);
    if (c.clipped) std::cerr << "warning: G-theta annulus clipped by the domain boundary\n";
    if (c.exceeds_gc) std::cerr << "note: G-theta exceeds Gc at some angle\n";
    std::ostringstream os;
    write_gtheta_csv(os, {c});
    if (csv_out.empty()) {
        std::cout << os.str();
    } else {
        auto out = open_out(csv_out);
        out << os.str();
    }
    std::cerr << "tip (" << tip.x() << ", " << tip.y() << "): G_theta^t peak at " << c.angles_deg[c.argmax_t()]
              << " deg, G_theta peak at " << c.angles_deg[c.argmax()] << " deg\n";
    return kExitOk;
}

int cmd_mesh_gen(const std::string& L, const std::string& h_band, const std::string& h_coarse,
                 const std::string& band, bool no_slit, const std::string& out) {
    SenPlateParams p;
    p.L = parse_quantity(L, Dimension::length, "--L");
    p.h_band = parse_quantity(h_band, Dimension::length, "--h-band");
    p.h_coarse = parse_quantity(h_coarse, Dimension::length, "--h-coarse");
    if (band == "tension") p.band = tension_band(p.L);
    else if (band == "shear") p.band = shear_band(p.L);
    else if (band == "none") p.band = Rect{0.0, 0.0, 0.0, 0.0};
    else throw ConfigError("--band: expected tension, shear or none");
    if (!(p.h_band > 0.0 && p.h_coarse >= p.h_band && p.L > 0.0))
        throw ConfigError("mesh-gen: need L > 0 and 0 < h_band <= h_coarse");
    p.slit = !no_slit;
    const Mesh m = generate_sen_plate(p);
    if (out.empty() || out == "-") {
        write_mesh(std::cout, m);
    } else {
        save_mesh(out, m);
        std::cerr << m.num_nodes() << " nodes, " << m.num_elements() << " triangles written to " << out << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anisotropic phase-field fracture: energy splits, plate benchmarks and G-theta post-processing"};
    app.require_subcommand(1);
    app.footer("Threads: PFANISO_THREADS (default 1). Exit codes: 0 ok, 1 verification failure, 2 config error, "
               "3 non-converged steps, 4 I/O error, 64 usage error.");

    std::string suite, json_out;
    std::uint64_t seed = 42;
    int cases = 1000;
    auto* verify = app.add_subcommand("verify", "Run a property suite (" + [] {
        std::string s = "all";
        for (const auto& n : suite_names()) s += ", " + n;
        return s;
    }() + ")");
    verify->add_option("suite", suite, "Suite name")->required();
    verify->add_option("--seed", seed, "Random seed");
    verify->add_option("--cases", cases, "Samples per class and law")->check(CLI::PositiveNumber);
    verify->add_option("--json", json_out, "Write the report to a file instead of stdout");

    std::string config, out_dir;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run a benchmark configuration");
    run->add_option("config", config, "Configuration file (YAML)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output.directory)");
    run->add_flag("-q,--quiet", quiet, "No progress output");

    std::string state_path, sweep_config, csv_out;
    std::vector<double> tip_xy;
    auto* sweep_cmd = app.add_subcommand("sweep-gtheta", "G-theta fan sweep on a saved state");
    sweep_cmd->add_option("state", state_path, "State file written by `run`")->required();
    sweep_cmd->add_option("config", sweep_config, "Configuration providing material, law and fan")->required();
    sweep_cmd->add_option("--tip", tip_xy, "Tip position x y [m] (default: located from the damage field)")->expected(2);
    sweep_cmd->add_option("--csv", csv_out, "Write the curve to a file instead of stdout");

    std::string L = "1 mm", h_band = "0.016 mm", h_coarse = "0.0625 mm", band = "tension", mesh_out;
    bool no_slit = false;
    auto* mesh_gen = app.add_subcommand("mesh-gen", "Generate the single-edge-notched plate mesh");
    mesh_gen->add_option("--L", L, "Plate side with unit")->capture_default_str();
    mesh_gen->add_option("--h-band", h_band, "Element size in the refinement band")->capture_default_str();
    mesh_gen->add_option("--h-coarse", h_coarse, "Element size elsewhere")->capture_default_str();
    mesh_gen->add_option("--band", band, "Refinement band: tension, shear or none")->capture_default_str();
    mesh_gen->add_flag("--no-slit", no_slit, "Do not split the notch faces");
    mesh_gen->add_option("-o,--out", mesh_out, "Output mesh file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*verify) return cmd_verify(suite, seed, cases, json_out);
        if (*run) return cmd_run(config, out_dir, quiet);
        if (*sweep_cmd) return cmd_sweep(state_path, sweep_config, tip_xy, csv_out);
        if (*mesh_gen) return cmd_mesh_gen(L, h_band, h_coarse, band, no_slit, mesh_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IOError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIO;
    } catch (const MeshError& e) {
        std::cerr << "mesh error: " << e.what() << "\n";
        return kExitIO;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailed;
    }
    return kExitUsage;
}
