#pragma once

// Config-driven load stepping of the notched plate with per-step output.

#include "pfaniso/config.hpp"
#include "pfaniso/io.hpp"
#include "pfaniso/solver.hpp"

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pfaniso {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;   // a verification property failed
inline constexpr int kExitUsage = 64;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitIO = 4;

struct TipRecord {
    int step = 0;
    double ubar = 0.0;
    Point2 tip{0.0, 0.0};
    double advance = 0.0;   ///< distance from the initial tip [m]
};

inline const char* kTipCsvHeader = "step,ubar_m,tip_x_m,tip_y_m,advance_m";

inline std::string tip_csv_row(const TipRecord& t) {
    return std::to_string(t.step) + "," + fmt(t.ubar) + "," + fmt(t.tip.x()) + "," + fmt(t.tip.y()) + "," +
           fmt(t.advance);
}

inline std::vector<TipRecord> read_tip_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kTipCsvHeader) throw IOError("tip csv: unexpected header");
    std::vector<TipRecord> rows;
    int ln = 1;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto c = detail::split_csv(line);
        if (c.size() != 5) throw IOError("tip csv line " + std::to_string(ln) + ": expected 5 columns");
        TipRecord t;
        t.step = static_cast<int>(detail::to_double(c[0], ln));
        t.ubar = detail::to_double(c[1], ln);
        t.tip = {detail::to_double(c[2], ln), detail::to_double(c[3], ln)};
        t.advance = detail::to_double(c[4], ln);
        rows.push_back(t);
    }
    return rows;
}

struct RunOptions {
    std::optional<std::string> out_dir;   ///< overrides output.directory
    std::ostream* log = nullptr;          ///< per-step progress lines
};

struct RunResult {
    int exit_code = kExitOk;
    std::string out_dir;
    std::vector<LoadStepRecord> records;
    std::vector<GThetaCurve> curves;
    std::vector<TipRecord> tips;
    bool stopped_early = false;
    SimState final_state;
};

/// Mesh named by the config: a file (checked for resolution) or the generated plate.
inline std::shared_ptr<const Mesh> build_mesh(const RunConfig& cfg) {
    if (!cfg.mesh.file.empty()) {
        Mesh m = load_mesh(cfg.mesh_path());
        check_resolution(cfg, m);
        return std::make_shared<const Mesh>(std::move(m));
    }
    return std::make_shared<const Mesh>(generate_sen_plate(cfg.mesh.plate));
}

/// Initial state; with a damage notch, d = 1 on the nodes of the notch line.
inline SimState initial_state(const RunConfig& cfg, std::shared_ptr<const Mesh> mesh) {
    SimState s(std::move(mesh));
    if (cfg.mesh.crack == CrackKind::damage) {
        const Mesh& m = *s.mesh;
        const auto bb = m.bounding_box();
        const double tol = 1e-9 * (bb[1] - bb[0]);
        for (int n = 0; n < m.num_nodes(); ++n) {
            const Point2& p = m.nodes[static_cast<std::size_t>(n)];
            if (std::abs(p.y()) <= tol && p.x() <= tol) s.d(n) = s.d_prev(n) = 1.0;
        }
    }
    return s;
}

inline std::string numbered(const std::string& dir, const char* stem, int step, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06d.%s", stem, step, ext);
    return (std::filesystem::path(dir) / buf).string();
}

/// Runs the configured load schedule. Writes load_displacement.csv,
/// gtheta.csv, tip.csv, periodic VTK/state files and final.state into the
/// output directory. Throws ConfigError, MeshError or IOError.
inline RunResult run_benchmark(const RunConfig& cfg, const RunOptions& opt = {}) {
    RunResult res;
    res.out_dir = opt.out_dir.value_or(cfg.output.directory);
    std::error_code ec;
    std::filesystem::create_directories(res.out_dir, ec);
    if (ec) throw IOError("cannot create output directory '" + res.out_dir + "': " + ec.message());
    const auto path = [&](const char* name) { return (std::filesystem::path(res.out_dir) / name).string(); };

    const ElasticModel model = detail::rethrow_as_config("material", [&] { return cfg.material.model(); });
    std::shared_ptr<const Mesh> mesh;
    try {
        mesh = build_mesh(cfg);
    } catch (const MeshError& e) {
        throw ConfigError(std::string("mesh: ") + e.what());
    }
    SimState s = initial_state(cfg, mesh);
    const Point2 tip0 = mesh->slit.present() ? mesh->slit.tip_point : Point2(0.0, 0.0);
    const std::vector<int> reaction_dofs = plate_reaction_dofs(*mesh, cfg.mode);
    if (reaction_dofs.empty()) throw ConfigError("mesh: no 'top' node set to load");

    auto load_csv = open_out(path("load_displacement.csv"));
    auto gtheta_csv = open_out(path("gtheta.csv"));
    auto tip_csv = open_out(path("tip.csv"));
    load_csv << kLoadCsvHeader << "\n";
    gtheta_csv << kGThetaCsvHeader << "\n";
    tip_csv << kTipCsvHeader << "\n";

    Workspace ws(cfg.linear);
    bool warned_clip = false;
    for (double ubar : cfg.schedule()) {
        const StepResult r = staggered_step(s, ubar, plate_dirichlet(*mesh, cfg.mode, ubar), reaction_dofs, model,
                                            cfg.law, cfg.pf, cfg.solver, &ws);
        LoadStepRecord rec{s.step, ubar, r.reaction, r.converged, r.iterations, r.max_d};
        res.records.push_back(rec);
        load_csv << load_csv_row(rec) << "\n" << std::flush;
        if (!r.converged) res.exit_code = kExitNotConverged;

        TipRecord tip{s.step, ubar, locate_tip(s, cfg.output.tip_threshold), 0.0};
        tip.advance = (tip.tip - tip0).norm();
        res.tips.push_back(tip);
        tip_csv << tip_csv_row(tip) << "\n" << std::flush;

        if (cfg.output.gtheta.enabled && s.step % cfg.output.gtheta.every == 0) {
            GThetaCurve c = sweep(s, model, cfg.law, tip.tip, cfg.output.gtheta.fan_deg, cfg.r_i(), cfg.r_o(), cfg.pf.Gc);
            if (c.clipped && !warned_clip && opt.log) {
                *opt.log << "warning: G-theta annulus clipped by the domain boundary at step " << s.step << "\n";
                warned_clip = true;
            }
            gtheta_csv << gtheta_csv_rows(c) << std::flush;
            res.curves.push_back(std::move(c));
        }
        if (cfg.output.vtk_every > 0 && s.step % cfg.output.vtk_every == 0)
            write_vtk(numbered(res.out_dir, "fields", s.step, "vtk"), s, element_driving_energy(s, model, cfg.law));
        if (cfg.output.state_every > 0 && s.step % cfg.output.state_every == 0)
            write_state(numbered(res.out_dir, "state", s.step, "state"), s);
        if (opt.log) {
            char buf[200];
            std::snprintf(buf, sizeof buf, "step %d u=%.4g m R=%.6g N/m iters=%d%s max_d=%.3f tip=(%.4g, %.4g)\n",
                          s.step, ubar, r.reaction, r.iterations, r.converged ? "" : " (not converged)", r.max_d,
                          tip.tip.x(), tip.tip.y());
            *opt.log << buf << std::flush;
        }
        if (cfg.stop_tip_advance > 0.0 && tip.advance >= cfg.stop_tip_advance) {
            res.stopped_early = true;
            break;
        }
    }
    if (!load_csv || !gtheta_csv || !tip_csv) throw IOError("write failure in '" + res.out_dir + "'");
    write_state(path("final.state"), s);
    if (cfg.output.vtk_every > 0) write_vtk(path("final.vtk"), s, element_driving_energy(s, model, cfg.law));
    res.final_state = std::move(s);
    return res;
}

}  // namespace pfaniso
