#pragma once

// Run configuration: a YAML document whose dimensional values carry explicit
// units ("210 GPa", "0.032 mm", "2.7 kN/m", "45 deg").

#include "pfaniso/elasticity.hpp"
#include "pfaniso/fem.hpp"
#include "pfaniso/gtheta.hpp"
#include "pfaniso/mesh.hpp"
#include "pfaniso/phasefield.hpp"
#include "pfaniso/split.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfaniso {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Dimension { none, length, stress, toughness, angle };

namespace detail {

struct UnitEntry {
    const char* name;
    Dimension dim;
    double factor;
};

inline constexpr UnitEntry kUnits[] = {
    {"m", Dimension::length, 1.0},        {"mm", Dimension::length, 1e-3},
    {"um", Dimension::length, 1e-6},      {"nm", Dimension::length, 1e-9},
    {"Pa", Dimension::stress, 1.0},       {"kPa", Dimension::stress, 1e3},
    {"MPa", Dimension::stress, 1e6},      {"GPa", Dimension::stress, 1e9},
    {"N/m", Dimension::toughness, 1.0},   {"kN/m", Dimension::toughness, 1e3},
    {"J/m^2", Dimension::toughness, 1.0}, {"kJ/m^2", Dimension::toughness, 1e3},
    {"rad", Dimension::angle, 1.0},       {"deg", Dimension::angle, std::numbers::pi / 180.0},
};

inline std::string unit_list(Dimension dim) {
    std::string out;
    for (const auto& u : kUnits)
        if (u.dim == dim) out += (out.empty() ? "" : ", ") + std::string(u.name);
    return out;
}

inline double parse_number(const std::string& tok, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": '" + tok + "' is not a number");
    }
}

}  // namespace detail

/// Parses "<number> [unit]" into SI. Dimensional quantities must carry a unit;
/// dimensionless ones must not.
inline double parse_quantity(const std::string& text, Dimension dim, const std::string& where) {
    std::istringstream ss(text);
    std::string num, unit, extra;
    ss >> num >> unit >> extra;
    if (num.empty()) throw ConfigError(where + ": empty value");
    if (!extra.empty()) throw ConfigError(where + ": unexpected trailing text in '" + text + "'");
    const double v = detail::parse_number(num, where);
    if (dim == Dimension::none) {
        if (!unit.empty()) throw ConfigError(where + ": dimensionless value must not carry a unit ('" + unit + "')");
        return v;
    }
    if (unit.empty()) throw ConfigError(where + ": missing unit (expected one of " + detail::unit_list(dim) + ")");
    for (const auto& u : detail::kUnits)
        if (u.dim == dim && unit == u.name) return v * u.factor;
    throw ConfigError(where + ": unit '" + unit + "' not allowed here (expected one of " + detail::unit_list(dim) + ")");
}

struct MaterialSpec {
    SymmetryClass symmetry = SymmetryClass::orthotropic;
    OrthotropicConstants orthotropic = benchmark_orthotropic_constants();
    PoissonConvention poisson = PoissonConvention::row;
    double E = 0.0, nu = 0.0;
    CubicConstants cubic{};
    std::array<double, 21> full{};
    double alpha = 0.0;   ///< angle of the material axis e1 from +x [rad]

    /// Stiffness in the material frame.
    ElasticModel material_frame() const {
        switch (symmetry) {
            case SymmetryClass::isotropic: return from_isotropic(E, nu);
            case SymmetryClass::cubic: return from_cubic(cubic);
            case SymmetryClass::orthotropic: return from_orthotropic(orthotropic, poisson);
            case SymmetryClass::full: return from_full(full);
        }
        throw ConfigError("material: unknown symmetry class");
    }
    /// Stiffness in the global (x, y) frame: material axes at +alpha.
    ElasticModel model() const { return material_frame().rotated(-alpha); }
};

struct LoadStage {
    double increment = 0.0;
    double until = 0.0;
};

enum class CrackKind { slit, damage };

struct MeshSpec {
    std::string file;             ///< empty: generated plate
    SenPlateParams plate{};
    CrackKind crack = CrackKind::slit;
};

struct GThetaSpec {
    bool enabled = true;
    int every = 1;
    std::vector<double> fan_deg = default_fan();
    std::optional<double> r_i, r_o;
};

struct OutputSpec {
    std::string directory = "out";
    int vtk_every = 0;
    int state_every = 0;
    GThetaSpec gtheta{};
    double tip_threshold = 0.95;
};

struct RunConfig {
    std::string source;           ///< path of the config file, if any
    MaterialSpec material{};
    SplitLaw law = SplitLaw::no_tension;
    PFModel pf{};
    MeshSpec mesh{};
    LoadingMode mode = LoadingMode::tension;
    std::vector<LoadStage> stages{{2e-7, 2e-6}, {1e-8, 2e-5}};
    double stop_tip_advance = 0.0;   ///< stop once the tip moved this far; 0 disables
    StaggeredConfig solver{};
    LinearSolver linear = LinearSolver::direct;
    OutputSpec output{};

    double r_i() const { return output.gtheta.r_i.value_or(4.0 * pf.ell); }
    double r_o() const { return output.gtheta.r_o.value_or(2.5 * r_i()); }

    /// Prescribed displacement at every step.
    std::vector<double> schedule() const {
        std::vector<double> out;
        double start = 0.0;
        for (const auto& st : stages) {
            // Multiples of the increment from the stage start, ending exactly on the target.
            const long n = static_cast<long>(std::ceil((st.until - start) / st.increment - 1e-9));
            for (long k = 1; k <= n; ++k) out.push_back(k == n ? st.until : start + static_cast<double>(k) * st.increment);
            start = st.until;
        }
        return out;
    }

    std::filesystem::path base_dir() const {
        return source.empty() ? std::filesystem::current_path() : std::filesystem::path(source).parent_path();
    }

    std::string mesh_path() const {
        if (mesh.file.empty()) return {};
        std::filesystem::path p(mesh.file);
        return (p.is_absolute() ? p : base_dir() / p).string();
    }

    void validate() const;
};

namespace detail {

/// Tracks which keys of a map were consumed so typos are reported.
class Section {
public:
    Section(const YAML::Node& node, std::string name) : node_(node), name_(std::move(name)) {
        if (node_ && !node_.IsMap()) throw ConfigError(name_ + ": expected a mapping");
    }

    bool has(const std::string& key) const { return node_ && node_[key]; }

    std::string where(const std::string& key) const { return name_ + "." + key; }

    std::string text(const std::string& key) {
        used_.insert(key);
        const YAML::Node v = node_[key];
        if (!v.IsScalar()) throw ConfigError(where(key) + ": expected a scalar");
        return v.Scalar();
    }

    std::optional<std::string> opt_text(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return text(key);
    }

    std::optional<double> opt_quantity(const std::string& key, Dimension dim) {
        if (!has(key)) return std::nullopt;
        return parse_quantity(text(key), dim, where(key));
    }

    double quantity(const std::string& key, Dimension dim) {
        if (!has(key)) throw ConfigError(where(key) + ": required");
        return parse_quantity(text(key), dim, where(key));
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const double v = parse_quantity(text(key), Dimension::none, where(key));
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(where(key) + ": expected an integer");
        return static_cast<int>(v);
    }

    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const std::string t = text(key);
        if (t == "true" || t == "on" || t == "yes") return true;
        if (t == "false" || t == "off" || t == "no") return false;
        throw ConfigError(where(key) + ": expected true/false");
    }

    YAML::Node child(const std::string& key) {
        used_.insert(key);
        return node_[key];
    }

    void finish() const {
        if (!node_) return;
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (!used_.count(k)) throw ConfigError(name_ + ": unknown key '" + k + "'");
        }
    }

private:
    YAML::Node node_;
    std::string name_;
    std::set<std::string> used_;
};

inline SymmetryClass parse_symmetry(const std::string& s, const std::string& where) {
    if (s == "isotropic") return SymmetryClass::isotropic;
    if (s == "cubic") return SymmetryClass::cubic;
    if (s == "orthotropic") return SymmetryClass::orthotropic;
    if (s == "full") return SymmetryClass::full;
    throw ConfigError(where + ": unknown symmetry '" + s + "' (isotropic, cubic, orthotropic, full)");
}

template <class F>
auto rethrow_as_config(const std::string& where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline MaterialSpec parse_material(const YAML::Node& node) {
    Section sec(node, "material");
    MaterialSpec m;
    if (!node) throw ConfigError("material: section required");
    m.symmetry = parse_symmetry(sec.text("symmetry"), sec.where("symmetry"));
    m.alpha = sec.opt_quantity("alpha", Dimension::angle).value_or(0.0);
    const auto stress = [&](const char* k) { return sec.quantity(k, Dimension::stress); };
    const auto ratio = [&](const char* k) { return sec.quantity(k, Dimension::none); };
    switch (m.symmetry) {
        case SymmetryClass::isotropic:
            m.E = stress("E");
            m.nu = ratio("nu");
            break;
        case SymmetryClass::cubic:
            m.cubic.C1111 = stress("C1111");
            m.cubic.C1122 = stress("C1122");
            m.cubic.C2323 = stress("C2323");
            m.cubic.C1133 = sec.opt_quantity("C1133", Dimension::stress);
            m.cubic.C2233 = sec.opt_quantity("C2233", Dimension::stress);
            m.cubic.C1313 = sec.opt_quantity("C1313", Dimension::stress);
            m.cubic.C1212 = sec.opt_quantity("C1212", Dimension::stress);
            break;
        case SymmetryClass::orthotropic: {
            auto& k = m.orthotropic;
            k.E = {stress("E1"), stress("E2"), stress("E3")};
            k.nu23 = ratio("nu23");
            k.nu13 = ratio("nu13");
            k.nu12 = ratio("nu12");
            k.G23 = stress("G23");
            k.G13 = stress("G13");
            k.G12 = stress("G12");
            if (auto c = sec.opt_text("poisson_convention")) {
                if (*c == "row") m.poisson = PoissonConvention::row;
                else if (*c == "column") m.poisson = PoissonConvention::column;
                else throw ConfigError("material.poisson_convention: expected row or column");
            }
            break;
        }
        case SymmetryClass::full: {
            // 21 upper-triangle Kelvin entries, row by row, sharing one unit.
            const std::string t = sec.text("kelvin_upper");
            std::istringstream ss(t);
            std::vector<std::string> toks;
            for (std::string w; ss >> w;) toks.push_back(w);
            if (toks.size() != 22) throw ConfigError("material.kelvin_upper: expected 21 numbers followed by a unit");
            for (std::size_t i = 0; i < 21; ++i)
                m.full[i] = parse_quantity(toks[i] + " " + toks[21], Dimension::stress, "material.kelvin_upper");
            break;
        }
    }
    sec.finish();
    rethrow_as_config("material", [&] { return m.material_frame(); });
    return m;
}

inline Rect parse_band(const YAML::Node& node, double L) {
    if (node.IsScalar()) {
        const std::string b = node.Scalar();
        if (b == "tension") return tension_band(L);
        if (b == "shear") return shear_band(L);
        if (b == "none") return Rect{0.0, 0.0, 0.0, 0.0};
        throw ConfigError("mesh.band: expected tension, shear, none or a box");
    }
    Section sec(node, "mesh.band");
    Rect r;
    r.xmin = sec.quantity("xmin", Dimension::length);
    r.xmax = sec.quantity("xmax", Dimension::length);
    r.ymin = sec.quantity("ymin", Dimension::length);
    r.ymax = sec.quantity("ymax", Dimension::length);
    sec.finish();
    if (!(r.xmax > r.xmin && r.ymax > r.ymin)) throw ConfigError("mesh.band: empty box");
    return r;
}

}  // namespace detail

inline RunConfig parse_config(const YAML::Node& root, const std::string& source = {}) {
    if (!root || !root.IsMap()) throw ConfigError("config: expected a mapping at the top level");
    RunConfig c;
    c.source = source;
    detail::Section top(root, "config");

    c.material = detail::parse_material(top.child("material"));

    {
        detail::Section sec(top.child("split"), "split");
        if (auto v = sec.opt_text("law"))
            c.law = detail::rethrow_as_config("split.law", [&] { return parse_split_law(*v); });
        sec.finish();
    }
    {
        detail::Section sec(top.child("phasefield"), "phasefield");
        if (auto v = sec.opt_text("variant"))
            c.pf.variant = detail::rethrow_as_config("phasefield.variant", [&] { return parse_pf_variant(*v); });
        c.pf.ell = sec.opt_quantity("ell", Dimension::length).value_or(c.pf.ell);
        c.pf.Gc = sec.opt_quantity("Gc", Dimension::toughness).value_or(c.pf.Gc);
        c.pf.residual = sec.opt_quantity("residual_stiffness", Dimension::none).value_or(c.pf.residual);
        sec.finish();
        detail::rethrow_as_config("phasefield", [&] { c.pf.validate(); return 0; });
    }
    {
        detail::Section sec(top.child("mesh"), "mesh");
        if (auto f = sec.opt_text("file")) c.mesh.file = *f;
        if (auto g = sec.opt_text("generator")) {
            if (*g != "sen_plate") throw ConfigError("mesh.generator: only sen_plate is available");
            if (!c.mesh.file.empty()) throw ConfigError("mesh: give either file or generator, not both");
        }
        auto& p = c.mesh.plate;
        p.L = sec.opt_quantity("L", Dimension::length).value_or(p.L);
        p.h_band = sec.opt_quantity("h_band", Dimension::length).value_or(p.h_band);
        p.h_coarse = sec.opt_quantity("h_coarse", Dimension::length).value_or(p.h_coarse);
        p.band = tension_band(p.L);
        if (sec.has("band")) p.band = detail::parse_band(sec.child("band"), p.L);
        if (auto k = sec.opt_text("crack")) {
            if (*k == "slit") c.mesh.crack = CrackKind::slit;
            else if (*k == "damage") c.mesh.crack = CrackKind::damage;
            else throw ConfigError("mesh.crack: expected slit or damage");
        }
        p.slit = c.mesh.crack == CrackKind::slit;
        sec.finish();
    }
    {
        detail::Section sec(top.child("loading"), "loading");
        if (auto m = sec.opt_text("mode"))
            c.mode = detail::rethrow_as_config("loading.mode", [&] { return parse_loading_mode(*m); });
        if (sec.has("stages")) {
            const YAML::Node st = sec.child("stages");
            if (!st.IsSequence() || st.size() == 0) throw ConfigError("loading.stages: expected a non-empty list");
            c.stages.clear();
            for (std::size_t i = 0; i < st.size(); ++i) {
                detail::Section s(st[i], "loading.stages[" + std::to_string(i) + "]");
                c.stages.push_back({s.quantity("increment", Dimension::length), s.quantity("until", Dimension::length)});
                s.finish();
            }
        }
        c.stop_tip_advance = sec.opt_quantity("stop_tip_advance", Dimension::length).value_or(0.0);
        sec.finish();
    }
    {
        detail::Section sec(top.child("solver"), "solver");
        auto& s = c.solver;
        s.max_iters = sec.integer("max_iters", s.max_iters);
        s.tol_d = sec.opt_quantity("tol_d", Dimension::none).value_or(s.tol_d);
        s.tol_u = sec.opt_quantity("tol_u", Dimension::none).value_or(s.tol_u);
        s.max_newton = sec.integer("max_newton", s.max_newton);
        if (auto v = sec.opt_text("linear_solver"))
            c.linear = detail::rethrow_as_config("solver.linear_solver", [&] { return parse_linear_solver(*v); });
        if (auto v = sec.opt_text("irreversibility"))
            if (*v != "node_clamp") throw ConfigError("solver.irreversibility: only node_clamp is supported");
        sec.finish();
        detail::rethrow_as_config("solver", [&] { s.validate(); return 0; });
    }
    {
        detail::Section sec(top.child("output"), "output");
        auto& o = c.output;
        if (auto d = sec.opt_text("directory")) o.directory = *d;
        o.vtk_every = sec.integer("vtk_every", o.vtk_every);
        o.state_every = sec.integer("state_every", o.state_every);
        o.tip_threshold = sec.opt_quantity("tip_threshold", Dimension::none).value_or(o.tip_threshold);
        if (sec.has("gtheta")) {
            detail::Section g(sec.child("gtheta"), "output.gtheta");
            o.gtheta.enabled = g.flag("enabled", true);
            o.gtheta.every = g.integer("every", 1);
            if (g.has("fan")) {
                detail::Section f(g.child("fan"), "output.gtheta.fan");
                const double from = f.quantity("from", Dimension::angle);
                const double to = f.quantity("to", Dimension::angle);
                const double step = f.quantity("step", Dimension::angle);
                f.finish();
                if (!(step > 0.0) || to < from) throw ConfigError("output.gtheta.fan: need from <= to and step > 0");
                o.gtheta.fan_deg.clear();
                const double k = 180.0 / std::numbers::pi;
                const long n = std::lround(std::floor((to - from) / step + 1e-9));
                for (long i = 0; i <= n; ++i) o.gtheta.fan_deg.push_back(std::round((from + i * step) * k * 1e9) / 1e9);
            }
            o.gtheta.r_i = g.opt_quantity("r_i", Dimension::length);
            o.gtheta.r_o = g.opt_quantity("r_o", Dimension::length);
            g.finish();
        }
        sec.finish();
    }
    top.finish();
    c.validate();
    return c;
}

inline RunConfig parse_config_text(const std::string& text, const std::string& source = {}) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    return parse_config(root, source);
}

inline RunConfig load_config(const std::string& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config: file '" + path + "' does not exist");
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::Exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(root, path);
}

inline void RunConfig::validate() const {
    // Load schedule: positive increments, strictly increasing stage targets.
    double prev = 0.0;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const auto& s = stages[i];
        const std::string w = "loading.stages[" + std::to_string(i) + "]";
        if (!(s.increment > 0.0)) throw ConfigError(w + ": increment must be positive");
        if (!(s.until > prev)) throw ConfigError(w + ": schedule must be monotonic (until must exceed the previous target)");
        prev = s.until;
    }
    if (stages.empty()) throw ConfigError("loading: empty schedule");
    if (stop_tip_advance < 0.0) throw ConfigError("loading.stop_tip_advance: must be non-negative");

    if (!mesh.file.empty()) {
        if (!std::filesystem::exists(mesh_path()))
            throw ConfigError("mesh.file: '" + mesh_path() + "' does not exist");
    } else {
        const auto& p = mesh.plate;
        if (!(p.L > 0.0 && p.h_band > 0.0 && p.h_coarse >= p.h_band))
            throw ConfigError("mesh: need L > 0 and 0 < h_band <= h_coarse");
        const double ratio = pf.ell / p.h_band;
        if (ratio < 2.0)
            throw ConfigError("mesh: resolution ratio ell/h = " + std::to_string(ratio) +
                              " is below 2; refine h_band or increase ell");
    }
    if (output.vtk_every < 0 || output.state_every < 0 || output.gtheta.every < 1)
        throw ConfigError("output: step intervals must be non-negative (gtheta.every >= 1)");
    if (!(output.tip_threshold > 0.0 && output.tip_threshold <= 1.0))
        throw ConfigError("output.tip_threshold: must lie in (0, 1]");
    if (!(r_i() > 0.0 && r_o() > r_i())) throw ConfigError("output.gtheta: need 0 < r_i < r_o");
    if (output.gtheta.fan_deg.empty()) throw ConfigError("output.gtheta.fan: empty");
}

/// Mesh validation that needs the mesh itself (file meshes): ell/h >= 2 with
/// h the finest element size.
inline void check_resolution(const RunConfig& c, const Mesh& m) {
    double h = std::numeric_limits<double>::infinity();
    for (int e = 0; e < m.num_elements(); ++e) h = std::min(h, m.element_size(e));
    const double ratio = c.pf.ell / h;
    if (ratio < 2.0)
        throw ConfigError("mesh: resolution ratio ell/h = " + std::to_string(ratio) +
                          " is below 2 for the finest element of '" + c.mesh.file + "'");
}

}  // namespace pfaniso
