#pragma once

// File formats: legacy VTK fields, CSV curves and restartable state files.

#include "pfaniso/gtheta.hpp"
#include "pfaniso/solver.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfaniso {

class IOError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot write '" + path + "'");
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot read '" + path + "'");
    return in;
}

// ---------------------------------------------------------------------------
// VTK legacy unstructured grid

struct VtkFields {
    std::vector<Point2> points;
    std::vector<std::array<int, 3>> cells;
    std::vector<Eigen::Vector2d> u;
    std::vector<double> d;
    std::vector<double> psi_t;
};

inline void write_vtk(std::ostream& os, const SimState& s, const std::vector<double>& psi_t) {
    const Mesh& m = *s.mesh;
    os << "# vtk DataFile Version 3.0\n";
    os << "pfaniso step " << s.step << " ubar " << fmt(s.ubar) << "\n";
    os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << m.num_nodes() << " double\n";
    for (const auto& p : m.nodes) os << fmt(p.x()) << " " << fmt(p.y()) << " 0\n";
    os << "CELLS " << m.num_elements() << " " << 4 * m.num_elements() << "\n";
    for (const auto& t : m.triangles) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "CELL_TYPES " << m.num_elements() << "\n";
    for (int e = 0; e < m.num_elements(); ++e) os << "5\n";
    os << "POINT_DATA " << m.num_nodes() << "\n";
    os << "VECTORS u double\n";
    for (int n = 0; n < m.num_nodes(); ++n) os << fmt(s.u(n, 0)) << " " << fmt(s.u(n, 1)) << " 0\n";
    os << "SCALARS d double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < m.num_nodes(); ++n) os << fmt(s.d(n)) << "\n";
    os << "CELL_DATA " << m.num_elements() << "\n";
    os << "SCALARS psi_t double 1\nLOOKUP_TABLE default\n";
    for (double v : psi_t) os << fmt(v) << "\n";
}

inline void write_vtk(const std::string& path, const SimState& s, const std::vector<double>& psi_t) {
    auto out = open_out(path);
    write_vtk(out, s, psi_t);
}

inline VtkFields read_vtk(std::istream& is) {
    VtkFields f;
    std::string tok;
    auto expect_count = [&](const char* what) {
        long n;
        if (!(is >> n) || n < 0) throw IOError(std::string("vtk: bad count after ") + what);
        return n;
    };
    std::string line;
    if (!std::getline(is, line) || line.rfind("# vtk DataFile", 0) != 0) throw IOError("vtk: missing header");
    std::getline(is, line);
    enum { none, point, cell } section = none;
    while (is >> tok) {
        if (tok == "ASCII" || tok == "DATASET") {
            if (tok == "DATASET") is >> tok;
        } else if (tok == "POINTS") {
            const long n = expect_count("POINTS");
            is >> tok;
            f.points.resize(static_cast<std::size_t>(n));
            for (auto& p : f.points) {
                double z;
                is >> p.x() >> p.y() >> z;
            }
        } else if (tok == "CELLS") {
            const long n = expect_count("CELLS");
            expect_count("CELLS size");
            f.cells.resize(static_cast<std::size_t>(n));
            for (auto& c : f.cells) {
                int k;
                is >> k >> c[0] >> c[1] >> c[2];
                if (k != 3) throw IOError("vtk: only triangles are supported");
            }
        } else if (tok == "CELL_TYPES") {
            const long n = expect_count("CELL_TYPES");
            for (long i = 0; i < n; ++i) is >> tok;
        } else if (tok == "POINT_DATA") {
            expect_count("POINT_DATA");
            section = point;
        } else if (tok == "CELL_DATA") {
            expect_count("CELL_DATA");
            section = cell;
        } else if (tok == "VECTORS") {
            std::string name, type;
            is >> name >> type;
            f.u.resize(f.points.size());
            for (auto& v : f.u) {
                double z;
                is >> v.x() >> v.y() >> z;
            }
        } else if (tok == "SCALARS") {
            std::string name, type, lt, table;
            int comps;
            is >> name >> type >> comps >> lt >> table;
            std::vector<double>& dst = section == point ? f.d : f.psi_t;
            dst.resize(section == point ? f.points.size() : f.cells.size());
            for (double& v : dst) is >> v;
        } else {
            throw IOError("vtk: unexpected token '" + tok + "'");
        }
        if (is.fail()) throw IOError("vtk: malformed data near '" + tok + "'");
    }
    return f;
}

// ---------------------------------------------------------------------------
// CSV

struct LoadStepRecord {
    int step = 0;
    double ubar = 0.0;
    double reaction = 0.0;
    bool converged = true;
    int iterations = 0;
    double max_d = 0.0;
};

inline const char* kLoadCsvHeader = "step,ubar_m,reaction_N_per_m,converged,iterations,max_d";
inline const char* kGThetaCsvHeader = "step,ubar_m,theta_deg,G_theta,G_theta_t";

inline std::string load_csv_row(const LoadStepRecord& r) {
    return std::to_string(r.step) + "," + fmt(r.ubar) + "," + fmt(r.reaction) + "," + (r.converged ? "1" : "0") + "," +
           std::to_string(r.iterations) + "," + fmt(r.max_d);
}

inline void write_load_csv(std::ostream& os, const std::vector<LoadStepRecord>& rows) {
    os << kLoadCsvHeader << "\n";
    for (const auto& r : rows) os << load_csv_row(r) << "\n";
}

inline std::string gtheta_csv_rows(const GThetaCurve& c) {
    std::string out;
    for (std::size_t i = 0; i < c.angles_deg.size(); ++i)
        out += std::to_string(c.step) + "," + fmt(c.ubar) + "," + fmt(c.angles_deg[i]) + "," + fmt(c.G[i]) + "," +
               fmt(c.G_t[i]) + "\n";
    return out;
}

inline void write_gtheta_csv(std::ostream& os, const std::vector<GThetaCurve>& curves) {
    os << kGThetaCsvHeader << "\n";
    for (const auto& c : curves) os << gtheta_csv_rows(c);
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

inline double to_double(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IOError("csv line " + std::to_string(line) + ": not a number '" + s + "'");
    }
}

}  // namespace detail

inline std::vector<LoadStepRecord> read_load_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kLoadCsvHeader) throw IOError("load csv: unexpected header");
    std::vector<LoadStepRecord> rows;
    int ln = 1;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto c = detail::split_csv(line);
        if (c.size() != 6) throw IOError("load csv line " + std::to_string(ln) + ": expected 6 columns");
        LoadStepRecord r;
        r.step = static_cast<int>(detail::to_double(c[0], ln));
        r.ubar = detail::to_double(c[1], ln);
        r.reaction = detail::to_double(c[2], ln);
        r.converged = detail::to_double(c[3], ln) != 0.0;
        r.iterations = static_cast<int>(detail::to_double(c[4], ln));
        r.max_d = detail::to_double(c[5], ln);
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<GThetaCurve> read_gtheta_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kGThetaCsvHeader) throw IOError("gtheta csv: unexpected header");
    std::vector<GThetaCurve> curves;
    int ln = 1;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto c = detail::split_csv(line);
        if (c.size() != 5) throw IOError("gtheta csv line " + std::to_string(ln) + ": expected 5 columns");
        const int step = static_cast<int>(detail::to_double(c[0], ln));
        if (curves.empty() || curves.back().step != step) {
            curves.emplace_back();
            curves.back().step = step;
            curves.back().ubar = detail::to_double(c[1], ln);
        }
        curves.back().angles_deg.push_back(detail::to_double(c[2], ln));
        curves.back().G.push_back(detail::to_double(c[3], ln));
        curves.back().G_t.push_back(detail::to_double(c[4], ln));
    }
    return curves;
}

// ---------------------------------------------------------------------------
// State files: header, embedded mesh, then nodal fields.

inline void write_state(std::ostream& os, const SimState& s) {
    os << "pfaniso-state 1\n";
    os << "step " << s.step << "\n";
    os << "ubar " << fmt(s.ubar) << "\n";
    os << "reaction " << fmt(s.reaction) << "\n";
    os << "mesh\n";
    write_mesh(os, *s.mesh);
    const int n = s.mesh->num_nodes();
    os << "u " << n << "\n";
    for (int i = 0; i < n; ++i) os << fmt(s.u(i, 0)) << " " << fmt(s.u(i, 1)) << "\n";
    os << "d " << n << "\n";
    for (int i = 0; i < n; ++i) os << fmt(s.d(i)) << "\n";
    os << "d_prev " << n << "\n";
    for (int i = 0; i < n; ++i) os << fmt(s.d_prev(i)) << "\n";
    os << "end\n";
}

inline void write_state(const std::string& path, const SimState& s) {
    auto out = open_out(path);
    write_state(out, s);
}

inline SimState read_state(std::istream& is) {
    std::string key;
    int version = 0;
    if (!(is >> key >> version) || key != "pfaniso-state" || version != 1) throw IOError("state: missing header");
    int step = 0;
    double ubar = 0.0, reaction = 0.0;
    if (!(is >> key >> step) || key != "step") throw IOError("state: expected 'step'");
    if (!(is >> key >> ubar) || key != "ubar") throw IOError("state: expected 'ubar'");
    if (!(is >> key >> reaction) || key != "reaction") throw IOError("state: expected 'reaction'");
    if (!(is >> key) || key != "mesh") throw IOError("state: expected 'mesh'");
    std::string rest;
    std::getline(is, rest);
    SimState s(std::make_shared<const Mesh>(read_mesh(is)));
    s.step = step;
    s.ubar = ubar;
    s.reaction = reaction;
    const int n = s.mesh->num_nodes();
    auto block = [&](const char* name, Field& f) {
        long count;
        if (!(is >> key >> count) || key != name || count != n)
            throw IOError(std::string("state: expected '") + name + " " + std::to_string(n) + "'");
        for (Eigen::Index i = 0; i < f.values.size(); ++i)
            if (!(is >> f.values[i])) throw IOError(std::string("state: truncated block ") + name);
    };
    block("u", s.u);
    block("d", s.d);
    block("d_prev", s.d_prev);
    if (!(is >> key) || key != "end") throw IOError("state: missing 'end'");
    return s;
}

inline SimState read_state(const std::string& path) {
    auto in = open_in(path);
    return read_state(in);
}

}  // namespace pfaniso
