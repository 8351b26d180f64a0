#pragma once

// Unstructured triangle meshes for 2D plane-strain problems.
//
// A pre-crack is represented geometrically as a slit: nodes on the crack
// faces are duplicated, elements above the slit reference the "upper" copy
// and elements below the "lower" copy. The slit tip node is shared.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfaniso {

using Point2 = Eigen::Vector2d;

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Slit {
    /// (upper, lower) node pairs sharing a position on the crack faces.
    std::vector<std::array<int, 2>> seam;
    int tip = -1;
    Point2 mouth{0.0, 0.0};
    Point2 tip_point{0.0, 0.0};

    bool present() const { return tip >= 0; }
};

struct Mesh {
    std::vector<Point2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::map<std::string, std::vector<int>> node_sets;
    std::map<std::string, std::vector<std::array<int, 2>>> edge_sets;
    Slit slit;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_elements() const { return static_cast<int>(triangles.size()); }

    double signed_area(int e) const {
        const auto& t = triangles[static_cast<std::size_t>(e)];
        const Point2& a = nodes[static_cast<std::size_t>(t[0])];
        const Point2& b = nodes[static_cast<std::size_t>(t[1])];
        const Point2& c = nodes[static_cast<std::size_t>(t[2])];
        return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    }

    Point2 centroid(int e) const {
        const auto& t = triangles[static_cast<std::size_t>(e)];
        return (nodes[static_cast<std::size_t>(t[0])] + nodes[static_cast<std::size_t>(t[1])] +
                nodes[static_cast<std::size_t>(t[2])]) / 3.0;
    }

    /// Longest edge of element e.
    double element_size(int e) const {
        const auto& t = triangles[static_cast<std::size_t>(e)];
        double h = 0.0;
        for (int k = 0; k < 3; ++k) {
            const Point2 d = nodes[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])] -
                             nodes[static_cast<std::size_t>(t[static_cast<std::size_t>((k + 1) % 3)])];
            h = std::max(h, d.norm());
        }
        return h;
    }

    std::array<double, 4> bounding_box() const {
        std::array<double, 4> bb{1e300, -1e300, 1e300, -1e300};
        for (const auto& p : nodes) {
            bb[0] = std::min(bb[0], p.x());
            bb[1] = std::max(bb[1], p.x());
            bb[2] = std::min(bb[2], p.y());
            bb[3] = std::max(bb[3], p.y());
        }
        return bb;
    }

    const std::vector<int>& node_set(const std::string& name) const {
        auto it = node_sets.find(name);
        if (it == node_sets.end()) throw MeshError("mesh has no node set '" + name + "'");
        return it->second;
    }
};

/// Which side of the slit line a point lies on (+1 upper/left of mouth->tip, -1 lower).
inline int slit_side(const Slit& s, const Point2& p) {
    const Point2 d = s.tip_point - s.mouth;
    const Point2 r = p - s.mouth;
    const double cross = d.x() * r.y() - d.y() * r.x();
    return cross >= 0.0 ? 1 : -1;
}

/// Structural checks; throws MeshError with a diagnostic on failure.
inline void validate(const Mesh& m) {
    const int n = m.num_nodes();
    if (n == 0 || m.triangles.empty()) throw MeshError("mesh is empty");
    const auto bb = m.bounding_box();
    const double scale = std::max(bb[1] - bb[0], bb[3] - bb[2]);
    for (int e = 0; e < m.num_elements(); ++e) {
        for (int v : m.triangles[static_cast<std::size_t>(e)])
            if (v < 0 || v >= n)
                throw MeshError("element " + std::to_string(e) + " references missing node " + std::to_string(v));
        const double a = m.signed_area(e);
        if (std::abs(a) <= 1e-14 * scale * scale)
            throw MeshError("element " + std::to_string(e) + " is degenerate (zero area)");
        if (a < 0.0) throw MeshError("element " + std::to_string(e) + " is inverted (negative orientation)");
    }
    if (m.slit.present()) {
        std::set<int> upper, lower;
        for (const auto& pr : m.slit.seam) {
            upper.insert(pr[0]);
            lower.insert(pr[1]);
            if ((m.nodes[static_cast<std::size_t>(pr[0])] - m.nodes[static_cast<std::size_t>(pr[1])]).norm() >
                1e-12 * scale)
                throw MeshError("slit seam pair does not share a position");
        }
        for (int e = 0; e < m.num_elements(); ++e) {
            const int side = slit_side(m.slit, m.centroid(e));
            for (int v : m.triangles[static_cast<std::size_t>(e)]) {
                if (side > 0 && lower.count(v))
                    throw MeshError("element " + std::to_string(e) + " above the slit uses a lower seam node");
                if (side < 0 && upper.count(v))
                    throw MeshError("element " + std::to_string(e) + " below the slit uses an upper seam node");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Single-edge-notched plate generator

/// Axis-aligned rectangle in absolute coordinates.
struct Rect {
    double xmin, xmax, ymin, ymax;
    bool overlaps(double x0, double x1, double y0, double y1) const {
        return x0 < xmax && x1 > xmin && y0 < ymax && y1 > ymin;
    }
};

struct SenPlateParams {
    double L = 1e-3;          ///< plate side [m], centred at the origin
    double h_band = 1.6e-5;   ///< target element size inside the band [m]
    double h_coarse = 6.25e-5;///< target element size elsewhere [m]
    Rect band{-0.05e-3, 0.5e-3, -0.125e-3, 0.125e-3};
    bool slit = true;         ///< duplicate nodes along y = 0, x < 0
};

/// Refinement bands (as fractions of L) used by the shipped configurations.
inline Rect tension_band(double L) { return Rect{-0.05 * L, 0.5 * L, -0.125 * L, 0.125 * L}; }
inline Rect shear_band(double L) { return Rect{-0.05 * L, 0.5 * L, -0.4 * L, 0.05 * L}; }

namespace detail {

class QuadTree {
public:
    struct Cell {
        int level = 0;
        long ix = 0, iy = 0;
        int child = -1;  // index of first of four children, -1 for a leaf
    };

    explicit QuadTree(double L) : L_(L) { cells_.push_back(Cell{}); }

    double size(int level) const { return L_ / static_cast<double>(1L << level); }
    const Cell& cell(int i) const { return cells_[static_cast<std::size_t>(i)]; }
    std::array<double, 4> rect(int i) const {
        const Cell& c = cell(i);
        const double s = size(c.level);
        const double x0 = -0.5 * L_ + static_cast<double>(c.ix) * s;
        const double y0 = -0.5 * L_ + static_cast<double>(c.iy) * s;
        return {x0, x0 + s, y0, y0 + s};
    }

    void split(int i) {
        const Cell c = cell(i);
        const int first = static_cast<int>(cells_.size());
        for (int k = 0; k < 4; ++k)
            cells_.push_back(Cell{c.level + 1, 2 * c.ix + (k & 1), 2 * c.iy + (k >> 1), -1});
        cells_[static_cast<std::size_t>(i)].child = first;
    }

    /// Leaf containing (x, y), or -1 outside the root.
    int find(double x, double y) const {
        const double h = 0.5 * L_;
        if (x < -h || x > h || y < -h || y > h) return -1;
        int i = 0;
        while (cell(i).child >= 0) {
            const auto r = rect(i);
            const double xm = 0.5 * (r[0] + r[1]);
            const double ym = 0.5 * (r[2] + r[3]);
            i = cell(i).child + (x >= xm ? 1 : 0) + (y >= ym ? 2 : 0);
        }
        return i;
    }

    std::vector<int> leaves() const {
        std::vector<int> out;
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            if (cell(i).child < 0) {
                out.push_back(i);
            } else {
                for (int k = 3; k >= 0; --k) stack.push_back(cell(i).child + k);
            }
        }
        return out;
    }

private:
    double L_;
    std::vector<Cell> cells_;
};

}  // namespace detail

/// Square plate [-L/2, L/2]^2 with a horizontal slit from the left edge to the
/// centre, triangulated from a 2:1-balanced quadtree. Each leaf is split into
/// a fan around its centre, conforming to finer neighbours through edge
/// midpoints. Element size (longest edge) equals the leaf size.
inline Mesh generate_sen_plate(const SenPlateParams& p) {
    if (!(p.L > 0.0) || !(p.h_band > 0.0) || !(p.h_coarse > 0.0))
        throw MeshError("generate_sen_plate: sizes must be positive");
    if (p.h_band > p.h_coarse) throw MeshError("generate_sen_plate: h_band must not exceed h_coarse");
    if (p.h_band < p.L * 1e-5) throw MeshError("generate_sen_plate: h_band too small for the plate (infeasible sizing)");
    if (p.h_coarse > 0.5 * p.L) throw MeshError("generate_sen_plate: h_coarse must be at most L/2");

    detail::QuadTree tree(p.L);
    const double rel = 1.0 + 1e-9;
    // Refine to target sizes.
    std::vector<int> work{0};
    while (!work.empty()) {
        const int i = work.back();
        work.pop_back();
        const auto r = tree.rect(i);
        const double s = r[1] - r[0];
        const double target = p.band.overlaps(r[0], r[1], r[2], r[3]) ? p.h_band : p.h_coarse;
        if (s > target * rel || tree.cell(i).level < 1) {
            tree.split(i);
            const int c = tree.cell(i).child;
            for (int k = 0; k < 4; ++k) work.push_back(c + k);
        }
    }
    // 2:1 balance across edges.
    const double eps = tree.size(30);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int leaf : tree.leaves()) {
            if (tree.cell(leaf).child >= 0) continue;
            const auto r = tree.rect(leaf);
            const int lvl = tree.cell(leaf).level;
            const double qx[2] = {r[0] + 0.25 * (r[1] - r[0]), r[0] + 0.75 * (r[1] - r[0])};
            const double qy[2] = {r[2] + 0.25 * (r[3] - r[2]), r[2] + 0.75 * (r[3] - r[2])};
            const std::array<std::array<double, 2>, 8> probes{{{qx[0], r[2] - eps}, {qx[1], r[2] - eps},
                                                               {qx[0], r[3] + eps}, {qx[1], r[3] + eps},
                                                               {r[0] - eps, qy[0]}, {r[0] - eps, qy[1]},
                                                               {r[1] + eps, qy[0]}, {r[1] + eps, qy[1]}}};
            for (const auto& q : probes) {
                const int nb = tree.find(q[0], q[1]);
                if (nb >= 0 && tree.cell(nb).level < lvl - 1) {
                    tree.split(nb);
                    changed = true;
                }
            }
        }
    }

    const std::vector<int> leaves = tree.leaves();
    int kmax = 0;
    for (int l : leaves) kmax = std::max(kmax, tree.cell(l).level);
    // Integer node coordinates in units of L / 2^(kmax+1), origin at the lower-left corner.
    const long span = 1L << (kmax + 1);
    const double unit = p.L / static_cast<double>(span);
    std::map<std::pair<long, long>, int> index;
    Mesh m;
    auto node = [&](long x, long y) {
        auto [it, inserted] = index.try_emplace({x, y}, static_cast<int>(m.nodes.size()));
        if (inserted) m.nodes.emplace_back(-0.5 * p.L + static_cast<double>(x) * unit, -0.5 * p.L + static_cast<double>(y) * unit);
        return it->second;
    };
    auto finer_across = [&](double x, double y, int lvl) {
        const int nb = tree.find(x, y);
        return nb >= 0 && tree.cell(nb).level > lvl;
    };

    for (int leaf : leaves) {
        const auto& c = tree.cell(leaf);
        const long s = 1L << (kmax + 1 - c.level);
        const long x0 = c.ix * s, y0 = c.iy * s, h = s / 2;
        const auto r = tree.rect(leaf);
        const double xm = 0.5 * (r[0] + r[1]), ym = 0.5 * (r[2] + r[3]);
        const double q = 0.25 * (r[1] - r[0]);
        std::vector<int> ring;
        ring.push_back(node(x0, y0));
        if (finer_across(xm - q, r[2] - eps, c.level)) ring.push_back(node(x0 + h, y0));
        ring.push_back(node(x0 + s, y0));
        if (finer_across(r[1] + eps, ym - q, c.level)) ring.push_back(node(x0 + s, y0 + h));
        ring.push_back(node(x0 + s, y0 + s));
        if (finer_across(xm + q, r[3] + eps, c.level)) ring.push_back(node(x0 + h, y0 + s));
        ring.push_back(node(x0, y0 + s));
        if (finer_across(r[0] - eps, ym + q, c.level)) ring.push_back(node(x0, y0 + h));
        const int centre = node(x0 + h, y0 + h);
        for (std::size_t k = 0; k < ring.size(); ++k)
            m.triangles.push_back({centre, ring[k], ring[(k + 1) % ring.size()]});
    }

    const double tol = 1e-9 * p.L;
    const double half = 0.5 * p.L;
    if (p.slit) {
        // Duplicate nodes on y = 0 with x < 0 for elements below the slit.
        std::map<int, int> lower_copy;
        for (std::size_t e = 0; e < m.triangles.size(); ++e) {
            if (m.centroid(static_cast<int>(e)).y() >= 0.0) continue;
            for (int& v : m.triangles[e]) {
                const Point2 pt = m.nodes[static_cast<std::size_t>(v)];
                if (std::abs(pt.y()) < tol && pt.x() < -tol) {
                    auto [it, inserted] = lower_copy.try_emplace(v, static_cast<int>(m.nodes.size()));
                    if (inserted) m.nodes.push_back(pt);
                    v = it->second;
                }
            }
        }
        std::vector<std::array<int, 2>> seam;
        for (const auto& [up, lo] : lower_copy) seam.push_back({up, lo});
        std::sort(seam.begin(), seam.end(), [&](const auto& a, const auto& b) {
            return m.nodes[static_cast<std::size_t>(a[0])].x() < m.nodes[static_cast<std::size_t>(b[0])].x();
        });
        m.slit.seam = std::move(seam);
        m.slit.tip = index.at({span / 2, span / 2});
        m.slit.mouth = Point2(-half, 0.0);
        m.slit.tip_point = Point2(0.0, 0.0);
    }

    // Boundary node and edge sets.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) {
            const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
            edge_count[{std::min(a, b), std::max(a, b)}]++;
        }
    auto on = [&](const Point2& pt, const std::string& side) {
        if (side == "bottom") return std::abs(pt.y() + half) < tol;
        if (side == "top") return std::abs(pt.y() - half) < tol;
        if (side == "left") return std::abs(pt.x() + half) < tol;
        return std::abs(pt.x() - half) < tol;
    };
    for (const std::string side : {"bottom", "top", "left", "right"}) {
        std::vector<int>& ns = m.node_sets[side];
        for (int i = 0; i < m.num_nodes(); ++i)
            if (on(m.nodes[static_cast<std::size_t>(i)], side)) ns.push_back(i);
        auto& es = m.edge_sets[side];
        for (const auto& [e, count] : edge_count)
            if (count == 1 && on(m.nodes[static_cast<std::size_t>(e.first)], side) &&
                on(m.nodes[static_cast<std::size_t>(e.second)], side))
                es.push_back({e.first, e.second});
    }
    if (p.slit) {
        auto& up = m.node_sets["slit_upper"];
        auto& lo = m.node_sets["slit_lower"];
        for (const auto& pr : m.slit.seam) {
            up.push_back(pr[0]);
            lo.push_back(pr[1]);
        }
        std::set<int> lower_ids(lo.begin(), lo.end());
        auto& eu = m.edge_sets["slit_upper"];
        auto& el = m.edge_sets["slit_lower"];
        for (const auto& [e, count] : edge_count) {
            const Point2& a = m.nodes[static_cast<std::size_t>(e.first)];
            const Point2& b = m.nodes[static_cast<std::size_t>(e.second)];
            if (count != 1 || std::abs(a.y()) > tol || std::abs(b.y()) > tol || std::max(a.x(), b.x()) > tol) continue;
            const bool lower = lower_ids.count(e.first) || lower_ids.count(e.second);
            (lower ? el : eu).push_back({e.first, e.second});
        }
        m.node_sets["slit_tip"] = {m.slit.tip};
    }
    validate(m);
    return m;
}

// ---------------------------------------------------------------------------
// Native text format (see docs/mesh_format.md)

inline void write_mesh(std::ostream& os, const Mesh& m) {
    os.precision(17);
    os << "pfaniso-mesh 1\n";
    os << "nodes " << m.num_nodes() << "\n";
    for (const auto& p : m.nodes) os << p.x() << " " << p.y() << "\n";
    os << "triangles " << m.num_elements() << "\n";
    for (const auto& t : m.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    for (const auto& [name, ids] : m.node_sets) {
        os << "node_set " << name << " " << ids.size() << "\n";
        for (std::size_t i = 0; i < ids.size(); ++i) os << ids[i] << ((i + 1) % 16 == 0 || i + 1 == ids.size() ? "\n" : " ");
    }
    for (const auto& [name, edges] : m.edge_sets) {
        os << "edge_set " << name << " " << edges.size() << "\n";
        for (const auto& e : edges) os << e[0] << " " << e[1] << "\n";
    }
    if (m.slit.present()) {
        os << "slit " << m.slit.seam.size() << " " << m.slit.tip << " " << m.slit.mouth.x() << " " << m.slit.mouth.y()
           << " " << m.slit.tip_point.x() << " " << m.slit.tip_point.y() << "\n";
        for (const auto& pr : m.slit.seam) os << pr[0] << " " << pr[1] << "\n";
    }
    os << "end\n";
}

namespace detail {

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    /// Next non-empty, non-comment line; false at EOF.
    bool next(std::istringstream& out) {
        std::string line;
        while (std::getline(is_, line)) {
            ++line_no_;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            out.clear();
            out.str(line);
            return true;
        }
        return false;
    }
    std::istringstream require(const std::string& what) {
        std::istringstream s;
        if (!next(s)) fail("unexpected end of file while reading " + what);
        return s;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw MeshError("mesh parse error at line " + std::to_string(line_no_) + ": " + msg);
    }
    int line() const { return line_no_; }

private:
    std::istream& is_;
    int line_no_ = 0;
};

}  // namespace detail

inline Mesh read_mesh(std::istream& is) {
    detail::LineReader rd(is);
    Mesh m;
    auto hdr = rd.require("header");
    std::string magic;
    int version = 0;
    hdr >> magic >> version;
    if (magic != "pfaniso-mesh" || version != 1) rd.fail("expected header 'pfaniso-mesh 1'");
    std::istringstream ls;
    bool ended = false;
    while (rd.next(ls)) {
        std::string key;
        ls >> key;
        if (key == "nodes") {
            long n = -1;
            if (!(ls >> n) || n < 0) rd.fail("bad node count");
            m.nodes.resize(static_cast<std::size_t>(n));
            for (long i = 0; i < n; ++i) {
                auto s = rd.require("node");
                double x, y;
                if (!(s >> x >> y)) rd.fail("bad node record " + std::to_string(i));
                m.nodes[static_cast<std::size_t>(i)] = Point2(x, y);
            }
        } else if (key == "triangles") {
            long n = -1;
            if (!(ls >> n) || n < 0) rd.fail("bad triangle count");
            m.triangles.resize(static_cast<std::size_t>(n));
            for (long i = 0; i < n; ++i) {
                auto s = rd.require("triangle");
                auto& t = m.triangles[static_cast<std::size_t>(i)];
                if (!(s >> t[0] >> t[1] >> t[2])) rd.fail("bad element record " + std::to_string(i));
            }
        } else if (key == "node_set") {
            std::string name;
            long n = -1;
            if (!(ls >> name >> n) || n < 0) rd.fail("bad node_set header");
            auto& ids = m.node_sets[name];
            while (static_cast<long>(ids.size()) < n) {
                auto s = rd.require("node_set " + name);
                int v;
                while (s >> v) ids.push_back(v);
            }
            if (static_cast<long>(ids.size()) != n) rd.fail("node_set " + name + " has wrong length");
        } else if (key == "edge_set") {
            std::string name;
            long n = -1;
            if (!(ls >> name >> n) || n < 0) rd.fail("bad edge_set header");
            auto& es = m.edge_sets[name];
            for (long i = 0; i < n; ++i) {
                auto s = rd.require("edge");
                std::array<int, 2> e{};
                if (!(s >> e[0] >> e[1])) rd.fail("bad edge record in " + name);
                es.push_back(e);
            }
        } else if (key == "slit") {
            long n = -1;
            double mx, my, tx, ty;
            if (!(ls >> n >> m.slit.tip >> mx >> my >> tx >> ty) || n < 0) rd.fail("bad slit header");
            m.slit.mouth = Point2(mx, my);
            m.slit.tip_point = Point2(tx, ty);
            for (long i = 0; i < n; ++i) {
                auto s = rd.require("seam pair");
                std::array<int, 2> pr{};
                if (!(s >> pr[0] >> pr[1])) rd.fail("bad seam pair");
                m.slit.seam.push_back(pr);
            }
        } else if (key == "end") {
            ended = true;
            break;
        } else {
            rd.fail("unknown block '" + key + "'");
        }
    }
    if (!ended) rd.fail("missing 'end'");
    validate(m);
    return m;
}

/// Gmsh 2.2 ASCII import: 3-node triangles become elements; 2-node lines with
/// a physical tag become edge sets (named by $PhysicalNames when present) and
/// the corresponding node sets.
inline Mesh read_gmsh(std::istream& is) {
    detail::LineReader rd(is);
    Mesh m;
    std::map<int, std::string> names;
    std::map<long, int> node_index;
    std::vector<std::pair<int, std::array<long, 2>>> lines;
    std::vector<std::array<long, 3>> tris;
    std::istringstream ls;
    while (rd.next(ls)) {
        std::string key;
        ls >> key;
        if (key == "$MeshFormat") {
            auto s = rd.require("format");
            double version;
            int type;
            s >> version >> type;
            if (version < 2.0 || version >= 3.0 || type != 0) rd.fail("only ASCII Gmsh format 2.x is supported");
            rd.require("$EndMeshFormat");
        } else if (key == "$PhysicalNames") {
            auto s = rd.require("count");
            int n;
            s >> n;
            for (int i = 0; i < n; ++i) {
                auto r = rd.require("physical name");
                int dim, tag;
                std::string name;
                r >> dim >> tag >> name;
                if (name.size() >= 2 && name.front() == '"') name = name.substr(1, name.size() - 2);
                names[tag] = name;
            }
            rd.require("$EndPhysicalNames");
        } else if (key == "$Nodes") {
            auto s = rd.require("count");
            long n;
            s >> n;
            for (long i = 0; i < n; ++i) {
                auto r = rd.require("node");
                long id;
                double x, y, z;
                if (!(r >> id >> x >> y >> z)) rd.fail("bad node record");
                node_index[id] = static_cast<int>(m.nodes.size());
                m.nodes.emplace_back(x, y);
            }
            rd.require("$EndNodes");
        } else if (key == "$Elements") {
            auto s = rd.require("count");
            long n;
            s >> n;
            for (long i = 0; i < n; ++i) {
                auto r = rd.require("element");
                long id;
                int type, ntags;
                if (!(r >> id >> type >> ntags)) rd.fail("bad element record");
                std::vector<long> tags(static_cast<std::size_t>(ntags));
                for (auto& t : tags) r >> t;
                const int phys = ntags > 0 ? static_cast<int>(tags[0]) : 0;
                if (type == 1) {
                    std::array<long, 2> e{};
                    r >> e[0] >> e[1];
                    lines.push_back({phys, e});
                } else if (type == 2) {
                    std::array<long, 3> t{};
                    if (!(r >> t[0] >> t[1] >> t[2])) rd.fail("bad triangle record " + std::to_string(id));
                    tris.push_back(t);
                }
            }
            rd.require("$EndElements");
        } else if (!key.empty() && key[0] == '$' && key.rfind("$End", 0) != 0) {
            // Skip unknown section.
            const std::string end = "$End" + key.substr(1);
            std::istringstream skip;
            for (;;) {
                if (!rd.next(skip)) rd.fail("unterminated section " + key);
                std::string k;
                skip >> k;
                if (k == end) break;
            }
        }
    }
    auto map_node = [&](long id) {
        auto it = node_index.find(id);
        if (it == node_index.end()) rd.fail("element references unknown node " + std::to_string(id));
        return it->second;
    };
    for (const auto& t : tris) {
        std::array<int, 3> tri{map_node(t[0]), map_node(t[1]), map_node(t[2])};
        m.triangles.push_back(tri);
        // Gmsh does not guarantee orientation; enforce counter-clockwise.
        if (m.signed_area(m.num_elements() - 1) < 0.0) std::swap(m.triangles.back()[1], m.triangles.back()[2]);
    }
    for (const auto& [phys, e] : lines) {
        const std::string name = names.count(phys) ? names[phys] : "physical_" + std::to_string(phys);
        m.edge_sets[name].push_back({map_node(e[0]), map_node(e[1])});
    }
    for (const auto& [name, edges] : m.edge_sets) {
        std::set<int> ids;
        for (const auto& e : edges) ids.insert(e.begin(), e.end());
        m.node_sets[name] = std::vector<int>(ids.begin(), ids.end());
    }
    validate(m);
    return m;
}

inline Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file '" + path + "'");
    const bool gmsh = path.size() >= 4 && path.substr(path.size() - 4) == ".msh";
    return gmsh ? read_gmsh(in) : read_mesh(in);
}

inline void save_mesh(const std::string& path, const Mesh& m) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write mesh file '" + path + "'");
    write_mesh(out, m);
}

}  // namespace pfaniso
