#pragma once

// Energy release rate by virtual domain perturbation, standard and
// tensile-only, plus crack-tip tracking on the damage field.

#include "pfaniso/fem.hpp"

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <vector>

namespace pfaniso {

/// theta(x) = f(|x - tip|) t with f = 1 inside r_i, 0 outside r_o, linear between.
struct ThetaField {
    Point2 tip{0.0, 0.0};
    double angle = 0.0;   ///< direction of t [rad], counter-clockwise from +x
    double r_i = 0.0, r_o = 0.0;

    ThetaField() = default;
    ThetaField(Point2 tip_, double angle_, double ri, double ro) : tip(tip_), angle(angle_), r_i(ri), r_o(ro) {
        if (!(ri > 0.0) || !(ro > ri)) throw std::invalid_argument("theta field: requires 0 < r_i < r_o");
    }

    double f(double r) const {
        if (r <= r_i) return 1.0;
        if (r >= r_o) return 0.0;
        return (r - r_o) / (r_i - r_o);
    }
    Eigen::Vector2d direction() const { return {std::cos(angle), std::sin(angle)}; }
    Eigen::Vector2d at(const Point2& x) const { return f((x - tip).norm()) * direction(); }
};

struct GThetaCurve {
    int step = 0;
    double ubar = 0.0;
    std::vector<double> angles_deg;
    std::vector<double> G;      ///< standard, degraded stress [N/m]
    std::vector<double> G_t;    ///< tensile part [N/m]
    bool exceeds_gc = false;    ///< some value above the fracture toughness
    bool clipped = false;       ///< annulus leaves the domain

    std::size_t argmax_t() const {
        return static_cast<std::size_t>(std::max_element(G_t.begin(), G_t.end()) - G_t.begin());
    }
    std::size_t argmax() const {
        return static_cast<std::size_t>(std::max_element(G.begin(), G.end()) - G.begin());
    }
};

class GThetaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// G for theta = f t is linear in t: G = J . t. Holds J for the standard and
/// tensile integrands.
struct GThetaVectors {
    Eigen::Vector2d J = Eigen::Vector2d::Zero();
    Eigen::Vector2d J_t = Eigen::Vector2d::Zero();
    bool clipped = false;   ///< the outer circle leaves the mesh bounding box
};

namespace detail {

/// Integrand vector for one element: component k is the G density for t = e_k.
/// grad_u and sigma are full 3x3; grad_f is the in-plane gradient of f.
inline Eigen::Vector2d gtheta_density(const Mat3& sigma, const Mat3& grad_u, const Eigen::Vector2d& grad_f) {
    Eigen::Vector2d out;
    const double work = (sigma.array() * grad_u.array()).sum();
    for (int k = 0; k < 2; ++k) {
        // grad theta = e_k (x) grad f  ->  (grad_u grad theta)_ij = grad_u(i,k) grad_f(j)
        double a = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j) a += sigma(i, j) * grad_u(i, k) * grad_f[j];
        out[k] = a - 0.5 * work * grad_f[k];
    }
    return out;
}

}  // namespace detail

/// Integrates both G densities over elements where grad f is nonzero.
/// The standard integrand uses the degraded stress g(d) sigma^t + sigma^c
/// (no residual stiffness); the tensile one uses the undegraded C eps^t and
/// grad u^t = grad u - eps^c.
inline GThetaVectors gtheta_vectors(const SimState& s, const ElasticModel& model, SplitLaw law, const Point2& tip,
                                    double r_i, double r_o) {
    const ThetaField theta(tip, 0.0, r_i, r_o);
    const Mesh& m = *s.mesh;
    const int ne = m.num_elements();
    std::vector<Eigen::Vector2d> je(static_cast<std::size_t>(ne), Eigen::Vector2d::Zero());
    std::vector<Eigen::Vector2d> jt(static_cast<std::size_t>(ne), Eigen::Vector2d::Zero());
    std::vector<char> support(static_cast<std::size_t>(ne), 0);
    parallel_for(ne, [&](int e) {
        const auto& t = m.triangles[static_cast<std::size_t>(e)];
        const ElementGeometry g = element_geometry(m, e);
        Eigen::Vector2d grad_f = Eigen::Vector2d::Zero();
        for (int a = 0; a < 3; ++a) {
            const double fa = theta.f((m.nodes[static_cast<std::size_t>(t[static_cast<std::size_t>(a)])] - tip).norm());
            grad_f.x() += fa * g.dNdx[static_cast<std::size_t>(a)];
            grad_f.y() += fa * g.dNdy[static_cast<std::size_t>(a)];
        }
        if (grad_f.squaredNorm() == 0.0) return;
        support[static_cast<std::size_t>(e)] = 1;
        const SplitState sp = split(law, model, strain_at_qp(m, e, s.u));
        const double gd = element_average(m, e, s.d, [](double x) { return PFModel::g(x); });
        Mat3 grad_u = Mat3::Zero();
        grad_u.topLeftCorner<2, 2>() = displacement_gradient(m, e, s.u);
        const Mat3 sigma = (gd * sp.sigma_t + sp.sigma_c).dense();
        je[static_cast<std::size_t>(e)] = g.area * detail::gtheta_density(sigma, grad_u, grad_f);
        const Mat3 grad_ut = grad_u - sp.eps_c.dense();
        jt[static_cast<std::size_t>(e)] = g.area * detail::gtheta_density(sp.sigma_t.dense(), grad_ut, grad_f);
    });
    GThetaVectors out;
    bool any = false;
    for (int e = 0; e < ne; ++e) {
        out.J += je[static_cast<std::size_t>(e)];
        out.J_t += jt[static_cast<std::size_t>(e)];
        any = any || support[static_cast<std::size_t>(e)];
    }
    if (!any) throw GThetaError("gtheta: the theta annulus does not intersect the mesh");
    const auto bb = m.bounding_box();
    out.clipped = tip.x() - r_o < bb[0] || tip.x() + r_o > bb[1] || tip.y() - r_o < bb[2] || tip.y() + r_o > bb[3];
    return out;
}

inline double gtheta(const SimState& s, const ElasticModel& model, const Point2& tip, double angle, double r_i,
                     double r_o, SplitLaw law = SplitLaw::none) {
    return gtheta_vectors(s, model, law, tip, r_i, r_o).J.dot(ThetaField(tip, angle, r_i, r_o).direction());
}

inline double gtheta_tensile(const SimState& s, const ElasticModel& model, SplitLaw law, const Point2& tip,
                             double angle, double r_i, double r_o) {
    return gtheta_vectors(s, model, law, tip, r_i, r_o).J_t.dot(ThetaField(tip, angle, r_i, r_o).direction());
}

/// Default fan: -90 to 90 degrees in 5 degree steps.
inline std::vector<double> default_fan() {
    std::vector<double> a;
    for (int k = -18; k <= 18; ++k) a.push_back(5.0 * k);
    return a;
}

inline GThetaCurve sweep(const SimState& s, const ElasticModel& model, SplitLaw law, const Point2& tip,
                         const std::vector<double>& angles_deg, double r_i, double r_o, double Gc) {
    const GThetaVectors v = gtheta_vectors(s, model, law, tip, r_i, r_o);
    GThetaCurve c;
    c.step = s.step;
    c.ubar = s.ubar;
    c.clipped = v.clipped;
    for (double a : angles_deg) {
        const double rad = a * std::numbers::pi / 180.0;
        const Eigen::Vector2d t(std::cos(rad), std::sin(rad));
        c.angles_deg.push_back(a);
        c.G.push_back(v.J.dot(t));
        c.G_t.push_back(v.J_t.dot(t));
        c.exceeds_gc = c.exceeds_gc || c.G.back() > Gc || c.G_t.back() > Gc;
    }
    return c;
}

/// Crack tip: the node of the thresholded damage region connected to the slit
/// tip that is farthest from it along the region (Dijkstra over mesh edges).
/// Nodes behind the tip along the slit are ignored. Falls back to the
/// geometric slit tip.
inline Point2 locate_tip(const SimState& s, double threshold = 0.95) {
    const Mesh& m = *s.mesh;
    const Point2 tip0 = m.slit.present() ? m.slit.tip_point : Point2(0.0, 0.0);
    const int n = m.num_nodes();
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    double h_tip = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        const auto& t = m.triangles[static_cast<std::size_t>(e)];
        for (int a = 0; a < 3; ++a) {
            const int i = t[static_cast<std::size_t>(a)], j = t[static_cast<std::size_t>((a + 1) % 3)];
            adj[static_cast<std::size_t>(i)].push_back(j);
            adj[static_cast<std::size_t>(j)].push_back(i);
            if ((m.nodes[static_cast<std::size_t>(i)] - tip0).norm() < 1e-12 * (1.0 + tip0.norm()) ||
                (m.nodes[static_cast<std::size_t>(j)] - tip0).norm() < 1e-12 * (1.0 + tip0.norm()))
                h_tip = std::max(h_tip, m.element_size(e));
        }
    }
    if (h_tip == 0.0) {
        for (int e = 0; e < m.num_elements(); ++e) h_tip = std::max(h_tip, m.element_size(e));
    }
    const double r_seed = 3.0 * h_tip;
    Eigen::Vector2d back(-1.0, 0.0);
    if (m.slit.present()) back = (m.slit.mouth - m.slit.tip_point).normalized();
    auto behind = [&](const Point2& p) {
        const Eigen::Vector2d r = p - tip0;
        const double along = r.dot(back);
        const double perp = std::abs(r.x() * back.y() - r.y() * back.x());
        return along > 0.0 && perp < r_seed;
    };
    auto eligible = [&](int i) { return s.d(i) >= threshold && !behind(m.nodes[static_cast<std::size_t>(i)]); };

    std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int i = 0; i < n; ++i) {
        const double r = (m.nodes[static_cast<std::size_t>(i)] - tip0).norm();
        if (r <= r_seed && eligible(i)) {
            dist[static_cast<std::size_t>(i)] = r;
            pq.push({r, i});
        }
    }
    int best = -1;
    double best_d = -1.0;
    while (!pq.empty()) {
        const auto [di, i] = pq.top();
        pq.pop();
        if (di > dist[static_cast<std::size_t>(i)]) continue;
        if (di > best_d || (di == best_d && i < best)) {
            best_d = di;
            best = i;
        }
        for (int j : adj[static_cast<std::size_t>(i)]) {
            if (!eligible(j)) continue;
            const double nd = di + (m.nodes[static_cast<std::size_t>(i)] - m.nodes[static_cast<std::size_t>(j)]).norm();
            if (nd < dist[static_cast<std::size_t>(j)]) {
                dist[static_cast<std::size_t>(j)] = nd;
                pq.push({nd, j});
            }
        }
    }
    if (best < 0) return tip0;
    return m.nodes[static_cast<std::size_t>(best)];
}

}  // namespace pfaniso
