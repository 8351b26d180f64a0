#pragma once

// Energy, residuals and the alternate-minimization load step.

#include "pfaniso/fem.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace pfaniso {

/// Elastic part: sum over elements of A (g_avg psi^t + psi^c).
inline double elastic_energy(const SimState& s, const ElasticModel& model, SplitLaw law, const PFModel& pf) {
    const Mesh& m = *s.mesh;
    std::vector<double> ee(static_cast<std::size_t>(m.num_elements()));
    parallel_for(m.num_elements(), [&](int e) {
        const SplitState sp = split(law, model, strain_at_qp(m, e, s.u));
        const double g = element_average(m, e, s.d, [](double x) { return PFModel::g(x); }) + pf.residual;
        ee[static_cast<std::size_t>(e)] = element_geometry(m, e).area * (g * sp.psi_t + sp.psi_c);
    });
    double total = 0.0;
    for (double v : ee) total += v;
    return total;
}

/// Gc times the integral of the crack surface density.
inline double fracture_energy(const SimState& s, const PFModel& pf) {
    const Mesh& m = *s.mesh;
    const double kappa = pf.Gc / (4.0 * pf.c_w());
    double total = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        const ElementGeometry g = element_geometry(m, e);
        const auto& t = m.triangles[static_cast<std::size_t>(e)];
        const Eigen::Vector3d de(s.d(t[0]), s.d(t[1]), s.d(t[2]));
        double w_int;
        if (pf.variant == PFVariant::AT2) {
            Eigen::Matrix3d mass;
            mass << 2, 1, 1, 1, 2, 1, 1, 1, 2;
            w_int = g.area / 12.0 * de.dot(mass * de);
        } else {
            w_int = g.area / 3.0 * de.sum();
        }
        total += kappa * (w_int / pf.ell + pf.ell * g.area * damage_gradient(m, e, s.d).squaredNorm());
    }
    return total;
}

/// Total potential energy per unit thickness. Only Dirichlet loading is
/// supported, so the external work term vanishes.
inline double total_energy(const SimState& s, const ElasticModel& model, SplitLaw law, const PFModel& pf) {
    return elastic_energy(s, model, law, pf) + fracture_energy(s, pf);
}

/// Gradient of total_energy with respect to all nodal displacements.
inline VectorXd residual_u(const SimState& s, const ElasticModel& model, SplitLaw law, const PFModel& pf) {
    return assemble_u_system(s, model, law, pf, {}).internal_force;
}

/// Gradient of total_energy with respect to all nodal damage values.
inline VectorXd residual_d(const SimState& s, const ElasticModel& model, SplitLaw law, const PFModel& pf) {
    const DSystem sys = assemble_d_system(s, element_driving_energy(s, model, law), pf);
    return sys.A * s.d.values - sys.b;
}

struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;          ///< final relative residual
    double energy = 0.0;            ///< elastic energy at the returned u
    VectorXd internal_force;        ///< at the returned u
    std::vector<double> psi_t;      ///< per-element driving energy at the returned u
};

/// Minimizes the elastic energy in u at fixed d with Newton's method and an
/// energy backtracking line search (Armijo, checked on the next assembly). On
/// stagnation the tangent switches to the split-free g(d) C operator.
inline NewtonResult solve_u(SimState& s, const ElasticModel& model, SplitLaw law, const PFModel& pf,
                            const Dirichlet& bc, const StaggeredConfig& cfg, Workspace* ws = nullptr) {
    Workspace local;
    Workspace& w = ws ? *ws : local;
    apply_dirichlet(s.u, bc);
    NewtonResult res;
    TangentKind kind = TangentKind::consistent;
    double prev = std::numeric_limits<double>::infinity();
    VectorXd u0, du;
    std::vector<int> free_map;
    double e0 = 0.0, slope = 0.0, step = 0.0;
    bool pending = false;
    auto place = [&](double a) {
        s.u.values = u0;
        for (std::size_t g = 0; g < free_map.size(); ++g)
            if (free_map[g] >= 0) s.u.values[static_cast<Eigen::Index>(g)] += a * du[free_map[g]];
    };
    int newton = 0;
    for (int assembly = 0; assembly < 40 * cfg.max_newton; ++assembly) {
        USystem sys = assemble_u_system(s, model, law, pf, bc.dofs, kind, &w);
        if (pending) {
            const bool armijo = sys.energy <= e0 + 1e-4 * step * slope;
            const bool flat = std::abs(sys.energy - e0) <= 1e-13 * std::abs(e0);
            if (!armijo && !flat && step > 1e-8) {
                step *= 0.5;
                place(step);
                continue;
            }
            pending = false;
        }
        const double rnorm = sys.rhs.norm();
        const double ref = sys.internal_force.norm();
        res.iterations = newton;
        res.residual = ref > 0.0 ? rnorm / ref : 0.0;
        res.energy = sys.energy;
        res.internal_force = std::move(sys.internal_force);
        res.psi_t = std::move(sys.psi_t);
        if (rnorm <= cfg.tol_u * ref || rnorm == 0.0) {
            res.converged = true;
            return res;
        }
        if (newton == cfg.max_newton) break;
        if (rnorm > 0.99 * prev) kind = TangentKind::degraded_full;
        prev = rnorm;
        du = w.u_solver.solve(sys.K, sys.rhs);
        slope = -sys.rhs.dot(du);
        u0 = s.u.values;
        e0 = sys.energy;
        free_map = std::move(sys.free_map);
        step = 1.0;
        place(step);
        pending = true;
        ++newton;
    }
    return res;
}

struct DSolveResult {
    int iterations = 1;
    bool converged = true;
    double max_violation = 0.0;   ///< largest pre-clamp excursion outside [d_prev, 1]
};

/// Damage update at fixed displacement with the irreversibility bound
/// d_prev <= d <= 1. AT2: one SPD solve followed by a node-wise clamp.
/// AT1: primal-dual active set on the bound-constrained quadratic problem.
inline DSolveResult solve_d(SimState& s, const std::vector<double>& psi_t, const PFModel& pf,
                            Workspace* ws = nullptr) {
    Workspace local;
    Workspace& w = ws ? *ws : local;
    const DSystem sys = assemble_d_system(s, psi_t, pf, &w);
    const int n = s.mesh->num_nodes();
    const VectorXd& lo = s.d_prev.values;
    DSolveResult out;
    if (pf.variant == PFVariant::AT2) {
        VectorXd d = w.d_solver.solve(sys.A, sys.b);
        for (int i = 0; i < n; ++i) {
            out.max_violation = std::max({out.max_violation, lo[i] - d[i], d[i] - 1.0});
            d[i] = std::clamp(d[i], lo[i], 1.0);
        }
        s.d.values = d;
        return out;
    }
    VectorXd d = s.d.values.cwiseMax(lo).cwiseMin(1.0);
    VectorXd lambda = sys.A * d - sys.b;
    std::vector<int> state(static_cast<std::size_t>(n), 0), next(static_cast<std::size_t>(n));  // -1 lower, +1 upper
    const VectorXd diag = sys.A.diagonal().cwiseMax(1e-300);
    for (int i = 0; i < n; ++i) {
        const double c = diag[i];
        next[static_cast<std::size_t>(i)] = (lambda[i] + c * (lo[i] - d[i]) > 0.0) ? -1 : 0;
    }
    out.converged = false;
    for (int k = 1; k <= 100; ++k) {
        state = next;
        std::vector<int> map(static_cast<std::size_t>(n), -1);
        int nfree = 0;
        for (int i = 0; i < n; ++i) {
            if (state[static_cast<std::size_t>(i)] == -1) d[i] = lo[i];
            else if (state[static_cast<std::size_t>(i)] == 1) d[i] = 1.0;
            else map[static_cast<std::size_t>(i)] = nfree++;
        }
        if (nfree > 0) {
            std::vector<Eigen::Triplet<double>> trip;
            VectorXd rhs = VectorXd::Zero(nfree);
            for (int i = 0; i < n; ++i)
                if (map[static_cast<std::size_t>(i)] >= 0) rhs[map[static_cast<std::size_t>(i)]] = sys.b[i];
            for (int col = 0; col < sys.A.outerSize(); ++col)
                for (SparseMatrix::InnerIterator it(sys.A, col); it; ++it) {
                    const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
                    const int fr = map[static_cast<std::size_t>(r)], fc = map[static_cast<std::size_t>(c)];
                    if (fr < 0) continue;
                    if (fc >= 0) trip.emplace_back(fr, fc, it.value());
                    else rhs[fr] -= it.value() * d[c];
                }
            SparseMatrix a(nfree, nfree);
            a.setFromTriplets(trip.begin(), trip.end());
            const VectorXd x = solve_linear(a, rhs);
            for (int i = 0; i < n; ++i)
                if (map[static_cast<std::size_t>(i)] >= 0) d[i] = x[map[static_cast<std::size_t>(i)]];
        }
        lambda = sys.A * d - sys.b;
        bool same = true;
        for (int i = 0; i < n; ++i) {
            const double c = diag[i];
            int st = 0;
            if (state[static_cast<std::size_t>(i)] == 0) {
                if (d[i] < lo[i]) st = -1;
                else if (d[i] > 1.0) st = 1;
            } else if (state[static_cast<std::size_t>(i)] == -1) {
                st = (lambda[i] + c * (lo[i] - d[i]) > 0.0) ? -1 : 0;
            } else {
                st = (-lambda[i] + c * (d[i] - 1.0) > 0.0) ? 1 : 0;
            }
            next[static_cast<std::size_t>(i)] = st;
            same = same && st == state[static_cast<std::size_t>(i)];
        }
        out.iterations = k;
        if (same) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged)
        throw SolverError("solve_d: bound-constrained damage solve did not converge in " +
                          std::to_string(out.iterations) + " active-set iterations");
    s.d.values = d.cwiseMax(lo).cwiseMin(1.0);
    return out;
}

struct StepResult {
    bool converged = false;
    int iterations = 0;
    double reaction = 0.0;
    double max_d = 0.0;
    double energy = 0.0;
    bool newton_converged = true;
};

/// Sum of internal forces on the listed dofs.
inline double reaction_on(const VectorXd& internal_force, const std::vector<int>& dofs) {
    double r = 0.0;
    for (int g : dofs) r += internal_force[g];
    return r;
}

/// One load step of alternate minimization under the given Dirichlet data.
/// The reaction is the internal force summed over `reaction_dofs`.
inline StepResult staggered_step(SimState& s, double ubar, const Dirichlet& bc, const std::vector<int>& reaction_dofs,
                                 const ElasticModel& model, SplitLaw law, const PFModel& pf,
                                 const StaggeredConfig& cfg, Workspace* ws = nullptr) {
    Workspace local;
    Workspace& w = ws ? *ws : local;
    StepResult r;
    s.d_prev = s.d;
    s.ubar = ubar;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const NewtonResult nr = solve_u(s, model, law, pf, bc, cfg, &w);
        r.newton_converged = r.newton_converged && nr.converged;
        const VectorXd before = s.d.values;
        solve_d(s, nr.psi_t, pf, &w);
        const double delta = (s.d.values - before).cwiseAbs().maxCoeff();
        r.iterations = it;
        if (delta < cfg.tol_d) {
            r.converged = true;
            break;
        }
    }
    const NewtonResult nr = solve_u(s, model, law, pf, bc, cfg, &w);
    r.newton_converged = r.newton_converged && nr.converged;
    r.converged = r.converged && nr.converged;
    r.reaction = reaction_on(nr.internal_force, reaction_dofs);
    s.reaction = r.reaction;
    r.max_d = s.d.values.maxCoeff();
    r.energy = nr.energy + fracture_energy(s, pf);
    ++s.step;
    return r;
}

/// Reaction dofs of the plate's top edge in the loading direction.
inline std::vector<int> plate_reaction_dofs(const Mesh& m, LoadingMode mode) {
    std::vector<int> dofs;
    for (int n : m.node_set("top")) dofs.push_back(2 * n + (mode == LoadingMode::tension ? 1 : 0));
    return dofs;
}

inline StepResult staggered_step(SimState& s, double ubar, LoadingMode mode, const ElasticModel& model, SplitLaw law,
                                 const PFModel& pf, const StaggeredConfig& cfg, Workspace* ws = nullptr) {
    return staggered_step(s, ubar, plate_dirichlet(*s.mesh, mode, ubar), plate_reaction_dofs(*s.mesh, mode), model,
                          law, pf, cfg, ws);
}

}  // namespace pfaniso
