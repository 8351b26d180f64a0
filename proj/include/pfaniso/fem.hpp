#pragma once

// Linear triangles in plane strain: kinematics, element loops, sparse
// assembly with Dirichlet elimination, and linear solves.

#include "pfaniso/mesh.hpp"
#include "pfaniso/phasefield.hpp"
#include "pfaniso/split.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pfaniso {

using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// ---------------------------------------------------------------------------
// Threading

/// Worker count from PFANISO_THREADS (default 1).
inline int thread_count() {
    if (const char* env = std::getenv("PFANISO_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

/// Runs f(i) for i in [0, n) on thread_count() workers with static
/// contiguous chunks. f must only write to storage owned by index i.
inline void parallel_for(int n, const std::function<void(int)>& f) {
    const int workers = std::min(thread_count(), std::max(n, 1));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int lo = static_cast<int>(static_cast<long>(n) * w / workers);
        const int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / workers);
        pool.emplace_back([&, w, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i) f(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Fields and state

/// Nodal field with `components` values per node, node-major.
struct Field {
    int components = 1;
    VectorXd values;

    Field() = default;
    Field(int num_nodes, int comps) : components(comps), values(VectorXd::Zero(static_cast<Eigen::Index>(num_nodes) * comps)) {}

    int num_nodes() const { return static_cast<int>(values.size() / components); }
    double operator()(int node, int comp = 0) const { return values[node * components + comp]; }
    double& operator()(int node, int comp = 0) { return values[node * components + comp]; }
};

enum class LoadingMode { tension, shear };

inline std::string_view to_string(LoadingMode m) { return m == LoadingMode::tension ? "tension" : "shear"; }

inline LoadingMode parse_loading_mode(std::string_view s) {
    if (s == "tension") return LoadingMode::tension;
    if (s == "shear") return LoadingMode::shear;
    throw std::invalid_argument("unknown loading mode '" + std::string(s) + "' (expected tension or shear)");
}

struct SimState {
    std::shared_ptr<const Mesh> mesh;
    Field u, d, d_prev;
    int step = 0;
    double ubar = 0.0;      ///< applied top-edge displacement [m]
    double reaction = 0.0;  ///< top-edge reaction in the loading direction [N/m]

    SimState() = default;
    explicit SimState(std::shared_ptr<const Mesh> m)
        : mesh(std::move(m)), u(mesh->num_nodes(), 2), d(mesh->num_nodes(), 1), d_prev(mesh->num_nodes(), 1) {}
};

// ---------------------------------------------------------------------------
// Element kinematics

struct ElementGeometry {
    double area;
    std::array<double, 3> dNdx, dNdy;
};

inline ElementGeometry element_geometry(const Mesh& m, int e) {
    const auto& t = m.triangles[static_cast<std::size_t>(e)];
    const Point2& p0 = m.nodes[static_cast<std::size_t>(t[0])];
    const Point2& p1 = m.nodes[static_cast<std::size_t>(t[1])];
    const Point2& p2 = m.nodes[static_cast<std::size_t>(t[2])];
    const double two_a = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
    ElementGeometry g;
    g.area = 0.5 * two_a;
    const std::array<const Point2*, 3> p{&p0, &p1, &p2};
    for (int i = 0; i < 3; ++i) {
        const Point2& pj = *p[static_cast<std::size_t>((i + 1) % 3)];
        const Point2& pk = *p[static_cast<std::size_t>((i + 2) % 3)];
        g.dNdx[static_cast<std::size_t>(i)] = (pj.y() - pk.y()) / two_a;
        g.dNdy[static_cast<std::size_t>(i)] = (pk.x() - pj.x()) / two_a;
    }
    return g;
}

/// Strain-displacement operator: rows are Kelvin slots, columns the element
/// dofs (ux0, uy0, ux1, uy1, ux2, uy2). Out-of-plane rows are zero.
using ElementB = Eigen::Matrix<double, 6, 6>;

inline ElementB strain_operator(const ElementGeometry& g) {
    ElementB b = ElementB::Zero();
    const double h = 0.5 * kSqrt2;
    for (int a = 0; a < 3; ++a) {
        b(0, 2 * a) = g.dNdx[static_cast<std::size_t>(a)];
        b(1, 2 * a + 1) = g.dNdy[static_cast<std::size_t>(a)];
        b(5, 2 * a) = h * g.dNdy[static_cast<std::size_t>(a)];
        b(5, 2 * a + 1) = h * g.dNdx[static_cast<std::size_t>(a)];
    }
    return b;
}

using ElementVec = Eigen::Matrix<double, 6, 1>;

inline ElementVec element_displacements(const Mesh& m, int e, const Field& u) {
    ElementVec ue;
    const auto& t = m.triangles[static_cast<std::size_t>(e)];
    for (int a = 0; a < 3; ++a) {
        ue[2 * a] = u(t[static_cast<std::size_t>(a)], 0);
        ue[2 * a + 1] = u(t[static_cast<std::size_t>(a)], 1);
    }
    return ue;
}

/// Constant plane-strain strain of element e in 3D Kelvin form.
inline SymTensor2 strain_at_qp(const Mesh& m, int e, const Field& u) {
    return SymTensor2{Vec6(strain_operator(element_geometry(m, e)) * element_displacements(m, e, u))};
}

/// In-plane displacement gradient [du_i/dx_j] of element e.
inline Eigen::Matrix2d displacement_gradient(const Mesh& m, int e, const Field& u) {
    const ElementGeometry g = element_geometry(m, e);
    const auto& t = m.triangles[static_cast<std::size_t>(e)];
    Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 3; ++a) {
        const int n = t[static_cast<std::size_t>(a)];
        for (int i = 0; i < 2; ++i) {
            grad(i, 0) += u(n, i) * g.dNdx[static_cast<std::size_t>(a)];
            grad(i, 1) += u(n, i) * g.dNdy[static_cast<std::size_t>(a)];
        }
    }
    return grad;
}

inline Eigen::Vector2d damage_gradient(const Mesh& m, int e, const Field& d) {
    const ElementGeometry g = element_geometry(m, e);
    const auto& t = m.triangles[static_cast<std::size_t>(e)];
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (int a = 0; a < 3; ++a) {
        grad.x() += d(t[static_cast<std::size_t>(a)]) * g.dNdx[static_cast<std::size_t>(a)];
        grad.y() += d(t[static_cast<std::size_t>(a)]) * g.dNdy[static_cast<std::size_t>(a)];
    }
    return grad;
}

/// Element average of a function of d using the edge-midpoint rule (exact for
/// quadratics in d).
template <class F>
double element_average(const Mesh& m, int e, const Field& d, F&& f) {
    const auto& t = m.triangles[static_cast<std::size_t>(e)];
    const double d0 = d(t[0]), d1 = d(t[1]), d2 = d(t[2]);
    return (f(0.5 * (d0 + d1)) + f(0.5 * (d1 + d2)) + f(0.5 * (d2 + d0))) / 3.0;
}

// ---------------------------------------------------------------------------
// Boundary conditions

/// Prescribed dof values; dof index = 2 * node + component for u.
struct Dirichlet {
    std::vector<int> dofs;
    std::vector<double> values;
};

/// Bottom edge clamped; top edge moved by ubar in the loading direction with
/// the other component held at zero.
inline Dirichlet plate_dirichlet(const Mesh& m, LoadingMode mode, double ubar) {
    Dirichlet bc;
    for (int n : m.node_set("bottom")) {
        bc.dofs.push_back(2 * n);
        bc.values.push_back(0.0);
        bc.dofs.push_back(2 * n + 1);
        bc.values.push_back(0.0);
    }
    for (int n : m.node_set("top")) {
        bc.dofs.push_back(2 * n);
        bc.values.push_back(mode == LoadingMode::shear ? ubar : 0.0);
        bc.dofs.push_back(2 * n + 1);
        bc.values.push_back(mode == LoadingMode::tension ? ubar : 0.0);
    }
    return bc;
}

inline void apply_dirichlet(Field& u, const Dirichlet& bc) {
    for (std::size_t i = 0; i < bc.dofs.size(); ++i) u.values[bc.dofs[i]] = bc.values[i];
}

/// Numbering of unconstrained dofs; -1 marks constrained ones.
inline std::vector<int> free_dof_map(int ndof, const std::vector<int>& constrained, int& nfree) {
    std::vector<int> map(static_cast<std::size_t>(ndof), 0);
    for (int c : constrained) {
        if (c < 0 || c >= ndof) throw std::out_of_range("Dirichlet dof out of range");
        map[static_cast<std::size_t>(c)] = -1;
    }
    nfree = 0;
    for (int& v : map) v = (v < 0) ? -1 : nfree++;
    return map;
}


// ---------------------------------------------------------------------------
// Linear solves

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LinearSolver { direct, cg };

inline LinearSolver parse_linear_solver(std::string_view s) {
    if (s == "direct") return LinearSolver::direct;
    if (s == "cg") return LinearSolver::cg;
    throw std::invalid_argument("unknown linear solver '" + std::string(s) + "' (expected direct or cg)");
}

/// SPD solver that keeps the symbolic factorization while the sparsity
/// pattern is unchanged. Direct: sparse LDL^T with fill-reducing ordering.
/// cg: incomplete-Cholesky preconditioned conjugate gradients. Both check the
/// relative residual against 1e-10.
class SpdSolver {
public:
    explicit SpdSolver(LinearSolver kind = LinearSolver::direct) : kind_(kind) {}

    VectorXd solve(const SparseMatrix& a, const VectorXd& b) {
        if (a.rows() != a.cols() || a.rows() != b.size()) throw std::invalid_argument("solve_linear: dimension mismatch");
        if (a.rows() == 0) return VectorXd();
        const double bnorm = b.norm();
        if (bnorm == 0.0) return VectorXd::Zero(b.size());
        VectorXd x;
        if (kind_ == LinearSolver::direct) {
            if (!same_pattern(a)) {
                ldlt_.analyzePattern(a);
                outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1);
                inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
            }
            ldlt_.factorize(a);
            if (ldlt_.info() != Eigen::Success) throw SolverError("solve_linear: factorization failed (singular system)");
            const VectorXd& dv = ldlt_.vectorD();
            const double dmax = dv.cwiseAbs().maxCoeff();
            if (!(dv.minCoeff() > 1e-13 * dmax))
                throw SolverError("solve_linear: matrix is singular or not positive-definite (missing constraints?)");
            x = ldlt_.solve(b);
        } else {
            Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
            cg.setTolerance(1e-12);
            cg.setMaxIterations(10 * a.rows() + 100);
            cg.compute(a);
            if (cg.info() != Eigen::Success) throw SolverError("solve_linear: preconditioner setup failed");
            x = cg.solve(b);
            if (cg.info() != Eigen::Success) throw SolverError("solve_linear: CG breakdown or no convergence");
        }
        const double rel = (a * x - b).norm() / bnorm;
        if (!(rel <= 1e-10)) throw SolverError("solve_linear: relative residual " + std::to_string(rel) + " above 1e-10");
        return x;
    }

private:
    bool same_pattern(const SparseMatrix& a) const {
        return static_cast<Eigen::Index>(outer_.size()) == a.outerSize() + 1 &&
               static_cast<Eigen::Index>(inner_.size()) == a.nonZeros() &&
               std::equal(outer_.begin(), outer_.end(), a.outerIndexPtr()) &&
               std::equal(inner_.begin(), inner_.end(), a.innerIndexPtr());
    }

    LinearSolver kind_;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
    std::vector<int> outer_, inner_;
};

inline VectorXd solve_linear(const SparseMatrix& a, const VectorXd& b, LinearSolver kind = LinearSolver::direct) {
    SpdSolver s(kind);
    return s.solve(a, b);
}

/// Sparsity pattern of an element-assembled matrix with a precomputed slot
/// for every (element, local i, local j) entry; -1 marks eliminated rows or
/// columns.
struct ScatterPattern {
    SparseMatrix matrix;
    std::vector<int> slots;
    int local = 0;   ///< element matrix size

    /// `dof(e, i)` returns the global row of local dof i or -1.
    template <class DofOf>
    void build(int ne, int local_size, int n, DofOf&& dof) {
        local = local_size;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(ne) * static_cast<std::size_t>(local * local));
        for (int e = 0; e < ne; ++e)
            for (int i = 0; i < local; ++i) {
                const int r = dof(e, i);
                if (r < 0) continue;
                for (int j = 0; j < local; ++j) {
                    const int c = dof(e, j);
                    if (c >= 0) trip.emplace_back(r, c, 0.0);
                }
            }
        matrix.resize(n, n);
        matrix.setFromTriplets(trip.begin(), trip.end());
        matrix.makeCompressed();
        slots.assign(static_cast<std::size_t>(ne) * static_cast<std::size_t>(local * local), -1);
        const int* outer = matrix.outerIndexPtr();
        const int* inner = matrix.innerIndexPtr();
        for (int e = 0; e < ne; ++e)
            for (int i = 0; i < local; ++i) {
                const int r = dof(e, i);
                if (r < 0) continue;
                for (int j = 0; j < local; ++j) {
                    const int c = dof(e, j);
                    if (c < 0) continue;
                    const int* pos = std::lower_bound(inner + outer[c], inner + outer[c + 1], r);
                    slots[(static_cast<std::size_t>(e) * static_cast<std::size_t>(local) + static_cast<std::size_t>(i)) *
                              static_cast<std::size_t>(local) + static_cast<std::size_t>(j)] = static_cast<int>(pos - inner);
                }
            }
    }

    template <class Mat>
    void add(int e, const Mat& ke) {
        double* v = matrix.valuePtr();
        const std::size_t base = static_cast<std::size_t>(e) * static_cast<std::size_t>(local * local);
        for (int i = 0; i < local; ++i)
            for (int j = 0; j < local; ++j) {
                const int s = slots[base + static_cast<std::size_t>(i * local + j)];
                if (s >= 0) v[s] += ke(i, j);
            }
    }

    void zero() { std::fill(matrix.valuePtr(), matrix.valuePtr() + matrix.nonZeros(), 0.0); }
};

/// Reusable patterns and factorizations for one mesh and one set of
/// constrained dofs.
struct Workspace {
    explicit Workspace(LinearSolver kind = LinearSolver::direct) : u_solver(kind), d_solver(kind) {}

    const Mesh* mesh = nullptr;
    std::vector<int> constrained;
    std::vector<int> free_map;
    int nfree = 0;
    ScatterPattern u_pattern, d_pattern;
    bool d_ready = false;
    SpdSolver u_solver, d_solver;

    void prepare_u(const Mesh& m, const std::vector<int>& dofs) {
        if (mesh == &m && constrained == dofs && !free_map.empty()) return;
        mesh = &m;
        constrained = dofs;
        free_map = free_dof_map(2 * m.num_nodes(), dofs, nfree);
        u_pattern.build(m.num_elements(), 6, nfree, [&](int e, int i) {
            return free_map[static_cast<std::size_t>(2 * m.triangles[static_cast<std::size_t>(e)][static_cast<std::size_t>(i / 2)] + i % 2)];
        });
        d_ready = false;
    }

    void prepare_d(const Mesh& m) {
        if (d_ready && mesh == &m) return;
        if (mesh != &m) {
            mesh = &m;
            free_map.clear();
        }
        d_pattern.build(m.num_elements(), 3, m.num_nodes(),
                        [&](int e, int i) { return m.triangles[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)]; });
        d_ready = true;
    }
};

// ---------------------------------------------------------------------------
// Displacement problem

/// Per-element constitutive response of the degraded material.
struct ElementResponse {
    SplitState split;
    double g_avg = 1.0;     ///< element average of g(d) (+ residual stiffness)
    SymTensor2 stress;
    KelvinOperator tangent;
};

inline ElementResponse element_response(const Mesh& m, int e, const Field& u, const Field& d,
                                        const ElasticModel& model, SplitLaw law, const PFModel& pf) {
    ElementResponse r;
    r.split = split(law, model, strain_at_qp(m, e, u));
    r.g_avg = element_average(m, e, d, [](double x) { return PFModel::g(x); }) + pf.residual;
    r.stress = r.g_avg * r.split.sigma_t + r.split.sigma_c;
    r.tangent = KelvinOperator{r.g_avg * r.split.C_t.matrix() + r.split.C_c.matrix()};
    return r;
}

enum class TangentKind { consistent, degraded_full };

struct USystem {
    SparseMatrix K;            ///< free-free tangent
    VectorXd rhs;              ///< minus the free residual
    VectorXd internal_force;   ///< full-length internal force (reactions on constrained dofs)
    std::vector<int> free_map;
    int nfree = 0;
    double energy = 0.0;       ///< elastic energy sum A (g psi^t + psi^c)
    std::vector<double> psi_t; ///< per-element driving energy
};

/// Assembles the tangent and residual of the displacement problem at fixed d.
/// Constrained dofs are eliminated; `internal_force` keeps all dofs so the
/// reaction can be read off the constrained rows.
inline USystem assemble_u_system(const SimState& s, const ElasticModel& model, SplitLaw law, const PFModel& pf,
                                 const std::vector<int>& constrained, TangentKind kind = TangentKind::consistent,
                                 Workspace* ws = nullptr) {
    Workspace local;
    Workspace& w = ws ? *ws : local;
    const Mesh& m = *s.mesh;
    w.prepare_u(m, constrained);
    const int ne = m.num_elements();
    const int ndof = 2 * m.num_nodes();
    USystem sys;
    std::vector<ElementVec> fe(static_cast<std::size_t>(ne));
    std::vector<Eigen::Matrix<double, 6, 6>> ke(static_cast<std::size_t>(ne));
    std::vector<double> ee(static_cast<std::size_t>(ne));
    sys.psi_t.resize(static_cast<std::size_t>(ne));
    parallel_for(ne, [&](int e) {
        const ElementGeometry g = element_geometry(m, e);
        const ElementB b = strain_operator(g);
        const ElementResponse r = element_response(m, e, s.u, s.d, model, law, pf);
        const Mat6 tangent = kind == TangentKind::consistent ? r.tangent.matrix() : Mat6(r.g_avg * model.C().matrix());
        fe[static_cast<std::size_t>(e)] = g.area * b.transpose() * r.stress.kelvin();
        ke[static_cast<std::size_t>(e)] = g.area * b.transpose() * tangent * b;
        ee[static_cast<std::size_t>(e)] = g.area * (r.g_avg * r.split.psi_t + r.split.psi_c);
        sys.psi_t[static_cast<std::size_t>(e)] = r.split.psi_t;
    });
    sys.internal_force = VectorXd::Zero(ndof);
    w.u_pattern.zero();
    for (int e = 0; e < ne; ++e) {
        const auto& t = m.triangles[static_cast<std::size_t>(e)];
        for (int i = 0; i < 6; ++i) sys.internal_force[2 * t[static_cast<std::size_t>(i / 2)] + i % 2] += fe[static_cast<std::size_t>(e)][i];
        w.u_pattern.add(e, ke[static_cast<std::size_t>(e)]);
        sys.energy += ee[static_cast<std::size_t>(e)];
    }
    sys.K = w.u_pattern.matrix;
    sys.free_map = w.free_map;
    sys.nfree = w.nfree;
    sys.rhs = VectorXd::Zero(sys.nfree);
    for (int g = 0; g < ndof; ++g)
        if (sys.free_map[static_cast<std::size_t>(g)] >= 0) sys.rhs[sys.free_map[static_cast<std::size_t>(g)]] = -sys.internal_force[g];
    return sys;
}

// ---------------------------------------------------------------------------
// Damage problem

struct DSystem {
    SparseMatrix A;
    VectorXd b;
};

/// Element driving energies psi^t at the current displacement.
inline std::vector<double> element_driving_energy(const SimState& s, const ElasticModel& model, SplitLaw law) {
    const Mesh& m = *s.mesh;
    std::vector<double> psi(static_cast<std::size_t>(m.num_elements()));
    parallel_for(m.num_elements(), [&](int e) {
        psi[static_cast<std::size_t>(e)] = split(law, model, strain_at_qp(m, e, s.u)).psi_t;
    });
    return psi;
}

/// Damage system at fixed displacement. For AT2 the weak form is affine in d
/// and A d = b is exact. For AT1 the system is A d = b plus the bound
/// constraints handled by the caller.
inline DSystem assemble_d_system(const SimState& s, const std::vector<double>& psi_t, const PFModel& pf,
                                 Workspace* ws = nullptr) {
    Workspace local;
    Workspace& w = ws ? *ws : local;
    const Mesh& m = *s.mesh;
    w.prepare_d(m);
    const int ne = m.num_elements();
    const double kappa = pf.Gc / (4.0 * pf.c_w());
    std::vector<Eigen::Matrix3d> ae(static_cast<std::size_t>(ne));
    std::vector<Eigen::Vector3d> be(static_cast<std::size_t>(ne));
    parallel_for(ne, [&](int e) {
        const ElementGeometry g = element_geometry(m, e);
        Eigen::Matrix3d mass;
        mass << 2, 1, 1, 1, 2, 1, 1, 1, 2;
        mass *= g.area / 12.0;
        Eigen::Matrix3d lap;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                lap(i, j) = g.area * (g.dNdx[static_cast<std::size_t>(i)] * g.dNdx[static_cast<std::size_t>(j)] +
                                      g.dNdy[static_cast<std::size_t>(i)] * g.dNdy[static_cast<std::size_t>(j)]);
        const double psi = psi_t[static_cast<std::size_t>(e)];
        const Eigen::Vector3d lumped = Eigen::Vector3d::Constant(g.area / 3.0);
        // g'(d) psi = -2 (1 - d) psi; w'(d) = 2 d (AT2) or 1 (AT1).
        if (pf.variant == PFVariant::AT2) {
            ae[static_cast<std::size_t>(e)] = (2.0 * psi + 2.0 * kappa / pf.ell) * mass + 2.0 * kappa * pf.ell * lap;
            be[static_cast<std::size_t>(e)] = 2.0 * psi * lumped;
        } else {
            ae[static_cast<std::size_t>(e)] = 2.0 * psi * mass + 2.0 * kappa * pf.ell * lap;
            be[static_cast<std::size_t>(e)] = (2.0 * psi - kappa / pf.ell) * lumped;
        }
    });
    DSystem sys;
    sys.b = VectorXd::Zero(m.num_nodes());
    w.d_pattern.zero();
    for (int e = 0; e < ne; ++e) {
        const auto& t = m.triangles[static_cast<std::size_t>(e)];
        for (int i = 0; i < 3; ++i) sys.b[t[static_cast<std::size_t>(i)]] += be[static_cast<std::size_t>(e)][i];
        w.d_pattern.add(e, ae[static_cast<std::size_t>(e)]);
    }
    sys.A = w.d_pattern.matrix;
    return sys;
}

}  // namespace pfaniso
