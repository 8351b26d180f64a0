#include "pfaniso/solver.hpp"
#include "pfaniso/verify.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace pfaniso;

namespace {

std::shared_ptr<const Mesh> small_plate(double h_band = 0.25, double h_coarse = 0.5, bool slit = false) {
    SenPlateParams p;
    p.L = 1.0;
    p.h_band = h_band;
    p.h_coarse = h_coarse;
    p.band = tension_band(1.0);
    p.slit = slit;
    return std::make_shared<const Mesh>(generate_sen_plate(p));
}

std::shared_ptr<const Mesh> single_triangle() {
    Mesh m;
    m.nodes = {{0.0, 0.0}, {2.0, 0.5}, {0.3, 1.5}};
    m.triangles = {{0, 1, 2}};
    validate(m);
    return std::make_shared<const Mesh>(std::move(m));
}

std::vector<int> boundary_nodes(const Mesh& m) {
    std::set<int> s;
    for (const char* name : {"bottom", "top", "left", "right"})
        for (int n : m.node_set(name)) s.insert(n);
    return {s.begin(), s.end()};
}

ElasticModel table1() { return from_orthotropic(benchmark_orthotropic_constants()); }

}  // namespace

TEST(Strain, RigidTranslationAndRotation) {
    const auto mesh = small_plate();
    SimState s(mesh);
    const double theta = 1e-3;
    for (int n = 0; n < mesh->num_nodes(); ++n) {
        const Point2& p = mesh->nodes[static_cast<std::size_t>(n)];
        s.u(n, 0) = 0.2 - theta * p.y();
        s.u(n, 1) = -0.1 + theta * p.x();
    }
    double max_eps = 0.0;
    for (int e = 0; e < mesh->num_elements(); ++e) max_eps = std::max(max_eps, strain_at_qp(*mesh, e, s.u).norm());
    EXPECT_LT(max_eps, 1e-15);
    const ElasticModel m = table1();
    const PFModel pf(PFVariant::AT2, 0.1, 1.0);
    EXPECT_LT(std::abs(elastic_energy(s, m, SplitLaw::no_tension, pf)), 1e-12);
}

TEST(Strain, LinearFieldGivesSingleComponent) {
    const auto mesh = small_plate();
    Field u(mesh->num_nodes(), 2);
    for (int n = 0; n < mesh->num_nodes(); ++n) u(n, 0) = 3e-3 * mesh->nodes[static_cast<std::size_t>(n)].x();
    for (int e = 0; e < mesh->num_elements(); ++e) {
        const SymTensor2 eps = strain_at_qp(*mesh, e, u);
        ASSERT_NEAR(eps[0], 3e-3, 1e-15);
        for (int i = 1; i < 6; ++i) ASSERT_NEAR(eps[i], 0.0, 1e-15);
    }
}

TEST(Strain, PlaneStrainOutOfPlaneStress) {
    const double nu = 0.3;
    const ElasticModel m = from_isotropic(200e9, nu);
    const SymTensor2 eps{1e-3, 0, 0, 0, 0, 0};
    const SymTensor2 sig = m.C() * eps;
    EXPECT_NE(sig[2], 0.0);
    EXPECT_NEAR(sig[2], nu * (sig[0] + sig[1]), 1e-10 * std::abs(sig[0]));
}

TEST(Assembly, SingleElementMatchesConstantStrainTriangle) {
    const auto mesh = single_triangle();
    const double E = 100.0, nu = 0.25;
    const ElasticModel model = from_isotropic(E, nu);
    SimState s(mesh);
    const PFModel pf(PFVariant::AT2, 0.1, 1.0, 0.0);
    const USystem sys = assemble_u_system(s, model, SplitLaw::none, pf, {});

    // Textbook plane-strain CST with engineering shear strain.
    const auto& x = mesh->nodes;
    const double area = 0.5 * ((x[1] - x[0]).x() * (x[2] - x[0]).y() - (x[2] - x[0]).x() * (x[1] - x[0]).y());
    Eigen::Matrix<double, 3, 6> b = Eigen::Matrix<double, 3, 6>::Zero();
    for (int i = 0; i < 3; ++i) {
        const Point2& pj = x[static_cast<std::size_t>((i + 1) % 3)];
        const Point2& pk = x[static_cast<std::size_t>((i + 2) % 3)];
        const double bi = (pj.y() - pk.y()) / (2 * area), ci = (pk.x() - pj.x()) / (2 * area);
        b(0, 2 * i) = bi;
        b(1, 2 * i + 1) = ci;
        b(2, 2 * i) = ci;
        b(2, 2 * i + 1) = bi;
    }
    Eigen::Matrix3d d;
    d << 1 - nu, nu, 0, nu, 1 - nu, 0, 0, 0, (1 - 2 * nu) / 2;
    d *= E / ((1 + nu) * (1 - 2 * nu));
    const Eigen::Matrix<double, 6, 6> expect = area * b.transpose() * d * b;
    const Eigen::MatrixXd got(sys.K);
    EXPECT_LT((got - expect).norm(), 1e-12 * expect.norm());
}

TEST(Assembly, FloatingPlateIsSingular) {
    const auto mesh = small_plate();
    SimState s(mesh);
    const PFModel pf(PFVariant::AT2, 0.1, 1.0);
    const USystem sys = assemble_u_system(s, table1(), SplitLaw::none, pf, {});
    VectorXd rhs = VectorXd::Ones(sys.nfree);
    EXPECT_THROW(solve_linear(sys.K, rhs), SolverError);
}

TEST(Assembly, PatchTestReproducesUniformStrain) {
    const auto mesh = small_plate(0.125, 0.25);
    const ElasticModel model = table1().rotated(0.4);
    const PFModel pf(PFVariant::AT2, 0.1, 1.0);
    StaggeredConfig cfg;
    cfg.tol_u = 1e-12;
    const double a = 1e-3, b = -4e-4, c = 2.5e-4;
    Dirichlet bc;
    for (int n : boundary_nodes(*mesh)) {
        const Point2& p = mesh->nodes[static_cast<std::size_t>(n)];
        bc.dofs.insert(bc.dofs.end(), {2 * n, 2 * n + 1});
        bc.values.insert(bc.values.end(), {a * p.x() + c * p.y(), c * p.x() + b * p.y()});
    }
    SimState s(mesh);
    const NewtonResult r = solve_u(s, model, SplitLaw::none, pf, bc, cfg);
    ASSERT_TRUE(r.converged);
    const SymTensor2 expect{a, b, 0, 0, 0, kSqrt2 * c};
    double err = 0.0;
    for (int e = 0; e < mesh->num_elements(); ++e) err = std::max(err, (strain_at_qp(*mesh, e, s.u) - expect).norm());
    EXPECT_LT(err, 1e-10 * expect.norm());
}

TEST(Assembly, ResidualIsEnergyGradient) {
    const auto mesh = small_plate(0.5, 0.5);
    ASSERT_GE(mesh->num_elements(), 10);
    Rng rng(3);
    SimState s(mesh);
    for (int i = 0; i < s.u.values.size(); ++i) s.u.values[i] = 1e-3 * uniform(rng, -1, 1);
    for (int i = 0; i < s.d.values.size(); ++i) s.d.values[i] = uniform(rng, 0, 0.8);
    const ElasticModel model = table1().rotated(0.3);
    const PFModel pf(PFVariant::AT2, 0.2, 2700.0);
    for (SplitLaw law : {SplitLaw::none, SplitLaw::vol_dev, SplitLaw::no_tension}) {
        const VectorXd r = residual_u(s, model, law, pf);
        double err = 0.0;
        for (int i = 0; i < s.u.values.size(); ++i) {
            SimState p = s, q = s;
            const double h = 1e-9;
            p.u.values[i] += h;
            q.u.values[i] -= h;
            const double fd = (total_energy(p, model, law, pf) - total_energy(q, model, law, pf)) / (2 * h);
            err = std::max(err, std::abs(fd - r[i]));
        }
        EXPECT_LT(err, 1e-5 * r.cwiseAbs().maxCoeff()) << to_string(law);
    }
}

TEST(Assembly, ReactionEquilibrium) {
    const auto mesh = small_plate(0.0625, 0.125, true);
    SimState s(mesh);
    const ElasticModel model = table1().rotated(0.5);
    const PFModel pf(PFVariant::AT2, 0.2, 2700.0);
    StaggeredConfig cfg;
    cfg.tol_u = 1e-12;
    for (LoadingMode mode : {LoadingMode::tension, LoadingMode::shear}) {
        const Dirichlet bc = plate_dirichlet(*mesh, mode, 1e-3);
        const NewtonResult r = solve_u(s, model, SplitLaw::no_tension, pf, bc, cfg);
        ASSERT_TRUE(r.converged);
        const int comp = mode == LoadingMode::tension ? 1 : 0;
        double top = 0.0, bottom = 0.0;
        for (int n : mesh->node_set("top")) top += r.internal_force[2 * n + comp];
        for (int n : mesh->node_set("bottom")) bottom += r.internal_force[2 * n + comp];
        EXPECT_GT(std::abs(top), 0.0);
        EXPECT_NEAR(top, -bottom, 1e-8 * std::abs(top)) << to_string(mode);
    }
}

TEST(Assembly, DirichletOutOfRange) {
    int nfree = 0;
    EXPECT_THROW(free_dof_map(4, {7}, nfree), std::out_of_range);
    const auto map = free_dof_map(4, {1, 3}, nfree);
    EXPECT_EQ(nfree, 2);
    EXPECT_EQ(map, (std::vector<int>{0, -1, 1, -1}));
}

TEST(LinearSolve, Identity) {
    SparseMatrix a(5, 5);
    a.setIdentity();
    const VectorXd b = VectorXd::LinSpaced(5, 1, 5);
    for (LinearSolver k : {LinearSolver::direct, LinearSolver::cg}) EXPECT_LT((solve_linear(a, b, k) - b).norm(), 1e-14);
}

TEST(LinearSolve, OneDimensionalLaplacian) {
    // -u'' = 1 on (0,1), u(0) = u(1) = 0; the 3-point stencil is exact for the quadratic solution.
    const int n = 99;
    const double h = 1.0 / (n + 1);
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.0 / (h * h));
        if (i > 0) t.emplace_back(i, i - 1, -1.0 / (h * h));
        if (i + 1 < n) t.emplace_back(i, i + 1, -1.0 / (h * h));
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    const VectorXd b = VectorXd::Ones(n);
    for (LinearSolver k : {LinearSolver::direct, LinearSolver::cg}) {
        const VectorXd x = solve_linear(a, b, k);
        for (int i = 0; i < n; ++i) {
            const double xi = (i + 1) * h;
            ASSERT_NEAR(x[i], 0.5 * xi * (1 - xi), 1e-10);
        }
    }
}

TEST(LinearSolve, RandomSpdAgainstDenseFactorization) {
    Rng rng(99);
    Eigen::MatrixXd g(50, 50);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) g(i, j) = uniform(rng, -1, 1);
    const Eigen::MatrixXd dense = g * g.transpose() + 50 * Eigen::MatrixXd::Identity(50, 50);
    const SparseMatrix a = dense.sparseView();
    VectorXd b(50);
    for (int i = 0; i < 50; ++i) b[i] = uniform(rng, -1, 1);
    const VectorXd ref = dense.llt().solve(b);
    for (LinearSolver k : {LinearSolver::direct, LinearSolver::cg})
        EXPECT_LT((solve_linear(a, b, k) - ref).norm(), 1e-9 * ref.norm());
}

TEST(LinearSolve, IndefiniteRejected) {
    SparseMatrix a(2, 2);
    a.insert(0, 0) = 1.0;
    a.insert(1, 1) = -1.0;
    EXPECT_THROW(solve_linear(a, VectorXd::Ones(2)), SolverError);
    EXPECT_THROW(solve_linear(a, VectorXd::Ones(3)), std::invalid_argument);
    EXPECT_EQ(parse_linear_solver("cg"), LinearSolver::cg);
    EXPECT_THROW(parse_linear_solver("lu"), std::invalid_argument);
}

TEST(Parallel, ThreadCountDoesNotChangeAssembly) {
    const auto mesh = small_plate(0.0625, 0.125, true);
    SimState s(mesh);
    Rng rng(5);
    for (int i = 0; i < s.u.values.size(); ++i) s.u.values[i] = 1e-3 * uniform(rng, -1, 1);
    const ElasticModel model = table1();
    const PFModel pf(PFVariant::AT2, 0.2, 2700.0);
    setenv("PFANISO_THREADS", "1", 1);
    const VectorXd a = residual_u(s, model, SplitLaw::no_tension, pf);
    setenv("PFANISO_THREADS", "4", 1);
    const VectorXd b = residual_u(s, model, SplitLaw::no_tension, pf);
    unsetenv("PFANISO_THREADS");
    EXPECT_EQ(a, b);
}
