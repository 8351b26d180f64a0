#include "pfaniso/elasticity.hpp"
#include "pfaniso/verify.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace pfaniso;

namespace {

constexpr double GPa = 1e9;

void expect_roots_consistent(const ElasticModel& m) {
    const double cn = m.C().norm();
    EXPECT_LT((m.C().matrix() * m.S().matrix() - Mat6::Identity()).norm(), 1e-9);
    EXPECT_LT((m.C_half().matrix() * m.C_half().matrix() - m.C().matrix()).norm(), 1e-10 * cn);
    EXPECT_LT((m.C_half().matrix() * m.C_half_inv().matrix() - Mat6::Identity()).norm(), 1e-9);
    EXPECT_LT((m.S_half().matrix() * m.C_half().matrix() - Mat6::Identity()).norm(), 1e-9);
    EXPECT_LT((m.S_half_inv().matrix() - m.C_half().matrix()).norm(), 1e-9 * m.C_half().norm());
}

}  // namespace

TEST(Elasticity, OrthotropicDegeneratesToIsotropic) {
    const double E = 100 * GPa, nu = 0.25, G = E / (2 * (1 + nu));
    const ElasticModel m = from_orthotropic({{E, E, E}, nu, nu, nu, G, G, G});
    EXPECT_EQ(classify(m.C()), SymmetryClass::isotropic);
    EXPECT_LT((m.C().matrix() - from_isotropic(E, nu).C().matrix()).norm(), 1e-10 * m.C().norm());
}

TEST(Elasticity, BenchmarkMaterial) {
    const ElasticModel m = from_orthotropic(benchmark_orthotropic_constants());
    EXPECT_EQ(m.symmetry(), SymmetryClass::orthotropic);
    EXPECT_GT(eig_sym4(m.C()).values[5], 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 3; j < 6; ++j) EXPECT_EQ(m.C()(i, j), 0.0);
    EXPECT_NEAR(m.C()(5, 5), 2 * 46.63 * GPa, 1e-3);
    EXPECT_NEAR(m.C()(4, 4), 2 * 80.77 * GPa, 1e-3);
    expect_roots_consistent(m);
}

TEST(Elasticity, LargePoissonRatioDependsOnConvention) {
    OrthotropicConstants k = benchmark_orthotropic_constants();
    k.nu12 = 0.99;
    EXPECT_NO_THROW(from_orthotropic(k, PoissonConvention::row));
    EXPECT_THROW(from_orthotropic(k, PoissonConvention::column), InadmissibleMaterial);
    k.nu12 = 1.8;
    EXPECT_THROW(from_orthotropic(k, PoissonConvention::row), InadmissibleMaterial);
}

TEST(Elasticity, RejectsNonPositiveModuli) {
    OrthotropicConstants k = benchmark_orthotropic_constants();
    k.G13 = 0.0;
    EXPECT_THROW(from_orthotropic(k), InadmissibleMaterial);
    EXPECT_THROW(from_isotropic(-1.0, 0.3), InadmissibleMaterial);
    EXPECT_THROW(from_isotropic(1.0, 0.5), InadmissibleMaterial);
}

TEST(Elasticity, CubicIsotropicSpecialization) {
    const double lambda = 80 * GPa, mu = 60 * GPa;
    const ElasticModel m = from_cubic({lambda + 2 * mu, lambda, mu, {}, {}, {}, {}});
    EXPECT_EQ(m.symmetry(), SymmetryClass::isotropic);
    EXPECT_LT((m.C().matrix() - from_lame(lambda, mu).C().matrix()).norm(), 1e-6);
}

TEST(Elasticity, CubicAdmissibility) {
    const ElasticModel m = from_cubic({200 * GPa, 100 * GPa, 80 * GPa, {}, {}, {}, {}});
    EXPECT_EQ(m.symmetry(), SymmetryClass::cubic);
    EXPECT_GT(eig_sym4(m.C()).values[5], 0.0);
    expect_roots_consistent(m);
    EXPECT_THROW(from_cubic({200 * GPa, -200 * GPa, 80 * GPa, {}, {}, {}, {}}), InadmissibleMaterial);
}

TEST(Elasticity, FullEmbeddingMatchesOrthotropic) {
    const ElasticModel o = from_orthotropic(benchmark_orthotropic_constants());
    const ElasticModel f = from_full(upper_entries(o.C()));
    EXPECT_EQ(f.C().matrix(), o.C().matrix());
    EXPECT_EQ(f.symmetry(), SymmetryClass::orthotropic);
    EXPECT_LT((f.C_half().matrix() - o.C_half().matrix()).norm(), 1e-12 * o.C_half().norm());
}

TEST(Elasticity, RandomSpdAcceptedIndefiniteRejected) {
    Rng rng(21);
    for (int k = 0; k < 20; ++k) expect_roots_consistent(random_model(SymmetryClass::full, rng));

    std::array<double, 21> indefinite{};
    indefinite[0] = 1.0;     // (0,0)
    indefinite[1] = 2.0;     // (0,1)
    indefinite[6] = 1.0;     // (1,1)
    indefinite[11] = 1.0;    // (2,2)
    indefinite[15] = 1.0;    // (3,3)
    indefinite[18] = 1.0;    // (4,4)
    indefinite[20] = 1.0;    // (5,5)
    EXPECT_THROW(from_full(indefinite), InadmissibleMaterial);

    std::array<double, 21> nan{};
    nan[0] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(from_full(nan), InadmissibleMaterial);
}

TEST(Elasticity, RotationByZeroIsIdentity) {
    const ElasticModel m = from_orthotropic(benchmark_orthotropic_constants());
    EXPECT_EQ(m.rotated(0.0).C().matrix(), m.C().matrix());
}

TEST(Elasticity, RotationCreatesCoupling) {
    const ElasticModel m = from_orthotropic(benchmark_orthotropic_constants());
    const ElasticModel r = m.rotated(std::numbers::pi / 4);
    EXPECT_GT(std::abs(r.C()(0, 0) - m.C()(0, 0)), 1e-3 * m.C()(0, 0));
    EXPECT_GT(std::abs(r.C()(0, 5)), 1e-3 * m.C().norm());
    EXPECT_DOUBLE_EQ(r.orientation(), std::numbers::pi / 4);
    const Mat6 explicit_rotation =
        rotation_about_z(std::numbers::pi / 4).matrix() * m.C().matrix() * rotation_about_z(std::numbers::pi / 4).matrix().transpose();
    EXPECT_LT((r.C().matrix() - explicit_rotation).norm(), 1e-12 * m.C().norm());
    expect_roots_consistent(r);
}

TEST(Elasticity, RotationRoundTrip) {
    const ElasticModel m = from_orthotropic(benchmark_orthotropic_constants());
    const ElasticModel back = m.rotated(0.7).rotated(-0.7);
    EXPECT_LT((back.C().matrix() - m.C().matrix()).norm(), 1e-10 * m.C().norm());
    EXPECT_LT((back.C_half().matrix() - m.C_half().matrix()).norm(), 1e-10 * m.C_half().norm());
}

TEST(Elasticity, EnergyThroughSquareRoot) {
    Rng rng(8);
    for (SymmetryClass cls : kAllClasses) {
        const ElasticModel m = random_model(cls, rng);
        for (int k = 0; k < 1000; ++k) {
            const SymTensor2 e = random_strain(rng);
            const SymTensor2 et = m.C_half() * e;
            const double psi = m.energy(e);
            ASSERT_NEAR(psi, 0.5 * dot(et, et), 1e-10 * psi);
        }
    }
}

TEST(Elasticity, EnergyRotationInvariant) {
    Rng rng(9);
    const ElasticModel m = from_orthotropic(benchmark_orthotropic_constants());
    for (int k = 0; k < 100; ++k) {
        const double a = uniform(rng, -std::numbers::pi, std::numbers::pi);
        const SymTensor2 e = random_strain(rng);
        const double psi = m.energy(e);
        ASSERT_NEAR(m.rotated(a).energy(rotation_about_z(a) * e), psi, 1e-10 * psi);
    }
}

TEST(Elasticity, ClassifyDetectsFull) {
    Rng rng(4);
    EXPECT_EQ(classify(random_model(SymmetryClass::full, rng).C()), SymmetryClass::full);
    EXPECT_EQ(classify(from_orthotropic(benchmark_orthotropic_constants()).rotated(0.3).C()), SymmetryClass::full);
}
