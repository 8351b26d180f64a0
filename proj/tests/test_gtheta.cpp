#include "pfaniso/gtheta.hpp"
#include "pfaniso/verify.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <set>

using namespace pfaniso;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Mesh> tip_refined_plate(double h = 0.01) {
    SenPlateParams p;
    p.L = 1.0;
    p.h_band = h;
    p.h_coarse = 0.0625;
    p.band = Rect{-0.2, 0.2, -0.2, 0.2};
    return std::make_shared<const Mesh>(generate_sen_plate(p));
}

// Plane-strain mode-I near-tip displacement for a crack along the negative x axis.
void impose_mode_one(SimState& s, double K, double E, double nu) {
    const Mesh& m = *s.mesh;
    const double mu = E / (2 * (1 + nu));
    const double kappa = 3 - 4 * nu;
    std::set<int> lower;
    for (const auto& pr : m.slit.seam) lower.insert(pr[1]);
    for (int n = 0; n < m.num_nodes(); ++n) {
        const Point2& p = m.nodes[static_cast<std::size_t>(n)];
        const double r = p.norm();
        const double th = lower.count(n) ? -kPi : std::atan2(p.y(), p.x());
        const double a = K / (2 * mu) * std::sqrt(r / (2 * kPi));
        s.u(n, 0) = a * std::cos(th / 2) * (kappa - 1 + 2 * std::sin(th / 2) * std::sin(th / 2));
        s.u(n, 1) = a * std::sin(th / 2) * (kappa + 1 - 2 * std::cos(th / 2) * std::cos(th / 2));
    }
}

void mark_path(SimState& s, const std::vector<Point2>& polyline, double halfwidth) {
    const Mesh& m = *s.mesh;
    for (int n = 0; n < m.num_nodes(); ++n) {
        const Point2& p = m.nodes[static_cast<std::size_t>(n)];
        for (std::size_t k = 0; k + 1 < polyline.size(); ++k) {
            const Eigen::Vector2d ab = polyline[k + 1] - polyline[k];
            const double t = std::clamp((p - polyline[k]).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
            if ((p - (polyline[k] + t * ab)).norm() <= halfwidth) s.d(n) = 1.0;
        }
    }
}

}  // namespace

TEST(GTheta, ThetaFieldProfile) {
    const ThetaField t({0, 0}, 0.0, 1.0, 2.0);
    EXPECT_EQ(t.f(0.5), 1.0);
    EXPECT_EQ(t.f(2.5), 0.0);
    EXPECT_NEAR(t.f(1.5), 0.5, 1e-15);
    EXPECT_THROW(ThetaField({0, 0}, 0.0, 2.0, 1.0), std::invalid_argument);
    EXPECT_THROW(ThetaField({0, 0}, 0.0, 0.0, 1.0), std::invalid_argument);
}

TEST(GTheta, ZeroAndRigidFieldsGiveZero) {
    const auto mesh = tip_refined_plate(0.05);
    const ElasticModel model = from_isotropic(210e9, 0.3);
    SimState s(mesh);
    EXPECT_EQ(gtheta(s, model, {0, 0}, 0.0, 0.05, 0.125), 0.0);
    for (int n = 0; n < mesh->num_nodes(); ++n) {
        const Point2& p = mesh->nodes[static_cast<std::size_t>(n)];
        s.u(n, 0) = 1e-3 - 1e-4 * p.y();
        s.u(n, 1) = 2e-3 + 1e-4 * p.x();
    }
    for (double a : {0.0, 0.5, -1.0}) {
        EXPECT_NEAR(gtheta(s, model, {0, 0}, a, 0.05, 0.125), 0.0, 1e-6);
        EXPECT_NEAR(gtheta_tensile(s, model, SplitLaw::no_tension, {0, 0}, a, 0.05, 0.125), 0.0, 1e-6);
    }
}

TEST(GTheta, UniformFieldsGiveZero) {
    const auto mesh = tip_refined_plate(0.05);
    const ElasticModel model = from_orthotropic(benchmark_orthotropic_constants()).rotated(0.3);
    SimState s(mesh);
    // Biaxial compression and a mixed uniform field.
    for (const auto& [a, b, c] : {std::array<double, 3>{-1e-3, -1e-3, 0}, std::array<double, 3>{1e-3, -3e-4, 2e-4}}) {
        for (int n = 0; n < mesh->num_nodes(); ++n) {
            const Point2& p = mesh->nodes[static_cast<std::size_t>(n)];
            s.u(n, 0) = a * p.x() + c * p.y();
            s.u(n, 1) = c * p.x() + b * p.y();
        }
        const double scale = model.C().norm() * 1e-6 * 0.1;
        for (SplitLaw law : {SplitLaw::vol_dev, SplitLaw::no_tension}) {
            const GThetaVectors v = gtheta_vectors(s, model, law, {0, 0}, 0.05, 0.125);
            EXPECT_LT(v.J.norm(), 1e-10 * scale);
            EXPECT_LT(v.J_t.norm(), 1e-10 * scale);
        }
    }
}

TEST(GTheta, ModeOneEnergyReleaseRate) {
    const auto mesh = tip_refined_plate();
    const double E = 210e9, nu = 0.3, K = 1e6;
    const ElasticModel model = from_isotropic(E, nu);
    SimState s(mesh);
    impose_mode_one(s, K, E, nu);
    const double expect = K * K * (1 - nu * nu) / E;
    const double r_i = 0.05, r_o = 0.125;
    const double g0 = gtheta(s, model, {0, 0}, 0.0, r_i, r_o);
    EXPECT_NEAR(g0, expect, 0.05 * expect);
    for (double f : {0.8, 1.2}) {
        const double g = gtheta(s, model, {0, 0}, 0.0, f * r_i, r_o);
        EXPECT_NEAR(g, g0, 0.03 * std::abs(g0)) << "r_i scale " << f;
    }
    // Symmetric field: no release rate normal to the crack.
    EXPECT_LT(std::abs(gtheta(s, model, {0, 0}, kPi / 2, r_i, r_o)), 0.01 * expect);
}

TEST(GTheta, TensileEqualsStandardWithoutCompression) {
    const auto mesh = tip_refined_plate(0.02);
    const double E = 210e9, nu = 0.3;
    const ElasticModel model = from_isotropic(E, nu);
    SimState s(mesh);
    impose_mode_one(s, 1e6, E, nu);
    const GThetaVectors v = gtheta_vectors(s, model, SplitLaw::none, {0, 0}, 0.05, 0.125);
    EXPECT_LT((v.J - v.J_t).norm(), 1e-12 * v.J.norm());
}

TEST(GTheta, SweepShapes) {
    const auto mesh = tip_refined_plate(0.05);
    const ElasticModel model = from_isotropic(210e9, 0.3);
    SimState s(mesh);
    impose_mode_one(s, 1e6, 210e9, 0.3);
    const GThetaCurve one = sweep(s, model, SplitLaw::none, {0, 0}, {15.0}, 0.05, 0.125, 2700.0);
    ASSERT_EQ(one.G.size(), 1u);
    EXPECT_NEAR(one.G[0], gtheta(s, model, {0, 0}, 15.0 * kPi / 180, 0.05, 0.125), 1e-9 * std::abs(one.G[0]));
    const GThetaCurve fan = sweep(s, model, SplitLaw::none, {0, 0}, default_fan(), 0.05, 0.125, 2700.0);
    EXPECT_EQ(fan.angles_deg.size(), 37u);
    EXPECT_EQ(fan.angles_deg[fan.argmax()], 0.0);
    EXPECT_FALSE(fan.clipped);
    const GThetaCurve clipped = sweep(s, model, SplitLaw::none, {0.45, 0}, {0.0}, 0.05, 0.125, 2700.0);
    EXPECT_TRUE(clipped.clipped);
    EXPECT_THROW(gtheta(s, model, {5.0, 5.0}, 0.0, 0.05, 0.125), GThetaError);
}

TEST(TipLocation, PristineReturnsSlitTip) {
    const auto mesh = tip_refined_plate(0.02);
    const SimState s(mesh);
    EXPECT_LT(locate_tip(s).norm(), 1e-15);
}

TEST(TipLocation, StraightBand) {
    const auto mesh = tip_refined_plate(0.01);
    SimState s(mesh);
    mark_path(s, {{0.0, 0.0}, {0.15, 0.0}}, 0.011);
    const Point2 tip = locate_tip(s);
    EXPECT_NEAR(tip.x(), 0.15, 0.015);
    EXPECT_LT(std::abs(tip.y()), 0.015);
}

TEST(TipLocation, KinkedBand) {
    const auto mesh = tip_refined_plate(0.01);
    SimState s(mesh);
    mark_path(s, {{0.0, 0.0}, {0.08, 0.0}, {0.15, -0.1}}, 0.011);
    // A detached damaged spot must not be picked up.
    mark_path(s, {{-0.1, 0.18}, {0.1, 0.18}}, 0.011);
    const Point2 tip = locate_tip(s);
    EXPECT_LT((tip - Point2(0.15, -0.1)).norm(), 0.02);
}
