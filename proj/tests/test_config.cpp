#include "pfaniso/benchmark.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

using namespace pfaniso;

namespace {

const std::string kData = PFANISO_TEST_DATA;
const std::string kConfigs = PFANISO_CONFIG_DIR;

const char* kMinimal = R"(
material: {symmetry: isotropic, E: 210 GPa, nu: 0.3}
phasefield: {ell: 0.1 mm, Gc: 2.7 kN/m}
mesh: {generator: sen_plate, L: 1 mm, h_band: 0.05 mm, h_coarse: 0.125 mm}
loading:
  mode: shear
  stages: [{increment: 1e-3 mm, until: 3e-3 mm}]
)";

std::string with(const std::string& base, const std::string& from, const std::string& to) {
    std::string s = base;
    const auto pos = s.find(from);
    if (pos == std::string::npos) throw std::logic_error("pattern not found: " + from);
    return s.replace(pos, from.size(), to);
}

void expect_config_error(const std::string& text, const std::string& fragment) {
    try {
        parse_config_text(text);
        FAIL() << "accepted invalid config, expected: " << fragment;
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
}

}  // namespace

TEST(Quantity, Units) {
    EXPECT_DOUBLE_EQ(parse_quantity("210 GPa", Dimension::stress, "x"), 210e9);
    EXPECT_DOUBLE_EQ(parse_quantity("2.7 kN/m", Dimension::toughness, "x"), 2700.0);
    EXPECT_DOUBLE_EQ(parse_quantity("2.7 kJ/m^2", Dimension::toughness, "x"), 2700.0);
    EXPECT_DOUBLE_EQ(parse_quantity("0.032 mm", Dimension::length, "x"), 3.2e-5);
    EXPECT_DOUBLE_EQ(parse_quantity("90 deg", Dimension::angle, "x"), std::numbers::pi / 2);
    EXPECT_DOUBLE_EQ(parse_quantity("0.3", Dimension::none, "x"), 0.3);
    EXPECT_THROW(parse_quantity("210", Dimension::stress, "x"), ConfigError);
    EXPECT_THROW(parse_quantity("210 mm", Dimension::stress, "x"), ConfigError);
    EXPECT_THROW(parse_quantity("0.3 GPa", Dimension::none, "x"), ConfigError);
    EXPECT_THROW(parse_quantity("abc GPa", Dimension::stress, "x"), ConfigError);
}

TEST(Config, MinimalDefaults) {
    const RunConfig c = parse_config_text(kMinimal);
    EXPECT_EQ(c.mode, LoadingMode::shear);
    EXPECT_EQ(c.law, SplitLaw::no_tension);
    EXPECT_EQ(c.pf.variant, PFVariant::AT2);
    EXPECT_DOUBLE_EQ(c.r_i(), 4e-4);
    EXPECT_DOUBLE_EQ(c.r_o(), 1e-3);
    const auto sched = c.schedule();
    ASSERT_EQ(sched.size(), 3u);
    EXPECT_DOUBLE_EQ(sched.back(), 3e-6);
}

TEST(Config, ScheduleEndsOnStageTargets) {
    RunConfig c;
    c.stages = {{2e-7, 2e-6}, {1e-7, 2.05e-6}, {3e-7, 3e-6}};
    const auto s = c.schedule();
    EXPECT_EQ(s.size(), 10u + 1u + 4u);
    EXPECT_EQ(s[9], 2e-6);
    EXPECT_EQ(s[10], 2.05e-6);
    EXPECT_EQ(s.back(), 3e-6);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GT(s[i], s[i - 1]);
}

TEST(Config, ShippedConfigsParse) {
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".yaml") continue;
        EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
        ++count;
    }
    EXPECT_GE(count, 12);
}

TEST(Config, OrientationConvention) {
    const RunConfig c = load_config(kConfigs + "/tension_a45.yaml");
    EXPECT_DOUBLE_EQ(c.material.alpha, std::numbers::pi / 4);
    // Material axis e1 at +45 deg: the stiffest direction of the rotated model.
    const ElasticModel m = c.material.model();
    auto stiffness_along = [&](double a) {
        const Vec3 n(std::cos(a), std::sin(a), 0.0);
        const SymTensor2 nn = dyad(n);
        return dot(nn, m.S() * nn);   // 1 / E(n)
    };
    EXPECT_LT(stiffness_along(std::numbers::pi / 4), stiffness_along(-std::numbers::pi / 4));
}

TEST(Config, Errors) {
    expect_config_error(with(kMinimal, "210 GPa", "210"), "unit");
    expect_config_error(with(kMinimal, "h_band: 0.05 mm", "h_band: 0.08 mm"), "resolution ratio");
    expect_config_error(with(kMinimal, "mode: shear", "mode: torsion"), "loading.mode");
    expect_config_error(with(kMinimal, "phasefield: {", "phasefield: {elll: 1 mm, "), "elll");
    expect_config_error(with(kMinimal, "until: 3e-3 mm", "until: -3e-3 mm"), "loading");
    expect_config_error(with(kMinimal, "nu: 0.3", "nu: 0.7"), "material");
    expect_config_error(std::string(kMinimal) + "output: {tip_threshold: 2}\n", "tip_threshold");
    expect_config_error("- not a map\n", "mapping");
    EXPECT_THROW(load_config(kData + "/does_not_exist.yaml"), ConfigError);
}

TEST(Config, MeshFileRelativeToConfig) {
    const auto dir = std::filesystem::temp_directory_path() / "pfaniso_cfg_test";
    std::filesystem::create_directories(dir);
    std::filesystem::copy_file(kData + "/unit_square.mesh", dir / "sq.mesh", std::filesystem::copy_options::overwrite_existing);
    {
        std::ofstream f(dir / "run.yaml");
        f << with(kMinimal, "mesh: {generator: sen_plate, L: 1 mm, h_band: 0.05 mm, h_coarse: 0.125 mm}",
                  "mesh: {file: sq.mesh}")
          << "\n";
    }
    const RunConfig c = load_config((dir / "run.yaml").string());
    EXPECT_EQ(std::filesystem::path(c.mesh_path()), dir / "sq.mesh");
    // The unit square is far too coarse for ell.
    EXPECT_THROW(build_mesh(c), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST(Config, DamageNotchInitialState) {
    RunConfig c = parse_config_text(with(kMinimal, "h_coarse: 0.125 mm}", "h_coarse: 0.125 mm, crack: damage}"));
    EXPECT_EQ(c.mesh.crack, CrackKind::damage);
    const auto mesh = build_mesh(c);
    const SimState s = initial_state(c, mesh);
    EXPECT_GT(s.d.values.sum(), 0.0);
    EXPECT_EQ(s.d.values, s.d_prev.values);
}
