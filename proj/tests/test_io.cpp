#include "pfaniso/benchmark.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace pfaniso;

namespace {

SimState sample_state() {
    SenPlateParams p;
    p.L = 1.0;
    p.h_band = 0.125;
    p.h_coarse = 0.25;
    p.band = tension_band(1.0);
    SimState s(std::make_shared<const Mesh>(generate_sen_plate(p)));
    for (int n = 0; n < s.mesh->num_nodes(); ++n) {
        s.u(n, 0) = 1e-7 * std::sin(n + 0.1);
        s.u(n, 1) = -1.0 / 3.0 * 1e-6 * n;
        s.d(n) = std::fmod(0.37 * n, 1.0);
        s.d_prev(n) = 0.5 * s.d(n);
    }
    s.step = 17;
    s.ubar = 1.23e-5;
    s.reaction = 2.7e5 / 7.0;
    return s;
}

}  // namespace

TEST(Io, NumberFormatRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) EXPECT_EQ(std::stod(fmt(v)), v);
}

TEST(Io, StateRoundTripIsExact) {
    const SimState s = sample_state();
    std::stringstream ss;
    write_state(ss, s);
    const SimState r = read_state(ss);
    EXPECT_EQ(r.step, s.step);
    EXPECT_EQ(r.ubar, s.ubar);
    EXPECT_EQ(r.reaction, s.reaction);
    EXPECT_EQ(r.u.values, s.u.values);
    EXPECT_EQ(r.d.values, s.d.values);
    EXPECT_EQ(r.d_prev.values, s.d_prev.values);
    EXPECT_EQ(r.mesh->nodes, s.mesh->nodes);
    EXPECT_EQ(r.mesh->slit.seam, s.mesh->slit.seam);
}

TEST(Io, StateRejectsTruncation) {
    std::stringstream ss;
    write_state(ss, sample_state());
    const std::string text = ss.str();
    std::istringstream cut(text.substr(0, text.size() / 2 + text.size() / 3));
    EXPECT_ANY_THROW(read_state(cut));
    std::istringstream wrong("pfaniso-state 2\n");
    EXPECT_THROW(read_state(wrong), IOError);
}

TEST(Io, VtkRoundTrip) {
    const SimState s = sample_state();
    std::vector<double> psi(static_cast<std::size_t>(s.mesh->num_elements()));
    for (std::size_t e = 0; e < psi.size(); ++e) psi[e] = 1.5 * static_cast<double>(e);
    std::stringstream ss;
    write_vtk(ss, s, psi);
    const VtkFields f = read_vtk(ss);
    EXPECT_EQ(f.points, s.mesh->nodes);
    EXPECT_EQ(f.cells, s.mesh->triangles);
    ASSERT_EQ(f.u.size(), static_cast<std::size_t>(s.mesh->num_nodes()));
    for (int n = 0; n < s.mesh->num_nodes(); ++n) {
        EXPECT_EQ(f.u[static_cast<std::size_t>(n)].x(), s.u(n, 0));
        EXPECT_EQ(f.d[static_cast<std::size_t>(n)], s.d(n));
    }
    EXPECT_EQ(f.psi_t, psi);
}

TEST(Io, LoadCsvRoundTrip) {
    const std::vector<LoadStepRecord> rows{{1, 2e-7, 12.5, true, 3, 0.01}, {2, 4e-7, 1.0 / 3.0, false, 200, 0.99}};
    std::stringstream ss;
    write_load_csv(ss, rows);
    const auto back = read_load_csv(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].reaction, rows[1].reaction);
    EXPECT_FALSE(back[1].converged);
    EXPECT_EQ(back[1].iterations, 200);
    std::istringstream bad("step,wrong\n");
    EXPECT_THROW(read_load_csv(bad), IOError);
}

TEST(Io, GThetaCsvRoundTrip) {
    GThetaCurve a;
    a.step = 5;
    a.ubar = 1e-6;
    a.angles_deg = {-10, 0, 10};
    a.G = {1, 2, 3};
    a.G_t = {0.5, 0.25, 1.0 / 7.0};
    GThetaCurve b = a;
    b.step = 6;
    std::stringstream ss;
    write_gtheta_csv(ss, {a, b});
    const auto back = read_gtheta_csv(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].angles_deg, a.angles_deg);
    EXPECT_EQ(back[1].G_t, a.G_t);
    EXPECT_EQ(back[1].step, 6);
}

TEST(Io, TipCsvRoundTrip) {
    const TipRecord t{3, 1e-6, {1.5e-5, -2.5e-6}, 1.52e-5};
    std::stringstream ss;
    ss << kTipCsvHeader << "\n" << tip_csv_row(t) << "\n";
    const auto back = read_tip_csv(ss);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].tip, t.tip);
    EXPECT_EQ(back[0].advance, t.advance);
    std::istringstream short_row(std::string(kTipCsvHeader) + "\n1,2\n");
    EXPECT_THROW(read_tip_csv(short_row), IOError);
}

TEST(Io, MissingFilesReported) {
    EXPECT_THROW(read_state("/nonexistent/dir/x.state"), IOError);
    EXPECT_THROW(open_out("/nonexistent/dir/x.csv"), IOError);
}
