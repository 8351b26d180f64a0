#include "pfaniso/mesh.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace pfaniso;

namespace {

const std::string kData = PFANISO_TEST_DATA;

Mesh desk_plate(double h = 1.6e-5) {
    SenPlateParams p;
    p.h_band = h;
    p.band = tension_band(p.L);
    return generate_sen_plate(p);
}

double total_area(const Mesh& m) {
    double a = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) a += m.signed_area(e);
    return a;
}

}  // namespace

TEST(Mesh, UnitSquareFixture) {
    const Mesh m = load_mesh(kData + "/unit_square.mesh");
    EXPECT_EQ(m.num_nodes(), 4);
    EXPECT_EQ(m.num_elements(), 2);
    for (const char* s : {"bottom", "top", "left", "right"}) {
        EXPECT_EQ(m.node_set(s).size(), 2u) << s;
        EXPECT_EQ(m.edge_sets.at(s).size(), 1u) << s;
    }
    EXPECT_FALSE(m.slit.present());
    EXPECT_THROW(m.node_set("front"), MeshError);
}

TEST(Mesh, GmshFixture) {
    const Mesh m = load_mesh(kData + "/square.msh");
    EXPECT_EQ(m.num_nodes(), 5);
    EXPECT_EQ(m.num_elements(), 4);
    EXPECT_EQ(m.node_set("bottom").size(), 2u);
    EXPECT_EQ(m.node_set("top").size(), 2u);
    EXPECT_NEAR(total_area(m), 1.0, 1e-14);
}

TEST(Mesh, WriteReadRoundTrip) {
    const Mesh m = desk_plate(3.2e-5);
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh r = read_mesh(ss);
    EXPECT_EQ(r.nodes, m.nodes);
    EXPECT_EQ(r.triangles, m.triangles);
    EXPECT_EQ(r.node_sets, m.node_sets);
    EXPECT_EQ(r.edge_sets, m.edge_sets);
    EXPECT_EQ(r.slit.seam, m.slit.seam);
    EXPECT_EQ(r.slit.tip, m.slit.tip);
}

TEST(Mesh, RejectsDegenerateTriangle) {
    std::istringstream is("pfaniso-mesh 1\nnodes 3\n0 0\n1 0\n2 0\ntriangles 1\n0 1 2\nend\n");
    EXPECT_THROW(read_mesh(is), MeshError);
}

TEST(Mesh, RejectsInvertedTriangle) {
    std::istringstream is("pfaniso-mesh 1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 2 1\nend\n");
    try {
        read_mesh(is);
        FAIL() << "inverted element accepted";
    } catch (const MeshError& e) {
        EXPECT_NE(std::string(e.what()).find("inverted"), std::string::npos);
    }
}

TEST(Mesh, ParseErrorsCarryLineNumbers) {
    std::istringstream is("pfaniso-mesh 1\nnodes 2\n0 0\nbogus\n");
    try {
        read_mesh(is);
        FAIL() << "malformed file accepted";
    } catch (const MeshError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
    std::istringstream missing_ref("pfaniso-mesh 1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 7\nend\n");
    EXPECT_THROW(read_mesh(missing_ref), MeshError);
    std::istringstream bad_header("gmsh 1\n");
    EXPECT_THROW(read_mesh(bad_header), MeshError);
    EXPECT_THROW(load_mesh(kData + "/does_not_exist.mesh"), MeshError);
}

TEST(Mesh, NotchedPlateStructure) {
    const Mesh m = desk_plate();
    EXPECT_NEAR(total_area(m), 1e-6, 1e-18);
    for (const char* s : {"bottom", "top", "left", "right"}) EXPECT_FALSE(m.node_set(s).empty()) << s;
    ASSERT_TRUE(m.slit.present());
    EXPECT_LT(m.nodes[static_cast<std::size_t>(m.slit.tip)].norm(), 0.5 * 1.6e-5);
    EXPECT_LT(m.slit.tip_point.norm(), 1e-18);
    EXPECT_NEAR(m.slit.mouth.x(), -0.5e-3, 1e-15);
    EXPECT_FALSE(m.slit.seam.empty());
    for (const auto& pr : m.slit.seam) EXPECT_NE(pr[0], pr[1]);
    EXPECT_NO_THROW(validate(m));
}

TEST(Mesh, BandResolution) {
    const Mesh m = desk_plate();
    const Rect band = tension_band(1e-3);
    double hmax_band = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        const Point2 c = m.centroid(e);
        if (c.x() > band.xmin && c.x() < band.xmax && c.y() > band.ymin && c.y() < band.ymax)
            hmax_band = std::max(hmax_band, m.element_size(e));
    }
    // Right isosceles triangles: longest edge is sqrt(2) times the cell size.
    EXPECT_LE(hmax_band, std::sqrt(2.0) * 1.6e-5 * (1 + 1e-9));
}

TEST(Mesh, DeskScaleElementCount) {
    SenPlateParams p;
    p.h_band = p.h_coarse = 3.2e-5;
    p.band = tension_band(p.L);
    const Mesh m = generate_sen_plate(p);
    EXPECT_GE(m.num_elements(), 3000);
    EXPECT_LE(m.num_elements(), 8000);
}

TEST(Mesh, PaperScaleElementCount) {
    SenPlateParams p;
    p.h_band = 4e-6;
    p.h_coarse = 3.2e-5;
    p.band = tension_band(p.L);
    const Mesh m = generate_sen_plate(p);
    EXPECT_GE(m.num_elements(), 41000 / 2);
    EXPECT_LE(m.num_elements(), 64000 * 2);
}

TEST(Mesh, InfeasibleSizing) {
    SenPlateParams p;
    p.h_band = 0.0;
    EXPECT_THROW(generate_sen_plate(p), MeshError);
    p.h_band = 1e-4;
    p.h_coarse = 1e-5;
    EXPECT_THROW(generate_sen_plate(p), MeshError);
    p.h_band = 1e-9;
    p.h_coarse = 1e-4;
    EXPECT_THROW(generate_sen_plate(p), MeshError);
}

TEST(Mesh, SlitFreeVariant) {
    SenPlateParams p;
    p.h_band = 3.2e-5;
    p.slit = false;
    const Mesh m = generate_sen_plate(p);
    EXPECT_FALSE(m.slit.present());
    EXPECT_NEAR(total_area(m), 1e-6, 1e-18);
}

TEST(Mesh, SaveLoadFile) {
    const Mesh m = load_mesh(kData + "/unit_square.mesh");
    const auto path = std::filesystem::temp_directory_path() / "pfaniso_test_mesh.mesh";
    save_mesh(path.string(), m);
    const Mesh r = load_mesh(path.string());
    EXPECT_EQ(r.nodes, m.nodes);
    EXPECT_EQ(r.triangles, m.triangles);
    std::filesystem::remove(path);
}
