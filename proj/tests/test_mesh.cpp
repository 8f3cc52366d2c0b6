#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include "stochfv/mesh.hpp"

using namespace stochfv;

namespace {

const Rectangle kUnit{0.0, 0.0, 1.0, 1.0};

bool has_kind(const std::vector<Violation>& v, Violation::Kind kind) {
    for (const auto& x : v) {
        if (x.kind == kind) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("uniform 4x4 mesh: counts, h and regularity") {
    const Mesh m = build_uniform_rect(4, 4, kUnit);
    CHECK(m.num_cells() == 16);
    CHECK(m.num_interior_edges() == 24);
    CHECK(m.boundary_edges.size() == 16);
    CHECK(m.vertices.size() == 25);
    CHECK(m.mesh_size == doctest::Approx(std::sqrt(2.0) / 4.0));
    // Interior vertices meet four edges; diam / dist = (sqrt 2 / 4) / (1 / 8) = 2 sqrt 2 < 4.
    CHECK(m.regularity == doctest::Approx(4.0));
    CHECK(mesh_regularity(m) == doctest::Approx(4.0));
    CHECK(m.domain_area == doctest::Approx(1.0));
    CHECK(validate_admissibility(m).empty());
    for (const auto& e : m.interior_edges) {
        CHECK(e.length == doctest::Approx(0.25));
        CHECK(e.distance == doctest::Approx(0.25));
        CHECK(e.diamond_area == doctest::Approx(0.25 * 0.25 / 2.0));
        // The normal points from K towards L.
        const Vec2 d = m.cells[e.l].center - m.cells[e.k].center;
        CHECK(dot(d, e.normal) == doctest::Approx(e.distance));
    }
}

TEST_CASE("single unit-square cell has regularity 2 sqrt 2") {
    const Mesh m = build_uniform_rect(1, 1, kUnit);
    CHECK(m.num_cells() == 1);
    CHECK(m.num_interior_edges() == 0);
    CHECK(m.regularity == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("diamonds tile the domain together with the boundary triangles") {
    const Mesh m = build_uniform_rect(5, 3, {0.0, 0.0, 2.0, 1.0});
    double s = 0.0;
    for (const auto& e : m.interior_edges) s += e.diamond_area;
    for (const auto& e : m.boundary_edges) s += e.diamond_area;
    CHECK(s == doctest::Approx(2.0));
}

TEST_CASE("Voronoi mesh of a jittered lattice is admissible") {
    const auto sites = jittered_lattice(10, 5, kUnit, 0.3, 3);
    const Mesh m = build_voronoi(sites, kUnit.polygon());
    CHECK(m.num_cells() == 50);
    CHECK(validate_admissibility(m).empty());
    double area = 0.0;
    for (const auto& c : m.cells) area += c.area;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-13));
    for (std::size_t k = 0; k < m.num_cells(); ++k) CHECK(m.cells[k].center == sites[k]);
    // Orthogonality: x_L - x_K is parallel to the edge normal.
    for (const auto& e : m.interior_edges) {
        const Vec2 d = m.cells[e.l].center - m.cells[e.k].center;
        CHECK(std::abs(cross(d, e.normal)) < 1e-9 * m.mesh_size);
    }
    // Euler relation for a planar subdivision: V - E + F = 1 (outer face excluded).
    const long V = static_cast<long>(m.vertices.size());
    const long E = static_cast<long>(m.num_edges());
    const long F = static_cast<long>(m.num_cells());
    CHECK(V - E + F == 1);
}

TEST_CASE("Voronoi of an unjittered lattice reproduces the uniform grid") {
    const auto sites = jittered_lattice(4, 3, kUnit, 0.0, 1);
    const Mesh v = build_voronoi(sites, kUnit.polygon());
    const Mesh u = build_uniform_rect(4, 3, kUnit);
    REQUIRE(v.num_cells() == u.num_cells());
    CHECK(v.num_interior_edges() == u.num_interior_edges());
    for (std::size_t k = 0; k < u.num_cells(); ++k) {
        CHECK(v.cells[k].area == doctest::Approx(u.cells[k].area));
        CHECK(v.cells[k].center.x == doctest::Approx(u.cells[k].center.x));
    }
}

TEST_CASE("jittered lattice argument checks") {
    CHECK_THROWS_AS(jittered_lattice(4, 4, kUnit, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(jittered_lattice(4, 4, kUnit, -0.1, 1), std::invalid_argument);
    CHECK(jittered_lattice(4, 4, kUnit, 0.3, 1) == jittered_lattice(4, 4, kUnit, 0.3, 1));
    CHECK(jittered_lattice(4, 4, kUnit, 0.3, 1) != jittered_lattice(4, 4, kUnit, 0.3, 2));
}

TEST_CASE("validator flags broken meshes") {
    SUBCASE("wrong stored area") {
        Mesh m = build_uniform_rect(3, 3, kUnit);
        m.cells[4].area *= 1.1;
        const auto v = validate_admissibility(m);
        CHECK(has_kind(v, Violation::Kind::CellArea));
        CHECK(has_kind(v, Violation::Kind::AreaSum));
    }
    SUBCASE("center moved off the perpendicular") {
        Mesh m = build_uniform_rect(3, 3, kUnit);
        m.cells[4].center.y += 0.05;
        CHECK(has_kind(validate_admissibility(m), Violation::Kind::Orthogonality));
    }
    SUBCASE("center outside its cell") {
        Mesh m = build_uniform_rect(3, 3, kUnit);
        m.cells[0].center = {0.9, 0.9};
        CHECK(has_kind(validate_admissibility(m), Violation::Kind::CenterOutside));
    }
    SUBCASE("non-finite vertex") {
        Mesh m = build_uniform_rect(2, 2, kUnit);
        m.vertices[4].x = NAN;
        CHECK(has_kind(validate_admissibility(m), Violation::Kind::NonFinite));
    }
}

TEST_CASE("build_from_polygons rejects an edge shared by three cells") {
    std::vector<Vec2> verts{{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {1.5, 0.5}};
    std::vector<std::vector<std::size_t>> loops{{0, 1, 2}, {0, 3, 1}, {0, 1, 4}};
    std::vector<Vec2> centers{{0.5, 0.3}, {0.5, -0.3}, {0.8, 0.1}};
    CHECK_THROWS_AS(build_from_polygons(kUnit.polygon(), verts, loops, centers), std::invalid_argument);
}

TEST_CASE("mesh file round trip and parse errors") {
    const Mesh m = build_voronoi(jittered_lattice(5, 4, kUnit, 0.25, 9), kUnit.polygon());
    std::stringstream ss;
    write_mesh_file(ss, m);
    const Mesh r = read_mesh_file(ss);
    REQUIRE(r.num_cells() == m.num_cells());
    CHECK(r.num_interior_edges() == m.num_interior_edges());
    for (std::size_t k = 0; k < m.num_cells(); ++k) {
        CHECK(r.cells[k].area == m.cells[k].area);
        CHECK(r.cells[k].center == m.cells[k].center);
    }
    CHECK(r.mesh_size == m.mesh_size);
    CHECK(validate_admissibility(r).empty());

    std::istringstream bad("not-a-mesh 3");
    CHECK_THROWS_AS(read_mesh_file(bad), std::runtime_error);
    std::string text = ss.str();
    std::istringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS(read_mesh_file(truncated));
}

TEST_CASE("VTK and summary output") {
    const Mesh m = build_uniform_rect(2, 2, kUnit);
    std::ostringstream vtk;
    write_vtk(vtk, m);
    CHECK(vtk.str().find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
    CHECK(vtk.str().find("CELLS 4 20") != std::string::npos);
    std::ostringstream summary;
    write_summary(summary, m);
    CHECK(summary.str().find("cells 4") != std::string::npos);
    CHECK(summary.str().find("regularity") != std::string::npos);
}
