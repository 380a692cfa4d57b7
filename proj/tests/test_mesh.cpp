#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "helvort/field.hpp"
#include "helvort/mesh.hpp"

using namespace helvort;

namespace {

DomainSpec canonical_disk(double h) {
    return {DiskSpec{{2.0, 0.0}, 1.0}, h};
}

double winding_number(const Mesh& m, const Vec2& p) {
    double total = 0.0;
    for (const auto& e : m.boundary_edges) {
        const Vec2 a = m.vertices[e.a] - p;
        const Vec2 b = m.vertices[e.b] - p;
        total += std::atan2(a.cross(b), a.dot(b));
    }
    return total / (2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("disk mesh: containment, boundary accuracy, edge bound") {
    const Mesh m = build_domain(canonical_disk(0.05));
    for (const auto& v : m.vertices)
        CHECK((v - Vec2{2, 0}).norm() <= 1.0 + 1e-10);
    for (int loopv : m.boundary_loop())
        CHECK((m.vertices[loopv] - Vec2{2, 0}).norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.h <= 1.5 * 0.05);
    m.validate();
}

TEST_CASE("ellipse boundary vertices satisfy the analytic equation") {
    const Mesh m = build_domain({EllipseSpec{{0.0, 0.0}, {2.0, 1.0}}, 0.1});
    for (int v : m.boundary_loop()) {
        const Vec2 p = m.vertices[v];
        CHECK(p.x * p.x / 4.0 + p.y * p.y == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("self-intersecting polygon is rejected") {
    PolygonSpec bowtie{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}};
    CHECK_THROWS_AS(build_domain({bowtie, 0.2}), InvalidSpec);
    CHECK_THROWS_AS(build_domain({DiskSpec{{0, 0}, -1.0}, 0.1}), InvalidSpec);
    CHECK_THROWS_AS(build_domain({DiskSpec{{0, 0}, 1.0}, 0.0}), InvalidSpec);
}

TEST_CASE("polygon meshing: square and L-shape") {
    const Mesh sq = build_domain({PolygonSpec{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}, 0.12});
    CHECK(sq.total_area() == doctest::Approx(1.0).epsilon(1e-9));
    sq.validate();

    const Mesh ell =
        build_domain({PolygonSpec{{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}}, 0.15});
    CHECK(ell.total_area() == doctest::Approx(3.0).epsilon(1e-9));
    ell.validate();
}

TEST_CASE("rotation: identity, inverse, centroid image, isometry") {
    const Mesh m = build_domain(canonical_disk(0.1));

    const Mesh m0 = rotate_mesh(m, 0.0);
    for (int i = 0; i < m.num_vertices(); ++i)
        CHECK((m0.vertices[i] - m.vertices[i]).norm() == doctest::Approx(0.0));

    const Mesh back = rotate_mesh(rotate_mesh(m, 0.7), -0.7);
    for (int i = 0; i < m.num_vertices(); ++i)
        CHECK((back.vertices[i] - m.vertices[i]).norm() <= 1e-12);

    // clockwise convention: (2,0) rotated by pi/2 lands at (0,-2)
    const Mesh quarter = rotate_mesh(m, std::numbers::pi / 2.0);
    Vec2 c;
    for (const auto& v : quarter.vertices) c += v;
    c = c / static_cast<double>(quarter.num_vertices());
    CHECK(c.x == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(c.y == doctest::Approx(-2.0).epsilon(1e-10));

    // pairwise distances preserved (random sample)
    const Mesh rot = rotate_mesh(m, 1.234);
    for (int i = 0; i < m.num_vertices(); i += 97)
        for (int j = i + 1; j < m.num_vertices(); j += 131) {
            const double d0 = (m.vertices[i] - m.vertices[j]).norm();
            const double d1 = (rot.vertices[i] - rot.vertices[j]).norm();
            CHECK(std::abs(d0 - d1) <= 1e-12);
        }
}

TEST_CASE("distance_to_boundary") {
    const Mesh m = build_domain(canonical_disk(0.05));
    CHECK(distance_to_boundary(m, {{2.0, 0.0}}) == doctest::Approx(1.0).epsilon(0.1));
    const int bv = m.boundary_loop().front();
    CHECK(distance_to_boundary(m, {m.vertices[bv]}) == doctest::Approx(0.0));
    CHECK(distance_to_boundary(m, {{2.5, 0.0}}) == doctest::Approx(0.5).epsilon(0.2));
    CHECK_THROWS_AS(distance_to_boundary(m, {}), EmptyInput);
}

TEST_CASE("mesh area converges at second order") {
    double defects[3];
    const double hs[3] = {0.1, 0.05, 0.025};
    for (int i = 0; i < 3; ++i) {
        const Mesh m = build_domain(canonical_disk(hs[i]));
        defects[i] = std::abs(m.total_area() - std::numbers::pi);
    }
    CHECK(defects[0] / defects[1] == doctest::Approx(4.0).epsilon(0.3));
    CHECK(defects[1] / defects[2] == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("boundary loop winds once around interior points") {
    const Mesh m = build_domain(canonical_disk(0.1));
    CHECK(winding_number(m, {2.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(winding_number(m, {2.3, 0.4}) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("boundary normals are outward units") {
    const Mesh m = build_domain(canonical_disk(0.1));
    for (const auto& e : m.boundary_edges) {
        CHECK(e.normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
        const Vec2 mid = (m.vertices[e.a] + m.vertices[e.b]) * 0.5;
        CHECK(e.normal.dot(mid - Vec2{2, 0}) > 0);  // points away from the disk center
    }
}

TEST_CASE("mesh text round trip is exact") {
    const Mesh m = build_domain(canonical_disk(0.15));
    std::stringstream ss;
    io::write_mesh(ss, m, "roundtrip");
    const Mesh back = io::read_mesh(ss);
    REQUIRE(back.num_vertices() == m.num_vertices());
    REQUIRE(back.num_triangles() == m.num_triangles());
    for (int i = 0; i < m.num_vertices(); ++i) {
        CHECK(back.vertices[i].x == m.vertices[i].x);
        CHECK(back.vertices[i].y == m.vertices[i].y);
    }
    CHECK(back.boundary_edges.size() == m.boundary_edges.size());
}
