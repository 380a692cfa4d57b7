#pragma once

// Triangulated, simply connected planar cross-sections with boundary metadata.
//
// Disks and ellipses are meshed with deterministic concentric rings (each
// annulus triangulated by a greedy two-loop merge); simple polygons fall back
// to a Bowyer-Watson Delaunay triangulation of boundary samples plus an
// interior hex lattice.  Meshes are immutable after construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "helvort/delaunay.hpp"
#include "helvort/errors.hpp"
#include "helvort/geometry.hpp"

namespace helvort {

struct DiskSpec {
    Vec2 center;
    double radius = 1.0;
};

struct EllipseSpec {
    Vec2 center;
    Vec2 semi_axes;  // (a, b)
};

struct PolygonSpec {
    std::vector<Vec2> vertices;  // simple, non-self-intersecting loop
};

struct DomainSpec {
    std::variant<DiskSpec, EllipseSpec, PolygonSpec> shape;
    double target_h = 0.1;
};

struct BoundaryEdge {
    int a = -1, b = -1;  // vertex indices, loop order (b follows a)
    Vec2 normal;         // outward unit normal
};

class Mesh {
public:
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW (positive signed area)
    std::vector<BoundaryEdge> boundary_edges;   // single closed CCW loop
    double h = 0.0;                             // max edge length

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    bool is_boundary_vertex(int v) const { return boundary_flag_[v] != 0; }
    const std::vector<std::uint8_t>& boundary_mask() const { return boundary_flag_; }
    const std::vector<int>& boundary_loop() const { return boundary_loop_; }

    double triangle_area(int t) const { return areas_[t]; }
    Vec2 barycenter(int t) const {
        const auto& tri = triangles[t];
        return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
    }
    double total_area() const {
        double s = 0.0;
        for (double a : areas_) s += a;
        return s;
    }

    /// Gradients of the three P1 basis functions on triangle t.
    const std::array<Vec2, 3>& basis_gradients(int t) const { return grads_[t]; }

    /// Called once after vertices/triangles/boundary_edges are filled.
    void finalize() {
        const int nv = num_vertices();
        const int nt = num_triangles();
        areas_.resize(nt);
        grads_.resize(nt);
        h = 0.0;
        for (int t = 0; t < nt; ++t) {
            auto& tri = triangles[t];
            const Vec2 p0 = vertices[tri[0]], p1 = vertices[tri[1]], p2 = vertices[tri[2]];
            double a2 = (p1 - p0).cross(p2 - p0);
            if (a2 < 0) {  // enforce CCW
                std::swap(tri[1], tri[2]);
                a2 = -a2;
            }
            if (a2 <= 0.0) throw InvalidSpec("degenerate triangle in mesh");
            areas_[t] = 0.5 * a2;
            const Vec2 q0 = vertices[tri[0]], q1 = vertices[tri[1]], q2 = vertices[tri[2]];
            grads_[t][0] = Vec2{q1.y - q2.y, q2.x - q1.x} / a2;
            grads_[t][1] = Vec2{q2.y - q0.y, q0.x - q2.x} / a2;
            grads_[t][2] = Vec2{q0.y - q1.y, q1.x - q0.x} / a2;
            h = std::max({h, (p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
        }
        boundary_flag_.assign(nv, 0);
        for (const auto& e : boundary_edges) {
            boundary_flag_[e.a] = 1;
            boundary_flag_[e.b] = 1;
        }
        build_boundary_loop();
    }

    /// Verifies the structural invariants (orientation, single loop, unit normals).
    void validate() const {
        for (const auto& e : boundary_edges) {
            if (std::abs(e.normal.norm() - 1.0) > 1e-12)
                throw InvalidSpec("boundary normal is not unit length");
        }
        if (boundary_loop_.empty()) throw InvalidSpec("boundary does not form a single closed loop");
        // each boundary vertex must appear exactly once as tail and once as head
        std::map<int, int> head, tail;
        for (const auto& e : boundary_edges) {
            if (++tail[e.a] > 1 || ++head[e.b] > 1)
                throw InvalidSpec("boundary is not a simple loop");
        }
    }

private:
    std::vector<double> areas_;
    std::vector<std::array<Vec2, 3>> grads_;
    std::vector<std::uint8_t> boundary_flag_;
    std::vector<int> boundary_loop_;  // vertex indices in loop order

    void build_boundary_loop() {
        boundary_loop_.clear();
        if (boundary_edges.empty()) throw InvalidSpec("mesh has no boundary edges");
        std::map<int, int> next;
        for (const auto& e : boundary_edges) next[e.a] = e.b;
        if (next.size() != boundary_edges.size())
            throw InvalidSpec("boundary edges do not chain into a loop");
        int start = boundary_edges.front().a;
        int v = start;
        do {
            boundary_loop_.push_back(v);
            auto it = next.find(v);
            if (it == next.end()) throw InvalidSpec("open boundary chain");
            v = it->second;
        } while (v != start && boundary_loop_.size() <= next.size());
        if (v != start || boundary_loop_.size() != next.size())
            throw InvalidSpec("boundary does not form a single closed loop");
    }
};

namespace detail {

// Triangulate the annulus between two concentric CCW loops by always
// advancing the pointer whose candidate diagonal is shorter.
inline void merge_loops(const std::vector<int>& inner, const std::vector<int>& outer,
                        const std::vector<Vec2>& pts,
                        std::vector<std::array<int, 3>>& tris) {
    const int ni = static_cast<int>(inner.size());
    const int no = static_cast<int>(outer.size());
    if (ni == 1) {  // fan from center vertex
        for (int j = 0; j < no; ++j)
            tris.push_back({inner[0], outer[j], outer[(j + 1) % no]});
        return;
    }
    // align starting positions by angle
    auto angle = [&pts](int v) { return std::atan2(pts[v].y, pts[v].x); };
    int i0 = 0, o0 = 0;
    for (int i = 1; i < ni; ++i)
        if (std::abs(angle(inner[i])) < std::abs(angle(inner[i0]))) i0 = i;
    for (int o = 1; o < no; ++o)
        if (std::abs(angle(outer[o])) < std::abs(angle(outer[o0]))) o0 = o;
    int ci = 0, co = 0;
    while (ci < ni || co < no) {
        const int vi = inner[(i0 + ci) % ni];
        const int vo = outer[(o0 + co) % no];
        const bool can_i = ci < ni, can_o = co < no;
        bool advance_outer;
        if (!can_i) advance_outer = true;
        else if (!can_o) advance_outer = false;
        else {
            const int vi_next = inner[(i0 + ci + 1) % ni];
            const int vo_next = outer[(o0 + co + 1) % no];
            advance_outer = (pts[vi] - pts[vo_next]).norm2() < (pts[vo] - pts[vi_next]).norm2();
        }
        if (advance_outer) {
            tris.push_back({vi, vo, outer[(o0 + co + 1) % no]});
            ++co;
        } else {
            tris.push_back({vi, vo, inner[(i0 + ci + 1) % ni]});
            ++ci;
        }
    }
}

inline Vec2 outward_loop_normal(const Vec2& a, const Vec2& b) {
    const Vec2 t = b - a;
    const double L = t.norm();
    return {t.y / L, -t.x / L};  // CCW loop: rotate tangent by -90 degrees
}

inline Mesh mesh_unit_disk_rings(int nrings) {
    // concentric rings, ring j at radius j/nrings with round(2*pi*j) vertices
    Mesh m;
    m.vertices.push_back({0.0, 0.0});
    std::vector<std::vector<int>> rings(nrings + 1);
    rings[0] = {0};
    for (int j = 1; j <= nrings; ++j) {
        const double r = static_cast<double>(j) / nrings;
        const int n = std::max(6, static_cast<int>(std::lround(2.0 * std::numbers::pi * j)));
        for (int a = 0; a < n; ++a) {
            const double th = 2.0 * std::numbers::pi * a / n;
            rings[j].push_back(static_cast<int>(m.vertices.size()));
            m.vertices.push_back({r * std::cos(th), r * std::sin(th)});
        }
    }
    for (int j = 1; j <= nrings; ++j)
        merge_loops(rings[j - 1], rings[j], m.vertices, m.triangles);
    const auto& rim = rings[nrings];
    const int n = static_cast<int>(rim.size());
    for (int a = 0; a < n; ++a) {
        BoundaryEdge e;
        e.a = rim[a];
        e.b = rim[(a + 1) % n];
        m.boundary_edges.push_back(e);
    }
    return m;
}

inline void set_boundary_normals(Mesh& m) {
    for (auto& e : m.boundary_edges)
        e.normal = outward_loop_normal(m.vertices[e.a], m.vertices[e.b]);
}

inline Mesh build_disk_or_ellipse(const Vec2& center, double a, double b, double target_h) {
    const double rmax = std::max(a, b);
    // 0.95 margin keeps the cross-ring diagonals below 1.5*h after scaling
    const int nrings = std::max(2, static_cast<int>(std::ceil(rmax / (0.95 * target_h))));
    Mesh m = mesh_unit_disk_rings(nrings);
    for (auto& v : m.vertices) v = {center.x + a * v.x, center.y + b * v.y};
    set_boundary_normals(m);
    m.finalize();
    return m;
}

inline Mesh build_polygon(const PolygonSpec& poly, double target_h) {
    const auto& vs = poly.vertices;
    const int n = static_cast<int>(vs.size());
    if (n < 3) throw InvalidSpec("polygon needs at least 3 vertices");
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;  // adjacent
            if (segments_intersect(vs[i], vs[(i + 1) % n], vs[j], vs[(j + 1) % n]))
                throw InvalidSpec("polygon is self-intersecting");
        }
    }
    // CCW orientation
    double area2 = 0.0;
    for (int i = 0; i < n; ++i) area2 += vs[i].cross(vs[(i + 1) % n]);
    std::vector<Vec2> loop = vs;
    if (area2 < 0) std::reverse(loop.begin(), loop.end());
    if (std::abs(area2) < 1e-30) throw InvalidSpec("polygon has zero area");

    // boundary samples; spacing tight enough that junction edges to the
    // interior lattice stay below 1.5 * target_h
    std::vector<Vec2> pts;
    const double spacing = 0.75 * target_h;
    for (int i = 0; i < n; ++i) {
        const Vec2 p = loop[i], q = loop[(i + 1) % n];
        const int seg = std::max(1, static_cast<int>(std::ceil((q - p).norm() / spacing)));
        for (int s = 0; s < seg; ++s) pts.push_back(p + (q - p) * (static_cast<double>(s) / seg));
    }
    const int nb = static_cast<int>(pts.size());

    // interior hex lattice with clearance from the boundary
    double xmin = loop[0].x, xmax = xmin, ymin = loop[0].y, ymax = ymin;
    for (const auto& v : loop) {
        xmin = std::min(xmin, v.x); xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y); ymax = std::max(ymax, v.y);
    }
    const double dx = 0.75 * target_h;
    const double dy = dx * std::sqrt(3.0) / 2.0;
    int row = 0;
    for (double y = ymin + 0.5 * dy; y < ymax; y += dy, ++row) {
        const double off = (row % 2) ? 0.5 * dx : 0.0;
        for (double x = xmin + off; x < xmax; x += dx) {
            const Vec2 p{x, y};
            if (!point_in_polygon(p, loop)) continue;
            double d = 1e300;
            for (int i = 0; i < n; ++i)
                d = std::min(d, dist_point_segment(p, loop[i], loop[(i + 1) % n]));
            if (d >= 0.45 * target_h) pts.push_back(p);
        }
    }

    auto tris = delaunay_triangulate(pts);
    Mesh m;
    m.vertices = pts;
    for (const auto& t : tris) {
        const Vec2 bc = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
        if (point_in_polygon(bc, loop)) m.triangles.push_back(t);
    }

    // boundary edges = triangle edges used exactly once
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            int u = t[e], v = t[(e + 1) % 3];
            edge_count[{std::min(u, v), std::max(u, v)}]++;
        }
    }
    for (const auto& t : m.triangles) {
        const Vec2 p0 = pts[t[0]], p1 = pts[t[1]], p2 = pts[t[2]];
        const bool ccw = (p1 - p0).cross(p2 - p0) > 0;
        for (int e = 0; e < 3; ++e) {
            int u = t[e], v = t[(e + 1) % 3];
            if (edge_count[{std::min(u, v), std::max(u, v)}] == 1) {
                BoundaryEdge be;
                be.a = ccw ? u : v;  // keep loop CCW
                be.b = ccw ? v : u;
                if (be.a >= nb || be.b >= nb)
                    throw InvalidSpec("polygon meshing failed: interior point on boundary");
                m.boundary_edges.push_back(be);
            }
        }
    }
    set_boundary_normals(m);
    m.finalize();
    m.validate();
    return m;
}

}  // namespace detail

inline Mesh build_domain(const DomainSpec& spec) {
    if (!(spec.target_h > 0)) throw InvalidSpec("target_h must be positive");
    Mesh m;
    if (const auto* d = std::get_if<DiskSpec>(&spec.shape)) {
        if (!(d->radius > 0)) throw InvalidSpec("disk radius must be positive");
        m = detail::build_disk_or_ellipse(d->center, d->radius, d->radius, spec.target_h);
    } else if (const auto* e = std::get_if<EllipseSpec>(&spec.shape)) {
        if (!(e->semi_axes.x > 0) || !(e->semi_axes.y > 0))
            throw InvalidSpec("ellipse semi-axes must be positive");
        m = detail::build_disk_or_ellipse(e->center, e->semi_axes.x, e->semi_axes.y, spec.target_h);
    } else {
        m = detail::build_polygon(std::get<PolygonSpec>(spec.shape), spec.target_h);
    }
    m.validate();
    if (m.h > 1.5 * spec.target_h) throw InvalidSpec("mesh exceeds 1.5 * target_h");
    return m;
}

/// Rigid clockwise rotation of the whole mesh through theta.
inline Mesh rotate_mesh(const Mesh& mesh, double theta) {
    const Rot2 R = Rot2::clockwise(theta);
    Mesh m;
    m.vertices.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) m.vertices.push_back(R.apply(v));
    m.triangles = mesh.triangles;
    m.boundary_edges = mesh.boundary_edges;
    for (auto& e : m.boundary_edges) e.normal = R.apply(e.normal);
    m.finalize();
    return m;
}

/// Minimum over `points` of the distance to the boundary polyline.
inline double distance_to_boundary(const Mesh& mesh, const std::vector<Vec2>& points) {
    if (points.empty()) throw EmptyInput("distance_to_boundary needs at least one point");
    double d = 1e300;
    for (const auto& p : points)
        for (const auto& e : mesh.boundary_edges)
            d = std::min(d, dist_point_segment(p, mesh.vertices[e.a], mesh.vertices[e.b]));
    return d;
}

inline bool triangle_contains(const Mesh& mesh, int t, const Vec2& p, double slack = 0.0) {
    const auto& tri = mesh.triangles[t];
    const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    const double eps = -1e-14 * mesh.h * mesh.h - slack;
    return (b - a).cross(p - a) >= eps && (c - b).cross(p - b) >= eps &&
           (a - c).cross(p - c) >= eps;
}

inline bool point_in_mesh(const Mesh& mesh, const Vec2& p, int* tri_out = nullptr) {
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (triangle_contains(mesh, t, p)) {
            if (tri_out) *tri_out = t;
            return true;
        }
    }
    return false;
}

/// Uniform background grid over the triangles for O(1) point location.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh) : mesh_(&mesh) {
        xmin_ = ymin_ = 1e300;
        double xmax = -1e300, ymax = -1e300;
        for (const auto& v : mesh.vertices) {
            xmin_ = std::min(xmin_, v.x);
            ymin_ = std::min(ymin_, v.y);
            xmax = std::max(xmax, v.x);
            ymax = std::max(ymax, v.y);
        }
        cell_ = std::max(mesh.h, 1e-12);
        nx_ = std::max(1, static_cast<int>((xmax - xmin_) / cell_) + 1);
        ny_ = std::max(1, static_cast<int>((ymax - ymin_) / cell_) + 1);
        bins_.resize(static_cast<std::size_t>(nx_) * ny_);
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
            for (int i = 0; i < 3; ++i) {
                const Vec2 v = mesh.vertices[mesh.triangles[t][i]];
                bx0 = std::min(bx0, v.x); by0 = std::min(by0, v.y);
                bx1 = std::max(bx1, v.x); by1 = std::max(by1, v.y);
            }
            for (int cx = clamp_x(bx0); cx <= clamp_x(bx1); ++cx)
                for (int cy = clamp_y(by0); cy <= clamp_y(by1); ++cy)
                    bins_[static_cast<std::size_t>(cy) * nx_ + cx].push_back(t);
        }
    }

    /// Triangle containing p, or -1.
    int locate(const Vec2& p) const {
        const int cx = clamp_x(p.x), cy = clamp_y(p.y);
        for (int t : bins_[static_cast<std::size_t>(cy) * nx_ + cx])
            if (triangle_contains(*mesh_, t, p)) return t;
        return -1;
    }

private:
    const Mesh* mesh_;
    double xmin_ = 0, ymin_ = 0, cell_ = 1;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> bins_;

    int clamp_x(double x) const {
        return std::clamp(static_cast<int>((x - xmin_) / cell_), 0, nx_ - 1);
    }
    int clamp_y(double y) const {
        return std::clamp(static_cast<int>((y - ymin_) / cell_), 0, ny_ - 1);
    }
};

}  // namespace helvort
