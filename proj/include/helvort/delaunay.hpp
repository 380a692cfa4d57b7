#pragma once

// Bowyer-Watson Delaunay triangulation of a point set.  Used only as the
// fallback mesher for polygonal domains; deterministic for a fixed input
// order.

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "helvort/errors.hpp"
#include "helvort/geometry.hpp"

namespace helvort {

namespace detail {

inline bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    // sign of the 3x3 incircle determinant, CCW triangle assumed
    const double ax = a.x - p.x, ay = a.y - p.y;
    const double bx = b.x - p.x, by = b.y - p.y;
    const double cx = c.x - p.x, cy = c.y - p.y;
    const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                       (bx * bx + by * by) * (ax * cy - cx * ay) +
                       (cx * cx + cy * cy) * (ax * by - bx * ay);
    return det > 0.0;
}

}  // namespace detail

inline std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& input) {
    const int n = static_cast<int>(input.size());
    if (n < 3) throw InvalidSpec("Delaunay needs at least 3 points");

    std::vector<Vec2> pts = input;
    double xmin = pts[0].x, xmax = xmin, ymin = pts[0].y, ymax = ymin;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
    }
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double span = std::max(xmax - xmin, ymax - ymin) * 64.0 + 1.0;
    pts.push_back({cx - span, cy - span});
    pts.push_back({cx + span, cy - span});
    pts.push_back({cx, cy + span});

    struct Tri {
        int v[3];
        bool alive = true;
    };
    std::vector<Tri> tris;
    tris.push_back({{n, n + 1, n + 2}, true});

    for (int ip = 0; ip < n; ++ip) {
        const Vec2& p = pts[ip];
        // collect cavity edges (boundary of the union of bad triangles)
        std::map<std::pair<int, int>, int> edge_use;
        std::vector<std::array<int, 3>> bad;
        for (auto& t : tris) {
            if (!t.alive) continue;
            Vec2 a = pts[t.v[0]], b = pts[t.v[1]], c = pts[t.v[2]];
            if ((b - a).cross(c - a) < 0) std::swap(t.v[1], t.v[2]);
            if (detail::in_circumcircle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], p)) {
                t.alive = false;
                bad.push_back({t.v[0], t.v[1], t.v[2]});
                for (int e = 0; e < 3; ++e) {
                    int u = t.v[e], v = t.v[(e + 1) % 3];
                    edge_use[{std::min(u, v), std::max(u, v)}]++;
                }
            }
        }
        for (const auto& t : bad) {
            for (int e = 0; e < 3; ++e) {
                int u = t[e], v = t[(e + 1) % 3];
                if (edge_use[{std::min(u, v), std::max(u, v)}] == 1)
                    tris.push_back({{u, v, ip}, true});
            }
        }
    }

    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;  // touches super-triangle
        std::array<int, 3> tri{t.v[0], t.v[1], t.v[2]};
        const Vec2 a = pts[tri[0]], b = pts[tri[1]], c = pts[tri[2]];
        if ((b - a).cross(c - a) < 0) std::swap(tri[1], tri[2]);
        out.push_back(tri);
    }
    return out;
}

}  // namespace helvort
