#pragma once

// Small 2D/3D vector and matrix types shared by all helvort headers.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace helvort {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Symmetric 2x2 matrix stored as (a11, a12, a22).
struct Mat2Sym {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;

    Vec2 apply(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y};
    }
    double quad(const Vec2& v) const {
        return a11 * v.x * v.x + 2.0 * a12 * v.x * v.y + a22 * v.y * v.y;
    }
    double det() const { return a11 * a22 - a12 * a12; }
    double trace() const { return a11 + a22; }

    // Eigenvalues, ascending.
    std::array<double, 2> eigenvalues() const {
        const double m = 0.5 * trace();
        const double d = std::sqrt(std::max(0.0, m * m - det()));
        return {m - d, m + d};
    }
};

/// Plane rotation matching the convention of the helical reduction:
/// rotate(theta) maps a point at polar angle theta onto the positive
/// x1-axis, i.e. it is the clockwise rotation through theta.
struct Rot2 {
    double c = 1.0, s = 0.0;  // row0 = (c, s), row1 = (-s, c)

    static Rot2 clockwise(double theta) { return {std::cos(theta), std::sin(theta)}; }
    Rot2 inverse() const { return {c, -s}; }

    Vec2 apply(const Vec2& v) const { return {c * v.x + s * v.y, -s * v.x + c * v.y}; }
};

/// 3D rotation about the x3-axis with the same clockwise convention.
struct Rot3Z {
    double c = 1.0, s = 0.0;

    static Rot3Z clockwise(double rho) { return {std::cos(rho), std::sin(rho)}; }

    Vec3 apply(const Vec3& v) const {
        return {c * v.x + s * v.y, -s * v.x + c * v.y, v.z};
    }
};

inline double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double L2 = ab.norm2();
    if (L2 == 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / L2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

/// Proper segment intersection test (shared endpoints excluded by the caller).
inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        const double v = (q - p).cross(r - p);
        if (v > 0) return 1;
        if (v < 0) return -1;
        return 0;
    };
    const int o1 = orient(a, b, c), o2 = orient(a, b, d);
    const int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    auto on_seg = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
               std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
    };
    if (o1 == 0 && on_seg(a, c, b)) return true;
    if (o2 == 0 && on_seg(a, d, b)) return true;
    if (o3 == 0 && on_seg(c, a, d)) return true;
    if (o4 == 0 && on_seg(c, b, d)) return true;
    return false;
}

inline bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& vi = poly[i];
        const Vec2& vj = poly[j];
        if ((vi.y > p.y) != (vj.y > p.y)) {
            const double xint = vj.x + (p.y - vj.y) / (vi.y - vj.y) * (vi.x - vj.x);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

}  // namespace helvort
