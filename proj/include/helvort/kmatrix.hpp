#pragma once

// Coefficient matrix of the reduced helical operator L_H = -div(K_H grad .)
// and the algebraic relations tying the planar stream function to the 3D
// helical velocity field.
//
//   K_H(x) = [k^2 + x2^2, -x1 x2; -x1 x2, k^2 + x1^2] / (k^2 + |x|^2)
//          = I - (x x^T) / (k^2 + |x|^2)
//
// Eigenvalues are 1 (tangential) and k^2/(k^2+|x|^2) (radial), so
// det K_H = k^2/(k^2+|x|^2).  K_H commutes with plane rotations in the sense
// K_H(R x) = R K_H(x) R^T.
//
// Perp convention used throughout:  grad_perp f = (d2 f, -d1 f)
// (clockwise rotation of the gradient through pi/2).

#include <cmath>

#include "helvort/errors.hpp"
#include "helvort/geometry.hpp"

namespace helvort {

struct KMatrix {
    Mat2Sym m;
    double k = 1.0;
    Vec2 at;

    double det() const { return m.det(); }
    double lambda_min() const { return k * k / (k * k + at.norm2()); }
};

inline KMatrix k_matrix(const Vec2& x, double k) {
    if (!(k > 0)) throw NonpositivePitch("pitch parameter k must be positive");
    const double denom = k * k + x.norm2();
    KMatrix K;
    K.k = k;
    K.at = x;
    K.m.a11 = (k * k + x.y * x.y) / denom;
    K.m.a12 = -(x.x * x.y) / denom;
    K.m.a22 = (k * k + x.x * x.x) / denom;
    return K;
}

/// Cheap path used inside assembly loops (no object, no error check).
inline Mat2Sym k_matrix_raw(double x1, double x2, double k) {
    const double denom = k * k + x1 * x1 + x2 * x2;
    return {(k * k + x2 * x2) / denom, -(x1 * x2) / denom, (k * k + x1 * x1) / denom};
}

inline Vec2 grad_perp(const Vec2& grad) { return {grad.y, -grad.x}; }

/// Planar velocity from the stream-function gradient:
///   (v1, v2) = -1/(k^2+|x|^2) * [x1 x2, -k^2-x1^2; k^2+x2^2, -x1 x2] * grad(phi)
inline Vec2 stream_velocity(const Vec2& x, double k, const Vec2& grad_phi) {
    const double denom = k * k + x.norm2();
    const double v1 = -(x.x * x.y * grad_phi.x + (-(k * k) - x.x * x.x) * grad_phi.y) / denom;
    const double v2 = -((k * k + x.y * x.y) * grad_phi.x - x.x * x.y * grad_phi.y) / denom;
    return {v1, v2};
}

/// Third velocity component from the orthogonality relation
/// x2 v1 - x1 v2 + k v3 = 0.
inline double third_velocity_component(const Vec2& x, double k, const Vec2& v12) {
    return (x.x * v12.y - x.y * v12.x) / k;
}

/// Tangent field of the helical symmetry lines.
inline Vec3 zeta(const Vec3& x, double k) { return {x.y, -x.x, k}; }

/// Screw motion: rotate by rho (clockwise convention) and translate k*rho up.
inline Vec3 helical_motion(const Vec2& x, double k, double rho) {
    const Rot2 R = Rot2::clockwise(rho);
    const Vec2 r = R.apply(x);
    return {r.x, r.y, k * rho};
}

}  // namespace helvort
