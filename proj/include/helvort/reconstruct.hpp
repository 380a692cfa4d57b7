#pragma once

// Lift of the planar solution pair (w, phi) to the 3D helical velocity and
// vorticity fields, the steady-state residual diagnostics, and the legacy
// VTK export.  All pointwise 3D quantities are evaluated at triangle
// barycenters since P1 gradients are piecewise constant.

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "helvort/asymptotics.hpp"
#include "helvort/groundstate.hpp"
#include "helvort/kmatrix.hpp"

namespace helvort {

struct HelicalSample {
    Vec3 position;
    Vec3 velocity;
    Vec3 vorticity;
    double w = 0.0;  // scalar vorticity carried by the sample
    int triangle = -1;
    double rho = 0.0;
};

/// Planar velocity (v1, v2) per triangle from the stream-function matrix at
/// the barycenter; phi = u - q ln(1/eps).
inline std::vector<Vec2> planar_velocity(const Solution& sol) {
    const Mesh& mesh = *sol.u.mesh;
    std::vector<Vec2> v;
    v.reserve(static_cast<std::size_t>(mesh.num_triangles()));
    for (int t = 0; t < mesh.num_triangles(); ++t)
        v.push_back(stream_velocity(mesh.barycenter(t), sol.k, sol.phi.gradient(t)));
    return v;
}

inline std::vector<double> third_velocity(const std::vector<Vec2>& v12,
                                          const std::vector<Vec2>& points, double k) {
    if (!(k > 0)) throw NonpositivePitch("pitch parameter k must be positive");
    if (v12.size() != points.size()) throw MeshMismatch("velocity/point count mismatch");
    std::vector<double> v3;
    v3.reserve(v12.size());
    for (std::size_t i = 0; i < v12.size(); ++i)
        v3.push_back(third_velocity_component(points[i], k, v12[i]));
    return v3;
}

inline std::vector<double> default_rho_samples(int count = 64) {
    std::vector<double> rhos;
    rhos.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        rhos.push_back(2.0 * std::numbers::pi * i / count);
    return rhos;
}

inline std::vector<HelicalSample> helical_lift(const Solution& sol,
                                               const std::vector<double>& rho_samples) {
    const Mesh& mesh = *sol.u.mesh;
    const std::vector<Vec2> v12 = planar_velocity(sol);
    const double L = std::log(1.0 / sol.eps);

    std::vector<HelicalSample> out;
    out.reserve(rho_samples.size() * static_cast<std::size_t>(mesh.num_triangles()));
    for (double rho : rho_samples) {
        const Rot3Z R = Rot3Z::clockwise(rho);
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const Vec2 x = mesh.barycenter(t);
            HelicalSample s;
            s.triangle = t;
            s.rho = rho;
            s.position = helical_motion(x, sol.k, rho);
            const Vec3 v{v12[static_cast<std::size_t>(t)].x, v12[static_cast<std::size_t>(t)].y,
                         third_velocity_component(x, sol.k, v12[static_cast<std::size_t>(t)])};
            s.velocity = R.apply(v);
            const double phi_bar = sol.u.at_barycenter(t) - sol.q.at_barycenter(t) * L;
            s.w = pos_pow(phi_bar, sol.p) / (sol.eps * sol.eps);
            s.vorticity = zeta(s.position, sol.k) * (s.w / sol.k);
            out.push_back(s);
        }
    }
    return out;
}

/// Connected components of the lifted vorticity support over the graph
/// (core-triangle adjacency within a slice) x (same triangle, consecutive
/// rho slices).
inline int vorticity_tube_components(const Solution& sol, int n_rho = 64) {
    const Mesh& mesh = *sol.u.mesh;
    const std::vector<int> core = vortex_core(sol);
    if (core.empty()) return 0;
    const int nc = static_cast<int>(core.size());
    std::vector<int> parent(static_cast<std::size_t>(nc) * n_rho);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

    std::map<std::pair<int, int>, int> edge_owner;
    for (int ci = 0; ci < nc; ++ci) {
        const auto& tri = mesh.triangles[core[ci]];
        for (int e = 0; e < 3; ++e) {
            const int u = tri[e], v = tri[(e + 1) % 3];
            const auto key = std::make_pair(std::min(u, v), std::max(u, v));
            auto it = edge_owner.find(key);
            if (it == edge_owner.end()) edge_owner[key] = ci;
            else
                for (int r = 0; r < n_rho; ++r) unite(ci * n_rho + r, it->second * n_rho + r);
        }
    }
    for (int ci = 0; ci < nc; ++ci)
        for (int r = 0; r + 1 < n_rho; ++r) unite(ci * n_rho + r, ci * n_rho + r + 1);

    std::vector<int> roots;
    for (std::size_t i = 0; i < parent.size(); ++i) roots.push_back(find(static_cast<int>(i)));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return static_cast<int>(roots.size());
}

struct SteadyReport {
    double transport_defect = 0.0;   // L2 alignment of grad w with grad_perp phi
    double divergence_defect = 0.0;  // weak planar divergence of the weighted field
    double boundary_defect = 0.0;    // max |grad_perp phi . nu - v_n ln(1/eps)|
    double grad_phi_max = 0.0;
};

inline SteadyReport verify_steady(const Solution& sol) {
    const Mesh& mesh = *sol.u.mesh;
    const double k = sol.k;
    SteadyReport rep;

    // (a) transport defect: sine of the angle between grad w and grad_perp phi,
    // L2-weighted over triangles carrying vorticity
    double num = 0.0, den = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 gw = sol.w.gradient(t);
        if (gw.norm2() == 0.0) continue;
        const Vec2 gp = sol.phi.gradient(t);
        const double cross = gw.dot(grad_perp(gp));
        num += mesh.triangle_area(t) * cross * cross;
        den += mesh.triangle_area(t) * gw.norm2() * gp.norm2();
        rep.grad_phi_max = std::max(rep.grad_phi_max, gp.norm());
    }
    rep.transport_defect = den > 0 ? std::sqrt(num / den) : 0.0;

    // (b) weak divergence of F = ((k^2+x2^2)v1 - x1x2v2, (k^2+x1^2)v2 - x1x2v1)/k^2
    // with the per-triangle velocity frozen and the coefficients varying over
    // the quadrature points (the continuum identity div F = 0)
    const std::vector<Vec2> v12 = planar_velocity(sol);
    std::vector<double> div(static_cast<std::size_t>(mesh.num_vertices()), 0.0);
    double phi_h1 = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 v = v12[static_cast<std::size_t>(t)];
        const auto& g = mesh.basis_gradients(t);
        const auto& tri = mesh.triangles[t];
        const double wq = mesh.triangle_area(t) / 3.0;
        phi_h1 += mesh.triangle_area(t) * sol.phi.gradient(t).norm2();
        for (const Vec2& qp : midedge_points(mesh, t)) {
            const Vec2 F{((k * k + qp.y * qp.y) * v.x - qp.x * qp.y * v.y) / (k * k),
                         ((k * k + qp.x * qp.x) * v.y - qp.x * qp.y * v.x) / (k * k)};
            for (int i = 0; i < 3; ++i)
                div[static_cast<std::size_t>(tri[i])] += wq * F.dot(g[i]);
        }
    }
    const auto lump = lumped_mass(mesh);
    double d2 = 0.0;
    for (int i = 0; i < mesh.num_vertices(); ++i)
        if (!mesh.is_boundary_vertex(i))
            d2 += div[static_cast<std::size_t>(i)] * div[static_cast<std::size_t>(i)] /
                  lump[static_cast<std::size_t>(i)];
    rep.divergence_defect = phi_h1 > 0 ? std::sqrt(d2 / phi_h1) : 0.0;

    // (c) boundary flux versus the target v_n ln(1/eps) = -grad_perp q . nu ln(1/eps)
    const double L = std::log(1.0 / sol.eps);
    const auto flux = boundary_flux(mesh, sol.phi);
    const auto q_flux = boundary_flux(mesh, sol.q);
    for (std::size_t e = 0; e < flux.size(); ++e)
        rep.boundary_defect = std::max(rep.boundary_defect,
                                       std::abs(flux[e] - (-q_flux[e]) * L));
    return rep;
}

/// Legacy VTK ASCII unstructured grid of lifted samples (vertex cells) with
/// velocity/vorticity vectors and the scalar w.
inline std::string vtk_lift(const std::vector<HelicalSample>& samples,
                            const std::string& title) {
    std::ostringstream out;
    const std::size_t n = samples.size();
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << n << " double\n";
    auto g = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    for (const auto& s : samples)
        out << g(s.position.x) << " " << g(s.position.y) << " " << g(s.position.z) << "\n";
    out << "CELLS " << n << " " << 2 * n << "\n";
    for (std::size_t i = 0; i < n; ++i) out << "1 " << i << "\n";
    out << "CELL_TYPES " << n << "\n";
    for (std::size_t i = 0; i < n; ++i) out << "1\n";
    out << "POINT_DATA " << n << "\n";
    out << "VECTORS velocity double\n";
    for (const auto& s : samples)
        out << g(s.velocity.x) << " " << g(s.velocity.y) << " " << g(s.velocity.z) << "\n";
    out << "VECTORS vorticity double\n";
    for (const auto& s : samples)
        out << g(s.vorticity.x) << " " << g(s.vorticity.y) << " " << g(s.vorticity.z) << "\n";
    out << "SCALARS w double 1\nLOOKUP_TABLE default\n";
    for (const auto& s : samples) out << g(s.w) << "\n";
    return out.str();
}

}  // namespace helvort
