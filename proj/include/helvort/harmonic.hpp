#pragma once

// Positive L_H-harmonic weights q: solve L_H q = 0 with a prescribed strictly
// positive Dirichlet trace.  The normal boundary velocity of the flow regime
// encoded by q is recovered afterwards as v_n = -grad_perp(q) . nu.

#include <functional>
#include <vector>

#include "helvort/assemble.hpp"
#include "helvort/field.hpp"

namespace helvort {

inline Vec2 mesh_centroid(const Mesh& mesh) {
    Vec2 c;
    double area = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double a = mesh.triangle_area(t);
        c += mesh.barycenter(t) * a;
        area += a;
    }
    return c / area;
}

/// Angle of a boundary point about the domain centroid, in (-pi, pi].
inline double boundary_angle(const Mesh& mesh, const Vec2& p) {
    const Vec2 c = mesh_centroid(mesh);
    return std::atan2(p.y - c.y, p.x - c.x);
}

/// trace[i] prescribes q at mesh.boundary_loop()[i].
inline Field solve_harmonic_q(const Mesh& mesh, double k, const std::vector<double>& trace) {
    const auto& loop = mesh.boundary_loop();
    if (trace.size() != loop.size())
        throw NonpositiveTrace("trace length does not match boundary loop");
    for (double v : trace)
        if (!(v > 0)) throw NonpositiveTrace("trace must be strictly positive");

    const SparseOperator full = assemble(mesh, k, std::nullopt, /*dirichlet=*/false);
    const SparseOperator constrained = assemble(mesh, k, std::nullopt, /*dirichlet=*/true);

    Field lift(mesh);
    for (std::size_t i = 0; i < loop.size(); ++i) lift[loop[i]] = trace[i];

    // interior correction: A_c u0 = -A_full * lift on interior rows
    std::vector<double> Ag = full.matrix.multiply(lift.values);
    Field rhs(mesh);
    for (int i = 0; i < rhs.size(); ++i)
        rhs[i] = mesh.is_boundary_vertex(i) ? 0.0 : -Ag[static_cast<std::size_t>(i)];
    Field corr = solve_linear(constrained, rhs);

    Field q(mesh);
    for (int i = 0; i < q.size(); ++i) q[i] = corr[i] + lift[i];

    // discrete residual on interior rows
    std::vector<double> r = full.matrix.multiply(q.values);
    double rmax = 0.0;
    for (int i = 0; i < q.size(); ++i)
        if (!mesh.is_boundary_vertex(i)) rmax = std::max(rmax, std::abs(r[static_cast<std::size_t>(i)]));
    if (!(rmax <= 1e-10))
        throw SolverBreakdown("harmonic weight residual above 1e-10");

    if (!(q.min() > 0))
        throw NonpositiveResult("discrete harmonic weight lost positivity; refine the mesh");
    return q;
}

inline Field solve_harmonic_q(const Mesh& mesh, double k,
                              const std::function<double(Vec2)>& trace_fn) {
    const auto& loop = mesh.boundary_loop();
    std::vector<double> trace;
    trace.reserve(loop.size());
    for (int v : loop) trace.push_back(trace_fn(mesh.vertices[v]));
    return solve_harmonic_q(mesh, k, trace);
}

/// Derived boundary data v_n = -grad_perp(q) . nu, one value per boundary edge.
inline std::vector<double> derived_boundary_vn(const Mesh& mesh, const Field& q) {
    std::vector<double> vn = boundary_flux(mesh, q);
    for (double& v : vn) v = -v;
    return vn;
}

}  // namespace helvort
