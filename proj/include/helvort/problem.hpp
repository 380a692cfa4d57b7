#pragma once

// Discrete variational problem for one parameter value:
//
//   L_H u = (1/eps^2) (u - q ln(1/eps))_+^p  in Omega,   u = 0 on the boundary,
//
// with energy
//
//   I(u) = 1/2 a(u,u) - 1/((p+1) eps^2) int (u - q ln(1/eps))_+^{p+1} dx,
//
// a(u,v) the K_H form.  The nonlinear terms integrate the P1 interpolants at
// the same mid-edge quadrature points as the stiffness assembly, which makes
// the discrete Nehari identity and the energy bookkeeping identities exact at
// quadrature level.

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "helvort/assemble.hpp"
#include "helvort/field.hpp"
#include "helvort/harmonic.hpp"
#include "helvort/mesh.hpp"

namespace helvort {

inline double pos_pow(double x, double p) {
    if (x <= 0.0) return 0.0;
    if (p == 1.0) return x;
    if (p == 2.0) return x * x;
    if (p == 3.0) return x * x * x;
    return std::pow(x, p);
}

/// Everything that depends only on (mesh, k, q): shared across epsilon values.
struct OperatorCache {
    const Mesh* mesh = nullptr;
    double k = 1.0;
    Field q;
    SparseOperator stiffness;           // Dirichlet-constrained K_H form
    std::shared_ptr<SpdSolver> solver;  // factorization of the stiffness
    std::shared_ptr<PointLocator> locator;
    std::vector<double> lump;
    std::vector<double> q_mid;          // q at mid-edge points, 3 per triangle
    std::vector<int> jac_offsets;       // CSR offsets of each local 3x3 block, -1 on Dirichlet rows/cols
};

struct ProblemState {
    std::shared_ptr<const OperatorCache> ops;
    double p = 2.0;
    double eps = 0.1;
    double log_term = 0.0;  // ln(1/eps)

    const Mesh& mesh() const { return *ops->mesh; }
    double k() const { return ops->k; }
    const Field& q() const { return ops->q; }
};

inline std::shared_ptr<const OperatorCache> make_operator_cache(const Mesh& mesh, double k,
                                                                const Field& q) {
    if (!(q.min() > 0)) throw NonpositiveWeight("q must be strictly positive");
    auto cache = std::make_shared<OperatorCache>();
    cache->mesh = &mesh;
    cache->k = k;
    cache->q = q;
    cache->stiffness = assemble(mesh, k, std::nullopt, /*dirichlet=*/true);
    cache->solver = std::make_shared<SpdSolver>(cache->stiffness.matrix);
    cache->locator = std::make_shared<PointLocator>(mesh);
    cache->lump = lumped_mass(mesh);
    const int nt = mesh.num_triangles();
    cache->q_mid.resize(static_cast<std::size_t>(nt) * 3);
    for (int t = 0; t < nt; ++t) {
        const auto qm = q.at_midedges(t);
        for (int j = 0; j < 3; ++j) cache->q_mid[static_cast<std::size_t>(t) * 3 + j] = qm[j];
    }
    cache->jac_offsets.resize(static_cast<std::size_t>(nt) * 9);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                int off = -1;
                if (!mesh.is_boundary_vertex(tri[i]) && !mesh.is_boundary_vertex(tri[j]))
                    off = cache->stiffness.matrix.offset(tri[i], tri[j]);
                cache->jac_offsets[(static_cast<std::size_t>(t) * 3 + i) * 3 + j] = off;
            }
    }
    return cache;
}

inline ProblemState make_problem_state(std::shared_ptr<const OperatorCache> ops, double p,
                                       double eps) {
    if (!(p > 1.0)) throw InvalidSpec("exponent p must exceed 1");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidSpec("eps must lie in (0, 1)");
    ProblemState st;
    st.ops = std::move(ops);
    st.p = p;
    st.eps = eps;
    st.log_term = std::log(1.0 / eps);
    return st;
}

inline ProblemState with_epsilon(const ProblemState& st, double eps) {
    return make_problem_state(st.ops, st.p, eps);
}

/// int (u - q L)_+^{power} dx by the shared mid-edge quadrature.
inline double plus_part_integral(const Mesh& mesh, const Field& u, const Field& q, double L,
                                 double power) {
    double s = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto um = u.at_midedges(t);
        const auto qm = q.at_midedges(t);
        const double w = mesh.triangle_area(t) / 3.0;
        for (int j = 0; j < 3; ++j) {
            const double phi = um[j] - qm[j] * L;
            if (phi > 0) s += w * pos_pow(phi, power);
        }
    }
    return s;
}

inline double plus_part_integral(const ProblemState& st, const Field& u, double power) {
    const Mesh& mesh = st.mesh();
    double s = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto um = u.at_midedges(t);
        const double w = mesh.triangle_area(t) / 3.0;
        for (int j = 0; j < 3; ++j) {
            const double phi = um[j] - st.ops->q_mid[static_cast<std::size_t>(t) * 3 + j] * st.log_term;
            if (phi > 0) s += w * pos_pow(phi, power);
        }
    }
    return s;
}

inline double functional_value_with_energy(const ProblemState& st, const Field& u, double a_uu) {
    const double nl = plus_part_integral(st, u, st.p + 1.0);
    return 0.5 * a_uu - nl / ((st.p + 1.0) * st.eps * st.eps);
}

inline double functional_value(const ProblemState& st, const Field& u) {
    const double a_uu = dot(u.values, st.ops->stiffness.matrix.multiply(u.values));
    return functional_value_with_energy(st, u, a_uu);
}

/// Residual r with r.v = a(u,v) - eps^-2 int (u - q ln 1/eps)_+^p v dx for all
/// P1 test fields v; Dirichlet rows are zero.
inline std::vector<double> functional_gradient(const ProblemState& st, const Field& u) {
    const Mesh& mesh = st.mesh();
    std::vector<double> r = st.ops->stiffness.matrix.multiply(u.values);
    const double inv_eps2 = 1.0 / (st.eps * st.eps);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto um = u.at_midedges(t);
        const double w = mesh.triangle_area(t) / 3.0;
        const auto& tri = mesh.triangles[t];
        for (int j = 0; j < 3; ++j) {
            const double phi = um[j] - st.ops->q_mid[static_cast<std::size_t>(t) * 3 + j] * st.log_term;
            if (phi <= 0) continue;
            const double f = inv_eps2 * w * pos_pow(phi, st.p);
            for (int i = 0; i < 3; ++i) {
                const double shape = kMidEdgeShape[j][i];
                if (shape != 0.0) r[static_cast<std::size_t>(tri[i])] -= f * shape;
            }
        }
    }
    for (int i = 0; i < mesh.num_vertices(); ++i)
        if (mesh.is_boundary_vertex(i)) r[static_cast<std::size_t>(i)] = 0.0;
    return r;
}

inline double nehari_pairing(const ProblemState& st, const Field& u) {
    const std::vector<double> r = functional_gradient(st, u);
    return dot(r, u.values);
}

struct NehariProjection {
    double t = 1.0;
    Field scaled;
};

/// Unique t > 0 with t u on the Nehari manifold, by bracketing + bisection of
/// g(t) = t a(u,u) - eps^-2 int (t u - q ln 1/eps)_+^p u dx.  S_hint, when
/// nonnegative, supplies a(u,u) (line searches know it in closed form).
inline NehariProjection nehari_project(const ProblemState& st, const Field& u,
                                       double S_hint = -1.0) {
    const Mesh& mesh = st.mesh();
    const double S =
        S_hint >= 0.0 ? S_hint : dot(u.values, st.ops->stiffness.matrix.multiply(u.values));

    // quadrature points with positive u are the only ones that can activate
    struct Active {
        double u_val, mu, w;
    };
    std::vector<Active> active;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto um = u.at_midedges(t);
        const double w = mesh.triangle_area(t) / 3.0;
        for (int j = 0; j < 3; ++j)
            if (um[j] > 0)
                active.push_back({um[j],
                                  st.ops->q_mid[static_cast<std::size_t>(t) * 3 + j] * st.log_term,
                                  w});
    }
    if (active.empty() || !(S > 0))
        throw NotProjectable("field has no positive part at quadrature points");

    const double inv_eps2 = 1.0 / (st.eps * st.eps);
    const double p = st.p;
    auto g = [&](double t) {
        double nl = 0.0;
        for (const auto& a : active) {
            const double phi = t * a.u_val - a.mu;
            if (phi > 0) nl += a.w * pos_pow(phi, p) * a.u_val;
        }
        return t * S - inv_eps2 * nl;
    };

    double t_hi = 1.0;
    while (g(t_hi) > 0) {
        t_hi *= 2.0;
        if (t_hi > 1e18) throw NotProjectable("no Nehari crossing along the ray");
    }
    double t_lo = 0.5 * t_hi;
    while (g(t_lo) <= 0) {
        t_lo *= 0.5;
        if (t_lo < 1e-18) throw NotProjectable("no Nehari crossing along the ray");
    }
    for (int it = 0; it < 200 && (t_hi - t_lo) > 1e-13 * t_hi; ++it) {
        const double mid = 0.5 * (t_lo + t_hi);
        (g(mid) > 0 ? t_lo : t_hi) = mid;
    }
    const double t = 0.5 * (t_lo + t_hi);

    NehariProjection out;
    out.t = t;
    out.scaled = u;
    for (double& v : out.scaled.values) v *= t;
    const double defect = std::abs(t * g(t));
    if (!(defect <= 1e-10 * std::max(1.0, t * t * S)))
        throw SolverBreakdown("Nehari projection did not converge");
    return out;
}

/// Location, value and multiplicity of the minimizer of q^2 sqrt(det K_H)
/// over mesh vertices and boundary-edge midpoints.
struct ConcentrationMin {
    Vec2 point;
    double value = 0.0;   // min of q^2 sqrt(det K_H)
    double q_at = 1.0;    // q at the minimizer
    int multiplicity = 1;
    bool interior = false;
};

inline ConcentrationMin concentration_argmin(const Mesh& mesh, const Field& q, double k) {
    auto density = [&](const Vec2& x, double qv) {
        return qv * qv * k / std::sqrt(k * k + x.norm2());
    };
    struct Candidate {
        Vec2 x;
        double q, rho;
    };
    std::vector<Candidate> candidates;
    for (int i = 0; i < mesh.num_vertices(); ++i)
        candidates.push_back({mesh.vertices[i], q[i], density(mesh.vertices[i], q[i])});
    for (const auto& e : mesh.boundary_edges) {
        const Vec2 mid = (mesh.vertices[e.a] + mesh.vertices[e.b]) * 0.5;
        const double qm = 0.5 * (q[e.a] + q[e.b]);
        candidates.push_back({mid, qm, density(mid, qm)});
    }
    double best = candidates.front().rho;
    for (const auto& c : candidates) best = std::min(best, c.rho);

    ConcentrationMin out;
    out.value = best;
    out.multiplicity = 0;
    double best_angle = 1e300;
    for (const auto& c : candidates) {
        if (c.rho <= best * (1.0 + 1e-12)) {
            ++out.multiplicity;
            const double ang = std::atan2(c.x.y, c.x.x);
            if (ang < best_angle) {  // deterministic tie break: smallest polar angle
                best_angle = ang;
                out.point = c.x;
                out.q_at = c.q;
            }
        }
    }
    out.interior = distance_to_boundary(mesh, {out.point}) > 2.0 * mesh.h;
    return out;
}

/// Discrete Green's-function seed: the stiffness solve against a nodal point
/// load at the vertex nearest to `center`.  This reproduces the far field of
/// a concentrated state exactly, boundary effects included; the Nehari
/// projection supplies the amplitude.
inline Field greens_seed(const ProblemState& st, const Vec2& center) {
    const Mesh& mesh = st.mesh();
    int ci = -1;
    double best = 1e300;
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        if (mesh.is_boundary_vertex(i)) continue;
        const double d = (mesh.vertices[i] - center).norm2();
        if (d < best) {
            best = d;
            ci = i;
        }
    }
    if (ci < 0) throw CenterOutsideDomain("no interior vertex near the seed center");
    std::vector<double> e(static_cast<std::size_t>(mesh.num_vertices()), 0.0);
    e[static_cast<std::size_t>(ci)] = 1.0;
    Field g(mesh);
    g.values = st.ops->solver->solve(e);
    g.zero_boundary();
    return g;
}

/// Test-function seed: nodal interpolant of
///   q(x) (U((x - center)/eps) + ln(tau/eps)) chi_delta(|x - center|)
/// where U is log(1/s) outside the unit ellipse and the C1 cap
/// 1 - 1.5 s^2 + 0.5 s^4 inside, the ellipse aspect follows the coefficient
/// matrix at the center, and chi is a C1 cutoff between delta and 2 delta
/// with delta = min(dist(center, boundary)/2, 0.25).
inline Field initial_guess(const ProblemState& st, const Vec2& center, double tau) {
    if (!(tau > 0)) throw InvalidSpec("tau must be positive");
    const Mesh& mesh = st.mesh();
    if (!point_in_mesh(mesh, center))
        throw CenterOutsideDomain("seed center is outside the domain");
    const double dist = distance_to_boundary(mesh, {center});
    if (!(dist > 0)) throw CenterOutsideDomain("seed center lies on the boundary");
    const double delta = std::min(0.5 * dist, 0.25);

    // ellipse aspect from the rotated frame where the center sits on the
    // positive x1-axis: l2/l1 = sqrt(K22/K11), normalized l1 l2 = 1
    const double k = st.k();
    const Rot2 R = Rot2::clockwise(std::atan2(center.y, center.x));
    const double r2 = center.norm2();
    const double K11 = k * k / (k * k + r2), K22 = 1.0;
    const double ratio = std::sqrt(K22 / K11);
    const double l1 = 1.0 / std::sqrt(ratio), l2 = std::sqrt(ratio);

    auto cap = [](double s) { return 1.0 - 1.5 * s * s + 0.5 * s * s * s * s; };
    auto cutoff = [delta](double r) {
        if (r <= delta) return 1.0;
        if (r >= 2.0 * delta) return 0.0;
        const double t = (r - delta) / delta;
        return 1.0 - 3.0 * t * t + 2.0 * t * t * t;
    };

    Field guess(mesh);
    const double log_tau_eps = std::log(tau / st.eps);
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        const Vec2 y = mesh.vertices[i] - center;
        const double chi = cutoff(y.norm());
        if (chi == 0.0) continue;
        const Vec2 yr = R.apply(y);
        const double se =
            std::sqrt((yr.x / l1) * (yr.x / l1) + (yr.y / l2) * (yr.y / l2)) / st.eps;
        const double U = se >= 1.0 ? std::log(1.0 / se) : cap(se);
        guess[i] = st.q()[i] * (U + log_tau_eps) * chi;
    }
    guess.zero_boundary();
    return guess;
}

}  // namespace helvort
