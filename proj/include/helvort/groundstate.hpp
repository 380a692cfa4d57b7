#pragma once

// Ground states as Nehari-manifold minimizers: projected Sobolev-gradient
// descent down to a loose manifold-gradient tolerance, then full Newton on
// I'(u) = 0.  Warm-started continuation produces the solution family over a
// descending epsilon list.

#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "helvort/problem.hpp"

namespace helvort {

struct SolverOptions {
    double grad_tol = 1e-5;       // manifold-gradient dual norm to leave phase one
    double newton_tol = 1e-8;     // residual dual norm at convergence
    int max_grad_iters = 600;
    int max_newton_iters = 60;
    double trivial_mass_tol = 1e-14;
    std::ostream* log = nullptr;  // iteration trace, off by default
};

struct Solution {
    Field u;           // ground state, Dirichlet-zero
    Field phi;         // stream function u - q ln(1/eps)
    Field w;           // vorticity scalar eps^-2 (phi)_+^p, nodal
    Field q;           // weight used for this solve
    double k = 1.0, p = 2.0, eps = 0.1;
    double energy = 0.0;          // I_eps(u)
    double residual_norm = 0.0;   // dual norm of I'(u)
    double nehari_defect = 0.0;   // <I'(u), u>
    int newton_iters = 0;
    int gradient_iters = 0;
    bool under_resolved = false;  // set by continuation when core/h < 8 cells
};

/// P1 resampling of `f` rigidly shifted by `shift` (zero where the shifted
/// point leaves the domain); used to move vortex cores without re-solving.
inline Field translate_field(const Field& f, const Vec2& shift, const PointLocator& loc) {
    const Mesh& mesh = *f.mesh;
    Field out(mesh);
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        const Vec2 src = mesh.vertices[i] - shift;
        const int t = loc.locate(src);
        if (t < 0) continue;
        const auto& tri = mesh.triangles[t];
        const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
        const double den = (b - a).cross(c - a);
        const double l1 = (src - a).cross(c - a) / den;
        const double l2 = (b - a).cross(src - a) / den;
        const double l0 = 1.0 - l1 - l2;
        out[i] = l0 * f[tri[0]] + l1 * f[tri[1]] + l2 * f[tri[2]];
    }
    out.zero_boundary();
    return out;
}

namespace detail {

inline double dual_norm(const ProblemState& st, const std::vector<double>& r) {
    return std::sqrt(std::max(0.0, dot(r, st.ops->solver->solve(r))));
}

/// Second variation of I at u: the stiffness minus the p (phi)_+^{p-1} mass
/// block (indefinite at mountain-pass points).  sign=+1 instead yields the
/// SPD companion A + p eps^-2 M_+, the natural preconditioning metric near a
/// concentrated state.
inline Csr newton_matrix(const ProblemState& st, const Field& u, double sign = -1.0) {
    const Mesh& mesh = st.mesh();
    Csr J = st.ops->stiffness.matrix;
    const double coef = sign * st.p / (st.eps * st.eps);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto um = u.at_midedges(t);
        const double w = mesh.triangle_area(t) / 3.0;
        for (int j = 0; j < 3; ++j) {
            const double phi = um[j] - st.ops->q_mid[static_cast<std::size_t>(t) * 3 + j] * st.log_term;
            if (phi <= 0) continue;
            const double f = coef * w * pos_pow(phi, st.p - 1.0);
            for (int a = 0; a < 3; ++a) {
                const double sa = kMidEdgeShape[j][a];
                if (sa == 0.0) continue;
                for (int b = 0; b < 3; ++b) {
                    const double sb = kMidEdgeShape[j][b];
                    if (sb == 0.0) continue;
                    const int off = st.ops->jac_offsets[(static_cast<std::size_t>(t) * 3 + a) * 3 + b];
                    if (off >= 0) J.val[static_cast<std::size_t>(off)] += f * sa * sb;
                }
            }
        }
    }
    return J;
}

/// Max pairwise distance of barycenters with positive phi; 0 if none.
inline double core_diameter_estimate(const ProblemState& st, const Field& u) {
    const Mesh& mesh = st.mesh();
    std::vector<Vec2> pts;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double phi = u.at_barycenter(t) - st.q().at_barycenter(t) * st.log_term;
        if (phi > 0) pts.push_back(mesh.barycenter(t));
    }
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            d = std::max(d, (pts[i] - pts[j]).norm());
    return pts.empty() ? 0.0 : std::max(d, mesh.h);
}

struct SolveAttempt {
    Field u;
    int gradient_iters = 0;
    int newton_iters = 0;
    bool collapsed = false;
};

/// Projected descent along the Riesz representative of I'.  Steps use a
/// safeguarded Barzilai-Borwein length with a nonmonotone Armijo test (the
/// core migrates through long flat valleys, where fixed steps crawl).  Line
/// searches reuse a(u,u), a(u,z), a(z,z) so trial energies cost no matrix
/// products.  Returns the final value of I.
inline double descent_rounds(const ProblemState& st, Field& u, int max_iters,
                             double grad_tol, int& iter_count) {
    const Csr& A = st.ops->stiffness.matrix;
    u = nehari_project(st, u).scaled;  // manifold method: enforce membership
    double value = functional_value(st, u);
    std::vector<double> u_prev, z_prev;
    double alpha_last = 1.0;
    // precondition with the SPD companion of the second variation, refreshed
    // as the excess set evolves; the bare stiffness misscales the eps^-2 core
    // block by orders of magnitude
    std::unique_ptr<Csr> bmat;
    std::unique_ptr<SpdSolver> bsolver;
    int refresh_countdown = 0;
    for (int it = 0; it < max_iters; ++it) {
        if (refresh_countdown-- <= 0) {
            bmat = std::make_unique<Csr>(newton_matrix(st, u, +1.0));
            bsolver = std::make_unique<SpdSolver>(*bmat);
            refresh_countdown = 40;
        }
        const std::vector<double> r = functional_gradient(st, u);
        const std::vector<double> dual_vec = st.ops->solver->solve(r);
        if (std::sqrt(std::max(0.0, dot(r, dual_vec))) < grad_tol) break;
        const std::vector<double> z = bsolver->solve(r);
        const double g2 = std::max(0.0, dot(r, z));
        if (g2 == 0.0) break;

        // spectral step length as a hint on top of the growing baseline
        double alpha_bb = 0.0;
        if (!u_prev.empty()) {
            double sy = 0.0, yy = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) {
                const double s = u.values[i] - u_prev[i];
                const double y = z[i] - z_prev[i];
                sy += s * y;
                yy += y * y;
            }
            if (yy > 0 && sy > 0) alpha_bb = sy / yy;
        }
        u_prev = u.values;
        z_prev = z;

        const std::vector<double> Az = A.multiply(z);
        const double Auu = dot(u.values, A.multiply(u.values));
        const double Auz = dot(u.values, Az);
        const double Azz = dot(z, Az);

        double alpha = std::clamp(std::max(2.0 * alpha_last, alpha_bb), 0.25, 64.0);
        bool accepted = false;
        for (int bt = 0; bt < 50; ++bt, alpha *= 0.5) {
            Field trial = u;
            for (int i = 0; i < trial.size(); ++i)
                trial[i] -= alpha * z[static_cast<std::size_t>(i)];
            const double S_trial = std::max(0.0, Auu - 2.0 * alpha * Auz + alpha * alpha * Azz);
            try {
                const NehariProjection proj = nehari_project(st, trial, S_trial);
                const double trial_value =
                    functional_value_with_energy(st, proj.scaled, proj.t * proj.t * S_trial);
                if (trial_value <= value - 1e-4 * alpha * g2) {
                    u = std::move(proj.scaled);
                    value = trial_value;
                    accepted = true;
                    alpha_last = alpha;
                    break;
                }
            } catch (const NotProjectable&) {
                // step left the projectable cone; shorten it
            }
        }
        ++iter_count;
        if (!accepted) break;  // stationary on the manifold at this resolution
    }
    return value;
}

/// Try rigid shifts of the current excess bump toward the concentration
/// point, keeping any that lowers the on-manifold energy.  Pinning barriers
/// at the mesh scale make plain descent translate the core one cell per
/// hundreds of iterations; resampled jumps cross them directly.
inline bool translation_polish(const ProblemState& st, Field& u, double& value) {
    const Mesh& mesh = st.mesh();
    const PointLocator& loc = *st.ops->locator;
    bool improved_any = false;
    for (int moves = 0; moves < 40; ++moves) {
        Vec2 centroid{};
        double area = 0.0;
        const double L = st.log_term;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            if (u.at_barycenter(t) - st.q().at_barycenter(t) * L > 0) {
                const double a = mesh.triangle_area(t);
                centroid += mesh.barycenter(t) * a;
                area += a;
            }
        }
        if (area == 0.0) return improved_any;
        centroid = centroid / area;
        Vec2 drift = concentration_argmin(mesh, st.q(), st.k()).point - centroid;
        if (drift.norm() > 1e-12) drift = drift / drift.norm();

        // candidate moves: toward the predicted point plus both lattice axes
        // at sub-cell resolution (pinned equilibria sit between mesh sites)
        std::vector<Vec2> shifts;
        for (double len : {4.0, 2.0, 1.0, 0.5}) shifts.push_back(drift * (len * mesh.h));
        for (const Vec2 axis : {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}})
            for (double len : {1.0, 0.5, 0.25, 0.125})
                shifts.push_back(axis * (len * mesh.h));

        Field best;
        double best_value = value;
        for (const Vec2& shift : shifts) {
            if (shift.norm() < 1e-12) continue;
            try {
                Field cand = translate_field(u, shift, loc);
                const NehariProjection proj = nehari_project(st, cand);
                const double v = functional_value(st, proj.scaled);
                if (v < best_value - 1e-12) {
                    best_value = v;
                    best = std::move(proj.scaled);
                }
            } catch (const NotProjectable&) {
            }
        }
        if (best_value >= value - 1e-12) return improved_any;
        u = std::move(best);
        value = best_value;
        improved_any = true;
    }
    return improved_any;
}

struct SoftMode {
    std::vector<double> v;  // normalized
    double lambda = 0.0;
};

/// Smallest-|lambda| eigenpairs of J by inverse iteration with deflation,
/// reusing an existing factorization.
inline std::vector<SoftMode> soft_modes(const Csr& J, const LuSolver& lu, int count) {
    std::vector<SoftMode> modes;
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> init(-1.0, 1.0);
    for (int m = 0; m < count; ++m) {
        std::vector<double> v(static_cast<std::size_t>(J.n));
        for (double& x : v) x = init(rng);
        try {
            for (int it = 0; it < 8; ++it) {
                for (const auto& prev : modes) {
                    const double pr = dot(v, prev.v);
                    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= pr * prev.v[i];
                }
                const double n = norm2(v);
                if (n == 0.0) return modes;
                for (double& x : v) x /= n;
                v = lu.solve(v);
            }
        } catch (const SolverBreakdown&) {
            return modes;
        }
        for (const auto& prev : modes) {
            const double pr = dot(v, prev.v);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= pr * prev.v[i];
        }
        const double n = norm2(v);
        if (n == 0.0) return modes;
        for (double& x : v) x /= n;
        SoftMode mode;
        mode.lambda = dot(v, J.multiply(v));
        mode.v = std::move(v);
        modes.push_back(std::move(mode));
    }
    return modes;
}

/// One Newton campaign on I'(u) = 0 from the current iterate.  Near-singular
/// soft modes (discrete core translations) are deflated out of the linear
/// step and handled by nonlinear 1D searches along the modes; if even that
/// fails a Levenberg shift turns the step into scaled descent.  Returns true
/// when the residual tolerance was reached; false when stuck (caller resumes
/// manifold descent) or on trivial collapse.
inline bool newton_campaign(const ProblemState& st, Field& u, const SolverOptions& opt,
                            SolveAttempt& out) {
    const Mesh& mesh = st.mesh();
    const auto& lump = st.ops->lump;
    int flat_steps = 0;
    std::vector<double> history;
    for (int it = 0; it < opt.max_newton_iters; ++it) {
        if (plus_part_integral(st, u, st.p + 1.0) < opt.trivial_mass_tol) {
            out.collapsed = true;
            return false;
        }
        std::vector<double> r = functional_gradient(st, u);
        const double dual = dual_norm(st, r);
        if (dual <= opt.newton_tol) return true;
        ++out.newton_iters;
        const double r0 = norm2(r);
        if (opt.log)
            *opt.log << "    newton it " << it << ": dual " << dual << " |r| " << r0 << "\n";
        history.push_back(r0);
        if (history.size() >= 9 && r0 > 0.85 * history[history.size() - 9]) {
            if (opt.log) *opt.log << "    newton: no progress, back to descent\n";
            return false;  // under 15% total reduction over eight iterations
        }
        std::vector<double> neg_r = r;
        for (double& v : neg_r) v = -v;

        const Csr J = newton_matrix(st, u);
        bool moved = false;
        const char* action = "none";

        auto try_direction = [&](const std::vector<double>& d) {
            double lambda = 1.0;
            for (int bt = 0; bt < 9; ++bt, lambda *= 0.5) {
                Field trial = u;
                for (int i = 0; i < trial.size(); ++i)
                    trial[i] += lambda * d[static_cast<std::size_t>(i)];
                const double rn = norm2(functional_gradient(st, trial));
                if (rn <= (1.0 - 1e-4 * lambda) * r0) {
                    u = std::move(trial);
                    return true;
                }
            }
            return false;
        };

        try {
            const LuSolver jsolver(J);
            const std::vector<double> d = jsolver.solve(neg_r);
            moved = try_direction(d);  // damped Newton
            if (moved) {
                flat_steps = 0;
                action = "newton";
            }

            if (!moved && flat_steps < 6 && dual < 0.1) {
                // semismooth full step across an active-set kink, growth-bounded;
                // only sensible near the critical point
                Field trial = u;
                for (int i = 0; i < trial.size(); ++i)
                    trial[i] += d[static_cast<std::size_t>(i)];
                const double rn = norm2(functional_gradient(st, trial));
                if (rn <= 10.0 * r0) {
                    u = std::move(trial);
                    moved = true;
                    ++flat_steps;
                    action = "flat";
                }
            }

            if (!moved) {
                // positive-companion step: well-scaled on the core block
                const Csr B = newton_matrix(st, u, +1.0);
                const SpdSolver bsolver(B);
                if (try_direction(bsolver.solve(neg_r))) {
                    moved = true;
                    action = "posdef";
                }
            }

            if (!moved) {
                // deflate the soft modes out of the step and line-search the
                // complement, then each mode separately
                const auto modes = soft_modes(J, jsolver, 6);
                std::vector<double> d_perp = d;
                for (const auto& mode : modes) {
                    const double pr = dot(d_perp, mode.v);
                    for (std::size_t i = 0; i < d_perp.size(); ++i)
                        d_perp[i] -= pr * mode.v[i];
                }
                if (try_direction(d_perp)) {
                    moved = true;
                    action = "deflated";
                }
                for (const auto& mode : modes) {
                    const double rv = dot(r, mode.v);
                    if (std::abs(rv) < 1e-14) continue;
                    // nonlinear search along the mode with a trust bound
                    const double t_newton = -rv / (std::abs(mode.lambda) > 1e-30 ? mode.lambda : 1.0);
                    const double t_cap = 0.2 * (1.0 + norm2(u.values));
                    const double r_now = norm2(functional_gradient(st, u));
                    double t_best = 0.0, r_best = r_now;
                    for (double frac : {1.0, 0.5, 0.25, 0.1, -0.25, -1.0}) {
                        const double t = std::clamp(frac * t_newton, -t_cap, t_cap);
                        Field trial = u;
                        for (int i = 0; i < trial.size(); ++i)
                            trial[i] += t * mode.v[static_cast<std::size_t>(i)];
                        const double rn = norm2(functional_gradient(st, trial));
                        if (rn < r_best) {
                            r_best = rn;
                            t_best = t;
                        }
                    }
                    if (t_best != 0.0 && r_best <= 0.99 * r_now) {  // real reductions only
                        for (int i = 0; i < u.size(); ++i)
                            u[i] += t_best * mode.v[static_cast<std::size_t>(i)];
                        moved = true;
                        action = "mode-search";
                    }
                }
            }
        } catch (const SolverBreakdown&) {
            // singular factorization; fall through to the shifted solve
        }

        if (!moved) {
            // Levenberg fallback: increasingly shifted solves
            double sigma = 1.0;
            for (int attempt = 0; attempt < 6 && !moved; ++attempt, sigma *= 30.0) {
                Csr Js = J;
                for (int i = 0; i < mesh.num_vertices(); ++i) {
                    if (mesh.is_boundary_vertex(i)) continue;
                    const int off = Js.offset(i, i);
                    if (off >= 0)
                        Js.val[static_cast<std::size_t>(off)] +=
                            sigma * lump[static_cast<std::size_t>(i)];
                }
                try {
                    const LuSolver shifted(Js);
                    if (try_direction(shifted.solve(neg_r))) {
                        moved = true;
                        action = "shifted";
                    }
                } catch (const SolverBreakdown&) {
                }
            }
        }
        if (opt.log) *opt.log << "      action: " << action << "\n";
        if (!moved) return false;
    }
    std::vector<double> r = functional_gradient(st, u);
    return dual_norm(st, r) <= opt.newton_tol;
}

inline SolveAttempt solve_from(const ProblemState& st, const Field& start,
                               const SolverOptions& opt) {
    SolveAttempt out;
    Field u = nehari_project(st, start).scaled;

    // Alternate descent chunks, translation polish and Newton campaigns.
    // Descent and polish settle the core; Newton finishes once the active set
    // stops moving (plain preconditioned descent crawls there because the
    // eps^-2 mass term is invisible to the stiffness preconditioner).
    double value = functional_value(st, u);
    translation_polish(st, u, value);
    Field best_u = u;  // lowest on-manifold energy seen
    double best_value = value;
    int chunk = 40;
    for (int round = 0; round < 40; ++round) {
        if (newton_campaign(st, u, opt, out)) {
            out.u = std::move(u);
            return out;
        }
        if (out.collapsed) {
            out.u = std::move(u);
            return out;
        }
        // adopt the campaign output only if it improves the manifold energy,
        // else resume from the best state so far
        try {
            Field proj = nehari_project(st, u).scaled;
            const double v = functional_value(st, proj);
            if (v < best_value) {
                best_value = v;
                best_u = std::move(proj);
            }
        } catch (const NotProjectable&) {
        }
        u = best_u;
        value = best_value;

        if (out.gradient_iters >= opt.max_grad_iters) break;
        const int before = out.gradient_iters;
        value = descent_rounds(st, u, std::min(chunk, opt.max_grad_iters - out.gradient_iters),
                               opt.grad_tol, out.gradient_iters);
        const bool moved = translation_polish(st, u, value);
        if (opt.log)
            *opt.log << "  round " << round << ": descent +" << out.gradient_iters - before
                     << " iters (total " << out.gradient_iters << "), polish "
                     << (moved ? "moved" : "held") << ", I = " << value << "\n";
        if (value < best_value) {
            best_value = value;
            best_u = u;
        }
        chunk = std::min(2 * chunk, 300);
        if (!moved && out.gradient_iters == before) break;  // fully stalled
    }

    u = best_u;
    if (newton_campaign(st, u, opt, out)) {
        out.u = std::move(u);
        return out;
    }
    if (out.collapsed) {
        out.u = std::move(u);
        return out;
    }
    throw MaxIterations("ground-state solve did not reach the residual tolerance");
}

}  // namespace detail

/// Seed center: the minimizer of q^2 sqrt(det K_H), nudged toward the domain
/// centroid until the test-function cutoff has room (boundary minimizers are
/// the generic case for constant q).  The clearance scales with eps so the
/// excess ellipse of the seed fits under the cutoff.
inline Vec2 default_seed_center(const Mesh& mesh, const Field& q, double k, double eps) {
    const Vec2 xstar = concentration_argmin(mesh, q, k).point;
    const Vec2 centroid = mesh_centroid(mesh);
    const double clearance = std::max(4.0 * mesh.h, 6.0 * eps);
    for (double s = 0.0; s <= 1.0; s += 0.02) {
        const Vec2 c = xstar + (centroid - xstar) * s;
        if (point_in_mesh(mesh, c) && distance_to_boundary(mesh, {c}) >= clearance) return c;
    }
    return centroid;
}

inline Solution solve_ground_state_multi(const ProblemState& st,
                                         const std::vector<Field>& guesses,
                                         const SolverOptions& opt) {
    const Vec2 center = default_seed_center(st.mesh(), st.q(), st.k(), st.eps);

    // candidate starts ranked by on-manifold energy (the ground state is the
    // manifold infimum); a start can park in a pinned basin with no critical
    // point, so failed attempts fall through to the next candidate
    struct Ranked {
        double value;
        Field start;
    };
    std::vector<Ranked> ranked;
    auto consider = [&](const Field& cand) {
        try {
            Field proj = nehari_project(st, cand).scaled;
            ranked.push_back({functional_value(st, proj), cand});
        } catch (const NotProjectable&) {
        }
    };
    for (const Field& g : guesses) consider(g);
    consider(initial_guess(st, center, 1.0));
    consider(greens_seed(st, center));
    if (ranked.empty()) throw NotProjectable("no admissible starting point");
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Ranked& a, const Ranked& b) { return a.value < b.value; });

    detail::SolveAttempt attempt;
    bool solved = false;
    const std::size_t tries = std::min<std::size_t>(ranked.size(), 3);
    SolverOptions capped = opt;
    capped.max_grad_iters = std::min(opt.max_grad_iters, 300);
    for (std::size_t c = 0; c < tries && !solved; ++c) {
        try {
            attempt = detail::solve_from(st, ranked[c].start, capped);
            solved = !attempt.collapsed;
        } catch (const MaxIterations&) {
            if (opt.log) *opt.log << "  start " << c << " failed; next candidate\n";
        }
        if (attempt.collapsed) break;
    }
    if (!solved && !attempt.collapsed) {
        // final pass: best-ranked start with the full budget
        attempt = detail::solve_from(st, ranked.front().start, opt);
        solved = !attempt.collapsed;
    }
    if (!solved && attempt.collapsed) {
        for (double tau : {2.0, 4.0}) {  // wider excess sets escape the trivial basin
            attempt = detail::solve_from(st, initial_guess(st, center, tau), opt);
            if (!attempt.collapsed) {
                solved = true;
                break;
            }
        }
        if (!solved)
            throw CollapseToZero("solver collapsed to the trivial solution for tau in {1,2,4}");
    }

    Solution sol;
    sol.u = std::move(attempt.u);
    sol.q = st.q();
    sol.k = st.k();
    sol.p = st.p;
    sol.eps = st.eps;
    sol.gradient_iters = attempt.gradient_iters;
    sol.newton_iters = attempt.newton_iters;

    const std::vector<double> r = functional_gradient(st, sol.u);
    sol.residual_norm = detail::dual_norm(st, r);
    sol.nehari_defect = dot(r, sol.u.values);
    sol.energy = functional_value(st, sol.u);

    const double a_uu = dot(sol.u.values, st.ops->stiffness.matrix.multiply(sol.u.values));
    if (!(sol.residual_norm <= opt.newton_tol))
        throw MaxIterations("converged solution fails the residual invariant");
    if (!(std::abs(sol.nehari_defect) <= 1e-8 * std::max(1.0, a_uu)))
        throw MaxIterations("converged solution fails the Nehari-defect invariant");

    sol.phi = Field(st.mesh());
    sol.w = Field(st.mesh());
    const double inv_eps2 = 1.0 / (st.eps * st.eps);
    for (int i = 0; i < sol.u.size(); ++i) {
        sol.phi[i] = sol.u[i] - st.q()[i] * st.log_term;
        sol.w[i] = inv_eps2 * pos_pow(sol.phi[i], st.p);
    }
    return sol;
}

inline Solution solve_ground_state(const ProblemState& st,
                                   const std::optional<Field>& guess = std::nullopt,
                                   const SolverOptions& opt = {}) {
    std::vector<Field> guesses;
    if (guess) guesses.push_back(*guess);
    return solve_ground_state_multi(st, guesses, opt);
}

/// Warm starts for the next continuation step: the previous state plus copies
/// translated toward the predicted concentration point (cores drift there as
/// eps falls, and translated seeds skip the slow cell-by-cell migration).
inline std::vector<Field> continuation_seeds(const ProblemState& st, const Field& prev_u,
                                             const PointLocator& locator) {
    std::vector<Field> seeds;
    seeds.push_back(prev_u);
    const Mesh& mesh = st.mesh();
    const double L = st.log_term;
    Vec2 centroid{};
    double area = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (prev_u.at_barycenter(t) - st.q().at_barycenter(t) * L > 0) {
            const double a = mesh.triangle_area(t);
            centroid += mesh.barycenter(t) * a;
            area += a;
        }
    }
    if (area == 0.0) return seeds;
    centroid = centroid / area;
    const Vec2 xstar = concentration_argmin(mesh, st.q(), st.k()).point;
    const Vec2 gap = xstar - centroid;
    if (gap.norm() < mesh.h) return seeds;
    // the optimal standoff distance shrinks slowly with eps, so small shifts
    // matter most; larger ones cover regime changes
    for (double s : {0.07, 0.15, 0.25, 0.4, 0.6}) {
        const Vec2 shift = gap * s;
        if (shift.norm() < 0.5 * mesh.h) continue;
        seeds.push_back(translate_field(prev_u, shift, locator));
    }
    // Green's-function candidates at and slightly beyond the previous core
    seeds.push_back(greens_seed(st, centroid));
    seeds.push_back(greens_seed(st, centroid + gap * 0.15));
    return seeds;
}

/// Warm-started continuation over a strictly decreasing epsilon list.
inline std::vector<Solution> continue_in_epsilon(const ProblemState& state_template,
                                                 const std::vector<double>& eps_list,
                                                 const SolverOptions& opt = {}) {
    if (eps_list.empty()) throw InvalidSpec("eps list is empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0 && eps_list[i] < 1))
            throw InvalidSpec("eps values must lie in (0, 1)");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw InvalidSpec("eps list must be strictly decreasing");
    }
    const PointLocator locator(state_template.mesh());
    std::vector<Solution> out;
    for (double eps : eps_list) {
        const ProblemState st = with_epsilon(state_template, eps);
        try {
            std::vector<Field> seeds;
            if (!out.empty()) seeds = continuation_seeds(st, out.back().u, locator);
            Solution sol = solve_ground_state_multi(st, seeds, opt);
            sol.under_resolved = detail::core_diameter_estimate(st, sol.u) / st.mesh().h < 8.0;
            out.push_back(std::move(sol));
        } catch (const Error& err) {
            std::ostringstream msg;
            msg << "eps=" << eps << ": " << err.what();
            throw SolveFailure(msg.str());
        }
    }
    return out;
}

}  // namespace helvort
