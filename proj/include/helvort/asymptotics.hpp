#pragma once

// Vortex-core extraction and the concentration diagnostics: core geometry,
// circulation, core energy, the predicted limits
//
//   c_eps / ln(1/eps)  ->  pi  min q^2 sqrt(det K_H)
//   kappa(w_eps)       ->  2 pi q(x*) sqrt(det K_H(x*))
//   centroid(A_eps)    ->  x*
//   ln(diam) / ln(eps) ->  1
//
// and the trend machinery that turns a descending-epsilon family of reports
// into per-claim verdicts.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "helvort/groundstate.hpp"
#include "helvort/problem.hpp"

namespace helvort {

struct CoreMetrics {
    double diam = 0.0;
    double dist_boundary = 0.0;
    Vec2 centroid;
    int components = 0;
};

struct CoreReport {
    double eps = 0.0;
    std::vector<int> core_triangles;
    double diam = 0.0;
    double dist_boundary = 0.0;
    Vec2 centroid;
    int components = 0;
    double circulation = 0.0;     // kappa = eps^-2 int (phi)_+^p
    double core_energy = 0.0;     // E_c
    double energy = 0.0;          // c_eps
    double energy_ratio = 0.0;    // c_eps / ln(1/eps)
    double diam_log_ratio = 0.0;  // ln(dist/diam) / ln(1/eps)
    double logdiam_over_logeps = 0.0;
    double diam_over_eps = 0.0;
    bool under_resolved = false;
};

struct PredictedLimits {
    Vec2 x_star;
    double energy_limit = 0.0;
    double circulation_limit = 0.0;
    bool interior = false;
    int multiplicity = 1;
};

/// Triangles whose barycentric phi = u - q ln(1/eps) is positive.
inline std::vector<int> vortex_core(const Solution& sol) {
    const Mesh& mesh = *sol.u.mesh;
    std::vector<int> core;
    const double L = std::log(1.0 / sol.eps);
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (sol.u.at_barycenter(t) - sol.q.at_barycenter(t) * L > 0) core.push_back(t);
    return core;
}

inline CoreMetrics core_metrics(const std::vector<int>& core, const Mesh& mesh) {
    if (core.empty()) throw EmptyCore("core triangle set is empty");

    std::vector<int> verts;
    for (int t : core)
        for (int i = 0; i < 3; ++i) verts.push_back(mesh.triangles[t][i]);
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());

    CoreMetrics out;
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i + 1; j < verts.size(); ++j)
            out.diam = std::max(out.diam,
                                (mesh.vertices[verts[i]] - mesh.vertices[verts[j]]).norm());

    std::vector<Vec2> pts;
    pts.reserve(verts.size());
    for (int v : verts) pts.push_back(mesh.vertices[v]);
    out.dist_boundary = distance_to_boundary(mesh, pts);

    double area = 0.0;
    for (int t : core) {
        const double a = mesh.triangle_area(t);
        out.centroid += mesh.barycenter(t) * a;
        area += a;
    }
    out.centroid = out.centroid / area;

    // connected components over shared edges
    std::map<std::pair<int, int>, int> edge_owner;
    std::vector<int> parent(core.size());
    for (std::size_t i = 0; i < core.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t ci = 0; ci < core.size(); ++ci) {
        const auto& tri = mesh.triangles[core[ci]];
        for (int e = 0; e < 3; ++e) {
            const int u = tri[e], v = tri[(e + 1) % 3];
            const auto key = std::make_pair(std::min(u, v), std::max(u, v));
            auto it = edge_owner.find(key);
            if (it == edge_owner.end()) {
                edge_owner[key] = static_cast<int>(ci);
            } else {
                parent[find(static_cast<int>(ci))] = find(it->second);
            }
        }
    }
    std::vector<int> roots;
    for (std::size_t i = 0; i < core.size(); ++i) roots.push_back(find(static_cast<int>(i)));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    out.components = static_cast<int>(roots.size());
    return out;
}

inline double circulation(const Solution& sol) {
    const double L = std::log(1.0 / sol.eps);
    return plus_part_integral(*sol.u.mesh, sol.u, sol.q, L, sol.p) / (sol.eps * sol.eps);
}

/// E_c = int over the core of (K_H grad phi | grad phi), phi = u - q ln(1/eps).
inline double core_energy(const Solution& sol) {
    const std::vector<int> core = vortex_core(sol);
    if (core.empty()) return 0.0;  // empty-core convention
    const Mesh& mesh = *sol.u.mesh;
    const double L = std::log(1.0 / sol.eps);
    double s = 0.0;
    for (int t : core) {
        const Vec2 grad = sol.u.gradient(t) - sol.q.gradient(t) * L;
        const double w = mesh.triangle_area(t) / 3.0;
        for (const Vec2& qp : midedge_points(mesh, t))
            s += w * k_matrix_raw(qp.x, qp.y, sol.k).quad(grad);
    }
    return s;
}

inline PredictedLimits predicted_limits(const Mesh& mesh, const Field& q, double k) {
    if (!(q.min() > 0)) throw NonpositiveWeight("q must be strictly positive");
    const ConcentrationMin cm = concentration_argmin(mesh, q, k);
    PredictedLimits out;
    out.x_star = cm.point;
    out.energy_limit = std::numbers::pi * cm.value;
    out.circulation_limit = 2.0 * std::numbers::pi * cm.value / cm.q_at;  // 2 pi q sqrt(det K)
    out.interior = cm.interior;
    out.multiplicity = cm.multiplicity;
    return out;
}

/// Full per-epsilon report for one converged solution.
inline CoreReport build_core_report(const Solution& sol) {
    CoreReport r;
    r.eps = sol.eps;
    r.core_triangles = vortex_core(sol);
    r.energy = sol.energy;
    const double L = std::log(1.0 / sol.eps);
    r.energy_ratio = sol.energy / L;
    r.circulation = circulation(sol);
    r.core_energy = core_energy(sol);
    r.under_resolved = sol.under_resolved;
    if (!r.core_triangles.empty()) {
        const CoreMetrics m = core_metrics(r.core_triangles, *sol.u.mesh);
        r.diam = m.diam;
        r.dist_boundary = m.dist_boundary;
        r.centroid = m.centroid;
        r.components = m.components;
        r.diam_over_eps = m.diam / sol.eps;
        if (m.diam > 0) {
            r.logdiam_over_logeps = std::log(m.diam) / std::log(sol.eps);
            if (m.dist_boundary > 0)
                r.diam_log_ratio = std::log(m.dist_boundary / m.diam) / L;
        }
    }
    return r;
}

enum class Trend { pass, trend_pass, stagnant, fail, not_applicable };

inline const char* trend_name(Trend t) {
    switch (t) {
        case Trend::pass: return "pass";
        case Trend::trend_pass: return "trend-pass";
        case Trend::stagnant: return "stagnant";
        case Trend::fail: return "fail";
        case Trend::not_applicable: return "not-applicable";
    }
    return "?";
}

struct TrendVerdict {
    std::string claim;
    Trend status = Trend::not_applicable;
    double measured = 0.0;   // final-epsilon value
    double target = 0.0;
    double tolerance = 0.0;  // loose acceptance tolerance
};

struct ConvergenceTable {
    std::vector<CoreReport> rows;  // descending eps
    PredictedLimits pred;
    std::vector<TrendVerdict> verdicts;
};

namespace detail {

/// Richardson-style trend classification on the distances-to-target of the
/// last (up to) three rows.
inline Trend classify_trend(const std::vector<double>& dist_to_target, double loose,
                            double tight) {
    const std::size_t n = dist_to_target.size();
    const double last = dist_to_target.back();
    if (last <= tight) return Trend::pass;
    bool stagnant = true, improving = true;
    const std::size_t first = n > 3 ? n - 3 : 0;
    for (std::size_t i = first + 1; i < n; ++i) {
        if (std::abs(dist_to_target[i] - dist_to_target[i - 1]) >
            1e-12 * std::max(1.0, std::abs(dist_to_target[i])))
            stagnant = false;
        if (dist_to_target[i] > dist_to_target[i - 1] * (1.0 + 1e-9)) improving = false;
    }
    if (last <= loose && improving) return Trend::trend_pass;
    if (stagnant) return Trend::stagnant;
    return Trend::fail;
}

}  // namespace detail

inline ConvergenceTable convergence_report(const std::vector<CoreReport>& reports,
                                           const PredictedLimits& pred) {
    if (reports.size() < 2) throw InsufficientData("need at least two epsilon values");
    ConvergenceTable table;
    table.rows = reports;
    std::sort(table.rows.begin(), table.rows.end(),
              [](const CoreReport& a, const CoreReport& b) { return a.eps > b.eps; });
    table.pred = pred;

    auto add = [&table](const std::string& claim, const std::vector<double>& dist, double loose,
                        double tight, double measured, double target) {
        TrendVerdict v;
        v.claim = claim;
        v.status = detail::classify_trend(dist, loose, tight);
        v.measured = measured;
        v.target = target;
        v.tolerance = loose;
        table.verdicts.push_back(v);
    };

    std::vector<double> d_energy, d_circ, d_centroid, d_logdiam;
    for (const auto& r : table.rows) {
        d_energy.push_back(std::abs(r.energy_ratio - pred.energy_limit));
        d_circ.push_back(std::abs(r.circulation - pred.circulation_limit));
        d_centroid.push_back((r.centroid - pred.x_star).norm());
        d_logdiam.push_back(std::abs(r.logdiam_over_logeps - 1.0));
    }
    const CoreReport& last = table.rows.back();
    add("energy_ratio -> pi min q^2 sqrt(det K)", d_energy, 0.25 * pred.energy_limit,
        0.025 * pred.energy_limit, last.energy_ratio, pred.energy_limit);
    add("circulation -> 2 pi q sqrt(det K)(x*)", d_circ, 0.15 * pred.circulation_limit,
        0.015 * pred.circulation_limit, last.circulation, pred.circulation_limit);
    add("core centroid -> x*", d_centroid, 0.2, 0.02, (last.centroid - pred.x_star).norm(), 0.0);
    add("ln(diam)/ln(eps) -> 1", d_logdiam, 0.3, 0.03, last.logdiam_over_logeps, 1.0);

    // connectivity is a hard per-row property, not a trend
    {
        TrendVerdict v;
        v.claim = "core connected at every eps";
        v.measured = 0.0;
        for (const auto& r : table.rows) v.measured = std::max(v.measured, double(r.components));
        v.target = 1.0;
        v.tolerance = 0.0;
        v.status = Trend::pass;
        for (const auto& r : table.rows)
            if (r.components != 1) v.status = Trend::fail;
        table.verdicts.push_back(v);
    }

    // diam ~ eps window: only meaningful for interior concentration
    {
        TrendVerdict v;
        v.claim = "diam/eps bounded window (interior case)";
        v.target = 1.0;
        v.tolerance = 2.5;
        if (!pred.interior) {
            v.status = Trend::not_applicable;
        } else {
            const std::size_t first = table.rows.size() > 3 ? table.rows.size() - 3 : 0;
            double lo = 1e300, hi = 0.0;
            for (std::size_t i = first; i < table.rows.size(); ++i) {
                lo = std::min(lo, table.rows[i].diam_over_eps);
                hi = std::max(hi, table.rows[i].diam_over_eps);
            }
            v.measured = last.diam_over_eps;
            v.status = (lo > 0 && hi / lo <= 2.5) ? Trend::trend_pass : Trend::fail;
        }
        table.verdicts.push_back(v);
    }
    return table;
}

inline std::string convergence_csv(const ConvergenceTable& table, const std::string& comment = "") {
    std::ostringstream out;
    auto g12 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "eps,c_over_log,kappa,diam,diam_over_eps,logdiam_over_logeps,"
           "centroid_x,centroid_y,dist_to_xstar,components,core_energy\n";
    for (const auto& r : table.rows) {
        out << g12(r.eps) << ',' << g12(r.energy_ratio) << ',' << g12(r.circulation) << ','
            << g12(r.diam) << ',' << g12(r.diam_over_eps) << ',' << g12(r.logdiam_over_logeps)
            << ',' << g12(r.centroid.x) << ',' << g12(r.centroid.y) << ','
            << g12((r.centroid - table.pred.x_star).norm()) << ',' << r.components << ','
            << g12(r.core_energy) << "\n";
    }
    return out.str();
}

}  // namespace helvort
