#pragma once

// Configuration-driven batch driver: build the domain, solve the harmonic
// weight, run the epsilon continuation, and emit every artifact with the
// config hash stamped on it.
//
// Artifacts per run directory:
//   mesh.txt            mesh in the plain-text format
//   q.field             weight field
//   u_eps<e>.field      ground state per epsilon        (export_fields)
//   solutions.jsonl     one JSON record per epsilon, after a hash line
//   convergence.csv     per-epsilon diagnostics table
//   predicted.json      predicted limits used for the verdicts
//   verdict.json        per-claim status
//   boundary_vn.csv     derived boundary data            (non-constant q)
//   lift_eps<e>.vtk     3D lift                          (export_vtk)

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "helvort/asymptotics.hpp"
#include "helvort/groundstate.hpp"
#include "helvort/harmonic.hpp"
#include "helvort/reconstruct.hpp"

namespace helvort {

struct QMode {
    enum class Kind { constant, harmonic_trace, trace_file };
    Kind kind = Kind::constant;
    double m = 1.0;       // constant value / harmonic constant profile level
    std::string profile;  // "constant" or "2+cos"
    std::string path;     // per-boundary-vertex value file
};

struct RunConfig {
    DomainSpec domain;
    double k = 1.0;
    double p = 2.0;
    double h = 0.05;
    std::vector<double> eps_list;
    QMode q_mode;
    std::string output_dir;
    std::optional<Vec2> seed_center;
    bool export_vtk = false;
    bool export_fields = true;
    SolverOptions tolerances;
};

inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace cfg {

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field)) throw ConfigParse("missing field: " + field);
    return j.at(field);
}

inline Vec2 parse_point(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigParse(field + " must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline DomainSpec parse_domain(const nlohmann::json& j, double h) {
    DomainSpec spec;
    spec.target_h = h;
    const std::string shape = require(j, "shape").get<std::string>();
    if (shape == "disk") {
        DiskSpec d;
        d.center = parse_point(require(j, "center"), "domain.center");
        d.radius = require(j, "radius").get<double>();
        spec.shape = d;
    } else if (shape == "ellipse") {
        EllipseSpec e;
        e.center = parse_point(require(j, "center"), "domain.center");
        e.semi_axes = parse_point(require(j, "semi_axes"), "domain.semi_axes");
        spec.shape = e;
    } else if (shape == "polygon") {
        PolygonSpec p;
        for (const auto& v : require(j, "vertices"))
            p.vertices.push_back(parse_point(v, "domain.vertices[]"));
        spec.shape = p;
    } else {
        throw ConfigParse("domain.shape must be disk, ellipse or polygon");
    }
    return spec;
}

inline QMode parse_qmode(const nlohmann::json& j) {
    QMode q;
    const std::string mode = require(j, "mode").get<std::string>();
    if (mode == "constant") {
        q.kind = QMode::Kind::constant;
        q.m = require(j, "m").get<double>();
        if (!(q.m > 0)) throw ConfigParse("q_mode.m must be positive");
    } else if (mode == "harmonic_trace") {
        q.kind = QMode::Kind::harmonic_trace;
        q.profile = require(j, "profile").get<std::string>();
        q.m = j.value("m", 1.0);
        if (q.profile != "constant" && q.profile != "2+cos")
            throw ConfigParse("q_mode.profile must be \"constant\" or \"2+cos\"");
    } else if (mode == "trace_file") {
        q.kind = QMode::Kind::trace_file;
        q.path = require(j, "path").get<std::string>();
    } else {
        throw ConfigParse("q_mode.mode must be constant, harmonic_trace or trace_file");
    }
    return q;
}

}  // namespace cfg

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigParse(std::string("invalid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        cfg.h = cfg::require(j, "h").get<double>();
        cfg.domain = cfg::parse_domain(cfg::require(j, "domain"), cfg.h);
        cfg.k = cfg::require(j, "k").get<double>();
        cfg.p = cfg::require(j, "p").get<double>();
        for (const auto& e : cfg::require(j, "eps_list")) cfg.eps_list.push_back(e.get<double>());
        cfg.q_mode = cfg::parse_qmode(cfg::require(j, "q_mode"));
        cfg.output_dir = cfg::require(j, "output_dir").get<std::string>();
        if (j.contains("seed_center"))
            cfg.seed_center = cfg::parse_point(j.at("seed_center"), "seed_center");
        cfg.export_vtk = j.value("export_vtk", false);
        cfg.export_fields = j.value("export_fields", true);
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            cfg.tolerances.grad_tol = t.value("grad_tol", cfg.tolerances.grad_tol);
            cfg.tolerances.newton_tol = t.value("newton_tol", cfg.tolerances.newton_tol);
            cfg.tolerances.max_grad_iters = t.value("max_grad_iters", cfg.tolerances.max_grad_iters);
            cfg.tolerances.max_newton_iters =
                t.value("max_newton_iters", cfg.tolerances.max_newton_iters);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParse(std::string("bad field type: ") + e.what());
    }
    if (cfg.eps_list.empty()) throw ConfigParse("eps_list must not be empty");
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
        if (!(cfg.eps_list[i] > 0 && cfg.eps_list[i] < 1))
            throw ConfigParse("eps_list values must lie in (0, 1)");
        if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1]))
            throw ConfigParse("eps_list must be strictly decreasing");
    }
    if (!(cfg.k > 0)) throw ConfigParse("k must be positive");
    if (!(cfg.p > 1)) throw ConfigParse("p must exceed 1");
    if (!(cfg.h > 0)) throw ConfigParse("h must be positive");
    return cfg;
}

/// Output root override for relative run directories.
inline std::filesystem::path resolve_output_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("HELVORT_OUTPUT_ROOT")) p = std::filesystem::path(root) / p;
    }
    return p;
}

inline Field build_q(const Mesh& mesh, double k, const QMode& qm) {
    switch (qm.kind) {
        case QMode::Kind::constant:
            return Field(mesh, qm.m);
        case QMode::Kind::harmonic_trace:
            if (qm.profile == "constant") return Field(mesh, qm.m);
            return solve_harmonic_q(mesh, k, [&mesh](Vec2 p) {
                return 2.0 + std::cos(boundary_angle(mesh, p));
            });
        case QMode::Kind::trace_file: {
            std::ifstream in(qm.path);
            if (!in) throw ConfigParse("cannot read trace file: " + qm.path);
            io::skip_comments(in);
            std::string tag;
            std::size_t n = 0;
            in >> tag >> n;
            if (tag != "field" || n != mesh.boundary_loop().size())
                throw ConfigParse("trace file must hold one value per boundary vertex");
            std::vector<double> trace(n);
            for (auto& v : trace) in >> v;
            if (!in) throw ConfigParse("truncated trace file: " + qm.path);
            return solve_harmonic_q(mesh, k, trace);
        }
    }
    throw ConfigParse("unreachable q_mode");
}

inline std::string eps_tag(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eps);
    return buf;
}

struct RunResult {
    int exit_code = 0;
    std::filesystem::path run_dir;
    std::string config_hash;
    std::vector<CoreReport> reports;
    PredictedLimits pred;
    std::vector<TrendVerdict> verdicts;
};

namespace detail {

inline nlohmann::json verdicts_json(const std::string& hash,
                                    const std::vector<TrendVerdict>& verdicts) {
    nlohmann::json claims = nlohmann::json::array();
    bool ok = true;
    for (const auto& v : verdicts) {
        claims.push_back({{"claim", v.claim},
                          {"status", trend_name(v.status)},
                          {"measured", v.measured},
                          {"target", v.target},
                          {"tolerance", v.tolerance}});
        if (v.status == Trend::fail || v.status == Trend::stagnant) ok = false;
    }
    return {{"config_hash", hash}, {"claims", claims}, {"all_pass", ok}};
}

inline void write_verdicts(const std::filesystem::path& dir, const std::string& hash,
                           const std::vector<TrendVerdict>& verdicts, std::ostream& log) {
    const nlohmann::json vj = verdicts_json(hash, verdicts);
    io::save_text((dir / "verdict.json").string(), vj.dump(2) + "\n");
    for (const auto& v : verdicts)
        log << "  [" << trend_name(v.status) << "] " << v.claim << " (measured " << v.measured
            << ", target " << v.target << ")\n";
}

}  // namespace detail

/// cli-facing verdict mapping: stagnant counts as fail, empty tables yield
/// not-applicable for every claim.
inline std::vector<TrendVerdict> verdict(const std::vector<CoreReport>& reports,
                                         const PredictedLimits& pred) {
    if (reports.size() < 2) {
        const char* claims[] = {"energy_ratio -> pi min q^2 sqrt(det K)",
                                "circulation -> 2 pi q sqrt(det K)(x*)",
                                "core centroid -> x*",
                                "ln(diam)/ln(eps) -> 1",
                                "core connected at every eps",
                                "diam/eps bounded window (interior case)"};
        std::vector<TrendVerdict> out;
        for (const char* c : claims) {
            TrendVerdict v;
            v.claim = c;
            v.status = Trend::not_applicable;
            out.push_back(v);
        }
        return out;
    }
    return convergence_report(reports, pred).verdicts;
}

inline RunResult run(const std::string& config_path, std::ostream& log) {
    const std::string text = io::load_text(config_path);
    const RunConfig cfg = parse_config(text);  // ConfigParse propagates to the caller
    RunResult result;
    result.config_hash = fnv1a_hex(text);
    result.run_dir = resolve_output_dir(cfg.output_dir);
    std::filesystem::create_directories(result.run_dir);
    const std::string stamp = "config " + result.config_hash;

    const Mesh mesh = build_domain(cfg.domain);
    {
        std::ostringstream out;
        io::write_mesh(out, mesh, stamp);
        io::save_text((result.run_dir / "mesh.txt").string(), out.str());
    }
    log << "mesh: " << mesh.num_vertices() << " vertices, " << mesh.num_triangles()
        << " triangles, h = " << mesh.h << "\n";

    const Field q = build_q(mesh, cfg.k, cfg.q_mode);
    {
        std::ostringstream out;
        io::write_field(out, q, stamp);
        io::save_text((result.run_dir / "q.field").string(), out.str());
    }
    if (cfg.q_mode.kind != QMode::Kind::constant) {
        const auto vn = derived_boundary_vn(mesh, q);
        std::ostringstream out;
        out << "# " << stamp << "\nedge,x0,y0,x1,y1,vn\n";
        auto g12 = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.12g", v);
            return std::string(buf);
        };
        for (std::size_t e = 0; e < vn.size(); ++e) {
            const auto& be = mesh.boundary_edges[e];
            out << e << ',' << g12(mesh.vertices[be.a].x) << ',' << g12(mesh.vertices[be.a].y)
                << ',' << g12(mesh.vertices[be.b].x) << ',' << g12(mesh.vertices[be.b].y) << ','
                << g12(vn[e]) << "\n";
        }
        io::save_text((result.run_dir / "boundary_vn.csv").string(), out.str());
    }

    result.pred = predicted_limits(mesh, q, cfg.k);
    {
        nlohmann::json pj = {{"config_hash", result.config_hash},
                             {"x_star", {result.pred.x_star.x, result.pred.x_star.y}},
                             {"energy_limit", result.pred.energy_limit},
                             {"circulation_limit", result.pred.circulation_limit},
                             {"interior", result.pred.interior},
                             {"multiplicity", result.pred.multiplicity}};
        io::save_text((result.run_dir / "predicted.json").string(), pj.dump(2) + "\n");
    }

    auto ops = make_operator_cache(mesh, cfg.k, q);
    const ProblemState st = make_problem_state(ops, cfg.p, cfg.eps_list.front());

    std::vector<Solution> sols;
    std::ostringstream jsonl;
    jsonl << nlohmann::json({{"config_hash", result.config_hash}}).dump() << "\n";
    double current_eps = cfg.eps_list.front();
    const PointLocator locator(mesh);
    try {
        std::optional<Field> prev;
        for (double eps : cfg.eps_list) {
            current_eps = eps;
            const ProblemState se = with_epsilon(st, eps);
            std::vector<Field> seeds;
            if (prev) seeds = continuation_seeds(se, *prev, locator);
            else if (cfg.seed_center) seeds.push_back(initial_guess(se, *cfg.seed_center, 1.0));
            Solution sol = solve_ground_state_multi(se, seeds, cfg.tolerances);
            sol.under_resolved =
                helvort::detail::core_diameter_estimate(se, sol.u) / mesh.h < 8.0;
            prev = sol.u;
            jsonl << nlohmann::json({{"eps", sol.eps},
                                     {"k", sol.k},
                                     {"p", sol.p},
                                     {"c", sol.energy},
                                     {"residual_norm", sol.residual_norm},
                                     {"nehari_defect", sol.nehari_defect},
                                     {"newton_iters", sol.newton_iters},
                                     {"gradient_iters", sol.gradient_iters},
                                     {"under_resolved", sol.under_resolved}})
                         .dump()
                  << "\n";
            log << "eps " << sol.eps << ": c = " << sol.energy
                << ", residual = " << sol.residual_norm
                << (sol.under_resolved ? " [UnderResolved]" : "") << "\n";
            if (cfg.export_fields) {
                std::ostringstream out;
                io::write_field(out, sol.u, stamp + " u eps=" + eps_tag(eps));
                io::save_text((result.run_dir / ("u_eps" + eps_tag(eps) + ".field")).string(),
                              out.str());
            }
            sols.push_back(std::move(sol));
        }
    } catch (const Error& e) {
        io::save_text((result.run_dir / "solutions.jsonl").string(), jsonl.str());
        log << "solver failure at eps=" << current_eps << ": " << e.what() << "\n";
        result.exit_code = 3;
        return result;
    }
    io::save_text((result.run_dir / "solutions.jsonl").string(), jsonl.str());

    for (const auto& sol : sols) result.reports.push_back(build_core_report(sol));
    if (result.reports.size() >= 2) {
        const ConvergenceTable table = convergence_report(result.reports, result.pred);
        io::save_text((result.run_dir / "convergence.csv").string(),
                      convergence_csv(table, stamp));
        result.verdicts = table.verdicts;
    } else {
        result.verdicts = verdict(result.reports, result.pred);
        ConvergenceTable table;
        table.rows = result.reports;
        table.pred = result.pred;
        io::save_text((result.run_dir / "convergence.csv").string(),
                      convergence_csv(table, stamp));
    }
    detail::write_verdicts(result.run_dir, result.config_hash, result.verdicts, log);

    if (cfg.export_vtk) {
        for (const auto& sol : sols) {
            const auto samples = helical_lift(sol, default_rho_samples());
            io::save_text(
                (result.run_dir / ("lift_eps" + eps_tag(sol.eps) + ".vtk")).string(),
                vtk_lift(samples, "helvort lift eps=" + eps_tag(sol.eps) + " " + stamp));
        }
    }

    for (const auto& v : result.verdicts)
        if (v.status == Trend::fail || v.status == Trend::stagnant) result.exit_code = 4;
    return result;
}

/// Re-emit verdicts from the artifacts of a finished run.
inline RunResult report(const std::string& run_dir, std::ostream& log) {
    RunResult result;
    result.run_dir = run_dir;

    const std::string pj_text = io::load_text((result.run_dir / "predicted.json").string());
    const nlohmann::json pj = nlohmann::json::parse(pj_text);
    result.config_hash = pj.value("config_hash", "");
    result.pred.x_star = {pj.at("x_star")[0].get<double>(), pj.at("x_star")[1].get<double>()};
    result.pred.energy_limit = pj.at("energy_limit").get<double>();
    result.pred.circulation_limit = pj.at("circulation_limit").get<double>();
    result.pred.interior = pj.at("interior").get<bool>();

    std::istringstream csv(io::load_text((result.run_dir / "convergence.csv").string()));
    std::string line;
    bool header_seen = false;
    while (std::getline(csv, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != 11) throw IoError("bad convergence.csv row: " + line);
        CoreReport r;
        r.eps = vals[0];
        r.energy_ratio = vals[1];
        r.circulation = vals[2];
        r.diam = vals[3];
        r.diam_over_eps = vals[4];
        r.logdiam_over_logeps = vals[5];
        r.centroid = {vals[6], vals[7]};
        r.components = static_cast<int>(vals[9]);
        r.core_energy = vals[10];
        result.reports.push_back(r);
    }

    result.verdicts = verdict(result.reports, result.pred);
    detail::write_verdicts(result.run_dir, result.config_hash, result.verdicts, log);
    for (const auto& v : result.verdicts)
        if (v.status == Trend::fail || v.status == Trend::stagnant) result.exit_code = 4;
    return result;
}

/// Rebuild solutions from a run directory and export the 3D lifts.
inline int export_vtk(const std::string& run_dir, std::ostream& log) {
    const std::filesystem::path dir(run_dir);
    std::istringstream mesh_in(io::load_text((dir / "mesh.txt").string()));
    const Mesh mesh = io::read_mesh(mesh_in);
    std::istringstream q_in(io::load_text((dir / "q.field").string()));
    const Field q = io::read_field(q_in, mesh);

    std::istringstream jsonl(io::load_text((dir / "solutions.jsonl").string()));
    std::string line;
    std::string hash = "";
    int count = 0;
    while (std::getline(jsonl, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        if (j.contains("config_hash")) {
            hash = j.at("config_hash").get<std::string>();
            continue;
        }
        Solution sol;
        sol.eps = j.at("eps").get<double>();
        sol.k = j.at("k").get<double>();
        sol.p = j.at("p").get<double>();
        sol.q = q;
        std::istringstream u_in(
            io::load_text((dir / ("u_eps" + eps_tag(sol.eps) + ".field")).string()));
        sol.u = io::read_field(u_in, mesh);
        sol.phi = Field(mesh);
        sol.w = Field(mesh);
        const double L = std::log(1.0 / sol.eps);
        for (int i = 0; i < sol.u.size(); ++i) {
            sol.phi[i] = sol.u[i] - q[i] * L;
            sol.w[i] = pos_pow(sol.phi[i], sol.p) / (sol.eps * sol.eps);
        }
        const auto samples = helical_lift(sol, default_rho_samples());
        io::save_text((dir / ("lift_eps" + eps_tag(sol.eps) + ".vtk")).string(),
                      vtk_lift(samples, "helvort lift eps=" + eps_tag(sol.eps) + " config " + hash));
        log << "wrote lift_eps" << eps_tag(sol.eps) << ".vtk (" << samples.size()
            << " samples)\n";
        ++count;
    }
    if (count == 0) throw IoError("no solutions found in " + run_dir);
    return 0;
}

}  // namespace helvort
