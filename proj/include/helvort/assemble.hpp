#pragma once

// P1 finite-element assembly of the divergence-form bilinear form
//   a(u, v) = int_Omega w(x) (K_H(x) grad u | grad v) dx
// with an optional strictly positive scalar weight w.  The varying
// coefficient is integrated with the 3-point mid-edge rule (exact for
// quadratics, keeps the form symmetric).

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "helvort/field.hpp"
#include "helvort/kmatrix.hpp"
#include "helvort/mesh.hpp"
#include "helvort/sparse.hpp"

namespace helvort {

// shape-function values at the mid-edge quadrature points
inline constexpr double kMidEdgeShape[3][3] = {
    {0.5, 0.5, 0.0},
    {0.0, 0.5, 0.5},
    {0.5, 0.0, 0.5},
};

inline std::array<Vec2, 3> midedge_points(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const Vec2 p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
    return {Vec2{0.5 * (p0.x + p1.x), 0.5 * (p0.y + p1.y)},
            Vec2{0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)},
            Vec2{0.5 * (p2.x + p0.x), 0.5 * (p2.y + p0.y)}};
}

struct SparseOperator {
    Csr matrix;
    std::vector<std::uint8_t> dirichlet;  // per-vertex mask
    double k = 1.0;

    int dimension() const { return matrix.n; }
};

inline SparseOperator assemble(const Mesh& mesh, double k,
                               const std::optional<Field>& weight = std::nullopt,
                               bool dirichlet = true) {
    if (!(k > 0)) throw NonpositivePitch("pitch parameter k must be positive");
    const int nv = mesh.num_vertices();
    const int nt = mesh.num_triangles();
    std::vector<std::array<int, 2>> idx;
    std::vector<double> val;
    idx.reserve(static_cast<std::size_t>(nt) * 9);
    val.reserve(static_cast<std::size_t>(nt) * 9);

    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& g = mesh.basis_gradients(t);
        const auto qp = midedge_points(mesh, t);
        const double wq = mesh.triangle_area(t) / 3.0;

        double local[3][3] = {};
        for (int q = 0; q < 3; ++q) {
            const Mat2Sym K = k_matrix_raw(qp[q].x, qp[q].y, k);
            double wgt = 1.0;
            if (weight) {
                const auto wvals = weight->at_midedges(t);
                wgt = wvals[q];
                if (!(wgt > 0)) throw NonpositiveWeight("weight not positive at a quadrature point");
            }
            const std::array<Vec2, 3> Kg = {K.apply(g[0]), K.apply(g[1]), K.apply(g[2])};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    local[i][j] += wq * wgt * Kg[j].dot(g[i]);
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                idx.push_back({tri[i], tri[j]});
                val.push_back(local[i][j]);
            }
    }

    SparseOperator op;
    op.k = k;
    op.dirichlet.assign(static_cast<std::size_t>(nv), 0);
    if (dirichlet)
        for (int i = 0; i < nv; ++i) op.dirichlet[i] = mesh.is_boundary_vertex(i) ? 1 : 0;

    op.matrix = Csr::from_triplets(nv, idx, val);
    if (dirichlet) {
        // zero constrained rows/columns, unit diagonal: stays symmetric
        for (int r = 0; r < nv; ++r) {
            for (int j = op.matrix.row_ptr[r]; j < op.matrix.row_ptr[r + 1]; ++j) {
                const int c = op.matrix.col[j];
                if (op.dirichlet[r] || op.dirichlet[c])
                    op.matrix.val[static_cast<std::size_t>(j)] = (r == c) ? 1.0 : 0.0;
            }
        }
    }
    return op;
}

/// a(u, v) evaluated by direct per-triangle quadrature (no matrix).
inline double energy_inner(const Mesh& mesh, double k, const std::optional<Field>& weight,
                           const Field& u, const Field& v) {
    require_same_mesh(u, v);
    if (u.mesh != &mesh) throw MeshMismatch("fields do not live on the given mesh");
    double s = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 gu = u.gradient(t), gv = v.gradient(t);
        const auto qp = midedge_points(mesh, t);
        const double wq = mesh.triangle_area(t) / 3.0;
        for (int q = 0; q < 3; ++q) {
            const Mat2Sym K = k_matrix_raw(qp[q].x, qp[q].y, k);
            double wgt = 1.0;
            if (weight) wgt = weight->at_midedges(t)[q];
            s += wq * wgt * K.apply(gu).dot(gv);
        }
    }
    return s;
}

/// Dirichlet-aware solve: rows with op.dirichlet keep rhs values exactly.
inline Field solve_linear(const SparseOperator& op, const Field& rhs) {
    SpdSolver solver(op.matrix);
    Field x(*rhs.mesh);
    x.values = solver.solve(rhs.values);
    for (int i = 0; i < x.size(); ++i)
        if (op.dirichlet[i]) x[i] = rhs[i];  // unit diagonal rows already give this
    return x;
}

inline std::vector<double> lumped_mass(const Mesh& mesh) {
    std::vector<double> m(static_cast<std::size_t>(mesh.num_vertices()), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double a3 = mesh.triangle_area(t) / 3.0;
        for (int i = 0; i < 3; ++i) m[static_cast<std::size_t>(mesh.triangles[t][i])] += a3;
    }
    return m;
}

/// Map from each boundary edge to its (unique) adjacent triangle.
inline std::vector<int> boundary_edge_triangles(const Mesh& mesh) {
    std::map<std::pair<int, int>, int> owner;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            const int u = tri[e], v = tri[(e + 1) % 3];
            owner[{std::min(u, v), std::max(u, v)}] = t;
        }
    }
    std::vector<int> adj;
    adj.reserve(mesh.boundary_edges.size());
    for (const auto& e : mesh.boundary_edges) {
        auto it = owner.find({std::min(e.a, e.b), std::max(e.a, e.b)});
        if (it == owner.end()) throw InvalidSpec("boundary edge without adjacent triangle");
        adj.push_back(it->second);
    }
    return adj;
}

/// grad_perp(phi) . nu per boundary edge, from the adjacent triangle's
/// constant gradient.
inline std::vector<double> boundary_flux(const Mesh& mesh, const Field& phi) {
    if (phi.mesh != &mesh) throw MeshMismatch("field does not live on the given mesh");
    const auto adj = boundary_edge_triangles(mesh);
    std::vector<double> flux;
    flux.reserve(mesh.boundary_edges.size());
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        const Vec2 g = phi.gradient(adj[e]);
        flux.push_back(grad_perp(g).dot(mesh.boundary_edges[e].normal));
    }
    return flux;
}

}  // namespace helvort
