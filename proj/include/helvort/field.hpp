#pragma once

// Nodal scalar fields on a mesh, plus the plain-text field/mesh file formats.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "helvort/errors.hpp"
#include "helvort/mesh.hpp"

namespace helvort {

struct Field {
    const Mesh* mesh = nullptr;
    std::vector<double> values;

    Field() = default;
    Field(const Mesh& m, double fill = 0.0)
        : mesh(&m), values(static_cast<std::size_t>(m.num_vertices()), fill) {}

    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
    int size() const { return static_cast<int>(values.size()); }

    void zero_boundary() {
        for (int i = 0; i < size(); ++i)
            if (mesh->is_boundary_vertex(i)) values[static_cast<std::size_t>(i)] = 0.0;
    }

    double min() const {
        double m = values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }
    double max() const {
        double m = values[0];
        for (double v : values) m = std::max(m, v);
        return m;
    }

    /// P1 interpolant at the three mid-edge quadrature points of triangle t.
    std::array<double, 3> at_midedges(int t) const {
        const auto& tri = mesh->triangles[t];
        const double v0 = values[tri[0]], v1 = values[tri[1]], v2 = values[tri[2]];
        return {0.5 * (v0 + v1), 0.5 * (v1 + v2), 0.5 * (v2 + v0)};
    }

    double at_barycenter(int t) const {
        const auto& tri = mesh->triangles[t];
        return (values[tri[0]] + values[tri[1]] + values[tri[2]]) / 3.0;
    }

    /// Piecewise-constant P1 gradient on triangle t.
    Vec2 gradient(int t) const {
        const auto& tri = mesh->triangles[t];
        const auto& g = mesh->basis_gradients(t);
        Vec2 out;
        for (int i = 0; i < 3; ++i) out += g[i] * values[tri[i]];
        return out;
    }
};

inline void require_same_mesh(const Field& a, const Field& b) {
    if (a.mesh != b.mesh || a.size() != b.size())
        throw MeshMismatch("fields live on different meshes");
}

namespace io {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void skip_comments(std::istream& in) {
    while (in.peek() == '#') {
        std::string line;
        std::getline(in, line);
    }
}

inline void write_field(std::ostream& out, const Field& f, const std::string& comment = "") {
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "field " << f.size() << "\n";
    for (double v : f.values) out << fmt_g17(v) << "\n";
}

inline Field read_field(std::istream& in, const Mesh& mesh) {
    skip_comments(in);
    std::string tag;
    int n = 0;
    in >> tag >> n;
    if (tag != "field" || !in) throw IoError("bad field header");
    if (n != mesh.num_vertices()) throw IoError("field size does not match mesh");
    Field f(mesh);
    for (int i = 0; i < n; ++i) in >> f[i];
    if (!in) throw IoError("truncated field file");
    return f;
}

inline void write_mesh(std::ostream& out, const Mesh& m, const std::string& comment = "") {
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "vertices " << m.num_vertices() << " triangles " << m.num_triangles()
        << " boundary " << m.boundary_edges.size() << "\n";
    for (const auto& v : m.vertices) out << fmt_g17(v.x) << " " << fmt_g17(v.y) << "\n";
    for (const auto& t : m.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
    for (const auto& e : m.boundary_edges)
        out << e.a << " " << e.b << " " << fmt_g17(e.normal.x) << " " << fmt_g17(e.normal.y) << "\n";
}

inline Mesh read_mesh(std::istream& in) {
    skip_comments(in);
    std::string kv, kt, kb;
    int nv = 0, nt = 0, nb = 0;
    in >> kv >> nv >> kt >> nt >> kb >> nb;
    if (kv != "vertices" || kt != "triangles" || kb != "boundary" || !in)
        throw IoError("bad mesh header");
    Mesh m;
    m.vertices.resize(static_cast<std::size_t>(nv));
    for (auto& v : m.vertices) in >> v.x >> v.y;
    m.triangles.resize(static_cast<std::size_t>(nt));
    for (auto& t : m.triangles) in >> t[0] >> t[1] >> t[2];
    m.boundary_edges.resize(static_cast<std::size_t>(nb));
    for (auto& e : m.boundary_edges) in >> e.a >> e.b >> e.normal.x >> e.normal.y;
    if (!in) throw IoError("truncated mesh file");
    m.finalize();
    m.validate();
    return m;
}

inline void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

inline std::string load_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace io
}  // namespace helvort
