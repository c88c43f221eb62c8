#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nfp/errors.hpp"
#include "nfp/rng.hpp"

namespace nfp {

using Vec3 = std::array<double, 3>;

inline Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot3(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

// Triangle mesh with inside/outside queries by ray parity. Inputs come from
// ASCII OFF or OBJ files (triangles only); occupancy labelling requires a
// watertight surface, checked before use.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    double triangle_area(std::size_t f) const {
        const auto& t = faces[f];
        const Vec3 e1 = vertices[static_cast<std::size_t>(t[1])] -
                        vertices[static_cast<std::size_t>(t[0])];
        const Vec3 e2 = vertices[static_cast<std::size_t>(t[2])] -
                        vertices[static_cast<std::size_t>(t[0])];
        return 0.5 * norm3(cross3(e1, e2));
    }
};

namespace detail {

inline void check_face_indices(const TriMesh& m) {
    const int nv = static_cast<int>(m.vertices.size());
    for (const auto& f : m.faces)
        for (int k = 0; k < 3; ++k)
            if (f[k] < 0 || f[k] >= nv)
                throw ConfigError("mesh: face references vertex " + std::to_string(f[k]) +
                                  " outside [0, " + std::to_string(nv) + ")");
}

}  // namespace detail

// ASCII OFF: optional "OFF" magic line, then "nv nf ne", nv vertex rows,
// nf face rows "3 i j k". '#' starts a comment.
inline TriMesh read_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("off: cannot open '" + path + "'");
    auto next_token_line = [&](std::string& line) -> bool {
        while (std::getline(in, line)) {
            const auto h = line.find('#');
            if (h != std::string::npos) line.erase(h);
            std::istringstream probe(line);
            std::string tok;
            if (probe >> tok) return true;
        }
        return false;
    };
    std::string line;
    if (!next_token_line(line)) throw ConfigError("off: empty file '" + path + "'");
    {
        std::istringstream first(line);
        std::string tok;
        first >> tok;
        if (tok == "OFF") {
            if (!next_token_line(line)) throw ConfigError("off: missing counts in '" + path + "'");
        }
    }
    std::int64_t nv = 0, nf = 0, ne = 0;
    {
        std::istringstream counts(line);
        if (!(counts >> nv >> nf)) throw ConfigError("off: malformed counts in '" + path + "'");
        counts >> ne;  // edge count is optional and ignored
    }
    if (nv < 3 || nf < 1) throw ConfigError("off: need at least 3 vertices and 1 face");
    TriMesh m;
    m.vertices.reserve(static_cast<std::size_t>(nv));
    for (std::int64_t i = 0; i < nv; ++i) {
        if (!next_token_line(line)) throw ConfigError("off: truncated vertex list");
        std::istringstream row(line);
        Vec3 v{};
        if (!(row >> v[0] >> v[1] >> v[2])) throw ConfigError("off: malformed vertex row");
        m.vertices.push_back(v);
    }
    for (std::int64_t i = 0; i < nf; ++i) {
        if (!next_token_line(line)) throw ConfigError("off: truncated face list");
        std::istringstream row(line);
        int k = 0;
        if (!(row >> k)) throw ConfigError("off: malformed face row");
        if (k != 3) throw ConfigError("off: only triangles supported (face with " +
                                      std::to_string(k) + " vertices)");
        std::array<int, 3> f{};
        if (!(row >> f[0] >> f[1] >> f[2])) throw ConfigError("off: malformed face row");
        m.faces.push_back(f);
    }
    detail::check_face_indices(m);
    return m;
}

// ASCII OBJ: 'v x y z' and 'f a b c' records; 'a' may be 'a/t/n', in which
// case everything after the first '/' is ignored. 1-based indices.
inline TriMesh read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("obj: cannot open '" + path + "'");
    TriMesh m;
    std::string line;
    auto face_index = [&](const std::string& tok) -> int {
        const std::string head = tok.substr(0, tok.find('/'));
        std::int64_t idx = 0;
        try {
            idx = std::stoll(head);
        } catch (const std::exception&) {
            throw ConfigError("obj: malformed face index '" + tok + "'");
        }
        if (idx < 1 || idx > static_cast<std::int64_t>(m.vertices.size()))
            throw ConfigError("obj: face index " + std::to_string(idx) + " out of range");
        return static_cast<int>(idx - 1);
    };
    while (std::getline(in, line)) {
        const auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        std::istringstream row(line);
        std::string tag;
        if (!(row >> tag)) continue;
        if (tag == "v") {
            Vec3 v{};
            if (!(row >> v[0] >> v[1] >> v[2])) throw ConfigError("obj: malformed vertex row");
            m.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<std::string> toks;
            std::string tok;
            while (row >> tok) toks.push_back(tok);
            if (toks.size() != 3)
                throw ConfigError("obj: only triangles supported (face with " +
                                  std::to_string(toks.size()) + " vertices)");
            m.faces.push_back({face_index(toks[0]), face_index(toks[1]), face_index(toks[2])});
        }
        // vt/vn/usemtl/etc. are ignored
    }
    if (m.faces.empty()) throw ConfigError("obj: no faces in '" + path + "'");
    detail::check_face_indices(m);
    return m;
}

inline TriMesh read_mesh(const std::string& path) {
    const auto dotpos = path.rfind('.');
    const std::string ext = dotpos == std::string::npos ? "" : path.substr(dotpos + 1);
    if (ext == "off" || ext == "OFF") return read_off(path);
    if (ext == "obj" || ext == "OBJ") return read_obj(path);
    throw ConfigError("mesh: unsupported extension '" + ext + "' (expected .off or .obj)");
}

// Watertight (closed, manifold) surface: every undirected edge is shared by
// exactly two faces. Parity-based inside tests are only meaningful then.
inline bool is_watertight(const TriMesh& m) {
    if (m.faces.empty()) return false;
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& f : m.faces) {
        for (int k = 0; k < 3; ++k) {
            int a = f[k], b = f[(k + 1) % 3];
            if (a == b) return false;  // degenerate edge
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    }
    for (const auto& [edge, count] : edge_count)
        if (count != 2) return false;
    return true;
}

namespace detail {

// Moeller-Trumbore ray/triangle intersection. Returns t > 0 on a hit, and
// flags hits that graze an edge or the ray origin so the caller can retry
// with a different direction instead of trusting an ambiguous parity count.
struct RayHit {
    bool hit = false;
    bool ambiguous = false;
    double t = 0.0;
};

inline RayHit ray_triangle(const Vec3& orig, const Vec3& dir, const Vec3& v0, const Vec3& v1,
                           const Vec3& v2) {
    constexpr double kEps = 1e-12;
    constexpr double kEdgeEps = 1e-9;
    RayHit r;
    const Vec3 e1 = v1 - v0;
    const Vec3 e2 = v2 - v0;
    const Vec3 p = cross3(dir, e2);
    const double det = dot3(e1, p);
    if (std::abs(det) < kEps) return r;  // parallel (a grazing parallel hit is caught via edges)
    const double inv = 1.0 / det;
    const Vec3 s = orig - v0;
    const double u = dot3(s, p) * inv;
    if (u < -kEdgeEps || u > 1.0 + kEdgeEps) return r;
    const Vec3 q = cross3(s, e1);
    const double v = dot3(dir, q) * inv;
    if (v < -kEdgeEps || u + v > 1.0 + kEdgeEps) return r;
    const double t = dot3(e2, q) * inv;
    if (t <= kEdgeEps) {
        // behind or on the origin; on-the-surface origins count as inside
        // via the SDF <= 0 convention, flag for the caller
        r.ambiguous = t > -kEdgeEps;
        return r;
    }
    r.hit = true;
    r.t = t;
    r.ambiguous = u < kEdgeEps || v < kEdgeEps || u + v > 1.0 - kEdgeEps;
    return r;
}

}  // namespace detail

// Inside test by ray parity: cast a ray and count crossings; odd means
// inside. Directions with no axis alignment make edge/vertex hits rare; if
// one still grazes, the next fallback direction is used.
inline bool point_inside(const TriMesh& m, const Vec3& p) {
    static const Vec3 kDirections[] = {
        {0.5424510924806184, 0.6790943727779318, 0.4945881155856814},
        {-0.3612374453265847, 0.8253745612498112, 0.4335125378931752},
        {0.7071934128675312, -0.2412453178543123, 0.6645112837463125},
        {-0.1854312986531240, -0.5934127853412965, 0.7832141253685321},
    };
    for (const Vec3& dir : kDirections) {
        int crossings = 0;
        bool retry = false;
        for (std::size_t f = 0; f < m.faces.size(); ++f) {
            const auto& tri = m.faces[f];
            const auto r = detail::ray_triangle(p, dir, m.vertices[static_cast<std::size_t>(tri[0])],
                                                m.vertices[static_cast<std::size_t>(tri[1])],
                                                m.vertices[static_cast<std::size_t>(tri[2])]);
            if (r.ambiguous) {
                retry = true;
                break;
            }
            if (r.hit) ++crossings;
        }
        if (!retry) return (crossings % 2) == 1;
    }
    throw NumericError("mesh: inside test hit edge cases along every probe direction");
}

// Area-weighted uniform surface sample: pick a triangle proportionally to
// area, then a uniform barycentric point (sqrt trick).
class SurfaceSampler {
public:
    explicit SurfaceSampler(const TriMesh& mesh) : mesh_(&mesh) {
        cumulative_.reserve(mesh.faces.size());
        double total = 0.0;
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            total += mesh.triangle_area(f);
            cumulative_.push_back(total);
        }
        if (!(total > 0.0)) throw ConfigError("mesh: zero total surface area");
    }

    Vec3 sample(Rng& rng) const {
        const double target = rng.uniform() * cumulative_.back();
        std::size_t lo = 0, hi = cumulative_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cumulative_[mid] < target)
                lo = mid + 1;
            else
                hi = mid;
        }
        const auto& tri = mesh_->faces[lo];
        const double su = std::sqrt(rng.uniform());
        const double v = rng.uniform();
        const double a = 1.0 - su, b = su * (1.0 - v), c = su * v;
        const Vec3& p0 = mesh_->vertices[static_cast<std::size_t>(tri[0])];
        const Vec3& p1 = mesh_->vertices[static_cast<std::size_t>(tri[1])];
        const Vec3& p2 = mesh_->vertices[static_cast<std::size_t>(tri[2])];
        return (a * p0) + (b * p1) + (c * p2);
    }

private:
    const TriMesh* mesh_;
    std::vector<double> cumulative_;
};

}  // namespace nfp
