#pragma once

#include "shrinker/common.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace shrinker {

// Triangulation of the four-times punctured Gauss sphere S²_{φ₀}, built from a
// subdivided octahedron with the puncture caps carved out and the rim nodes
// snapped onto the boundary circles. Node positions are exactly symmetric
// under both mirror reflections (they act as coordinate sign flips, which the
// construction commutes with bitwise).

// boundary circle tags; centers in this order
inline const std::array<Vec3, 4>& puncture_centers() {
    static const std::array<Vec3, 4> c = {Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(1, 0, 0),
                                          Vec3(-1, 0, 0)};
    return c;
}

constexpr int kInterior = -1;  // boundary tags are 0..3 for circles c1..c4

struct SymMap {
    std::vector<int> perm;
    double sign = 1.0;
};

using TriList = std::vector<std::array<int, 3>>;

inline int count_edges(const TriList& tris) {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : tris)
        for (int k = 0; k < 3; ++k)
            edges.insert({std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])});
    return static_cast<int>(edges.size());
}

inline int euler_characteristic_of(int n_nodes, const TriList& tris) {
    return n_nodes - count_edges(tris) + static_cast<int>(tris.size());
}

inline std::vector<std::vector<int>> boundary_loops_of(const TriList& tris) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : tris)
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            count[{std::min(a, b), std::max(a, b)}]++;
        }
    std::map<int, std::vector<int>> next;
    for (const auto& [e, c] : count)
        if (c == 1) {
            next[e.first].push_back(e.second);
            next[e.second].push_back(e.first);
        }
    std::set<int> visited;
    std::vector<std::vector<int>> loops;
    for (const auto& [v, nb] : next) {
        if (visited.count(v)) continue;
        std::vector<int> loop = {v};
        visited.insert(v);
        int prev = -1, cur = v;
        for (;;) {
            const auto& cand = next.at(cur);
            int nxt = (cand[0] != prev) ? cand[0] : (cand.size() > 1 ? cand[1] : -1);
            if (nxt == -1 || nxt == loop.front()) break;
            loop.push_back(nxt);
            visited.insert(nxt);
            prev = cur;
            cur = nxt;
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

// A plain triangle mesh embedded in R^3 (graph surfaces, assembled cores).
struct EmbeddedMesh {
    std::vector<Vec3> verts;
    TriList tris;
    int euler_characteristic() const {
        return euler_characteristic_of(static_cast<int>(verts.size()), tris);
    }
    std::vector<std::vector<int>> boundary_loops() const { return boundary_loops_of(tris); }
};

struct Mesh {
    std::vector<Vec3> nodes;
    std::vector<std::array<int, 3>> tris;
    std::vector<int> tag;  // kInterior or circle index
    SymMap sym_xz;         // (x,y,z) -> (x,-y,z), class-invariant
    SymMap sym_yz;         // (x,y,z) -> (-x,y,z), class-antivariant
    double phi0 = 0.0;
    int refinement = 0;

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_tris() const { return static_cast<int>(tris.size()); }
    bool is_boundary(int i) const { return tag[i] != kInterior; }

    int n_edges() const { return count_edges(tris); }
    int euler_characteristic() const { return euler_characteristic_of(n_nodes(), tris); }
    std::vector<std::vector<int>> boundary_loops() const { return boundary_loops_of(tris); }

    void validate() const;
};

namespace detail {

struct VecLess {
    bool operator()(const Vec3& a, const Vec3& b) const {
        if (a.x() != b.x()) return a.x() < b.x();
        if (a.y() != b.y()) return a.y() < b.y();
        return a.z() < b.z();
    }
};

inline void subdivide_octasphere(int refinement, std::vector<Vec3>& nodes,
                                 std::vector<std::array<int, 3>>& tris) {
    nodes = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0),
             Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
    tris = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
            {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    for (int r = 0; r < refinement; ++r) {
        std::map<std::pair<int, int>, int> mid;
        std::vector<std::array<int, 3>> out;
        out.reserve(tris.size() * 4);
        auto midpoint = [&](int a, int b) {
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            Vec3 m = (nodes[a] + nodes[b]) / 2.0;
            m /= m.norm();
            int id = static_cast<int>(nodes.size());
            nodes.push_back(m);
            mid.emplace(key, id);
            return id;
        };
        for (const auto& t : tris) {
            int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
            out.push_back({t[0], ab, ca});
            out.push_back({ab, t[1], bc});
            out.push_back({ca, bc, t[2]});
            out.push_back({ab, bc, ca});
        }
        tris = std::move(out);
    }
}

inline SymMap build_sym_map(const std::vector<Vec3>& nodes, int flip_axis, double sign) {
    std::map<Vec3, int, VecLess> lookup;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) lookup.emplace(nodes[i], i);
    SymMap m;
    m.sign = sign;
    m.perm.resize(nodes.size());
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
        Vec3 w = nodes[i];
        w(flip_axis) = -w(flip_axis);
        auto it = lookup.find(w);
        if (it == lookup.end())
            throw std::runtime_error("mesh symmetry map: node set is not mirror symmetric");
        m.perm[i] = it->second;
    }
    return m;
}

}  // namespace detail

// phi0 == 0 builds the closed sphere (validation variant).
inline Mesh build_mesh(double phi0, int refinement) {
    if (phi0 < 0.0 || phi0 >= kPi / 4.0)
        throw std::invalid_argument("build_mesh: need 0 <= phi0 < pi/4 (circles must not overlap)");
    if (refinement < 0) throw std::invalid_argument("build_mesh: refinement must be >= 0");

    Mesh mesh;
    mesh.phi0 = phi0;
    mesh.refinement = refinement;
    detail::subdivide_octasphere(refinement, mesh.nodes, mesh.tris);
    mesh.tag.assign(mesh.nodes.size(), kInterior);

    if (phi0 > 0.0) {
        const double h_edge = (kPi / 2.0) / static_cast<double>(1 << refinement);
        const double carve_radius = phi0 + 0.35 * h_edge;
        if (carve_radius >= kPi / 4.0)
            throw std::invalid_argument("build_mesh: phi0 too large for this refinement");

        const int n = mesh.n_nodes();
        std::vector<char> deleted(n, 0);
        std::vector<int> cap(n, -1);
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < 4; ++c) {
                double d = std::acos(std::clamp(mesh.nodes[i].dot(puncture_centers()[c]), -1.0, 1.0));
                if (d < carve_radius) {
                    deleted[i] = 1;
                    cap[i] = c;
                }
            }
        }
        // rim nodes: kept nodes adjacent to a deleted one; snap onto the circle
        std::vector<int> rim_cap(n, -1);
        for (const auto& t : mesh.tris)
            for (int k = 0; k < 3; ++k) {
                int a = t[k], b = t[(k + 1) % 3];
                if (!deleted[a] && deleted[b]) rim_cap[a] = cap[b];
                if (!deleted[b] && deleted[a]) rim_cap[b] = cap[a];
            }
        for (int i = 0; i < n; ++i) {
            if (rim_cap[i] < 0) continue;
            const Vec3& c = puncture_centers()[rim_cap[i]];
            Vec3 t = mesh.nodes[i] - mesh.nodes[i].dot(c) * c;
            double tn = t.norm();
            if (tn == 0.0) throw std::runtime_error("build_mesh: degenerate rim node");
            mesh.nodes[i] = std::cos(phi0) * c + (std::sin(phi0) / tn) * t;
            mesh.tag[i] = rim_cap[i];
        }
        // drop carved triangles, compact node numbering
        std::vector<std::array<int, 3>> kept;
        for (const auto& t : mesh.tris)
            if (!deleted[t[0]] && !deleted[t[1]] && !deleted[t[2]]) kept.push_back(t);
        std::vector<int> remap(n, -1);
        std::vector<Vec3> nodes2;
        std::vector<int> tag2;
        for (int i = 0; i < n; ++i)
            if (!deleted[i]) {
                remap[i] = static_cast<int>(nodes2.size());
                nodes2.push_back(mesh.nodes[i]);
                tag2.push_back(mesh.tag[i]);
            }
        for (auto& t : kept)
            for (int k = 0; k < 3; ++k) t[k] = remap[t[k]];
        mesh.nodes = std::move(nodes2);
        mesh.tris = std::move(kept);
        mesh.tag = std::move(tag2);
    }

    mesh.sym_xz = detail::build_sym_map(mesh.nodes, 1, +1.0);
    mesh.sym_yz = detail::build_sym_map(mesh.nodes, 0, -1.0);
    mesh.validate();
    return mesh;
}

inline void Mesh::validate() const {
    for (const auto& v : nodes)
        if (std::abs(v.norm() - 1.0) > 1e-14)
            throw std::runtime_error("mesh: node not on the unit sphere");
    for (int i = 0; i < n_nodes(); ++i) {
        if (tag[i] == kInterior) continue;
        double d = std::acos(std::clamp(nodes[i].dot(puncture_centers()[tag[i]]), -1.0, 1.0));
        if (std::abs(d - phi0) > 1e-10)
            throw std::runtime_error("mesh: boundary node off its circle");
    }
    // manifoldness: every edge in one (boundary) or two triangles
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : tris) {
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw std::runtime_error("mesh: degenerate triangle");
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            count[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    for (const auto& [e, c] : count)
        if (c > 2) throw std::runtime_error("mesh: non-manifold edge");
    // symmetry maps are involutions and carry triangles to triangles
    for (const SymMap* m : {&sym_xz, &sym_yz}) {
        std::set<std::array<int, 3>> triset;
        for (auto t : tris) {
            std::sort(t.begin(), t.end());
            triset.insert(t);
        }
        for (int i = 0; i < n_nodes(); ++i)
            if (m->perm[m->perm[i]] != i) throw std::runtime_error("mesh: sym map not an involution");
        for (auto t : tris) {
            std::array<int, 3> u = {m->perm[t[0]], m->perm[t[1]], m->perm[t[2]]};
            std::sort(u.begin(), u.end());
            if (!triset.count(u)) throw std::runtime_error("mesh: sym map breaks triangles");
        }
    }
    if (phi0 > 0.0) {
        auto loops = boundary_loops();
        if (loops.size() != 4) throw std::runtime_error("mesh: expected 4 boundary circles");
    }
}

// Projection onto the symmetric class: invariant under the xz-reflection,
// antivariant under the yz-reflection.
inline VecX symmetric_projection(const Mesh& mesh, const VecX& h) {
    const auto& pxz = mesh.sym_xz.perm;
    const auto& pyz = mesh.sym_yz.perm;
    VecX out(h.size());
    for (int i = 0; i < h.size(); ++i) {
        out[i] = 0.25 * (h[i] + h[pxz[i]] - h[pyz[i]] - h[pxz[pyz[i]]]);
    }
    return out;
}

// max deviation from class membership
inline double symmetry_defect(const Mesh& mesh, const VecX& h) {
    double d = 0.0;
    for (int i = 0; i < h.size(); ++i) {
        d = std::max(d, std::abs(h[i] - h[mesh.sym_xz.perm[i]]));
        d = std::max(d, std::abs(h[i] + h[mesh.sym_yz.perm[i]]));
    }
    return d;
}

}  // namespace shrinker
