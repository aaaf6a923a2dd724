#pragma once

#include "shrinker/mesh.hpp"
#include "shrinker/transforms.hpp"

#include <functional>

namespace shrinker {

// Scalar field defined analytically on the Gauss sphere, as a jet functor so
// chart derivatives come out exact.
using AnalyticField = std::function<Jet2(const Jet2V3& n)>;

// Nodal value plus chart derivatives of a scalar field at one node.
struct HJet {
    double h = 0.0;
    Vec2 dh = Vec2::Zero();
    Mat2 d2h = Mat2::Zero();
};

// Weighted least-squares cubic fits on the 2-ring (grown when thin), one
// stencil per node. Cubic reproduction keeps the recovered Hessian second-
// order accurate even at the irregular valence-4 nodes and the carved rims;
// rows give the chart gradient and Hessian of a nodal field as sparse linear
// combinations.
struct DerivativeRecovery {
    std::vector<std::vector<int>> idx;
    std::vector<Eigen::Matrix<double, 5, Eigen::Dynamic>> weights;  // du dv duu duv dvv

    HJet jet_at(int i, const VecX& field) const {
        const auto& nb = idx[i];
        VecX local(nb.size());
        for (std::size_t k = 0; k < nb.size(); ++k) local[k] = field[nb[k]];
        Eigen::Matrix<double, 5, 1> d = weights[i] * local;
        HJet j;
        j.h = field[i];
        j.dh = Vec2(d[0], d[1]);
        j.d2h << d[2], d[3], d[3], d[4];
        return j;
    }
};

struct GeometryCache {
    double C0 = 3.0;
    double tau = 0.0;
    std::vector<SurfacePoint> points;
    std::vector<ChartFrame> frames;
    std::vector<PulledGeometry> pulled;  // geometry of Sigma_tau in the node charts
    std::vector<double> conformal;       // ½|A|² of Sigma_0
    DerivativeRecovery recovery;
};

namespace detail {

inline std::vector<std::vector<int>> vertex_adjacency(const Mesh& mesh) {
    std::vector<std::set<int>> adj(mesh.n_nodes());
    for (const auto& t : mesh.tris)
        for (int k = 0; k < 3; ++k) {
            adj[t[k]].insert(t[(k + 1) % 3]);
            adj[t[k]].insert(t[(k + 2) % 3]);
        }
    std::vector<std::vector<int>> out(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i) out[i].assign(adj[i].begin(), adj[i].end());
    return out;
}

inline DerivativeRecovery build_recovery(const Mesh& mesh,
                                         const std::vector<ChartFrame>& frames) {
    const auto adj = vertex_adjacency(mesh);
    const int n = mesh.n_nodes();
    DerivativeRecovery rec;
    rec.idx.resize(n);
    rec.weights.resize(n);
    parallel_for(n, [&](std::size_t ii) {
        int i = static_cast<int>(ii);
        // neighbors within 2 rings, grown while the cubic fit would be thin
        std::set<int> ring{i};
        for (int pass = 0; pass < 2; ++pass) {
            std::set<int> grow = ring;
            for (int v : ring) grow.insert(adj[v].begin(), adj[v].end());
            ring = std::move(grow);
        }
        for (int extra = 0; extra < 2 && ring.size() < 14; ++extra) {
            std::set<int> grow = ring;
            for (int v : ring) grow.insert(adj[v].begin(), adj[v].end());
            ring = std::move(grow);
        }
        std::vector<int> nb(ring.begin(), ring.end());
        const ChartFrame& f = frames[i];
        const std::size_t m = nb.size();
        Eigen::MatrixXd A(m, 10);
        double scale = 0.0;
        std::vector<Vec2> uv(m);
        for (std::size_t k = 0; k < m; ++k) {
            const Vec3& q = mesh.nodes[nb[k]];
            double w = q.dot(f.n);
            uv[k] = Vec2(f.e1.dot(q) / w, f.e2.dot(q) / w);  // gnomonic chart coords
            scale = std::max(scale, uv[k].norm());
        }
        if (scale == 0.0) scale = 1.0;
        for (std::size_t k = 0; k < m; ++k) {
            double u = uv[k].x() / scale, v = uv[k].y() / scale;
            A.row(k) << 1.0, u, v, u * u, u * v, v * v, u * u * u, u * u * v, u * v * v,
                v * v * v;
        }
        Eigen::MatrixXd P =
            (A.transpose() * A).ldlt().solve(A.transpose()).eval();  // 10 x m pseudo-inverse
        Eigen::Matrix<double, 5, Eigen::Dynamic> W(5, m);
        double s1 = 1.0 / scale, s2 = s1 * s1;
        W.row(0) = P.row(1) * s1;
        W.row(1) = P.row(2) * s1;
        W.row(2) = P.row(3) * (2.0 * s2);
        W.row(3) = P.row(4) * s2;
        W.row(4) = P.row(5) * (2.0 * s2);
        rec.idx[i] = std::move(nb);
        rec.weights[i] = std::move(W);
    });
    return rec;
}

}  // namespace detail

inline GeometryCache build_cache(const Mesh& mesh, double C0, double tau) {
    GeometryCache cache;
    cache.C0 = C0;
    cache.tau = tau;
    const ScherkPatch patch(C0);
    const int n = mesh.n_nodes();
    cache.points.resize(n);
    cache.frames.resize(n);
    cache.pulled.resize(n);
    cache.conformal.resize(n);
    parallel_for(n, [&](std::size_t i) {
        cache.points[i] = patch.inverse_gauss(mesh.nodes[i]);
        cache.frames[i] = patch.frame_at(cache.points[i]);
        cache.pulled[i] = pulled_geometry(tau, cache.frames[i], patch);
        double normA2 =
            tau == 0.0 ? cache.pulled[i].normA2
                       : pulled_geometry(0.0, cache.frames[i], patch).normA2;
        cache.conformal[i] = 0.5 * normA2;
        if (!(cache.conformal[i] > 0.0))
            throw std::runtime_error("build_cache: conformal factor must be positive");
    });
    cache.recovery = detail::build_recovery(mesh, cache.frames);
    return cache;
}

// Chart jet of an analytic field at node i (exact derivatives).
inline HJet analytic_hjet(const GeometryCache& cache, int i, const AnalyticField& field) {
    const ChartFrame& f = cache.frames[i];
    Jet2 u = Jet2::variable(0.0, 0), v = Jet2::variable(0.0, 1);
    Jet2V3 q = constant(f.n) + constant(f.e1) * u + constant(f.e2) * v;
    Jet2V3 n = q * inv(sqrt(dot(q, q)));
    Jet2 h = field(n);
    HJet j;
    j.h = h.value();
    j.dh = h.grad();
    j.d2h = h.hess();
    return j;
}

inline VecX sample_field(const Mesh& mesh, const AnalyticField& field) {
    VecX out(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        Jet2V3 n = constant(mesh.nodes[i]);
        out[i] = field(n).value();
    }
    return out;
}

// Deterministic random field in the symmetric class (odd in n_x, even in n_y),
// sup-normalized to `amplitude` over the mesh nodes.
inline AnalyticField random_symmetric_field(std::uint64_t seed) {
    std::array<double, 6> c;
    std::uint64_t state = seed ? seed : 1;
    for (auto& v : c) {
        // xorshift64*, mapped to [-1, 1]
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        std::uint64_t r = state * 0x2545F4914F6CDD1DULL;
        v = 2.0 * (static_cast<double>(r >> 11) / 9007199254740992.0) - 1.0;
    }
    return [c](const Jet2V3& n) {
        const Jet2 &x = n[0], &y = n[1], &z = n[2];
        return x * c[0] + x * z * c[1] + x * z * z * c[2] + x * x * x * c[3] +
               x * y * y * c[4] + x * x * x * z * c[5];
    };
}

inline AnalyticField scaled_field(const AnalyticField& f, double s) {
    return [f, s](const Jet2V3& n) { return f(n) * s; };
}

}  // namespace shrinker
