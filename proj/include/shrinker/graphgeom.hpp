#pragma once

#include "shrinker/fem.hpp"
#include "shrinker/tri_intersect.hpp"

#include <map>
#include <queue>

namespace shrinker {

// Geometry of the normal graph over Sigma_tau at one node, from the Step 1-3
// closed forms: normal direction nu0 - (Id - h A)^{-1} grad h, the expanded
// metric, and a^{(h)} = btilde * atilde with the covariant Hessian of h.
struct GraphSample {
    Vec3 Xh, nuh;
    double btilde = 1.0;
    Mat2 gh, ah, Ah;
    double Hh = 0.0;
};

inline double operator_norm_spd_pair(const Mat2& A) {
    // max |eigenvalue| of a 2x2 with real spectrum (A is g-self-adjoint)
    double tr = A.trace(), det = A.determinant();
    double disc = std::max(tr * tr / 4.0 - det, 0.0);
    double r = std::sqrt(disc);
    return std::max(std::abs(tr / 2.0 + r), std::abs(tr / 2.0 - r));
}

inline GraphSample graph_sample(const HJet& hj, const PulledGeometry& geo) {
    const double h = hj.h;
    if (std::abs(h) * operator_norm_spd_pair(geo.A) >= 0.5)
        throw std::domain_error("graph_sample: ||h A||_op >= 1/2");

    GraphSample s;
    Mat2 M0 = Mat2::Identity() - h * geo.A;
    Mat2 Minv = M0.inverse();
    Vec2 gradvec = geo.ginv * hj.dh;
    Vec2 xi = Minv * gradvec;

    s.Xh = geo.X + h * geo.nu;
    Vec3 nu_tilde = geo.nu - (xi[0] * geo.T1 + xi[1] * geo.T2);
    double xi2 = xi.dot(geo.g * xi);
    s.btilde = 1.0 / std::sqrt(1.0 + xi2);
    s.nuh = s.btilde * nu_tilde;

    Mat2 aga = geo.a * geo.ginv * geo.a;  // <A rho, A xi> lowered
    s.gh = geo.g - 2.0 * h * geo.a + h * h * aga + hj.dh * hj.dh.transpose();

    Mat2 hess;  // covariant Hessian of h w.r.t. g^{(0,tau)}
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double c = hj.d2h(i, j);
            for (int k = 0; k < 2; ++k) c -= geo.Gamma[k][i][j] * hj.dh[k];
            hess(i, j) = c;
        }

    Vec2 w = geo.g * xi;
    Mat2 bracket;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double c = 0.0;
            for (int k = 0; k < 2; ++k) {
                double Wk = h * geo.gradA[i](k, j) + geo.A(k, i) * hj.dh[j] +
                            geo.A(k, j) * hj.dh[i];
                c += w[k] * Wk;
            }
            bracket(i, j) = c;
        }

    Mat2 atilde = geo.a - h * aga + hess + bracket;
    s.ah = s.btilde * atilde;
    s.Ah = s.gh.inverse() * s.ah;
    s.Hh = s.Ah.trace();
    return s;
}

inline double residual_point(const HJet& hj, double tau, const PulledGeometry& geo) {
    GraphSample s = graph_sample(hj, geo);
    return s.Hh + tau * s.nuh.x() + tau * tau * s.Xh.dot(s.nuh);
}

// Directional derivative of residual_point with respect to the jet of h,
// obtained by differentiating the Step 1-3 chain term by term. dir carries
// the variation of (h, dh, d2h).
inline double residual_point_derivative(const HJet& hj, double tau, const PulledGeometry& geo,
                                        const HJet& dir) {
    const double h = hj.h, dh = dir.h;
    Mat2 M0 = Mat2::Identity() - h * geo.A;
    Mat2 Minv = M0.inverse();
    Mat2 dMinv = dh * (Minv * geo.A * Minv);
    Vec2 gradvec = geo.ginv * hj.dh;
    Vec2 dgradvec = geo.ginv * dir.dh;
    Vec2 xi = Minv * gradvec;
    Vec2 dxi = dMinv * gradvec + Minv * dgradvec;

    Vec3 nut = geo.nu - (xi[0] * geo.T1 + xi[1] * geo.T2);
    Vec3 dnut = -(dxi[0] * geo.T1 + dxi[1] * geo.T2);
    double xi2 = xi.dot(geo.g * xi);
    double dxi2 = 2.0 * xi.dot(geo.g * dxi);
    double b = 1.0 / std::sqrt(1.0 + xi2);
    double db = -0.5 * b * b * b * dxi2;
    Vec3 nuh = b * nut;
    Vec3 dnuh = db * nut + b * dnut;
    Vec3 Xh = geo.X + h * geo.nu;
    Vec3 dXh = dh * geo.nu;

    Mat2 aga = geo.a * geo.ginv * geo.a;
    Mat2 gh = geo.g - 2.0 * h * geo.a + h * h * aga + hj.dh * hj.dh.transpose();
    Mat2 dgh = -2.0 * dh * geo.a + 2.0 * h * dh * aga + dir.dh * hj.dh.transpose() +
               hj.dh * dir.dh.transpose();
    Mat2 ghinv = gh.inverse();
    Mat2 dghinv = -ghinv * dgh * ghinv;

    Mat2 hess, dhess;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double c = hj.d2h(i, j), dc = dir.d2h(i, j);
            for (int k = 0; k < 2; ++k) {
                c -= geo.Gamma[k][i][j] * hj.dh[k];
                dc -= geo.Gamma[k][i][j] * dir.dh[k];
            }
            hess(i, j) = c;
            dhess(i, j) = dc;
        }

    Vec2 w = geo.g * xi;
    Vec2 dw = geo.g * dxi;
    Mat2 bracket, dbracket;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double c = 0.0, dc = 0.0;
            for (int k = 0; k < 2; ++k) {
                double Wk = h * geo.gradA[i](k, j) + geo.A(k, i) * hj.dh[j] +
                            geo.A(k, j) * hj.dh[i];
                double dWk = dh * geo.gradA[i](k, j) + geo.A(k, i) * dir.dh[j] +
                             geo.A(k, j) * dir.dh[i];
                c += w[k] * Wk;
                dc += dw[k] * Wk + w[k] * dWk;
            }
            bracket(i, j) = c;
            dbracket(i, j) = dc;
        }

    Mat2 atilde = geo.a - h * aga + hess + bracket;
    Mat2 datilde = -dh * aga + dhess + dbracket;
    Mat2 ah = b * atilde;
    Mat2 dah = db * atilde + b * datilde;
    double dHh = (dghinv * ah + ghinv * dah).trace();
    return dHh + tau * dnuh.x() + tau * tau * (dXh.dot(nuh) + Xh.dot(dnuh));
}

// F(h, tau) = H + tau e1.nu + tau^2 X.nu, evaluated nodewise from recovered
// chart derivatives of the nodal field.
inline VecX residual_field(const Mesh& mesh, const GeometryCache& cache, const VecX& h) {
    VecX F(mesh.n_nodes());
    parallel_for(mesh.n_nodes(), [&](std::size_t i) {
        HJet hj = cache.recovery.jet_at(static_cast<int>(i), h);
        try {
            F[i] = residual_point(hj, cache.tau, cache.pulled[i]);
        } catch (const std::domain_error&) {
            throw std::domain_error("residual_F: ||h A||_op >= 1/2 at node " + std::to_string(i));
        }
    });
    return F;
}

// Same residual with exact derivatives of an analytic field.
inline VecX residual_field_analytic(const Mesh& mesh, const GeometryCache& cache,
                                    const AnalyticField& h) {
    VecX F(mesh.n_nodes());
    parallel_for(mesh.n_nodes(), [&](std::size_t i) {
        HJet hj = analytic_hjet(cache, static_cast<int>(i), h);
        try {
            F[i] = residual_point(hj, cache.tau, cache.pulled[i]);
        } catch (const std::domain_error&) {
            throw std::domain_error("residual_F: ||h A||_op >= 1/2 at node " + std::to_string(i));
        }
    });
    return F;
}

// H + X.nu computed directly on the rescaled immersion H_tau(X^{(h,tau)}):
// an independent route through the full second-fundamental-form pipeline of
// the composed jet (contract: residual_F = tau * rescaled_residual).
inline double rescaled_residual_point(const GeometryCache& cache, int i, const HJet& hj,
                                      const ScherkPatch& patch) {
    if (cache.tau == 0.0)
        throw std::invalid_argument("rescaled_residual: tau must be nonzero");
    const ChartFrame& f = cache.frames[i];
    Jet2V3 X0 = patch.sphere_chart_jet_raw(f);
    Jet2V3 Xt = bend_jet(cache.tau, X0);
    Jet2V3 Xu = deriv(Xt, 0), Xv = deriv(Xt, 1);
    Jet2V3 C = cross(Xu, Xv);
    Jet2V3 nu = C * (inv(sqrt(dot(C, C))) * f.orient);
    Jet2 hjet;
    hjet.c[0] = hj.h;
    hjet.c[1] = hj.dh[0];
    hjet.c[2] = hj.dh[1];
    hjet.c[3] = 0.5 * hj.d2h(0, 0);
    hjet.c[4] = hj.d2h(0, 1);
    hjet.c[5] = 0.5 * hj.d2h(1, 1);
    Jet2V3 Y = scale_jet(cache.tau, Xt + nu * hjet);
    FormsCore fy = fundamental_forms(Y, f.orient);
    return fy.H + fy.X.dot(fy.nu);
}

inline VecX rescaled_residual_field(const Mesh& mesh, const GeometryCache& cache,
                                    const VecX& h) {
    const ScherkPatch patch(cache.C0);
    VecX F(mesh.n_nodes());
    parallel_for(mesh.n_nodes(), [&](std::size_t i) {
        HJet hj = cache.recovery.jet_at(static_cast<int>(i), h);
        F[i] = rescaled_residual_point(cache, static_cast<int>(i), hj, patch);
    });
    return F;
}

inline VecX rescaled_residual_field_analytic(const Mesh& mesh, const GeometryCache& cache,
                                             const AnalyticField& h) {
    const ScherkPatch patch(cache.C0);
    VecX F(mesh.n_nodes());
    parallel_for(mesh.n_nodes(), [&](std::size_t i) {
        HJet hj = analytic_hjet(cache, static_cast<int>(i), h);
        F[i] = rescaled_residual_point(cache, static_cast<int>(i), hj, patch);
    });
    return F;
}

// --- embedded graph mesh and the embeddedness check -------------------------

struct GraphMesh {
    EmbeddedMesh mesh;
    std::vector<int> base;  // originating sphere node of each vertex
};

// R^3 mesh of the graph surface over Sigma_tau, cut along the slab seam
// (y = -pi/2 ~ 3pi/2): triangles straddling the seam get deck-translated
// corner duplicates so every triangle is geometrically coherent.
inline GraphMesh embedded_graph_mesh(const Mesh& mesh, const GeometryCache& cache,
                                     const VecX& h) {
    GraphMesh out;
    const int n = mesh.n_nodes();
    std::vector<Vec3> pos(n);
    for (int i = 0; i < n; ++i) pos[i] = cache.pulled[i].X + h[i] * cache.pulled[i].nu;
    out.mesh.verts = pos;
    out.base.resize(n);
    for (int i = 0; i < n; ++i) out.base[i] = i;

    std::map<int, int> lifted;  // node -> duplicate vertex id (one deck shift)
    for (const auto& t : mesh.tris) {
        std::array<double, 3> y;
        std::array<int, 3> v = t;
        for (int k = 0; k < 3; ++k) y[k] = cache.points[t[k]].y;
        for (int guard = 0; guard < 3; ++guard) {
            auto mn = std::min_element(y.begin(), y.end()) - y.begin();
            auto mx = std::max_element(y.begin(), y.end()) - y.begin();
            if (y[mx] - y[mn] <= kPi) break;
            int node = t[mn];
            auto it = lifted.find(node);
            if (it == lifted.end()) {
                int id = static_cast<int>(out.mesh.verts.size());
                out.mesh.verts.push_back(bent_deck_translate(cache.tau, pos[node]));
                out.base.push_back(node);
                it = lifted.emplace(node, id).first;
            }
            v[mn] = it->second;
            y[mn] += 2.0 * kPi;
        }
        out.mesh.tris.push_back(v);
    }
    return out;
}

struct EmbeddednessReport {
    bool pass = false;
    bool delta_ok = false;
    bool scan_ok = false;
    double max_h = 0.0;
    double delta = 0.125;
    long intersections = 0;
    double clearance = 0.0;       // half-width of the hole in its symmetry plane
    double scan_clearance = 0.0;  // half the narrowest nonlocal approach (oblique pairs allowed)
};

namespace detail {

// Exhaustive triangle-triangle scan with a uniform-grid broadphase; pairs
// sharing a base node are adjacency, not self-intersection.
inline long intersection_scan(const GraphMesh& gm) {
    const auto& V = gm.mesh.verts;
    const auto& T = gm.mesh.tris;
    double cell = 0.0;
    for (const auto& t : T)
        cell = std::max(cell, std::max((V[t[0]] - V[t[1]]).norm(),
                                       std::max((V[t[1]] - V[t[2]]).norm(),
                                                (V[t[2]] - V[t[0]]).norm())));
    if (cell == 0.0) return 0;
    auto key = [&](const Vec3& p) {
        return std::array<long, 3>{static_cast<long>(std::floor(p.x() / cell)),
                                   static_cast<long>(std::floor(p.y() / cell)),
                                   static_cast<long>(std::floor(p.z() / cell))};
    };
    std::map<std::array<long, 3>, std::vector<int>> grid;
    for (int ti = 0; ti < static_cast<int>(T.size()); ++ti) {
        Vec3 c = (V[T[ti][0]] + V[T[ti][1]] + V[T[ti][2]]) / 3.0;
        grid[key(c)].push_back(ti);
    }
    long hits = 0;
    for (const auto& [k, list] : grid) {
        std::vector<int> cand;
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({k[0] + dx, k[1] + dy, k[2] + dz});
                    if (it != grid.end())
                        cand.insert(cand.end(), it->second.begin(), it->second.end());
                }
        for (int a : list)
            for (int b : cand) {
                if (b <= a) continue;
                bool share = false;
                for (int i = 0; i < 3 && !share; ++i)
                    for (int j = 0; j < 3 && !share; ++j)
                        if (gm.base[T[a][i]] == gm.base[T[b][j]]) share = true;
                if (share) continue;
                Vec3 alo = V[T[a][0]].cwiseMin(V[T[a][1]]).cwiseMin(V[T[a][2]]);
                Vec3 ahi = V[T[a][0]].cwiseMax(V[T[a][1]]).cwiseMax(V[T[a][2]]);
                Vec3 blo = V[T[b][0]].cwiseMin(V[T[b][1]]).cwiseMin(V[T[b][2]]);
                Vec3 bhi = V[T[b][0]].cwiseMax(V[T[b][1]]).cwiseMax(V[T[b][2]]);
                if ((alo.array() > bhi.array()).any() || (blo.array() > ahi.array()).any())
                    continue;
                if (tri_tri_intersect(V[T[a][0]], V[T[a][1]], V[T[a][2]], V[T[b][0]],
                                      V[T[b][1]], V[T[b][2]]))
                    ++hits;
            }
    }
    return hits;
}

// Narrowest nonlocal approach: vertex pairs that are close in R^3 but far
// along the surface (graph distance / euclidean >= ratio). Returns half the
// minimal such euclidean distance (the hole half-width).
inline double clearance_scan(const GraphMesh& gm, double cap = 3.2, double ratio = 1.4,
                             int hop_exclude = 8) {
    const auto& V = gm.mesh.verts;
    const int n = static_cast<int>(V.size());
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& t : gm.mesh.tris)
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            adj[a].push_back({b, (V[a] - V[b]).norm()});
            adj[b].push_back({a, (V[a] - V[b]).norm()});
        }
    // hop balls
    std::vector<std::set<int>> ball(n);
    parallel_for(n, [&](std::size_t s) {
        std::queue<std::pair<int, int>> q;
        q.push({static_cast<int>(s), 0});
        ball[s].insert(static_cast<int>(s));
        while (!q.empty()) {
            auto [v, d] = q.front();
            q.pop();
            if (d == hop_exclude) continue;
            for (const auto& [w, len] : adj[v])
                if (ball[s].insert(w).second) q.push({w, d + 1});
        }
    });
    // close pairs via spatial hash
    double cell = cap;
    auto key = [&](const Vec3& p) {
        return std::array<long, 3>{static_cast<long>(std::floor(p.x() / cell)),
                                   static_cast<long>(std::floor(p.y() / cell)),
                                   static_cast<long>(std::floor(p.z() / cell))};
    };
    std::map<std::array<long, 3>, std::vector<int>> grid;
    for (int i = 0; i < n; ++i) grid[key(V[i])].push_back(i);
    std::vector<std::vector<int>> candidates(n);
    bool any = false;
    for (int i = 0; i < n; ++i) {
        auto k = key(V[i]);
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({k[0] + dx, k[1] + dy, k[2] + dz});
                    if (it == grid.end()) continue;
                    for (int j : it->second) {
                        if (j <= i) continue;
                        if ((V[i] - V[j]).norm() > cap) continue;
                        if (ball[i].count(j)) continue;
                        candidates[i].push_back(j);
                        any = true;
                    }
                }
    }
    if (!any) return std::numeric_limits<double>::infinity();
    // truncated Dijkstra from every vertex that has candidates
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n; ++s) {
        if (candidates[s].empty()) continue;
        double radius = ratio * cap * 1.05;
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                            std::greater<>> pq;
        dist[s] = 0.0;
        pq.push({0.0, s});
        while (!pq.empty()) {
            auto [d, v] = pq.top();
            pq.pop();
            if (d > dist[v] || d > radius) continue;
            for (const auto& [w, len] : adj[v])
                if (d + len < dist[w]) {
                    dist[w] = d + len;
                    pq.push({dist[w], w});
                }
        }
        for (int j : candidates[s]) {
            double de = (V[s] - V[j]).norm();
            if (dist[j] >= ratio * de) best = std::min(best, de);
        }
    }
    return best / 2.0;
}

// Width of the hole measured between its extremal points in the symmetry
// plane x = z (the diagonal waist and the y-gap); those extremes sit at exact
// mesh nodes, so at tau = 0, h = 0 this reproduces min(pi, 2 sqrt2 asinh 1)/2.
inline double planar_hole_clearance(const Mesh& mesh, const GeometryCache& cache,
                                    const VecX& h) {
    auto nearest = [&](const Vec3& target) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            double d = (mesh.nodes[i] - target).norm();
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return best;
    };
    auto pos = [&](int i) { return cache.pulled[i].X + h[i] * cache.pulled[i].nu; };
    const double s = 1.0 / std::sqrt(2.0);
    int a1 = nearest(Vec3(-s, 0, -s)), a2 = nearest(Vec3(s, 0, s));
    int b1 = nearest(Vec3(0, 1, 0)), b2 = nearest(Vec3(0, -1, 0));
    double waist = (pos(a1) - pos(a2)).norm();
    double ygap = (pos(b1) - pos(b2)).norm();
    return 0.5 * std::min(waist, ygap);
}

}  // namespace detail

// Pass criteria: max |h| below the embeddedness bound (1/8) and a clean
// triangle-triangle intersection scan. Also reports the planar hole clearance
// (analytic value at tau = 0, h = 0: min(pi, 2 sqrt2 asinh 1)/2 = 1.2465) and
// the sharper scan-based nonlocal approach, which oblique wall pairs push
// below the planar value (about 1.04 at tau = 0).
inline EmbeddednessReport embeddedness_check(const Mesh& mesh, const GeometryCache& cache,
                                             const VecX& h, bool with_clearance = true) {
    EmbeddednessReport rep;
    rep.max_h = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
    rep.delta = 0.125;
    rep.delta_ok = rep.max_h < rep.delta;
    GraphMesh gm = embedded_graph_mesh(mesh, cache, h);
    rep.intersections = detail::intersection_scan(gm);
    rep.scan_ok = rep.intersections == 0;
    rep.clearance = detail::planar_hole_clearance(mesh, cache, h);
    rep.scan_clearance = with_clearance ? detail::clearance_scan(gm) : 0.0;
    rep.pass = rep.delta_ok && rep.scan_ok;
    return rep;
}

}  // namespace shrinker
