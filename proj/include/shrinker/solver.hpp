#pragma once

#include "shrinker/graphgeom.hpp"
#include "shrinker/spectral.hpp"

namespace shrinker {

struct SolveConfig {
    double tau = 0.0;
    double C0 = 3.0;
    int refinement = 4;
    double newton_tol = 1e-10;  // on the mass-weighted residual norm
    int max_iters = 25;
    enum class Jacobian { ChordAtOrigin, Full };
    Jacobian jacobian_mode = Jacobian::ChordAtOrigin;
    // small-data gates (the existence theorem fixes no constants; these are
    // the working defaults, inclusive bounds)
    double delta0 = 1e-2;
    double eta0 = 0.125;
    int N0 = 8;
    double gate_exponent = 3.0;  // core trace gate delta0 / (2 N^e)
};

struct SolveResult {
    VecX h;
    std::vector<double> residual_history;
    bool converged = false;
    int iterations = 0;
    bool embedded = false;
    bool symmetric = false;
    double trace_norm = 0.0;      // surrogate W^2 norm of the harmonic trace lift
    double norm_ratio_tau = 1.0;  // trace-lift norm under g_0 vs g_tau
    EmbeddednessReport embed;
    std::string note;
};

// Chord operator u -> Delta_g u + |A|^2 u at (h, tau) = (0, 0), assembled from
// the recovery stencils and the analytic metric; through the conformal Gauss
// map this is (|A|^2 / 2)(Delta_{S^2} + 2). It is the exact Jacobian of the
// discrete residual at the origin, which is what makes the chord iteration
// contract.
inline SpMat linearized_operator_at(const Mesh& mesh, const GeometryCache& cache) {
    const int n = mesh.n_nodes();
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        const PulledGeometry& geo = cache.pulled[i];
        const auto& nb = cache.recovery.idx[i];
        const auto& W = cache.recovery.weights[i];
        double cH[3] = {geo.ginv(0, 0), 2.0 * geo.ginv(0, 1), geo.ginv(1, 1)};
        double cg[2];
        for (int k = 0; k < 2; ++k)
            cg[k] = -(geo.ginv(0, 0) * geo.Gamma[k][0][0] + 2.0 * geo.ginv(0, 1) * geo.Gamma[k][0][1] +
                      geo.ginv(1, 1) * geo.Gamma[k][1][1]);
        for (std::size_t c = 0; c < nb.size(); ++c) {
            double w = cg[0] * W(0, c) + cg[1] * W(1, c) + cH[0] * W(2, c) + cH[1] * W(3, c) +
                       cH[2] * W(4, c);
            t.emplace_back(i, nb[c], w);
        }
        t.emplace_back(i, i, geo.normA2);
    }
    SpMat L(n, n);
    L.setFromTriplets(t.begin(), t.end());
    return L;
}

// The paper's DG(0,0) chord operator (tau = 0 geometry).
inline SpMat linearized_operator(const Mesh& mesh, const GeometryCache& cache0) {
    if (cache0.tau != 0.0)
        throw std::invalid_argument("linearized_operator: cache must be at tau = 0");
    return linearized_operator_at(mesh, cache0);
}

// Full Jacobian of the discrete residual at h = 0 for the cache's tau: adds
// the derivatives of the tau e1.nu and tau^2 X.nu terms, whose normal
// variation is dnu(u) = -(T ginv grad u):
//   J u = Delta_g u + |A|^2 u + tau^2 u - (tau e1 + tau^2 X) . T ginv grad u
inline SpMat jacobian_operator_at(const Mesh& mesh, const GeometryCache& cache) {
    const double tau = cache.tau;
    const int n = mesh.n_nodes();
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        const PulledGeometry& geo = cache.pulled[i];
        const auto& nb = cache.recovery.idx[i];
        const auto& W = cache.recovery.weights[i];
        double cH[3] = {geo.ginv(0, 0), 2.0 * geo.ginv(0, 1), geo.ginv(1, 1)};
        double cg[2];
        for (int k = 0; k < 2; ++k)
            cg[k] = -(geo.ginv(0, 0) * geo.Gamma[k][0][0] + 2.0 * geo.ginv(0, 1) * geo.Gamma[k][0][1] +
                      geo.ginv(1, 1) * geo.Gamma[k][1][1]);
        Vec3 w3 = tau * Vec3(1, 0, 0) + tau * tau * geo.X;
        double wT[2] = {w3.dot(geo.T1), w3.dot(geo.T2)};
        for (int l = 0; l < 2; ++l)
            for (int k = 0; k < 2; ++k) cg[l] -= geo.ginv(l, k) * wT[k];
        for (std::size_t c = 0; c < nb.size(); ++c) {
            double w = cg[0] * W(0, c) + cg[1] * W(1, c) + cH[0] * W(2, c) + cH[1] * W(3, c) +
                       cH[2] * W(4, c);
            t.emplace_back(i, nb[c], w);
        }
        t.emplace_back(i, i, geo.normA2 + tau * tau);
    }
    SpMat J(n, n);
    J.setFromTriplets(t.begin(), t.end());
    return J;
}

// Class-gated application (fields outside the symmetric class are rejected).
inline VecX apply_linearized(const Mesh& mesh, const SpMat& L, const VecX& u) {
    double scale = std::max(1.0, u.lpNorm<Eigen::Infinity>());
    if (symmetry_defect(mesh, u) > 1e-8 * scale)
        throw std::invalid_argument("apply_linearized: field is not in the symmetric class");
    return L * u;
}

// v = dF(0, tau)/dtau at tau = 0 by central differences; lies in the
// symmetric class and vanishes on the rotation axis points.
inline VecX tau_derivative_field(const Mesh& mesh, double C0, double dtau = 1e-5) {
    GeometryCache cp = build_cache(mesh, C0, dtau);
    GeometryCache cm = build_cache(mesh, C0, -dtau);
    VecX zero = VecX::Zero(mesh.n_nodes());
    VecX Fp = residual_field(mesh, cp, zero);
    VecX Fm = residual_field(mesh, cm, zero);
    return (Fp - Fm) / (2.0 * dtau);
}

// Surrogate W^{2,2} norm: sqrt( sum_i m_i (u^2 + |grad u|^2 + |Hess u|^2) )
// with the metric of the cache and its lumped Sigma mass.
inline double sobolev2_norm(const Mesh& mesh, const GeometryCache& cache, const VecX& u) {
    LbOperators ops = assemble_lb(mesh, MetricMode::SigmaPullback, &cache);
    VecX m = ops.M * VecX::Ones(mesh.n_nodes());
    double acc = 0.0;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const PulledGeometry& geo = cache.pulled[i];
        HJet hj = cache.recovery.jet_at(i, u);
        Mat2 hess;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                double c = hj.d2h(a, b);
                for (int k = 0; k < 2; ++k) c -= geo.Gamma[k][a][b] * hj.dh[k];
                hess(a, b) = c;
            }
        double grad2 = hj.dh.dot(geo.ginv * hj.dh);
        double hess2 = (geo.ginv * hess * geo.ginv * hess.transpose()).trace();
        acc += m[i] * (hj.h * hj.h + grad2 + hess2);
    }
    return std::sqrt(std::max(acc, 0.0));
}

// Norm of a boundary trace, realized by its round-sphere harmonic extension.
inline double trace_norm(const Mesh& mesh, const GeometryCache& cache0, const SpMat& K_round,
                         const VecX& f) {
    VecX lift = harmonic_extension(mesh, K_round, f);
    return sobolev2_norm(mesh, cache0, lift);
}

// Seeded random boundary trace in the symmetric class, scaled to the target
// surrogate norm (zero everywhere but the truncation circles).
inline VecX random_symmetric_trace(const Mesh& mesh, const GeometryCache& cache0,
                                   const SpMat& K_round, std::uint64_t seed,
                                   double target_norm) {
    AnalyticField u = random_symmetric_field(seed);
    VecX vals = sample_field(mesh, u);
    VecX f = VecX::Zero(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (mesh.is_boundary(i)) f[i] = vals[i];
    f = symmetric_projection(mesh, f);
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (!mesh.is_boundary(i)) f[i] = 0.0;
    double n = trace_norm(mesh, cache0, K_round, f);
    if (n > 0.0) f *= target_norm / n;
    return f;
}

// Jacobian of the discrete residual at the iterate h: per-node analytic
// derivatives of the Step 1-3 chain composed with the recovery stencils.
inline SpMat residual_jacobian(const Mesh& mesh, const GeometryCache& cache, const VecX& h) {
    const int n = mesh.n_nodes();
    std::vector<std::vector<Triplet>> parts(n);
    parallel_for(n, [&](std::size_t i) {
        HJet hj = cache.recovery.jet_at(static_cast<int>(i), h);
        const auto& nb = cache.recovery.idx[i];
        const auto& W = cache.recovery.weights[i];
        double dF[6];
        for (int c = 0; c < 6; ++c) {
            HJet dir;
            if (c == 0) dir.h = 1.0;
            else if (c == 1) dir.dh = Vec2(1, 0);
            else if (c == 2) dir.dh = Vec2(0, 1);
            else if (c == 3) dir.d2h << 1, 0, 0, 0;
            else if (c == 4) dir.d2h << 0, 1, 1, 0;
            else dir.d2h << 0, 0, 0, 1;
            dF[c] = residual_point_derivative(hj, cache.tau, cache.pulled[i], dir);
        }
        auto& loc = parts[i];
        loc.reserve(nb.size() + 1);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            double w = dF[1] * W(0, k) + dF[2] * W(1, k) + dF[3] * W(2, k) + dF[4] * W(3, k) +
                       dF[5] * W(4, k);
            loc.emplace_back(static_cast<int>(i), nb[k], w);
        }
        loc.emplace_back(static_cast<int>(i), static_cast<int>(i), dF[0]);
    });
    std::vector<Triplet> t;
    for (const auto& p : parts) t.insert(t.end(), p.begin(), p.end());
    SpMat J(n, n);
    J.setFromTriplets(t.begin(), t.end());
    return J;
}

namespace detail {

// mass-weighted residual norm over the free nodes
inline double weighted_norm(const Mesh& mesh, const SpMat& M, const VecX& r) {
    VecX masked = r;
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (mesh.is_boundary(i)) masked[i] = 0.0;
    return std::sqrt(std::max(masked.dot(M * masked), 0.0));
}

}  // namespace detail

// Dirichlet problem F(h, tau) = 0, h = f on the truncation circles, by chord
// Newton with the Jacobian frozen at the origin (optionally matrix-free full
// Newton). f is a full-length vector; only boundary entries are read.
// h_init, when given, replaces the harmonic-extension start (continuation
// hook); run_embed_check skips the triangle scan on intermediate solves.
inline SolveResult newton_solve(const Mesh& mesh, const VecX& f, const SolveConfig& cfg,
                                const VecX* h_init = nullptr, bool run_embed_check = true) {
    BendParams bp{cfg.tau, cfg.C0, std::max(cfg.N0, 1), 0.0};
    bp.validate();
    if (std::abs(cfg.tau) > cfg.eta0 * (1.0 + 1e-12))
        throw std::invalid_argument("newton_solve: |tau| exceeds eta0");

    SolveResult res;
    const int n = mesh.n_nodes();

    // boundary data: class-consistent, inside the small-data gate
    VecX fproj = symmetric_projection(mesh, f);
    double fdev = 0.0;
    for (int i = 0; i < n; ++i)
        if (mesh.is_boundary(i)) fdev = std::max(fdev, std::abs(fproj[i] - f[i]));
    if (fdev > 1e-10)
        throw std::invalid_argument("newton_solve: boundary data is not in the symmetric class");

    GeometryCache cache0 = build_cache(mesh, cfg.C0, 0.0);
    LbOperators round = assemble_lb(mesh, MetricMode::RoundSphere);
    LbOperators sigma = assemble_lb(mesh, MetricMode::SigmaPullback, &cache0);

    res.trace_norm = trace_norm(mesh, cache0, round.K, fproj);
    if (res.trace_norm > cfg.delta0 * (1.0 + 1e-12))
        throw std::invalid_argument("newton_solve: ||f|| exceeds the small-data gate delta0");

    GeometryCache cache_tau_store;
    const GeometryCache* ct = &cache0;
    if (cfg.tau != 0.0) {
        cache_tau_store = build_cache(mesh, cfg.C0, cfg.tau);
        ct = &cache_tau_store;
    }

    // The linear solves run on the symmetric Dirichlet subspace, where the
    // operator is invertible whenever kernel_check is positive; the full-space
    // operator is nearly singular on other-class modes (the xz-antivariant one
    // sits at 2 + O(phi0^2), inside discretization error of 2).
    SpMat B = class_basis(mesh, SymClass::XzInvYzAnti, true);
    SpMat Bt = SpMat(B.transpose());
    SpMat L = linearized_operator(mesh, cache0);
    SpMat Lc = Bt * L * B;
    Eigen::SparseLU<SpMat> lu;
    lu.compute(Lc);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error(
            "newton_solve: linearized operator is singular on the symmetric Dirichlet space "
            "(kernel_check failed at this discretization?)");

    VecX h;
    if (h_init) {
        h = symmetric_projection(mesh, *h_init);
    } else {
        h = symmetric_projection(mesh, harmonic_extension(mesh, round.K, fproj));
    }
    for (int i = 0; i < n; ++i)
        if (mesh.is_boundary(i)) h[i] = fproj[i];

    // norm equivalence of the trace lift between g_0 and g_tau (expected <= 2)
    if (cfg.tau != 0.0) {
        double n0 = sobolev2_norm(mesh, cache0, h);
        double nt = sobolev2_norm(mesh, *ct, h);
        res.norm_ratio_tau = nt > 0.0 ? n0 / nt : 1.0;
    }

    bool aborted = false;
    VecX r;
    bool have_r = false;
    for (int k = 0; k <= cfg.max_iters; ++k) {
        if (!have_r) {
            try {
                r = residual_field(mesh, *ct, h);
            } catch (const std::domain_error& e) {
                res.note = std::string("aborted: ") + e.what();
                aborted = true;
                break;
            }
        }
        double rn = detail::weighted_norm(mesh, sigma.M, r);
        res.residual_history.push_back(rn);
        res.iterations = k;
        if (rn <= cfg.newton_tol) {
            res.converged = true;
            break;
        }
        if (k == cfg.max_iters) break;
        VecX rc = Bt * r;
        VecX wc;
        if (cfg.jacobian_mode == SolveConfig::Jacobian::ChordAtOrigin) {
            wc = lu.solve(-rc);
        } else {
            // true Newton: reassemble the analytic Jacobian at the iterate
            SpMat J = residual_jacobian(mesh, *ct, h);
            Eigen::SparseLU<SpMat> lu_j;
            lu_j.compute(SpMat(Bt * J * B));
            if (lu_j.info() != Eigen::Success) {
                res.note = "aborted: Jacobian singular at the iterate";
                aborted = true;
                break;
            }
            wc = lu_j.solve(-rc);
        }
        // monotone backtracking: the conformal weight 2/|A|^2 makes the
        // operator inverse large near the truncation rims, and full steps can
        // overshoot the domain gate or grow the residual
        auto try_direction = [&](const VecX& d) {
            double alpha = 1.0;
            for (int bt = 0; bt < 10; ++bt, alpha *= 0.5) {
                VecX r_try;
                try {
                    r_try = residual_field(mesh, *ct, h + alpha * d);
                } catch (const std::domain_error&) {
                    continue;
                }
                double rn_try = detail::weighted_norm(mesh, sigma.M, r_try);
                if (rn_try < rn * (1.0 - 1e-4 * alpha)) {
                    h += alpha * d;
                    r = std::move(r_try);
                    have_r = true;
                    return true;
                }
            }
            return false;
        };
        bool accepted = try_direction(symmetric_projection(mesh, B * wc));
        if (!accepted && cfg.jacobian_mode == SolveConfig::Jacobian::Full) {
            // fall back to the frozen chord direction
            VecX wc2 = lu.solve(-rc);
            accepted = try_direction(symmetric_projection(mesh, B * wc2));
        }
        if (!accepted) {
            res.note = "aborted: line search stalled";
            aborted = true;
            break;
        }
    }
    if (!res.converged && !aborted && res.note.empty())
        res.note = "no convergence within max_iters";

    res.h = h;
    res.symmetric = symmetry_defect(mesh, h) <= 1e-12;
    if (run_embed_check) {
        res.embed = embeddedness_check(mesh, *ct, h, false);
        res.embedded = res.embed.pass;
    }
    return res;
}

// --- N-handle core assembly --------------------------------------------------

struct CoreResult {
    EmbeddedMesh core;
    VecX h;        // solved field on the fundamental mesh (zero if not solved)
    VecX h_tilde;  // h / N, the graph field at the self-shrinker scale
    int chi = 0;
    int boundary_circles = 0;
    int handles = 0;
    double mirror_error = 0.0;
    double rescaled_residual_norm = 0.0;
    SolveResult solve;
};

// Rotate-and-fuse the fundamental graph mesh into the N-handle core at the
// self-shrinker scale. Seam nodes are shared by index between adjacent copies,
// so the assembled mesh is watertight with bitwise-identical shared nodes.
inline EmbeddedMesh assemble_core_mesh(const Mesh& mesh, const GeometryCache& cache,
                                       const VecX& h, int N) {
    if (cache.tau == 0.0 || std::abs(cache.tau * N - 1.0) > 1e-12)
        throw std::invalid_argument("assemble_core_mesh: cache tau must equal 1/N");
    const double tau = cache.tau;
    GraphMesh gm = embedded_graph_mesh(mesh, cache, h);
    const int n = mesh.n_nodes();
    const int nv = static_cast<int>(gm.mesh.verts.size());

    std::vector<Vec3> scaled(n);
    for (int i = 0; i < n; ++i) scaled[i] = scale(tau, gm.mesh.verts[i]);

    EmbeddedMesh core;
    core.verts.resize(static_cast<std::size_t>(N) * n);
    for (int k = 0; k < N; ++k) {
        double ang = 2.0 * kPi * k / N;
        double c = std::cos(ang), s = std::sin(ang);
        for (int i = 0; i < n; ++i) {
            const Vec3& p = scaled[i];
            core.verts[static_cast<std::size_t>(k) * n + i] =
                Vec3(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
        }
    }
    auto global_id = [&](int k, int v) {
        // lifted duplicates of copy k are the originals of copy k+1
        if (v < n) return k * n + v;
        return ((k + 1) % N) * n + gm.base[v];
    };
    core.tris.reserve(static_cast<std::size_t>(N) * gm.mesh.tris.size());
    for (int k = 0; k < N; ++k)
        for (const auto& t : gm.mesh.tris)
            core.tris.push_back({global_id(k, t[0]), global_id(k, t[1]), global_id(k, t[2])});
    (void)nv;
    return core;
}

// max distance from the reflected node set to the node set, for the mirror
// plane theta = alpha (containing the z-axis)
inline double mirror_defect(const EmbeddedMesh& core, double alpha) {
    double c = std::cos(2.0 * alpha), s = std::sin(2.0 * alpha);
    // hash nodes on a fine grid for nearest-point queries
    const double cell = 1e-3;
    std::map<std::array<long, 3>, std::vector<int>> grid;
    auto key = [&](const Vec3& p) {
        return std::array<long, 3>{static_cast<long>(std::floor(p.x() / cell)),
                                   static_cast<long>(std::floor(p.y() / cell)),
                                   static_cast<long>(std::floor(p.z() / cell))};
    };
    for (int i = 0; i < static_cast<int>(core.verts.size()); ++i)
        grid[key(core.verts[i])].push_back(i);
    double worst = 0.0;
    for (const auto& p : core.verts) {
        Vec3 q(c * p.x() + s * p.y(), s * p.x() - c * p.y(), p.z());
        double best = std::numeric_limits<double>::infinity();
        auto kq = key(q);
        for (long dx = -1; dx <= 1 && best > 0; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({kq[0] + dx, kq[1] + dy, kq[2] + dz});
                    if (it == grid.end()) continue;
                    for (int j : it->second) best = std::min(best, (core.verts[j] - q).norm());
                }
        worst = std::max(worst, std::isfinite(best) ? best : 1.0);
    }
    return worst;
}

// Theorem-style core construction: rescale the boundary data, solve the
// Dirichlet problem at tau = 1/N, scale back and replicate by the dihedral
// symmetry. f_tilde holds boundary values at the self-shrinker scale.
inline CoreResult solve_core(int N, double C, const VecX& f_tilde, const Mesh& mesh,
                             SolveConfig cfg) {
    if (N < cfg.N0)
        throw std::invalid_argument("solve_core: N below the N0 gate");
    cfg.tau = 1.0 / N;
    cfg.C0 = C;
    cfg.eta0 = std::max(cfg.eta0, cfg.tau);

    CoreResult out;
    GeometryCache cache0 = build_cache(mesh, C, 0.0);
    LbOperators round = assemble_lb(mesh, MetricMode::RoundSphere);
    double gate = cfg.delta0 / (2.0 * std::pow(static_cast<double>(N), cfg.gate_exponent));
    double fnorm = trace_norm(mesh, cache0, round.K, f_tilde);
    if (fnorm > gate * (1.0 + 1e-12))
        throw std::invalid_argument("solve_core: ||f_tilde|| exceeds delta0 / (2 N^e)");

    VecX f = static_cast<double>(N) * f_tilde;  // f = N f_tilde o H_{1/N}
    out.solve = newton_solve(mesh, f, cfg, nullptr, false);
    if (!out.solve.converged) {
        // The plain start leaves the ||h A|| < 1/2 domain for larger tau even
        // though the solution sits inside it; walk a tau ladder with linear
        // warm-start prediction and full-Newton polish.
        SolveConfig step = cfg;
        step.jacobian_mode = SolveConfig::Jacobian::Full;
        double tau_safe = std::min(cfg.tau, 1.0 / 16.0);
        int rungs = std::max(1, static_cast<int>(std::ceil((cfg.tau - tau_safe) / 0.015)));
        VecX h;
        double tau_prev = 0.0;
        bool have_h = false;
        {
            step.tau = tau_safe;
            SolveResult first = newton_solve(mesh, f, step, nullptr, false);
            if (!first.converged)
                throw std::runtime_error("solve_core: continuation base solve failed: " +
                                         first.note);
            h = first.h;
            tau_prev = tau_safe;
            have_h = true;
        }
        for (int j = 1; j <= rungs && have_h; ++j) {
            step.tau = tau_safe + (cfg.tau - tau_safe) * j / rungs;
            VecX guess = h * (step.tau / tau_prev);
            SolveResult sr = newton_solve(mesh, f, step, &guess, false);
            if (!sr.converged)
                throw std::runtime_error("solve_core: continuation rung failed at tau = " +
                                         std::to_string(step.tau) + ": " + sr.note);
            h = sr.h;
            tau_prev = step.tau;
            if (j == rungs) {
                out.solve = sr;
                out.solve.note = "tau continuation (" + std::to_string(rungs) + " rungs)";
            }
        }
    }
    out.h = out.solve.h;
    out.h_tilde = out.h / static_cast<double>(N);

    GeometryCache cache_tau = build_cache(mesh, C, cfg.tau);
    out.solve.embed = embeddedness_check(mesh, cache_tau, out.h, false);
    out.solve.embedded = out.solve.embed.pass;
    out.core = assemble_core_mesh(mesh, cache_tau, out.h, N);
    out.chi = out.core.euler_characteristic();
    out.boundary_circles = static_cast<int>(out.core.boundary_loops().size());
    out.handles = -out.chi / 2;

    double worst = 0.0;
    for (int k = 0; k < 2 * N; ++k) {
        double alpha = kPi / (2.0 * N) + k * kPi / N;
        worst = std::max(worst, mirror_defect(out.core, alpha));
    }
    out.mirror_error = worst;
    if (out.mirror_error > 1e-10)
        throw std::runtime_error("solve_core: reflection mismatch across mirror planes");

    VecX rres = rescaled_residual_field(mesh, cache_tau, out.h);
    LbOperators sigma = assemble_lb(mesh, MetricMode::SigmaPullback, &cache0);
    out.rescaled_residual_norm = detail::weighted_norm(mesh, sigma.M, rres);
    return out;
}

}  // namespace shrinker
