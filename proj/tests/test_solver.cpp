#include <catch2/catch_amalgamated.hpp>

#include "shrinker/solver.hpp"

using namespace shrinker;

namespace {

Mesh make_mesh(int refinement = 3, double C0 = 3.0) {
    return build_mesh(std::acos(std::tanh(C0)), refinement);
}

VecX random_trace(const Mesh& mesh, const GeometryCache& cache0, const SpMat& K_round,
                  std::uint64_t seed, double target_norm) {
    return random_symmetric_trace(mesh, cache0, K_round, seed, target_norm);
}

}  // namespace

TEST_CASE("linearized operator matches the conformal route nodewise") {
    Mesh mesh = make_mesh(3);
    GeometryCache cache = build_cache(mesh, 3.0, 0.0);
    SpMat L = linearized_operator(mesh, cache);
    // independent route: (|A|^2/2)(Delta_{S^2} + 2) with sphere-metric
    // coefficients in the same charts and the same recovered jets
    VecX x(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i) x[i] = mesh.nodes[i].x();
    VecX u = symmetric_projection(mesh, x);
    VecX Lu = apply_linearized(mesh, L, u);
    for (int i = 0; i < mesh.n_nodes(); i += 3) {
        const ChartFrame& f = cache.frames[i];
        Jet2 uu = Jet2::variable(0.0, 0), vv = Jet2::variable(0.0, 1);
        Jet2V3 q = constant(f.n) + constant(f.e1) * uu + constant(f.e2) * vv;
        Jet2V3 nsph = q * inv(sqrt(dot(q, q)));
        FormsExt sph = fundamental_forms_ext(nsph, 1.0);
        HJet hj = cache.recovery.jet_at(i, u);
        double lap = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                double cov = hj.d2h(a, b);
                for (int k = 0; k < 2; ++k) cov -= sph.Gamma[k][a][b] * hj.dh[k];
                lap += sph.ginv(a, b) * cov;
            }
        double expected = 0.5 * cache.pulled[i].normA2 * (lap + 2.0 * hj.h);
        REQUIRE(Lu[i] == Catch::Approx(expected).margin(1e-10 * (1.0 + std::abs(expected))));
    }
}

TEST_CASE("linearized operator rejects fields outside the class") {
    Mesh mesh = make_mesh(2);
    GeometryCache cache = build_cache(mesh, 3.0, 0.0);
    SpMat L = linearized_operator(mesh, cache);
    VecX ones = VecX::Ones(mesh.n_nodes());
    REQUIRE_THROWS_AS(apply_linearized(mesh, L, ones), std::invalid_argument);
}

TEST_CASE("linearized operator is the derivative of the discrete residual") {
    Mesh mesh = make_mesh(3);
    GeometryCache cache = build_cache(mesh, 3.0, 0.0);
    SpMat L = linearized_operator(mesh, cache);
    AnalyticField uf = random_symmetric_field(5);
    VecX u = symmetric_projection(mesh, sample_field(mesh, uf));
    VecX Lu = L * u;
    double prev = -1.0;
    for (double eps : {1e-3, 5e-4, 2.5e-4}) {
        VecX F = residual_field(mesh, cache, eps * u);
        double err = ((F / eps) - Lu).lpNorm<Eigen::Infinity>();
        if (prev > 0.0) {
            double order = std::log2(prev / err);
            REQUIRE(order > 0.9);  // first order in eps
        }
        prev = err;
    }
}

TEST_CASE("tau derivative field is symmetric, nonzero, and step-robust") {
    Mesh mesh = make_mesh(3);
    VecX v5 = tau_derivative_field(mesh, 3.0, 1e-5);
    VecX v4 = tau_derivative_field(mesh, 3.0, 1e-4);
    REQUIRE(symmetry_defect(mesh, v5) < 1e-10);
    REQUIRE(v5.lpNorm<Eigen::Infinity>() > 1e-3);
    REQUIRE((v5 - v4).lpNorm<Eigen::Infinity>() <
            1e-4 * v5.lpNorm<Eigen::Infinity>() + 1e-6);
}

TEST_CASE("f = 0, tau = 0 returns h = 0 immediately") {
    Mesh mesh = make_mesh(3);
    SolveConfig cfg;
    cfg.refinement = 3;
    SolveResult res = newton_solve(mesh, VecX::Zero(mesh.n_nodes()), cfg);
    REQUIRE(res.converged);
    REQUIRE(res.iterations == 0);
    REQUIRE(res.h.lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE(res.residual_history.front() < 1e-10);
}

TEST_CASE("chord newton contracts inside the small-tau regime") {
    Mesh mesh = make_mesh(4);
    SolveConfig cfg;
    cfg.tau = 1.0 / 64.0;
    SolveResult res = newton_solve(mesh, VecX::Zero(mesh.n_nodes()), cfg);
    REQUIRE(res.converged);
    REQUIRE(res.iterations <= 14);
    REQUIRE(res.symmetric);
    REQUIRE(res.embedded);
    // h = O(tau), well inside the embeddedness bound
    REQUIRE(res.h.lpNorm<Eigen::Infinity>() < 0.05);
    REQUIRE(res.h.lpNorm<Eigen::Infinity>() > 1e-5);
    // contraction after the first step
    for (std::size_t k = 1; k + 1 < res.residual_history.size(); ++k)
        REQUIRE(res.residual_history[k + 1] < res.residual_history[k]);
    // the solved graph satisfies the rescaled equation to tol / tau
    GeometryCache ct = build_cache(mesh, 3.0, cfg.tau);
    VecX rres = rescaled_residual_field(mesh, ct, res.h);
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (mesh.is_boundary(i)) rres[i] = 0.0;
    GeometryCache c0 = build_cache(mesh, 3.0, 0.0);
    LbOperators sigma = assemble_lb(mesh, MetricMode::SigmaPullback, &c0);
    double n = std::sqrt(rres.dot(sigma.M * rres));
    REQUIRE(n <= cfg.newton_tol / cfg.tau * 1.01);
}

TEST_CASE("chord newton with random symmetric boundary data") {
    Mesh mesh = make_mesh(4);
    GeometryCache cache0 = build_cache(mesh, 3.0, 0.0);
    LbOperators round = assemble_lb(mesh, MetricMode::RoundSphere);
    VecX f = random_trace(mesh, cache0, round.K, 2024, 1e-3);
    SolveConfig cfg;
    cfg.tau = 1.0 / 64.0;
    SolveResult res = newton_solve(mesh, f, cfg);
    REQUIRE(res.converged);
    REQUIRE(res.iterations <= 14);
    REQUIRE(res.symmetric);
    REQUIRE(res.embedded);
    // residual history strictly decreasing after the first step
    for (std::size_t k = 1; k + 1 < res.residual_history.size(); ++k)
        REQUIRE(res.residual_history[k + 1] < res.residual_history[k]);
    // boundary exactness (Dirichlet elimination)
    VecX fproj = symmetric_projection(mesh, f);
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (mesh.is_boundary(i)) REQUIRE(res.h[i] == fproj[i]);
    // norm equivalence of the trace lift between the two metrics
    REQUIRE(res.norm_ratio_tau <= 2.0);
    REQUIRE(res.norm_ratio_tau >= 0.5);
}

TEST_CASE("chord newton at tau = 1/16 converges, but slowly") {
    // the contraction factor grows with tau (about 0.75 per step here), so the
    // iteration leaves the <= 12 iteration regime well before tau = 1/16
    Mesh mesh = make_mesh(4);
    SolveConfig cfg;
    cfg.tau = 1.0 / 16.0;
    cfg.max_iters = 120;
    SolveResult res = newton_solve(mesh, VecX::Zero(mesh.n_nodes()), cfg);
    REQUIRE(res.converged);
    REQUIRE(res.iterations > 12);
    REQUIRE(res.h.lpNorm<Eigen::Infinity>() == Catch::Approx(0.13).epsilon(0.2));
}

TEST_CASE("full newton reaches tau = 1/16 in a handful of steps") {
    Mesh mesh = make_mesh(4);
    GeometryCache cache0 = build_cache(mesh, 3.0, 0.0);
    LbOperators round = assemble_lb(mesh, MetricMode::RoundSphere);
    VecX f = random_trace(mesh, cache0, round.K, 99, 1e-3);
    SolveConfig cfg;
    cfg.tau = 1.0 / 16.0;
    cfg.jacobian_mode = SolveConfig::Jacobian::Full;
    SolveResult res = newton_solve(mesh, f, cfg);
    REQUIRE(res.converged);
    REQUIRE(res.iterations <= 9);
    REQUIRE(res.symmetric);
}

TEST_CASE("solutions depend Lipschitz-continuously on the boundary data") {
    Mesh mesh = make_mesh(4);
    GeometryCache cache0 = build_cache(mesh, 3.0, 0.0);
    LbOperators round = assemble_lb(mesh, MetricMode::RoundSphere);
    VecX f1 = random_trace(mesh, cache0, round.K, 7, 5e-4);
    SolveConfig cfg;
    cfg.tau = 1.0 / 64.0;
    SolveResult r0 = newton_solve(mesh, VecX::Zero(mesh.n_nodes()), cfg);
    SolveResult r1 = newton_solve(mesh, f1, cfg);
    SolveResult r2 = newton_solve(mesh, 2.0 * f1, cfg);
    REQUIRE(r1.converged);
    REQUIRE(r2.converged);
    double d1 = (r1.h - r0.h).lpNorm<Eigen::Infinity>();
    double d2 = (r2.h - r0.h).lpNorm<Eigen::Infinity>();
    REQUIRE(d2 / d1 == Catch::Approx(2.0).epsilon(0.25));
}

TEST_CASE("solver gates: tau, class, and norm violations are rejected") {
    Mesh mesh = make_mesh(2);
    SolveConfig cfg;
    cfg.tau = 0.2;  // beyond eta = 1/(2 C0)
    REQUIRE_THROWS_AS(newton_solve(mesh, VecX::Zero(mesh.n_nodes()), cfg),
                      std::invalid_argument);
    cfg.tau = 0.15;  // inside eta but beyond eta0 = 1/8
    REQUIRE_THROWS_AS(newton_solve(mesh, VecX::Zero(mesh.n_nodes()), cfg),
                      std::invalid_argument);
    cfg.tau = 1.0 / 16.0;
    VecX bad = VecX::Zero(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (mesh.is_boundary(i)) bad[i] = mesh.nodes[i].z();  // wrong class
    REQUIRE_THROWS_AS(newton_solve(mesh, bad, cfg), std::invalid_argument);
    GeometryCache cache0 = build_cache(mesh, 3.0, 0.0);
    LbOperators round = assemble_lb(mesh, MetricMode::RoundSphere);
    VecX big = random_trace(mesh, cache0, round.K, 3, 0.5);  // above delta0
    REQUIRE_THROWS_AS(newton_solve(mesh, big, cfg), std::invalid_argument);
}

TEST_CASE("core assembly: topology, symmetry, residual") {
    int N = 16;
    Mesh mesh = make_mesh(4);
    SolveConfig cfg;
    cfg.jacobian_mode = SolveConfig::Jacobian::Full;
    CoreResult core = solve_core(N, 3.0, VecX::Zero(mesh.n_nodes()), mesh, cfg);
    REQUIRE(core.solve.converged);
    REQUIRE(core.chi == -2 * N);
    REQUIRE(core.handles == N);
    REQUIRE(core.boundary_circles == 4);
    REQUIRE(core.mirror_error < 1e-10);
    REQUIRE(core.rescaled_residual_norm <= 2.0 * N * cfg.newton_tol);
    // watertight: no edge bordered by more than two triangles
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : core.core.tris)
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            edges[{std::min(a, b), std::max(a, b)}]++;
        }
    for (const auto& [e, c] : edges) REQUIRE(c <= 2);
    // cross-sections: x ~ +-C approaches the plane z = 0, z ~ +-C the unit cylinder
    double zmax_at_plane_end = 0.0;
    double cyl_dev = 0.0;
    for (const auto& v : core.core.verts) {
        double r = std::hypot(v.x(), v.y());
        if (r > std::exp(3.0 / N) * 0.995)
            zmax_at_plane_end = std::max(zmax_at_plane_end, std::abs(v.z()));
        if (std::abs(v.z()) > 3.0 / N * 0.97) cyl_dev = std::max(cyl_dev, std::abs(r - 1.0));
    }
    REQUIRE(zmax_at_plane_end < 0.05);  // outer rim hugs the plane
    REQUIRE(cyl_dev < 0.05);            // top/bottom rims hug the unit cylinder
}

TEST_CASE("core gates reject small N and oversized traces") {
    Mesh mesh = make_mesh(2);
    SolveConfig cfg;
    cfg.refinement = 2;
    REQUIRE_THROWS_AS(solve_core(4, 3.0, VecX::Zero(mesh.n_nodes()), mesh, cfg),
                      std::invalid_argument);
    GeometryCache cache0 = build_cache(mesh, 3.0, 0.0);
    LbOperators round = assemble_lb(mesh, MetricMode::RoundSphere);
    VecX f = random_trace(mesh, cache0, round.K, 1, 1e-3);  // above delta0/(2 N^3)
    REQUIRE_THROWS_AS(solve_core(8, 3.0, f, mesh, cfg), std::invalid_argument);
}
