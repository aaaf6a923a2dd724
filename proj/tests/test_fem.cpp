#include <catch2/catch_amalgamated.hpp>

#include "shrinker/fem.hpp"

#include <map>

using namespace shrinker;

TEST_CASE("closed-sphere stiffness annihilates constants") {
    Mesh m = build_mesh(0.0, 3);
    LbOperators ops = assemble_lb(m, MetricMode::RoundSphere);
    VecX ones = VecX::Ones(m.n_nodes());
    REQUIRE((ops.K * ones).lpNorm<Eigen::Infinity>() < 1e-12);
    REQUIRE((ops.K - SpMat(ops.K.transpose())).norm() < 1e-13);
}

TEST_CASE("coordinate field has Rayleigh quotient 2 on the closed sphere") {
    Mesh m = build_mesh(0.0, 4);
    LbOperators ops = assemble_lb(m, MetricMode::RoundSphere);
    for (int axis = 0; axis < 3; ++axis) {
        VecX f(m.n_nodes());
        for (int i = 0; i < m.n_nodes(); ++i) f[i] = m.nodes[i](axis);
        double rq = f.dot(ops.K * f) / f.dot(ops.M * f);
        REQUIRE(rq == Catch::Approx(2.0).epsilon(0.02));
    }
}

TEST_CASE("mass quadrature reproduces the L2 norm of x") {
    Mesh m = build_mesh(0.0, 5);
    LbOperators ops = assemble_lb(m, MetricMode::RoundSphere);
    VecX x(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i) x[i] = m.nodes[i].x();
    double n2 = x.dot(ops.M * x);
    REQUIRE(n2 == Catch::Approx(4.0 * kPi / 3.0).epsilon(0.01));
}

TEST_CASE("conformal pullback keeps the stiffness and reweights only the mass") {
    Mesh m = build_mesh(std::acos(std::tanh(3.0)), 3);
    GeometryCache cache = build_cache(m, 3.0, 0.0);
    LbOperators round = assemble_lb(m, MetricMode::RoundSphere);
    LbOperators pulled = assemble_lb(m, MetricMode::SigmaPullback, &cache);
    REQUIRE((round.K - pulled.K).norm() == 0.0);
    REQUIRE((round.M - pulled.M).norm() > 1e-6);  // densities 2/|A|^2 differ from 1
    // total pulled mass approximates the area of Sigma_0
    double area = VecX::Ones(m.n_nodes()).dot(pulled.M * VecX::Ones(m.n_nodes()));
    REQUIRE(area > 4.0 * kPi);  // the Scherk patch is larger than its spherical image
}

TEST_CASE("bent-metric assembly is tau-continuous within its family") {
    Mesh m = build_mesh(0.3, 3);
    GeometryCache c1 = build_cache(m, 3.0, 0.01);
    GeometryCache c2 = build_cache(m, 3.0, 0.02);
    LbOperators b1 = assemble_lb(m, MetricMode::SigmaPullback, &c1);
    LbOperators b2 = assemble_lb(m, MetricMode::SigmaPullback, &c2);
    REQUIRE((b1.K - b2.K).norm() / b1.K.norm() < 0.10);
    REQUIRE((b1.M - b2.M).norm() / b1.M.norm() < 0.10);
    // area grows continuously with tau
    VecX ones = VecX::Ones(m.n_nodes());
    double a1 = ones.dot(b1.M * ones), a2 = ones.dot(b2.M * ones);
    REQUIRE(std::abs(a1 - a2) / a1 < 0.05);
}

TEST_CASE("degenerate triangles are rejected") {
    Mesh m;
    m.nodes = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1e-9, 1 - 1e-9, 0).normalized()};
    m.tris = {{0, 1, 2}};
    m.tag = {kInterior, kInterior, kInterior};
    REQUIRE_THROWS_AS(assemble_lb(m, MetricMode::RoundSphere), std::runtime_error);
}

TEST_CASE("harmonic extension: uniqueness, maximum principle, convergence") {
    double phi0 = 0.25;
    Mesh m = build_mesh(phi0, 3);
    LbOperators ops = assemble_lb(m, MetricMode::RoundSphere);

    VecX zero = VecX::Zero(m.n_nodes());
    VecX u0 = harmonic_extension(m, ops.K, zero);
    REQUIRE(u0.lpNorm<Eigen::Infinity>() < 1e-13);

    VecX xb = VecX::Zero(m.n_nodes());
    double bmin = 1e30, bmax = -1e30;
    for (int i = 0; i < m.n_nodes(); ++i)
        if (m.is_boundary(i)) {
            xb[i] = m.nodes[i].x();
            bmin = std::min(bmin, xb[i]);
            bmax = std::max(bmax, xb[i]);
        }
    VecX u = harmonic_extension(m, ops.K, xb);
    REQUIRE(u.maxCoeff() <= bmax + 1e-10);
    REQUIRE(u.minCoeff() >= bmin - 1e-10);

    // self-convergence under refinement: compare on shared nodes far from rims
    auto solve_at = [&](int r) {
        Mesh mr = build_mesh(phi0, r);
        LbOperators o = assemble_lb(mr, MetricMode::RoundSphere);
        VecX b = VecX::Zero(mr.n_nodes());
        for (int i = 0; i < mr.n_nodes(); ++i)
            if (mr.is_boundary(i)) b[i] = mr.nodes[i].x();
        return std::make_pair(mr, harmonic_extension(mr, o.K, b));
    };
    auto [m3, s3] = solve_at(3);
    auto [m4, s4] = solve_at(4);
    auto [m5, s5] = solve_at(5);
    auto diff_on_shared = [&](const Mesh& ma, const VecX& ua, const Mesh& mb, const VecX& ub) {
        std::map<std::array<double, 3>, int> lookup;
        for (int i = 0; i < mb.n_nodes(); ++i)
            lookup[{mb.nodes[i].x(), mb.nodes[i].y(), mb.nodes[i].z()}] = i;
        double worst = 0.0;
        for (int i = 0; i < ma.n_nodes(); ++i) {
            bool far = true;
            for (const auto& c : puncture_centers())
                if (std::acos(std::clamp(ma.nodes[i].dot(c), -1.0, 1.0)) < 2.5 * phi0) far = false;
            if (!far) continue;
            auto it = lookup.find({ma.nodes[i].x(), ma.nodes[i].y(), ma.nodes[i].z()});
            if (it == lookup.end()) continue;
            worst = std::max(worst, std::abs(ua[i] - ub[it->second]));
        }
        return worst;
    };
    double e34 = diff_on_shared(m3, s3, m4, s4);
    double e45 = diff_on_shared(m4, s4, m5, s5);
    REQUIRE(e45 < e34);
    REQUIRE(e45 < 0.6 * e34);  // roughly O(h^2) self-convergence
}
