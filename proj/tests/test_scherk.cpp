#include <catch2/catch_amalgamated.hpp>

#include "shrinker/scherk.hpp"

#include <cmath>
#include <random>

using namespace shrinker;

namespace {
const ScherkPatch patch(3.0);

SurfacePoint point_from_xz(double x, double z, Sheet sheet = Sheet::A) {
    double s = std::sinh(x) * std::sinh(z);
    double y = sheet == Sheet::A ? std::asin(s) : kPi - std::asin(s);
    return patch.surface_point(x, y, z);
}

// uniform-ish random point of the punctured Gauss sphere, away from punctures
Vec3 random_sphere_point(std::mt19937_64& rng, double cap = 0.9) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (;;) {
        Vec3 n(dist(rng), dist(rng), dist(rng));
        if (n.norm() < 0.2 || n.norm() > 1.0) continue;
        n.normalize();
        if (std::abs(n.x()) <= cap && std::abs(n.z()) <= cap) return n;
    }
}
}  // namespace

TEST_CASE("implicit value at reference points") {
    REQUIRE(ScherkPatch::implicit_value(Vec3(0, 0, 0)) == 0.0);
    double s = std::log(1.0 + std::sqrt(2.0));  // asinh(1)
    REQUIRE(ScherkPatch::implicit_value(Vec3(s, kPi / 2, s)) ==
            Catch::Approx(0.0).margin(1e-15));
    // closed-form oracle: sin 0 - sinh(1)^2 = -1.3810978455418155
    REQUIRE(ScherkPatch::implicit_value(Vec3(1, 0, 1)) ==
            Catch::Approx(-1.3810978455418155).margin(1e-12));
}

TEST_CASE("gauss map at axis points") {
    SurfacePoint origin = patch.surface_point(0, 0, 0);
    Vec3 n = patch.gauss_map(origin);
    REQUIRE((n - Vec3(0, 1, 0)).norm() < 1e-15);

    SurfacePoint opposite = patch.surface_point(0, kPi, 0);
    Vec3 m = patch.gauss_map(opposite);
    REQUIRE((m - Vec3(0, -1, 0)).norm() < 1e-15);
}

TEST_CASE("gauss map is unit and orthogonal to the tangent plane") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dx(-2.0, 2.0), dz(-0.8, 0.8);
    int tested = 0;
    while (tested < 30) {
        double x = dx(rng), z = dz(rng);
        if (std::abs(std::sinh(x) * std::sinh(z)) > 0.95) continue;
        for (Sheet sheet : {Sheet::A, Sheet::B}) {
            SurfacePoint p = point_from_xz(x, z, sheet);
            Vec3 n = patch.gauss_map(p);
            REQUIRE(std::abs(n.norm() - 1.0) < 1e-14);
            // tangents from the graph chart
            Jet2V3 X = patch.graph_chart_jet(p);
            Vec3 t1 = value(deriv(X, 0)), t2 = value(deriv(X, 1));
            REQUIRE(std::abs(n.dot(t1)) / t1.norm() < 1e-10);
            REQUIRE(std::abs(n.dot(t2)) / t2.norm() < 1e-10);
        }
        ++tested;
    }
}

TEST_CASE("gauss map components at a diagonal point") {
    // x = 1, z = 0.5 on sheet A; components are (-tanh z, cos y/(cosh x cosh z), -tanh x)
    SurfacePoint p = point_from_xz(1.0, 0.5);
    Vec3 n = patch.gauss_map(p);
    REQUIRE(n.x() == Catch::Approx(-std::tanh(0.5)).margin(1e-14));
    REQUIRE(n.z() == Catch::Approx(-std::tanh(1.0)).margin(1e-14));
    REQUIRE(n.y() > 0.0);  // sheet A maps to the upper hemisphere
}

TEST_CASE("gauss map rejects off-surface points") {
    SurfacePoint bogus{1.0, 0.0, 1.0, Sheet::A};
    REQUIRE_THROWS_AS(patch.gauss_map(bogus), std::domain_error);
}

TEST_CASE("inverse gauss at sphere poles of y") {
    SurfacePoint p = patch.inverse_gauss(Vec3(0, 1, 0));
    REQUIRE(p.x == 0.0);
    REQUIRE(p.y == 0.0);
    REQUIRE(p.z == 0.0);
    SurfacePoint q = patch.inverse_gauss(Vec3(0, -1, 0));
    REQUIRE(q.y == Catch::Approx(kPi).margin(1e-15));
    REQUIRE(q.sheet == Sheet::B);
}

TEST_CASE("inverse gauss rejects puncture neighborhoods") {
    REQUIRE_THROWS_AS(patch.inverse_gauss(Vec3(0.999, 0.01, 0.0).normalized()),
                      std::domain_error);
}

TEST_CASE("gauss round trips") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        Vec3 n = random_sphere_point(rng);
        SurfacePoint p = patch.inverse_gauss(n);
        REQUIRE(std::abs(ScherkPatch::implicit_value(p.position())) < 1e-12);
        Vec3 m = patch.gauss_map(p);
        REQUIRE((m - n).norm() < 1e-10);
    }
    // surface -> sphere -> surface
    std::uniform_real_distribution<double> dx(-2.5, 2.5), dz(-0.9, 0.9);
    int tested = 0;
    while (tested < 100) {
        double x = dx(rng), z = dz(rng);
        if (std::abs(std::sinh(x) * std::sinh(z)) > 0.99) continue;
        for (Sheet sheet : {Sheet::A, Sheet::B}) {
            SurfacePoint p = point_from_xz(x, z, sheet);
            SurfacePoint q = patch.inverse_gauss(patch.gauss_map(p));
            REQUIRE(q.x == Catch::Approx(p.x).margin(1e-10));
            REQUIRE(q.y == Catch::Approx(p.y).margin(1e-10));
            REQUIRE(q.z == Catch::Approx(p.z).margin(1e-10));
        }
        ++tested;
    }
}

TEST_CASE("symmetry images stay on the surface and commute with the gauss map") {
    std::mt19937_64 rng(9);
    SurfacePoint origin = patch.surface_point(0, 0, 0);
    auto [rho0, sigma0] = patch.symmetry_images(origin);
    REQUIRE((rho0.position() - Vec3(0, 0, 0)).norm() == 0.0);
    REQUIRE((sigma0.position() - Vec3(0, kPi, 0)).norm() < 1e-15);

    double s = std::asinh(1.0);
    SurfacePoint mirror = patch.surface_point(s, kPi / 2, s);
    auto [rhom, sigmam] = patch.symmetry_images(mirror);
    REQUIRE((sigmam.position() - mirror.position()).norm() < 1e-15);

    for (int i = 0; i < 100; ++i) {
        Vec3 n = random_sphere_point(rng);
        SurfacePoint p = patch.inverse_gauss(n);
        auto [rho, sigma] = patch.symmetry_images(p);
        REQUIRE(std::abs(ScherkPatch::implicit_value(rho.position())) < 1e-12);
        REQUIRE(std::abs(ScherkPatch::implicit_value(sigma.position())) < 1e-12);
        // sigma corresponds to the xz-plane reflection of the sphere,
        // rho to the yz-plane reflection
        Vec3 ns = patch.gauss_map(sigma);
        REQUIRE((ns - Vec3(n.x(), -n.y(), n.z())).norm() < 1e-10);
        Vec3 nr = patch.gauss_map(rho);
        REQUIRE((nr - Vec3(-n.x(), n.y(), n.z())).norm() < 1e-10);
    }
}

TEST_CASE("shape data: minimal, no umbilics, conformal") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 60; ++i) {
        Vec3 n = random_sphere_point(rng);
        SurfacePoint p = patch.inverse_gauss(n);
        ShapeData s = patch.shape_data(p);
        // metric SPD
        REQUIRE(s.g(0, 0) > 0.0);
        REQUIRE(s.g.determinant() > 0.0);
        // minimality
        REQUIRE(std::abs(s.H) < 1e-10);
        // no umbilics
        REQUIRE(s.normA2 > 0.0);
        // conformality: nu* g_{S^2} = (|A|^2/2) g
        Mat2 lhs = s.nu_pullback;
        Mat2 rhs = 0.5 * s.normA2 * s.g;
        REQUIRE((lhs - rhs).norm() / s.g.norm() < 1e-6);
        // |A|^2 equals the trace of A^T A with the index raised by g
        Mat2 Aflat = s.g * s.A;  // a
        double tr = (s.g.inverse() * Aflat * s.g.inverse() * Aflat.transpose()).trace();
        REQUIRE(s.normA2 == Catch::Approx(tr).epsilon(1e-10));
    }
    // |A|^2 = 2 at the origin
    ShapeData s0 = patch.shape_data(patch.surface_point(0, 0, 0));
    REQUIRE(s0.normA2 == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("shape data agrees across charts") {
    std::mt19937_64 rng(17);
    int tested = 0;
    while (tested < 40) {
        Vec3 n = random_sphere_point(rng);
        SurfacePoint p = patch.inverse_gauss(n);
        if (std::abs(std::sinh(p.x) * std::sinh(p.z)) > 0.9) continue;
        ShapeData sph = patch.shape_data(p, ChartKind::Sphere);
        ShapeData gph = patch.shape_data(p, ChartKind::GraphXZ);
        // chart-invariant scalars
        REQUIRE(sph.normA2 == Catch::Approx(gph.normA2).epsilon(1e-9));
        REQUIRE(std::abs(sph.H - gph.H) < 1e-10);
        REQUIRE((sph.nu - gph.nu).norm() < 1e-11);
        ++tested;
    }
}

TEST_CASE("graph chart refuses the gluing-curve neighborhood") {
    double x = std::asinh(1.0), z = std::asinh(1.0);  // sinh x sinh z = 1
    SurfacePoint p = patch.surface_point(x, kPi / 2, z);
    REQUIRE_THROWS_AS(patch.graph_chart_jet(p), std::domain_error);
}

TEST_CASE("finite-difference mean curvature converges at second order") {
    std::mt19937_64 rng(21);
    std::vector<SurfacePoint> pts;
    for (int i = 0; i < 12; ++i) pts.push_back(patch.inverse_gauss(random_sphere_point(rng)));
    double prev = -1.0;
    double rate_min = 10.0;
    for (double step : {4e-3, 2e-3, 1e-3}) {
        double worst = 0.0;
        for (const auto& p : pts) worst = std::max(worst, std::abs(patch.shape_data_fd(p, step).H));
        if (prev > 0.0) rate_min = std::min(rate_min, std::log2(prev / worst));
        prev = worst;
    }
    REQUIRE(rate_min >= 1.8);
}

TEST_CASE("finite-difference conformality residual converges at second order") {
    std::mt19937_64 rng(23);
    std::vector<SurfacePoint> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(patch.inverse_gauss(random_sphere_point(rng)));
    double prev = -1.0;
    for (double step : {4e-3, 1e-3}) {
        double worst = 0.0;
        for (const auto& p : pts) {
            ShapeData s = patch.shape_data_fd(p, step);
            worst = std::max(worst, (s.nu_pullback - 0.5 * s.normA2 * s.g).norm() / s.g.norm());
        }
        if (prev > 0.0) REQUIRE(std::log2(prev / worst) / 2.0 >= 1.8);  // two halvings
        prev = worst;
    }
}

TEST_CASE("bend params validation") {
    BendParams ok{0.1, 3.0, 8, 0.0};
    ok.validate();
    REQUIRE(ok.eta_or_default() == Catch::Approx(1.0 / 6.0));
    BendParams bad_tau{0.2, 3.0, 8, 0.0};
    REQUIRE_THROWS_AS(bad_tau.validate(), std::invalid_argument);
    BendParams bad_eta{0.1, 3.0, 8, 0.3};
    REQUIRE_THROWS_AS(bad_eta.validate(), std::invalid_argument);
}
