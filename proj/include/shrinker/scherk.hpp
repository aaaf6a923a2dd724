#pragma once

#include "shrinker/jet2.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace shrinker {

// The singly periodic Scherk surface  sin y = sinh x sinh z, restricted to the
// fundamental slab y in (-pi/2, 3pi/2] and truncated by |x|, |z| <= C0.
// Sheet A carries cos y >= 0, sheet B carries cos y < 0; the slab edges
// y = -pi/2 and y = 3pi/2 are identified (seam), with the tie at y = -pi/2
// kept on sheet A.

enum class Sheet { A, B };

struct SurfacePoint {
    double x = 0, y = 0, z = 0;
    Sheet sheet = Sheet::A;
    Vec3 position() const { return Vec3(x, y, z); }
};

struct BendParams {
    double tau = 0.0;
    double C0 = 3.0;
    int N = 8;          // handle count
    double eta = 0.0;   // bending bound; defaults to 1/(2 C0)

    double eta_or_default() const { return eta > 0.0 ? eta : 1.0 / (2.0 * C0); }

    void validate() const {
        if (C0 <= 0.0) throw std::invalid_argument("BendParams: C0 must be positive");
        if (N < 1) throw std::invalid_argument("BendParams: N must be a positive integer");
        double e = eta_or_default();
        if (!(e > 0.0) || e > 1.0 / (2.0 * C0) + 1e-15)
            throw std::invalid_argument("BendParams: eta must satisfy 0 < eta <= 1/(2 C0)");
        if (std::abs(tau) >= e)
            throw std::invalid_argument("BendParams: |tau| must be < eta");
    }
};

inline double normalize_slab_y(double y) {
    while (y < -kPi / 2.0) y += 2.0 * kPi;
    while (y > 3.0 * kPi / 2.0) y -= 2.0 * kPi;
    return y;
}

inline Sheet sheet_of(double y) { return y <= kPi / 2.0 ? Sheet::A : Sheet::B; }

// Canonical tangent chart at a point of the Gauss sphere. The chart map is
// n(u) = normalize(n + u1 e1 + u2 e2); y_lift is the branch constant that puts
// the surface y coordinate into the fundamental slab, and orient is the sign
// relating the chart cross-product normal to the analytic Gauss map.
struct ChartFrame {
    Vec3 n, e1, e2;
    double y_lift = 0.0;    // branch constant added to the raw atan2 jet value
    double y_center = 0.0;  // slab-lifted y of the chart center
    double orient = 1.0;
};

// First and second fundamental data of an immersion given as an order >= 2
// chart jet. All 2x2 tensors are chart components.
struct FormsCore {
    Vec3 X, T1, T2, nu;
    Mat2 g, ginv, a, A;
    double H = 0, normA2 = 0;
};

// Adds the tensor derivatives available from an order-3 jet.
struct FormsExt : FormsCore {
    Mat2 dg[2];             // chart derivative of g
    double Gamma[2][2][2];  // Gamma[k][i][j] = Γ^k_ij
    Mat2 gradA[2];          // covariant derivative (∇_k A)
    Mat2 nu_pullback;       // (∂_i ν)·(∂_j ν), the Gauss-map pullback metric
};

inline FormsCore fundamental_forms(const Jet2V3& X, double orient) {
    FormsCore f;
    Jet2V3 Xu = deriv(X, 0), Xv = deriv(X, 1);
    f.X = value(X);
    f.T1 = value(Xu);
    f.T2 = value(Xv);
    Jet2V3 C = cross(Xu, Xv);
    Jet2V3 nu = C * (inv(sqrt(dot(C, C))) * orient);
    f.nu = value(nu);
    Jet2 guu = dot(Xu, Xu), guv = dot(Xu, Xv), gvv = dot(Xv, Xv);
    f.g << guu.value(), guv.value(), guv.value(), gvv.value();
    Jet2V3 Xuu = deriv(Xu, 0), Xuv = deriv(Xu, 1), Xvv = deriv(Xv, 1);
    Jet2 auu = dot(Xuu, nu), auv = dot(Xuv, nu), avv = dot(Xvv, nu);
    f.a << auu.value(), auv.value(), auv.value(), avv.value();
    f.ginv = f.g.inverse();
    f.A = f.ginv * f.a;
    f.H = f.A.trace();
    f.normA2 = (f.A * f.A).trace();
    return f;
}

inline FormsExt fundamental_forms_ext(const Jet2V3& X, double orient) {
    FormsExt f;
    static_cast<FormsCore&>(f) = fundamental_forms(X, orient);
    Jet2V3 Xu = deriv(X, 0), Xv = deriv(X, 1);
    Jet2V3 C = cross(Xu, Xv);
    Jet2V3 nu = C * (inv(sqrt(dot(C, C))) * orient);
    Jet2 gj[2][2] = {{dot(Xu, Xu), dot(Xu, Xv)}, {dot(Xu, Xv), dot(Xv, Xv)}};
    Jet2V3 Xij[2][2] = {{deriv(Xu, 0), deriv(Xu, 1)}, {deriv(Xu, 1), deriv(Xv, 1)}};
    Jet2 aj[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) aj[i][j] = dot(Xij[i][j], nu);

    Mat2 da[2];
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                f.dg[k](i, j) = gj[i][j].c[k == 0 ? 1 : 2];
                da[k](i, j) = aj[i][j].c[k == 0 ? 1 : 2];
            }
    }
    // Christoffel symbols of g
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0;
                for (int l = 0; l < 2; ++l)
                    s += f.ginv(k, l) * (f.dg[i](j, l) + f.dg[j](i, l) - f.dg[l](i, j));
                f.Gamma[k][i][j] = 0.5 * s;
            }
    // covariant derivative of A = g^{-1} a
    for (int k = 0; k < 2; ++k) {
        Mat2 dA = f.ginv * (da[k] - f.dg[k] * f.A);
        Mat2 corr;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0;
                for (int m = 0; m < 2; ++m)
                    s += f.Gamma[i][k][m] * f.A(m, j) - f.Gamma[m][k][j] * f.A(i, m);
                corr(i, j) = s;
            }
        f.gradA[k] = dA + corr;
    }
    Vec3 dnu[2] = {value(deriv(nu, 0)), value(deriv(nu, 1))};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) f.nu_pullback(i, j) = dnu[i].dot(dnu[j]);
    return f;
}

enum class ChartKind { Sphere, GraphXZ };

struct ShapeData {
    Mat2 g, a, A;
    double normA2 = 0, H = 0;
    Vec3 nu;
    Mat2 nu_pullback;  // ν* g_{S²} in the same chart
};

class ScherkPatch {
  public:
    explicit ScherkPatch(double C0) : C0_(C0) {
        if (C0 <= 0.0) throw std::invalid_argument("ScherkPatch: C0 must be positive");
    }

    double C0() const { return C0_; }
    // Gauss images of the truncation curves are circles of this geodesic radius.
    double phi0() const { return std::acos(std::tanh(C0_)); }

    static double implicit_value(const Vec3& p) {
        return std::sin(p.y()) - std::sinh(p.x()) * std::sinh(p.z());
    }

    SurfacePoint surface_point(double x, double y, double z) const {
        y = normalize_slab_y(y);
        Vec3 p(x, y, z);
        if (std::abs(implicit_value(p)) > 1e-10)
            throw std::domain_error("surface_point: not on the Scherk surface");
        if (std::abs(x) > C0_ + 1e-12 || std::abs(z) > C0_ + 1e-12)
            throw std::domain_error("surface_point: outside the truncation box");
        return SurfacePoint{x, y, z, sheet_of(y)};
    }

    // Unit normal; orientation fixed by nu(0,0,0) = (0,1,0), equivalently
    // nu = grad(sin y - sinh x sinh z) normalized. Sheet A maps to the upper
    // (n_y >= 0) hemisphere.
    Vec3 gauss_map(const SurfacePoint& p) const {
        if (std::abs(implicit_value(p.position())) > 1e-10)
            throw std::domain_error("gauss_map: point is off-surface");
        double cx = std::cosh(p.x), cz = std::cosh(p.z);
        return Vec3(-std::tanh(p.z), std::cos(p.y) / (cx * cz), -std::tanh(p.x));
    }

    // Inverse of the Gauss map on the four-times punctured sphere
    //   S²_{φ₀} = { |n_x| <= cos φ₀, |n_z| <= cos φ₀ }.
    SurfacePoint inverse_gauss(const Vec3& n) const {
        double lim = std::cos(phi0()) + 1e-12;
        if (std::abs(n.x()) > lim || std::abs(n.z()) > lim)
            throw std::domain_error("inverse_gauss: point is inside a puncture disc");
        double x = -std::atanh(n.z());
        double z = -std::atanh(n.x());
        double y = std::atan2(n.x() * n.z(), n.y());
        if (y < -kPi / 2.0) y += 2.0 * kPi;  // lift to (-pi/2, 3pi/2]; tie stays on sheet A
        return SurfacePoint{x, y, z, sheet_of(y)};
    }

    // rho: 180° rotation about the x-axis; sigma: reflection across y = pi/2.
    std::pair<SurfacePoint, SurfacePoint> symmetry_images(const SurfacePoint& p) const {
        SurfacePoint rho = surface_point(p.x, -p.y, -p.z);
        SurfacePoint sigma = surface_point(p.x, kPi - p.y, p.z);
        return {rho, sigma};
    }

    ChartFrame frame_at(const SurfacePoint& p) const {
        ChartFrame f;
        f.n = gauss_map(p);
        f.y_center = p.y;
        Vec3 a = std::abs(f.n.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
        f.e1 = a.cross(f.n).normalized();
        f.e2 = f.n.cross(f.e1);
        // anchor the branch lift to the jet pipeline's own atan2 value (the
        // double path can disagree about the sign of pi on the seam)
        Jet2V3 probe = sphere_chart_jet_raw(f);
        f.y_lift = 2.0 * kPi * std::round((p.y - probe[1].value()) / (2.0 * kPi));
        Vec3 c = value(deriv(probe, 0)).cross(value(deriv(probe, 1)));
        f.orient = c.dot(f.n) >= 0.0 ? 1.0 : -1.0;
        return f;
    }

    // Order-3 jet of the immersion S²_{φ₀} -> Σ₀ through the chart of `f`.
    Jet2V3 sphere_chart_jet_raw(const ChartFrame& f) const {
        Jet2 u = Jet2::variable(0.0, 0), v = Jet2::variable(0.0, 1);
        Jet2V3 q = constant(f.n) + constant(f.e1) * u + constant(f.e2) * v;
        Jet2V3 n = q * inv(sqrt(dot(q, q)));
        Jet2 x = -atanh(n[2]);
        Jet2 z = -atanh(n[0]);
        Jet2 y = atan2(n[0] * n[2], n[1]);
        y.c[0] += f.y_lift;
        return {x, y, z};
    }

    // Plain-double chart evaluation (used by the finite-difference cross-checks).
    Vec3 sphere_chart_point(const ChartFrame& f, const Vec2& u) const {
        Vec3 q = (f.n + u.x() * f.e1 + u.y() * f.e2).normalized();
        double x = -std::atanh(q.z());
        double z = -std::atanh(q.x());
        double y = std::atan2(q.x() * q.z(), q.y());
        y += 2.0 * kPi * std::round((f.y_center - y) / (2.0 * kPi));
        return Vec3(x, y, z);
    }

    // Graph chart (x,z) -> (x, y(x,z), z); degenerates along |sinh x sinh z| = 1.
    Jet2V3 graph_chart_jet(const SurfacePoint& p) const {
        double s0 = std::sinh(p.x) * std::sinh(p.z);
        if (std::abs(s0) > 1.0 - 1e-6)
            throw std::domain_error(
                "graph_chart_jet: (x,z) chart degenerates near the sheet-gluing curves; "
                "use the sphere chart");
        Jet2 x = Jet2::variable(p.x, 0), z = Jet2::variable(p.z, 1);
        Jet2 s = sinh(x) * sinh(z);
        Jet2 y = p.sheet == Sheet::A ? asin(s) : kPi - asin(s);
        return {x, y, z};
    }

    ShapeData shape_data(const SurfacePoint& p, ChartKind chart = ChartKind::Sphere) const {
        FormsExt f;
        if (chart == ChartKind::Sphere) {
            ChartFrame fr = frame_at(p);
            f = fundamental_forms_ext(sphere_chart_jet_raw(fr), fr.orient);
        } else {
            Jet2V3 X = graph_chart_jet(p);
            Vec3 c = value(deriv(X, 0)).cross(value(deriv(X, 1)));
            double orient = c.dot(gauss_map(p)) >= 0.0 ? 1.0 : -1.0;
            f = fundamental_forms_ext(X, orient);
        }
        return ShapeData{f.g, f.a, f.A, f.normA2, f.H, f.nu, f.nu_pullback};
    }

    // Finite-difference variant of shape_data in the sphere chart (independent
    // cross-check of the jet pipeline; second-order central differences).
    ShapeData shape_data_fd(const SurfacePoint& p, double step) const {
        ChartFrame fr = frame_at(p);
        auto P = [&](double u, double v) { return sphere_chart_point(fr, Vec2(u, v)); };
        double d = step;
        Vec3 X0 = P(0, 0);
        Vec3 Xu = (P(d, 0) - P(-d, 0)) / (2 * d);
        Vec3 Xv = (P(0, d) - P(0, -d)) / (2 * d);
        Vec3 Xuu = (P(d, 0) - 2 * X0 + P(-d, 0)) / (d * d);
        Vec3 Xvv = (P(0, d) - 2 * X0 + P(0, -d)) / (d * d);
        Vec3 Xuv = (P(d, d) - P(d, -d) - P(-d, d) + P(-d, -d)) / (4 * d * d);
        Vec3 nu = (Xu.cross(Xv)).normalized() * fr.orient;
        ShapeData s;
        s.g << Xu.dot(Xu), Xu.dot(Xv), Xu.dot(Xv), Xv.dot(Xv);
        s.a << Xuu.dot(nu), Xuv.dot(nu), Xuv.dot(nu), Xvv.dot(nu);
        s.A = s.g.inverse() * s.a;
        s.H = s.A.trace();
        s.normA2 = (s.A * s.A).trace();
        s.nu = nu;
        Vec3 Nu = (gauss_of(P(d, 0)) - gauss_of(P(-d, 0))) / (2 * d);
        Vec3 Nv = (gauss_of(P(0, d)) - gauss_of(P(0, -d))) / (2 * d);
        s.nu_pullback << Nu.dot(Nu), Nu.dot(Nv), Nu.dot(Nv), Nv.dot(Nv);
        return s;
    }

  private:
    Vec3 gauss_of(const Vec3& p) const {
        double cx = std::cosh(p.x()), cz = std::cosh(p.z());
        return Vec3(-std::tanh(p.z()), std::cos(p.y()) / (cx * cz), -std::tanh(p.x()));
    }

    double C0_;
};

}  // namespace shrinker
