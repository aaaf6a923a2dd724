#pragma once

#include "shrinker/scherk.hpp"

namespace shrinker {

// Bending map: wraps the yz-plane onto the cylinder of radius 1/tau about the
// line x = -1/tau, y = 0. Evaluated in cancellation-free form
//   ((e^{tau x}-1)/tau) cos(tau y) + (cos(tau y)-1)/tau
// with a 4th-order Taylor branch for very small |tau|.
inline Vec3 bend(double tau, const Vec3& p) {
    if (tau == 0.0) return p;
    double x = p.x(), y = p.y();
    if (std::abs(tau) < 1e-6) {
        double x2 = x * x, y2 = y * y;
        double xb = x + tau * (x2 - y2) / 2.0 + tau * tau * x * (x2 - 3.0 * y2) / 6.0 +
                    tau * tau * tau * (x2 * x2 - 6.0 * x2 * y2 + y2 * y2) / 24.0;
        double yb = y + tau * x * y + tau * tau * y * (3.0 * x2 - y2) / 6.0 +
                    tau * tau * tau * x * y * (x2 - y2) / 6.0;
        return Vec3(xb, yb, p.z());
    }
    double em = std::expm1(tau * x);
    double c = std::cos(tau * y), s = std::sin(tau * y);
    double sh = std::sin(tau * y / 2.0);
    double xb = (em * c) / tau - 2.0 * sh * sh / tau;
    double yb = (em + 1.0) * s / tau;
    return Vec3(xb, yb, p.z());
}

inline Mat3 bend_jacobian(double tau, const Vec3& p) {
    Mat3 J = Mat3::Identity();
    if (tau == 0.0) return J;
    double e = std::exp(tau * p.x());
    double c = std::cos(tau * p.y()), s = std::sin(tau * p.y());
    J(0, 0) = e * c;
    J(0, 1) = -e * s;
    J(1, 0) = e * s;
    J(1, 1) = e * c;
    return J;
}

inline Jet2V3 bend_jet(double tau, const Jet2V3& p) {
    if (tau == 0.0) return p;
    Jet2 tx = p[0] * tau, ty = p[1] * tau;
    Jet2 em = expm1(tx);
    Jet2 c = cos(ty), s = sin(ty);
    Jet2 sh = sin(ty * 0.5);
    Jet2 xb = em * c * (1.0 / tau) - sh * sh * (2.0 / tau);
    Jet2 yb = (em + 1.0) * s * (1.0 / tau);
    return {xb, yb, p[2]};
}

// Scaling map H_tau(x,y,z) = tau (x + 1/tau, y, z) = (tau x + 1, tau y, tau z).
inline Vec3 scale(double tau, const Vec3& p) {
    if (tau == 0.0) throw std::invalid_argument("scale: tau must be nonzero");
    return Vec3(tau * p.x() + 1.0, tau * p.y(), tau * p.z());
}

inline Jet2V3 scale_jet(double tau, const Jet2V3& p) {
    if (tau == 0.0) throw std::invalid_argument("scale: tau must be nonzero");
    return {p[0] * tau + 1.0, p[1] * tau, p[2] * tau};
}

// Deck transformation of the bent slab: the image of (x, y + 2pi, z) is the
// image of (x, y, z) rotated by 2 pi tau about the cylinder axis.
inline Vec3 bent_deck_translate(double tau, const Vec3& q) {
    if (tau == 0.0) return q + Vec3(0, 2.0 * kPi, 0);
    double a = 2.0 * kPi * tau;
    double c = std::cos(a), s = std::sin(a);
    double u = q.x() + 1.0 / tau, v = q.y();
    return Vec3(c * u - s * v - 1.0 / tau, s * u + c * v, q.z());
}

// Geometry of the bent surface Sigma_tau pulled back to Sigma_0, expressed in
// the canonical sphere chart of the base point.
struct PulledGeometry {
    Vec3 X;             // Phi_tau(p)
    Vec3 T1, T2;        // chart tangents of the bent immersion
    Vec3 nu;            // nu^{(0,tau)}
    Mat2 g, ginv, a, A; // A = g^{-1} a
    double H = 0, normA2 = 0;
    double Gamma[2][2][2];  // Christoffel symbols of g
    Mat2 gradA[2];          // covariant (∇_k A)
    Mat2 nu_pullback;
};

inline PulledGeometry pulled_geometry(double tau, const ChartFrame& frame,
                                      const ScherkPatch& patch) {
    Jet2V3 X0 = patch.sphere_chart_jet_raw(frame);
    FormsExt f = fundamental_forms_ext(bend_jet(tau, X0), frame.orient);
    PulledGeometry pg;
    pg.X = f.X;
    pg.T1 = f.T1;
    pg.T2 = f.T2;
    pg.nu = f.nu;
    pg.g = f.g;
    pg.ginv = f.ginv;
    pg.a = f.a;
    pg.A = f.A;
    pg.H = f.H;
    pg.normA2 = f.normA2;
    for (int k = 0; k < 2; ++k) {
        pg.gradA[k] = f.gradA[k];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) pg.Gamma[k][i][j] = f.Gamma[k][i][j];
    }
    pg.nu_pullback = f.nu_pullback;
    return pg;
}

inline PulledGeometry pulled_geometry(double tau, const SurfacePoint& p,
                                      const ScherkPatch& patch) {
    return pulled_geometry(tau, patch.frame_at(p), patch);
}

}  // namespace shrinker
