#pragma once

#include "shrinker/common.hpp"

#include <array>
#include <cmath>

namespace shrinker {

// Truncated bivariate Taylor expansion of order 3. Coefficients are stored in
// monomial form, c[k] ~ (d^{i+j} f / du^i dv^j) / (i! j!), so products are
// plain truncated convolutions. Ten monomials:
//   1, u, v, u^2, uv, v^2, u^3, u^2 v, u v^2, v^3
struct Jet2 {
    static constexpr int kCount = 10;
    std::array<double, kCount> c{};

    Jet2() = default;
    explicit Jet2(double value) { c[0] = value; }

    static Jet2 variable(double value, int which) {
        Jet2 j(value);
        j.c[which == 0 ? 1 : 2] = 1.0;
        return j;
    }

    double value() const { return c[0]; }
    Vec2 grad() const { return Vec2(c[1], c[2]); }
    Mat2 hess() const {
        Mat2 h;
        h << 2.0 * c[3], c[4], c[4], 2.0 * c[5];
        return h;
    }

    Jet2 operator-() const {
        Jet2 r;
        for (int k = 0; k < kCount; ++k) r.c[k] = -c[k];
        return r;
    }
    Jet2& operator+=(const Jet2& o) {
        for (int k = 0; k < kCount; ++k) c[k] += o.c[k];
        return *this;
    }
    Jet2& operator-=(const Jet2& o) {
        for (int k = 0; k < kCount; ++k) c[k] -= o.c[k];
        return *this;
    }
    Jet2& operator*=(double s) {
        for (int k = 0; k < kCount; ++k) c[k] *= s;
        return *this;
    }

    // Partial derivative; the result is exact through order 2.
    Jet2 deriv(int which) const {
        // index -> (i, j) exponents
        static constexpr int I[kCount] = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0};
        static constexpr int J[kCount] = {0, 0, 1, 0, 1, 2, 0, 1, 2, 3};
        Jet2 r;
        for (int k = 0; k < kCount; ++k) {
            int i = I[k], j = J[k];
            if (which == 0 && i > 0) r.c[index(i - 1, j)] += i * c[k];
            if (which == 1 && j > 0) r.c[index(i, j - 1)] += j * c[k];
        }
        return r;
    }

    static constexpr int index(int i, int j) {
        // (i, j) with i + j <= 3
        constexpr int base[4] = {0, 1, 3, 6};
        return base[i + j] + j;
    }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator+(Jet2 a, double s) { a.c[0] += s; return a; }
inline Jet2 operator+(double s, Jet2 a) { a.c[0] += s; return a; }
inline Jet2 operator-(Jet2 a, double s) { a.c[0] -= s; return a; }
inline Jet2 operator-(double s, const Jet2& a) { return (-a) + s; }
inline Jet2 operator*(Jet2 a, double s) { return a *= s; }
inline Jet2 operator*(double s, Jet2 a) { return a *= s; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    static constexpr int I[Jet2::kCount] = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0};
    static constexpr int J[Jet2::kCount] = {0, 0, 1, 0, 1, 2, 0, 1, 2, 3};
    Jet2 r;
    for (int p = 0; p < Jet2::kCount; ++p) {
        if (a.c[p] == 0.0) continue;
        for (int q = 0; q < Jet2::kCount; ++q) {
            int i = I[p] + I[q], j = J[p] + J[q];
            if (i + j <= 3) r.c[Jet2::index(i, j)] += a.c[p] * b.c[q];
        }
    }
    return r;
}

// f(g(u,v)) from the first three derivatives of f at g's base value.
inline Jet2 compose(double f0, double f1, double f2, double f3, const Jet2& g) {
    Jet2 d = g;
    d.c[0] = 0.0;  // nilpotent part
    Jet2 d2 = d * d;
    Jet2 d3 = d2 * d;
    Jet2 r = d3 * (f3 / 6.0);
    r += d2 * (f2 / 2.0);
    r += d * f1;
    r.c[0] += f0;
    return r;
}

inline Jet2 inv(const Jet2& g) {
    double x = g.c[0];
    double x2 = 1.0 / (x * x);
    return compose(1.0 / x, -x2, 2.0 * x2 / x, -6.0 * x2 * x2 * x, g);
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inv(b); }
inline Jet2 operator/(const Jet2& a, double s) { return a * (1.0 / s); }
inline Jet2 operator/(double s, const Jet2& b) { return inv(b) * s; }

inline Jet2 sqrt(const Jet2& g) {
    double s = std::sqrt(g.c[0]);
    return compose(s, 0.5 / s, -0.25 / (s * s * s), 0.375 / (s * s * s * s * s), g);
}
inline Jet2 exp(const Jet2& g) {
    double e = std::exp(g.c[0]);
    return compose(e, e, e, e, g);
}
inline Jet2 expm1(const Jet2& g) {
    double e = std::exp(g.c[0]);
    return compose(std::expm1(g.c[0]), e, e, e, g);
}
inline Jet2 sin(const Jet2& g) {
    double s = std::sin(g.c[0]), c = std::cos(g.c[0]);
    return compose(s, c, -s, -c, g);
}
inline Jet2 cos(const Jet2& g) {
    double s = std::sin(g.c[0]), c = std::cos(g.c[0]);
    return compose(c, -s, -c, s, g);
}
inline Jet2 sinh(const Jet2& g) {
    double s = std::sinh(g.c[0]), c = std::cosh(g.c[0]);
    return compose(s, c, s, c, g);
}
inline Jet2 cosh(const Jet2& g) {
    double s = std::sinh(g.c[0]), c = std::cosh(g.c[0]);
    return compose(c, s, c, s, g);
}
inline Jet2 asin(const Jet2& g) {
    double x = g.c[0];
    double w = 1.0 - x * x;
    double r = 1.0 / std::sqrt(w);
    return compose(std::asin(x), r, x * r / w, (1.0 + 2.0 * x * x) * r / (w * w), g);
}
inline Jet2 atanh(const Jet2& g) {
    double x = g.c[0];
    double w = 1.0 / (1.0 - x * x);
    return compose(std::atanh(x), w, 2.0 * x * w * w, (2.0 + 6.0 * x * x) * w * w * w, g);
}

// atan2 of jets through the angle-difference identity
//   atan2(Y, X) = atan2(Y0, X0) + atan((X0 Y - Y0 X) / (X0 X + Y0 Y)),
// valid near the base point whenever X0^2 + Y0^2 > 0; no branch-cut issues
// because the correction term has zero constant part.
inline Jet2 atan2(const Jet2& y, const Jet2& x) {
    double x0 = x.c[0], y0 = y.c[0];
    Jet2 num = x * (-y0) + y * x0;
    Jet2 den = x * x0 + y * y0;
    Jet2 w = num / den;  // zero constant part
    // atan at 0: f' = 1, f'' = 0, f''' = -2
    Jet2 r = compose(0.0, 1.0, 0.0, -2.0, w);
    r.c[0] = std::atan2(y0, x0);
    return r;
}

// --- 3-vectors of jets ------------------------------------------------------

using Jet2V3 = std::array<Jet2, 3>;

inline Jet2V3 operator+(const Jet2V3& a, const Jet2V3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Jet2V3 operator-(const Jet2V3& a, const Jet2V3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Jet2V3 operator*(const Jet2V3& a, const Jet2& s) {
    return {a[0] * s, a[1] * s, a[2] * s};
}
inline Jet2V3 operator*(const Jet2V3& a, double s) {
    return {a[0] * s, a[1] * s, a[2] * s};
}
inline Jet2 dot(const Jet2V3& a, const Jet2V3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Jet2V3 cross(const Jet2V3& a, const Jet2V3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline Jet2V3 deriv(const Jet2V3& a, int which) {
    return {a[0].deriv(which), a[1].deriv(which), a[2].deriv(which)};
}
inline Vec3 value(const Jet2V3& a) { return Vec3(a[0].c[0], a[1].c[0], a[2].c[0]); }
inline Jet2V3 constant(const Vec3& v) { return {Jet2(v.x()), Jet2(v.y()), Jet2(v.z())}; }

}  // namespace shrinker
