#pragma once

#include "shrinker/common.hpp"

#include <algorithm>
#include <cmath>

namespace shrinker {

// Moller-style triangle/triangle overlap test (interval method on the plane
// intersection line, 2D separating axes for the coplanar case).
namespace tritri {

inline bool edge_edge_2d(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    };
    double o1 = orient(a0, a1, b0), o2 = orient(a0, a1, b1);
    double o3 = orient(b0, b1, a0), o4 = orient(b0, b1, a1);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

inline bool point_in_tri_2d(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    auto side = [&](const Vec2& u, const Vec2& v) {
        return (v.x() - u.x()) * (p.y() - u.y()) - (v.y() - u.y()) * (p.x() - u.x());
    };
    double d1 = side(a, b), d2 = side(b, c), d3 = side(c, a);
    bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
}

inline bool coplanar_overlap(const Vec3 t1[3], const Vec3 t2[3], const Vec3& normal) {
    int drop = 0;
    Vec3 an = normal.cwiseAbs();
    if (an.y() > an.x() && an.y() >= an.z()) drop = 1;
    else if (an.z() > an.x() && an.z() >= an.y()) drop = 2;
    auto proj = [&](const Vec3& v) {
        return drop == 0 ? Vec2(v.y(), v.z()) : drop == 1 ? Vec2(v.x(), v.z()) : Vec2(v.x(), v.y());
    };
    Vec2 a[3] = {proj(t1[0]), proj(t1[1]), proj(t1[2])};
    Vec2 b[3] = {proj(t2[0]), proj(t2[1]), proj(t2[2])};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (edge_edge_2d(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3])) return true;
    if (point_in_tri_2d(a[0], b[0], b[1], b[2])) return true;
    if (point_in_tri_2d(b[0], a[0], a[1], a[2])) return true;
    return false;
}

}  // namespace tritri

inline bool tri_tri_intersect(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& u0,
                              const Vec3& u1, const Vec3& u2) {
    const double eps = 1e-12;
    Vec3 t1[3] = {v0, v1, v2};
    Vec3 t2[3] = {u0, u1, u2};

    Vec3 n2 = (u1 - u0).cross(u2 - u0);
    double d2 = -n2.dot(u0);
    double dv[3];
    for (int i = 0; i < 3; ++i) {
        dv[i] = n2.dot(t1[i]) + d2;
        if (std::abs(dv[i]) < eps * n2.norm()) dv[i] = 0.0;
    }
    if ((dv[0] > 0 && dv[1] > 0 && dv[2] > 0) || (dv[0] < 0 && dv[1] < 0 && dv[2] < 0))
        return false;

    Vec3 n1 = (v1 - v0).cross(v2 - v0);
    double d1 = -n1.dot(v0);
    double du[3];
    for (int i = 0; i < 3; ++i) {
        du[i] = n1.dot(t2[i]) + d1;
        if (std::abs(du[i]) < eps * n1.norm()) du[i] = 0.0;
    }
    if ((du[0] > 0 && du[1] > 0 && du[2] > 0) || (du[0] < 0 && du[1] < 0 && du[2] < 0))
        return false;

    if (dv[0] == 0 && dv[1] == 0 && dv[2] == 0) return tritri::coplanar_overlap(t1, t2, n1);

    Vec3 dir = n1.cross(n2);
    int axis;
    dir.cwiseAbs().maxCoeff(&axis);

    // interval of one triangle on the intersection line
    auto interval = [&](const Vec3 t[3], const double d[3], double& lo, double& hi) {
        double p[3] = {t[0](axis), t[1](axis), t[2](axis)};
        // indices: the vertex on one side alone is placed in the middle
        int a, b, c;
        if (d[0] * d[1] > 0) { a = 0; b = 1; c = 2; }
        else if (d[0] * d[2] > 0) { a = 0; b = 2; c = 1; }
        else if (d[1] * d[2] > 0) { a = 1; b = 2; c = 0; }
        else if (d[0] != 0) { a = 1; b = 2; c = 0; }
        else if (d[1] != 0) { a = 0; b = 2; c = 1; }
        else if (d[2] != 0) { a = 0; b = 1; c = 2; }
        else { lo = hi = 0; return false; }
        double t1v = (d[c] != d[a]) ? p[a] + (p[c] - p[a]) * d[a] / (d[a] - d[c]) : p[a];
        double t2v = (d[c] != d[b]) ? p[b] + (p[c] - p[b]) * d[b] / (d[b] - d[c]) : p[b];
        lo = std::min(t1v, t2v);
        hi = std::max(t1v, t2v);
        return true;
    };
    double l1, h1, l2, h2;
    if (!interval(t1, dv, l1, h1)) return tritri::coplanar_overlap(t1, t2, n1);
    if (!interval(t2, du, l2, h2)) return tritri::coplanar_overlap(t1, t2, n1);
    return std::max(l1, l2) <= std::min(h1, h2);
}

}  // namespace shrinker
