#pragma once

#include "shrinker/geometry_cache.hpp"

namespace shrinker {

enum class MetricMode { RoundSphere, SigmaPullback };

struct LbOperators {
    SpMat K;  // stiffness (weak -Laplacian), symmetric positive semidefinite
    SpMat M;  // consistent mass
};

namespace detail {

inline void check_triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
    double lmax2 = std::max({(a - b).squaredNorm(), (b - c).squaredNorm(), (c - a).squaredNorm()});
    double area = 0.5 * (b - a).cross(c - a).norm();
    if (!(area > 0.0) || lmax2 / (4.0 * area) > 50.0)
        throw std::runtime_error("assemble_lb: degenerate triangle (aspect ratio beyond threshold)");
}

inline void add_cotan(const Vec3& pa, const Vec3& pb, const Vec3& pc, int a, int b, int c,
                      std::vector<Triplet>& out) {
    auto corner = [&](const Vec3& q0, const Vec3& q1, const Vec3& q2, int i1, int i2) {
        Vec3 u = q1 - q0, v = q2 - q0;
        double cot = u.dot(v) / u.cross(v).norm();
        out.emplace_back(i1, i2, -0.5 * cot);
        out.emplace_back(i2, i1, -0.5 * cot);
        out.emplace_back(i1, i1, 0.5 * cot);
        out.emplace_back(i2, i2, 0.5 * cot);
    };
    corner(pa, pb, pc, b, c);
    corner(pb, pc, pa, c, a);
    corner(pc, pa, pb, a, b);
}

// consistent mass with P1-interpolated density, exact integration:
// ∫ φi φj φk = 2A i!j!k!/(i+j+k+2)!
inline void add_mass(double area, const std::array<int, 3>& t, const double* density,
                     std::vector<Triplet>& out) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double m = 0.0;
            for (int k = 0; k < 3; ++k) {
                double coeff;
                if (i == j && j == k) coeff = 1.0 / 10.0;
                else if (i != j && j != k && i != k) coeff = 1.0 / 60.0;
                else coeff = 1.0 / 30.0;
                m += coeff * density[t[k]];
            }
            out.emplace_back(t[i], t[j], area * m);
        }
}

}  // namespace detail

// Piecewise-linear Galerkin stiffness and mass. RoundSphere assembles on the
// chordal sphere mesh. SigmaPullback at tau = 0 uses the conformal structure:
// the 2D Dirichlet energy is conformally invariant, so the stiffness matrix is
// the round-sphere one unchanged and only the mass matrix picks up the factor
// 2/|A|^2. For tau != 0 both matrices are assembled on the bent image mesh.
inline LbOperators assemble_lb(const Mesh& mesh, MetricMode mode,
                               const GeometryCache* cache = nullptr) {
    const int n = mesh.n_nodes();
    std::vector<Triplet> kt, mt;
    kt.reserve(mesh.tris.size() * 12);
    mt.reserve(mesh.tris.size() * 9);

    if (mode == MetricMode::RoundSphere || cache == nullptr || cache->tau == 0.0) {
        std::vector<double> density(n, 1.0);
        if (mode == MetricMode::SigmaPullback) {
            if (cache == nullptr)
                throw std::invalid_argument("assemble_lb: SigmaPullback needs a GeometryCache");
            for (int i = 0; i < n; ++i) density[i] = 1.0 / cache->conformal[i];  // 2/|A|^2
        }
        for (const auto& t : mesh.tris) {
            const Vec3 &a = mesh.nodes[t[0]], &b = mesh.nodes[t[1]], &c = mesh.nodes[t[2]];
            detail::check_triangle_quality(a, b, c);
            detail::add_cotan(a, b, c, t[0], t[1], t[2], kt);
            double area = 0.5 * (b - a).cross(c - a).norm();
            detail::add_mass(area, t, density.data(), mt);
        }
    } else {
        // bent image mesh, seam-consistent corner positions
        std::vector<double> unit(n, 1.0);
        for (const auto& t : mesh.tris) {
            std::array<Vec3, 3> q;
            std::array<double, 3> y;
            for (int k = 0; k < 3; ++k) {
                q[k] = cache->pulled[t[k]].X;
                y[k] = cache->points[t[k]].y;
            }
            for (int guard = 0; guard < 3; ++guard) {
                auto mn = std::min_element(y.begin(), y.end()) - y.begin();
                auto mx = std::max_element(y.begin(), y.end()) - y.begin();
                if (y[mx] - y[mn] <= kPi) break;
                y[mn] += 2.0 * kPi;
                q[mn] = bent_deck_translate(cache->tau, q[mn]);
            }
            detail::check_triangle_quality(q[0], q[1], q[2]);
            detail::add_cotan(q[0], q[1], q[2], t[0], t[1], t[2], kt);
            double area = 0.5 * (q[1] - q[0]).cross(q[2] - q[0]).norm();
            detail::add_mass(area, t, unit.data(), mt);
        }
    }

    LbOperators ops;
    ops.K.resize(n, n);
    ops.K.setFromTriplets(kt.begin(), kt.end());
    ops.M.resize(n, n);
    ops.M.setFromTriplets(mt.begin(), mt.end());
    return ops;
}

inline SpMat lumped_mass(const SpMat& M) {
    SpMat L(M.rows(), M.cols());
    std::vector<Triplet> t;
    t.reserve(M.rows());
    VecX rowsum = M * VecX::Ones(M.cols());
    for (int i = 0; i < M.rows(); ++i) t.emplace_back(i, i, rowsum[i]);
    L.setFromTriplets(t.begin(), t.end());
    return L;
}

inline std::vector<int> free_nodes(const Mesh& mesh) {
    std::vector<int> f;
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (!mesh.is_boundary(i)) f.push_back(i);
    return f;
}

// Dirichlet elimination helpers: restrict/expand between full and free vectors.
inline VecX restrict_free(const std::vector<int>& free, const VecX& full) {
    VecX out(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) out[k] = full[free[k]];
    return out;
}

inline VecX expand_free(const std::vector<int>& free, int n, const VecX& reduced,
                        const VecX* boundary_full = nullptr) {
    VecX out = boundary_full ? *boundary_full : VecX::Zero(n);
    for (std::size_t k = 0; k < free.size(); ++k) out[free[k]] = reduced[k];
    return out;
}

inline SpMat submatrix(const SpMat& A, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
    std::vector<int> rmap(A.rows(), -1), cmap(A.cols(), -1);
    for (std::size_t k = 0; k < rows.size(); ++k) rmap[rows[k]] = static_cast<int>(k);
    for (std::size_t k = 0; k < cols.size(); ++k) cmap[cols[k]] = static_cast<int>(k);
    std::vector<Triplet> t;
    for (int o = 0; o < A.outerSize(); ++o)
        for (SpMat::InnerIterator it(A, o); it; ++it)
            if (rmap[it.row()] >= 0 && cmap[it.col()] >= 0)
                t.emplace_back(rmap[it.row()], cmap[it.col()], it.value());
    SpMat S(rows.size(), cols.size());
    S.setFromTriplets(t.begin(), t.end());
    return S;
}

// Discrete harmonic extension in the round-sphere metric (the trace lift that
// realizes the trace space): solves K u = 0 on interior nodes with the given
// circle values.
inline VecX harmonic_extension(const Mesh& mesh, const SpMat& K, const VecX& boundary_values) {
    std::vector<int> free = free_nodes(mesh);
    std::vector<int> bdry;
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (mesh.is_boundary(i)) bdry.push_back(i);
    if (bdry.empty()) throw std::invalid_argument("harmonic_extension: mesh has no boundary");

    SpMat Kii = submatrix(K, free, free);
    SpMat Kib = submatrix(K, free, bdry);
    VecX fb(bdry.size());
    for (std::size_t k = 0; k < bdry.size(); ++k) fb[k] = boundary_values[bdry[k]];

    Eigen::SimplicialLDLT<SpMat> solver(Kii);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("harmonic_extension: factorization failed");
    VecX ui = solver.solve(-(Kib * fb));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("harmonic_extension: solve failed");

    VecX out = VecX::Zero(mesh.n_nodes());
    for (std::size_t k = 0; k < free.size(); ++k) out[free[k]] = ui[k];
    for (std::size_t k = 0; k < bdry.size(); ++k) out[bdry[k]] = fb[k];
    return out;
}

}  // namespace shrinker
