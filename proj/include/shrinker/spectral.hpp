#pragma once

#include "shrinker/fem.hpp"
#include "shrinker/graphgeom.hpp"

#include <json.hpp>

namespace shrinker {

// Symmetry classes under the two commuting mirror involutions of the mesh.
enum class SymClass { XzInvYzAnti, XzAntiYzInv, XzInvYzInv, XzAntiYzAnti };

inline const char* sym_class_name(SymClass c) {
    switch (c) {
        case SymClass::XzInvYzAnti: return "xz-inv-yz-anti";
        case SymClass::XzAntiYzInv: return "xz-anti-yz-inv";
        case SymClass::XzInvYzInv: return "xz-inv-yz-inv";
        case SymClass::XzAntiYzAnti: return "xz-anti-yz-anti";
    }
    return "?";
}

inline SymClass sym_class_from_name(const std::string& s) {
    for (SymClass c : {SymClass::XzInvYzAnti, SymClass::XzAntiYzInv, SymClass::XzInvYzInv,
                       SymClass::XzAntiYzAnti})
        if (s == sym_class_name(c)) return c;
    throw std::invalid_argument("unknown symmetry class '" + s +
                                "' (valid: xz-inv-yz-anti, xz-anti-yz-inv, xz-inv-yz-inv, "
                                "xz-anti-yz-anti)");
}

// Signed-orbit basis of the class subspace (columns orthonormal in the
// Euclidean sense); Dirichlet variant drops orbits touching the boundary.
inline SpMat class_basis(const Mesh& mesh, SymClass cls, bool dirichlet) {
    double sxz = (cls == SymClass::XzInvYzAnti || cls == SymClass::XzInvYzInv) ? 1.0 : -1.0;
    double syz = (cls == SymClass::XzAntiYzInv || cls == SymClass::XzInvYzInv) ? 1.0 : -1.0;
    const auto& pxz = mesh.sym_xz.perm;
    const auto& pyz = mesh.sym_yz.perm;
    const int n = mesh.n_nodes();
    std::vector<char> seen(n, 0);
    std::vector<Triplet> t;
    int col = 0;
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        // signed orbit of i under the Klein four-group
        std::map<int, double> orbit;
        bool consistent = true;
        std::vector<std::pair<int, double>> stack = {{i, 1.0}};
        while (!stack.empty()) {
            auto [j, s] = stack.back();
            stack.pop_back();
            auto it = orbit.find(j);
            if (it != orbit.end()) {
                if (it->second != s) consistent = false;
                continue;
            }
            orbit[j] = s;
            stack.push_back({pxz[j], s * sxz});
            stack.push_back({pyz[j], s * syz});
        }
        bool on_boundary = false;
        for (const auto& [j, s] : orbit) {
            seen[j] = 1;
            if (mesh.is_boundary(j)) on_boundary = true;
        }
        if (!consistent) continue;             // forced zero on this orbit
        if (dirichlet && on_boundary) continue;
        double nrm = 1.0 / std::sqrt(static_cast<double>(orbit.size()));
        for (const auto& [j, s] : orbit) t.emplace_back(j, col, s * nrm);
        ++col;
    }
    SpMat B(n, col);
    B.setFromTriplets(t.begin(), t.end());
    return B;
}

struct EigenPair {
    double lambda = 0.0;
    VecX u;            // full-mesh nodal field
    double residual = 0.0;  // ||K u - lambda M u|| / ||M u||
};

struct EigenOptions {
    double shift = -0.5;
    int max_iters = 600;
    double tol = 1e-9;
    int block_extra = 8;
    std::uint64_t seed = 12345;
};

// Shift-invert block subspace iteration with Rayleigh-Ritz extraction for the
// pencil (K, M); returns the k eigenvalues nearest the shift, ascending.
// Factorization prefers LDLT and falls back to sparse LU when the shifted
// matrix is indefinite (e.g. shift 2 inside the spectrum).
inline std::vector<EigenPair> eigenpairs_near_shift(const SpMat& K, const SpMat& M, int k,
                                                    const EigenOptions& opt = {}) {
    const int n = static_cast<int>(K.rows());
    if (k <= 0 || n == 0) return {};
    k = std::min(k, n);
    const int m = std::min(n, k + opt.block_extra);

    SpMat A = K - opt.shift * M;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    Eigen::SparseLU<SpMat> lu;
    bool use_ldlt = true;
    ldlt.compute(A);
    if (ldlt.info() != Eigen::Success) {
        use_ldlt = false;
        lu.compute(A);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("eigenpairs_near_shift: shifted matrix is singular");
    }
    auto solve = [&](const MatX& B) { return use_ldlt ? ldlt.solve(B).eval() : lu.solve(B).eval(); };

    // deterministic start block
    MatX Z(n, m);
    std::uint64_t state = opt.seed ? opt.seed : 1;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            Z(i, j) = 2.0 * (static_cast<double>((state * 0x2545F4914F6CDD1DULL) >> 11) /
                             9007199254740992.0) -
                      1.0;
        }

    VecX lambda_prev = VecX::Constant(k, std::numeric_limits<double>::infinity());
    std::vector<EigenPair> out;
    for (int iter = 0; iter < opt.max_iters; ++iter) {
        MatX Y = solve(M * Z);
        // M-orthonormalize (modified Gram-Schmidt)
        for (int c = 0; c < m; ++c) {
            VecX y = Y.col(c);
            for (int p = 0; p < c; ++p) y -= (Y.col(p).dot(M * y)) * Y.col(p);
            double nn = std::sqrt(y.dot(M * y));
            if (nn < 1e-300) throw std::runtime_error("eigenpairs_near_shift: block collapsed");
            Y.col(c) = y / nn;
        }
        MatX Kr = Y.transpose() * (K * Y).eval();
        MatX Mr = Y.transpose() * (M * Y).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<MatX> es(Kr, Mr);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigenpairs_near_shift: Rayleigh-Ritz failed");
        // order Ritz values by distance to the shift
        std::vector<int> order(m);
        for (int j = 0; j < m; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(es.eigenvalues()[a] - opt.shift) <
                   std::abs(es.eigenvalues()[b] - opt.shift);
        });
        MatX Znew(n, m);
        for (int j = 0; j < m; ++j) Znew.col(j) = Y * es.eigenvectors().col(order[j]);
        Z = Znew;

        VecX lam(k);
        for (int j = 0; j < k; ++j) lam[j] = es.eigenvalues()[order[j]];
        double change = (lam - lambda_prev).cwiseAbs().maxCoeff();
        lambda_prev = lam;
        if (change < opt.tol * std::max(1.0, lam.cwiseAbs().maxCoeff())) {
            out.clear();
            for (int j = 0; j < k; ++j) {
                EigenPair p;
                p.lambda = lam[j];
                p.u = Z.col(j);
                p.residual = (K * p.u - p.lambda * (M * p.u)).norm() / (M * p.u).norm();
                out.push_back(std::move(p));
            }
            bool ok = true;
            for (const auto& p : out)
                if (p.residual > 1e-8) ok = false;
            if (ok) {
                std::sort(out.begin(), out.end(),
                          [](const EigenPair& a, const EigenPair& b) { return a.lambda < b.lambda; });
                return out;
            }
        }
    }
    throw std::runtime_error("eigenpairs_near_shift: no convergence after " +
                             std::to_string(opt.max_iters) + " iterations");
}

struct EigenReport {
    double phi0 = 0.0;
    SymClass sym_class = SymClass::XzInvYzAnti;
    int refinement = 0;
    std::vector<double> eigenvalues;
    std::vector<double> residuals;
    std::vector<VecX> eigenfields;  // full-mesh nodal eigenfunctions
};

inline nlohmann::json eigen_report_json(const EigenReport& r) {
    nlohmann::json j;
    j["phi0"] = r.phi0;
    j["class"] = sym_class_name(r.sym_class);
    j["refinement"] = r.refinement;
    j["eigenvalues"] = r.eigenvalues;
    j["residuals"] = r.residuals;
    return j;
}

// Lowest k Dirichlet eigenvalues of -Delta_{S^2} on the punctured sphere,
// restricted to the symmetry class.
inline EigenReport punctured_spectrum(const Mesh& mesh, SymClass cls, int k) {
    if (mesh.phi0 <= 0.0)
        throw std::invalid_argument("punctured_spectrum: mesh must have punctures");
    LbOperators ops = assemble_lb(mesh, MetricMode::RoundSphere);
    SpMat B = class_basis(mesh, cls, true);
    if (B.cols() < k)
        throw std::invalid_argument("punctured_spectrum: class subspace smaller than k");
    SpMat Kr = SpMat(B.transpose()) * ops.K * B;
    SpMat Mr = SpMat(B.transpose()) * ops.M * B;
    EigenOptions opt;
    opt.shift = -0.5;  // below the Dirichlet spectrum: LDLT-friendly
    auto pairs = eigenpairs_near_shift(Kr, Mr, k, opt);
    EigenReport rep;
    rep.phi0 = mesh.phi0;
    rep.sym_class = cls;
    rep.refinement = mesh.refinement;
    for (const auto& p : pairs) {
        rep.eigenvalues.push_back(p.lambda);
        rep.residuals.push_back(p.residual);
        rep.eigenfields.push_back(B * p.u);
    }
    return rep;
}

// Closed-sphere validation spectrum (no symmetry restriction, no boundary).
inline EigenReport closed_sphere_spectrum(const Mesh& mesh, int k) {
    LbOperators ops = assemble_lb(mesh, MetricMode::RoundSphere);
    EigenOptions opt;
    opt.shift = -0.5;
    auto pairs = eigenpairs_near_shift(ops.K, ops.M, k, opt);
    EigenReport rep;
    rep.phi0 = 0.0;
    rep.refinement = mesh.refinement;
    for (const auto& p : pairs) {
        rep.eigenvalues.push_back(p.lambda);
        rep.residuals.push_back(p.residual);
        rep.eigenfields.push_back(p.u);
    }
    return rep;
}

// Distance of 2 from the symmetric-class Dirichlet spectrum: the numerical
// kernel-triviality certificate for Delta_{S^2} + 2 (equivalently, through
// the conformal Gauss map, for Delta_g + |A|^2). Uses shift-invert at 2.
inline double kernel_check(const Mesh& mesh, int probe = 4) {
    LbOperators ops = assemble_lb(mesh, MetricMode::RoundSphere);
    SpMat B = class_basis(mesh, SymClass::XzInvYzAnti, true);
    SpMat Kr = SpMat(B.transpose()) * ops.K * B;
    SpMat Mr = SpMat(B.transpose()) * ops.M * B;
    EigenOptions opt;
    opt.shift = 2.0;  // the spectral point of interest; LU path handles indefiniteness
    auto pairs = eigenpairs_near_shift(Kr, Mr, std::min<int>(probe, B.cols()), opt);
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs) gap = std::min(gap, std::abs(p.lambda - 2.0));
    return gap;
}

struct SupersolutionReport {
    double beta = 0.0, phi_j = 0.0;
    double admissibility = 0.0;  // -cot(beta) + 4 beta, must be negative
    double max_value = 0.0;      // max over the annulus grid of Delta zeta + 2 zeta
    bool pass = false;
};

// zeta = 2 beta - phi on the annulus phi_j < phi < beta:
// Delta zeta + 2 zeta = -cot(phi) + 2 (2 beta - phi), checked on a dense grid.
inline SupersolutionReport supersolution_check(double beta, double phi_j, int grid = 100) {
    if (!(phi_j > 0.0) || !(beta > phi_j))
        throw std::invalid_argument("supersolution_check: need 0 < phi_j < beta");
    double adm = -std::cos(beta) / std::sin(beta) + 4.0 * beta;
    if (adm >= 0.0)
        throw std::invalid_argument("supersolution_check: beta violates -cot(beta) + 4 beta < 0");
    SupersolutionReport rep;
    rep.beta = beta;
    rep.phi_j = phi_j;
    rep.admissibility = adm;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        double phi = phi_j + (beta - phi_j) * static_cast<double>(i) / grid;
        double v = -std::cos(phi) / std::sin(phi) + 2.0 * (2.0 * beta - phi);
        // the quantity is theta-independent; the grid in theta only replicates it
        worst = std::max(worst, v);
    }
    rep.max_value = worst;
    rep.pass = worst < 0.0;
    return rep;
}

struct ConvergenceReport {
    std::vector<double> phi0;
    std::vector<double> l2_distance;    // || u - x ||_{L2(K)}
    std::vector<double> grad_distance;  // sup_K | grad(u - x) |
    bool decreasing = false;
};

// Convergence of the first symmetric-class eigenfunction toward the closed
// sphere coordinate function x on a compact region K away from the punctures,
// with the normalization ||u||^2_{L2} = 4 pi / 3 matching u = x.
inline ConvergenceReport eigenfunction_convergence(const std::vector<double>& sweep,
                                                   int refinement) {
    ConvergenceReport rep;
    for (double phi0 : sweep) {
        Mesh mesh = build_mesh(phi0, refinement);
        GeometryCache cache = build_cache(mesh, 3.0, 0.0);
        LbOperators ops = assemble_lb(mesh, MetricMode::RoundSphere);
        EigenReport er = punctured_spectrum(mesh, SymClass::XzInvYzAnti, 1);
        VecX u = er.eigenfields[0];
        double n2 = u.dot(ops.M * u);
        u *= std::sqrt(4.0 * kPi / 3.0 / n2);
        // sign convention: positive near (1, 0, 0)
        int imax = 0;
        for (int i = 0; i < mesh.n_nodes(); ++i)
            if (mesh.nodes[i].x() > mesh.nodes[imax].x()) imax = i;
        if (u[imax] < 0.0) u = -u;

        VecX x(mesh.n_nodes());
        for (int i = 0; i < mesh.n_nodes(); ++i) x[i] = mesh.nodes[i].x();
        // K: nodes at geodesic distance > 0.5 from every puncture center
        std::vector<char> inK(mesh.n_nodes(), 1);
        for (int i = 0; i < mesh.n_nodes(); ++i)
            for (const auto& c : puncture_centers())
                if (std::acos(std::clamp(mesh.nodes[i].dot(c), -1.0, 1.0)) < 0.5) inK[i] = 0;
        VecX diff = u - x;
        VecX masked = diff;
        for (int i = 0; i < mesh.n_nodes(); ++i)
            if (!inK[i]) masked[i] = 0.0;
        double l2 = std::sqrt(masked.dot(ops.M * masked));
        double gsup = 0.0;
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            if (!inK[i]) continue;
            HJet hj = cache.recovery.jet_at(i, diff);
            gsup = std::max(gsup, hj.dh.norm());
        }
        rep.phi0.push_back(phi0);
        rep.l2_distance.push_back(l2);
        rep.grad_distance.push_back(gsup);
    }
    rep.decreasing = true;
    for (std::size_t i = 1; i < rep.l2_distance.size(); ++i)
        if (rep.l2_distance[i] >= rep.l2_distance[i - 1] ||
            rep.grad_distance[i] >= rep.grad_distance[i - 1])
            rep.decreasing = false;
    return rep;
}

}  // namespace shrinker
