// Command-line front end: builds bent-scaled Scherk cores, solves the
// self-shrinker Dirichlet problem on the fundamental piece, runs the spectral
// sweeps, and drives the analytic-identity verification suite.

#include <CLI11.hpp>

#include "shrinker/mesh_io.hpp"
#include "shrinker/solver.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace shrinker;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << j.dump(2) << "\n";
}

json solve_result_json(const SolveResult& r) {
    json j;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["residual_history"] = r.residual_history;
    j["symmetric"] = r.symmetric;
    j["embedded"] = r.embedded;
    j["embedded_delta_ok"] = r.embed.delta_ok;
    j["embedded_scan_ok"] = r.embed.scan_ok;
    j["max_h"] = r.embed.max_h;
    j["trace_norm"] = r.trace_norm;
    j["norm_ratio_tau"] = r.norm_ratio_tau;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

VecX make_trace(const std::string& kind, const Mesh& mesh, double C0, std::uint64_t seed,
                double fnorm) {
    if (kind == "zero") return VecX::Zero(mesh.n_nodes());
    if (kind == "random") {
        GeometryCache cache0 = build_cache(mesh, C0, 0.0);
        LbOperators round = assemble_lb(mesh, MetricMode::RoundSphere);
        return random_symmetric_trace(mesh, cache0, round.K, seed, fnorm);
    }
    throw CLI::ValidationError("--f must be 'zero' or 'random'");
}

struct BuildCoreArgs {
    int n = 0;
    double c = 3.0;
    int refine = 4;
    bool solve = false;
    std::string f = "zero";
    std::uint64_t seed = 1;
    double fnorm = 1e-4;
    double tol = 1e-10;
    std::string out = "out";
    bool ply = false;
};

int cmd_build_core(const BuildCoreArgs& a) {
    Mesh mesh = build_mesh(std::acos(std::tanh(a.c)), a.refine);
    double tau = 1.0 / a.n;
    BendParams bp{tau, a.c, a.n, 0.0};
    bp.validate();

    fs::create_directories(a.out);
    json report;
    report["command"] = "build-core";
    report["n"] = a.n;
    report["c"] = a.c;
    report["refinement"] = a.refine;
    report["tau"] = tau;
    report["seed"] = a.seed;

    GeometryCache cache_tau = build_cache(mesh, a.c, tau);
    VecX h0 = VecX::Zero(mesh.n_nodes());
    EmbeddedMesh approx = assemble_core_mesh(mesh, cache_tau, h0, a.n);
    fs::path approx_obj = fs::path(a.out) / "core_approx.obj";
    write_obj(approx_obj.string(), approx);
    if (a.ply) write_ply((fs::path(a.out) / "core_approx.ply").string(), approx);
    report["approx"] = {{"chi", approx.euler_characteristic()},
                        {"boundary_circles", approx.boundary_loops().size()},
                        {"handles", -approx.euler_characteristic() / 2},
                        {"obj", approx_obj.string()}};

    if (a.solve) {
        SolveConfig cfg;
        cfg.C0 = a.c;
        cfg.refinement = a.refine;
        cfg.newton_tol = a.tol;
        cfg.jacobian_mode = SolveConfig::Jacobian::Full;
        VecX f_tilde = make_trace(a.f, mesh, a.c, a.seed, a.fnorm);
        CoreResult core = solve_core(a.n, a.c, f_tilde, mesh, cfg);
        fs::path core_obj = fs::path(a.out) / "core_solved.obj";
        write_obj(core_obj.string(), core.core);
        if (a.ply) write_ply((fs::path(a.out) / "core_solved.ply").string(), core.core);
        report["solved"] = {{"chi", core.chi},
                           {"boundary_circles", core.boundary_circles},
                           {"handles", core.handles},
                           {"mirror_error", core.mirror_error},
                           {"rescaled_residual_norm", core.rescaled_residual_norm},
                           {"obj", core_obj.string()},
                           {"newton", solve_result_json(core.solve)}};
    }
    write_json(fs::path(a.out) / "build_core_report.json", report);
    std::cout << "core written to " << a.out << "\n";
    return 0;
}

struct SolveArgs {
    double tau = 1.0 / 16.0;
    double c0 = 3.0;
    int refine = 4;
    std::string f = "zero";
    std::uint64_t seed = 1;
    double fnorm = 1e-3;
    double tol = 1e-10;
    int max_iters = 25;
    std::string jacobian = "chord";
    std::string out = "out";
    bool ply = false;
};

int cmd_solve(const SolveArgs& a) {
    Mesh mesh = build_mesh(std::acos(std::tanh(a.c0)), a.refine);
    SolveConfig cfg;
    cfg.tau = a.tau;
    cfg.C0 = a.c0;
    cfg.refinement = a.refine;
    cfg.newton_tol = a.tol;
    cfg.max_iters = a.max_iters;
    if (a.jacobian == "full")
        cfg.jacobian_mode = SolveConfig::Jacobian::Full;
    else if (a.jacobian != "chord")
        throw CLI::ValidationError("--jacobian must be 'chord' or 'full'");

    VecX f = make_trace(a.f, mesh, a.c0, a.seed, a.fnorm);
    SolveResult res = newton_solve(mesh, f, cfg);

    fs::create_directories(a.out);
    GeometryCache ct = build_cache(mesh, a.c0, a.tau);
    GraphMesh gm = embedded_graph_mesh(mesh, ct, res.h);
    fs::path obj = fs::path(a.out) / "graph.obj";
    write_obj(obj.string(), gm.mesh);
    if (a.ply) write_ply((fs::path(a.out) / "graph.ply").string(), gm.mesh);

    json report;
    report["command"] = "solve";
    report["tau"] = a.tau;
    report["c0"] = a.c0;
    report["refinement"] = a.refine;
    report["f"] = a.f;
    report["seed"] = a.seed;
    report["fnorm"] = a.fnorm;
    report["jacobian"] = a.jacobian;
    report["result"] = solve_result_json(res);
    report["obj"] = obj.string();
    write_json(fs::path(a.out) / "solve_report.json", report);
    std::cout << (res.converged ? "converged" : "did not converge") << " after "
              << res.iterations << " iterations\n";
    return res.converged ? 0 : 1;
}

struct SpectrumArgs {
    std::vector<double> phi0;
    std::string cls = "xz-inv-yz-anti";
    int k = 4;
    int refine = 4;
    bool closed = false;
    std::string out = "out";
};

int cmd_spectrum(const SpectrumArgs& a) {
    SymClass cls = sym_class_from_name(a.cls);
    fs::create_directories(a.out);
    std::ofstream csv(fs::path(a.out) / "spectrum_summary.csv");
    csv << "phi0,class,refinement,index,lambda,residual,kernel_gap\n";

    if (a.closed) {
        Mesh mesh = build_mesh(0.0, a.refine);
        EigenReport rep = closed_sphere_spectrum(mesh, std::max(a.k, 9));
        json j = eigen_report_json(rep);
        j["class"] = "all";
        write_json(fs::path(a.out) / "spectrum_closed.json", j);
        for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i)
            csv << "0,all," << a.refine << "," << i << "," << rep.eigenvalues[i] << ","
                << rep.residuals[i] << ",\n";
        std::cout << "closed-sphere spectrum written\n";
        return 0;
    }
    if (a.phi0.empty()) throw CLI::ValidationError("--phi0 requires at least one value");
    for (double phi0 : a.phi0) {
        Mesh mesh = build_mesh(phi0, a.refine);
        EigenReport rep = punctured_spectrum(mesh, cls, a.k);
        double gap = kernel_check(mesh);
        json j = eigen_report_json(rep);
        j["kernel_gap"] = gap;
        char name[64];
        std::snprintf(name, sizeof(name), "spectrum_phi0_%.6g.json", phi0);
        write_json(fs::path(a.out) / name, j);
        for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i)
            csv << phi0 << "," << a.cls << "," << a.refine << "," << i << ","
                << rep.eigenvalues[i] << "," << rep.residuals[i] << "," << gap << "\n";
    }
    std::cout << "spectrum sweep written to " << a.out << "\n";
    return 0;
}

struct VerifyArgs {
    int refine = 3;
    std::string json_path;
    std::string break_name;
};

struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool larger_is_better = false;
    bool pass = false;
};

int cmd_verify(const VerifyArgs& a) {
    const double C0 = 3.0;
    const ScherkPatch patch(C0);
    Mesh mesh = build_mesh(patch.phi0(), a.refine);
    GeometryCache c0 = build_cache(mesh, C0, 0.0);
    std::vector<CheckResult> checks;
    auto bias = [&](const std::string& name, double v, double amount) {
        return a.break_name == name ? v + amount : v;
    };

    {  // minimality: FD mean curvature vanishes at order >= 1.8
        std::vector<SurfacePoint> pts;
        for (int i = 0; i < mesh.n_nodes(); i += std::max(1, mesh.n_nodes() / 24))
            pts.push_back(c0.points[i]);
        double prev = -1.0, order = 10.0;
        for (double step : {4e-3, 2e-3, 1e-3}) {
            double worst = 0.0;
            for (const auto& p : pts)
                worst = std::max(worst, std::abs(bias("minimality",
                                                      patch.shape_data_fd(p, step).H, 1e-4)));
            if (prev > 0.0) order = std::min(order, std::log2(prev / worst));
            prev = worst;
        }
        checks.push_back({"minimality", order, 1.8, true, order >= 1.8});
    }
    {  // conformality: nu* g_{S^2} = (|A|^2/2) g with analytic derivatives
        double worst = 0.0;
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            ShapeData s = patch.shape_data(c0.points[i]);
            worst = std::max(worst,
                             (s.nu_pullback - 0.5 * s.normA2 * s.g).norm() / s.g.norm());
        }
        worst = bias("conformality", worst, 1.0);
        checks.push_back({"conformality", worst, 1e-6, false, worst <= 1e-6});
    }
    {  // scaling identity F = tau (H + X.nu) o rescale
        double tau = 1.0 / 16.0;
        GeometryCache ct = build_cache(mesh, C0, tau);
        double worst = 0.0;
        for (std::uint64_t seed : {11ull, 22ull}) {
            AnalyticField u = random_symmetric_field(seed);
            VecX vals = sample_field(mesh, u);
            AnalyticField hu = scaled_field(u, 0.05 / vals.cwiseAbs().maxCoeff());
            VecX F = residual_field_analytic(mesh, ct, hu);
            VecX R = rescaled_residual_field_analytic(mesh, ct, hu);
            worst = std::max(worst, (F - tau * R).lpNorm<Eigen::Infinity>());
        }
        worst = bias("scaling", worst, 1.0);
        checks.push_back({"scaling", worst, 1e-9, false, worst <= 1e-9});
    }
    {  // linearization order: ||F(eps u) - eps L u|| / eps^2 bounded
        AnalyticField u = random_symmetric_field(7);
        VecX Lu(mesh.n_nodes());
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            HJet hj = analytic_hjet(c0, i, u);
            const PulledGeometry& geo = c0.pulled[i];
            double lap = 0.0;
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) {
                    double cov = hj.d2h(p, q);
                    for (int k = 0; k < 2; ++k) cov -= geo.Gamma[k][p][q] * hj.dh[k];
                    lap += geo.ginv(p, q) * cov;
                }
            Lu[i] = lap + geo.normA2 * hj.h;
        }
        double rmin = 1e300, rmax = 0.0;
        for (double eps : {1e-2, 1e-3, 1e-4}) {
            VecX F = residual_field_analytic(mesh, c0, scaled_field(u, eps));
            double ratio = (F - eps * Lu).lpNorm<Eigen::Infinity>() / (eps * eps);
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
        }
        double spread = bias("linearization", rmax / rmin, 10.0);
        checks.push_back({"linearization", spread, 3.0, false, spread <= 3.0});
    }
    {  // supersolution inequality on the annulus
        SupersolutionReport rep = supersolution_check(0.2, 0.02, 10000);
        double v = bias("supersolution", rep.max_value, 10.0);
        checks.push_back({"supersolution", v, 0.0, false, v < 0.0});
    }

    json report;
    report["command"] = "verify";
    report["refinement"] = a.refine;
    if (!a.break_name.empty()) report["break"] = a.break_name;
    bool all = true;
    json arr = json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"threshold", c.threshold},
                       {"pass", c.pass}});
        all = all && c.pass;
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (value " << c.value
                  << (c.larger_is_better ? " >= " : " <= ") << c.threshold << ")\n";
    }
    report["checks"] = arr;
    report["pass"] = all;
    if (!a.json_path.empty()) write_json(a.json_path, report);
    if (!all) {
        for (const auto& c : checks)
            if (!c.pass) std::cerr << "verification failed: " << c.name << "\n";
        return 1;
    }
    return 0;
}

struct ExportArgs {
    std::string in;
    std::string format = "ply";
    std::string out;
};

int cmd_export(const ExportArgs& a) {
    std::vector<Vec3> verts;
    TriList tris;
    read_obj(a.in, verts, tris);
    std::string out = a.out;
    if (out.empty()) {
        out = a.in;
        auto dot = out.find_last_of('.');
        if (dot != std::string::npos) out = out.substr(0, dot);
        out += "." + a.format;
    }
    if (a.format == "ply")
        write_ply(out, verts, tris);
    else if (a.format == "obj")
        write_obj(out, verts, tris);
    else
        throw CLI::ValidationError("--format must be 'obj' or 'ply'");
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "shrinker: bent-scaled Scherk cores for self-shrinking surfaces.\n"
        "Worker threads honor the SHRINKER_THREADS environment variable."};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value configuration file");

    BuildCoreArgs bc;
    auto* sub_bc = app.add_subcommand("build-core", "assemble the N-handle core mesh");
    sub_bc->add_option("--n", bc.n, "handle count N (tau = 1/N)")->required();
    sub_bc->add_option("--c", bc.c, "truncation half-width C");
    sub_bc->add_option("--refine", bc.refine, "mesh refinement level");
    sub_bc->add_flag("--solve", bc.solve, "solve the Dirichlet problem and emit the corrected core");
    sub_bc->add_option("--f", bc.f, "boundary data: zero | random");
    sub_bc->add_option("--seed", bc.seed, "random boundary data seed");
    sub_bc->add_option("--fnorm", bc.fnorm, "random boundary data norm");
    sub_bc->add_option("--tol", bc.tol, "newton tolerance");
    sub_bc->add_option("--out", bc.out, "output directory");
    sub_bc->add_flag("--ply", bc.ply, "also write binary PLY");

    SolveArgs sv;
    auto* sub_sv = app.add_subcommand("solve", "solve F(h, tau) = 0 on the fundamental piece");
    sub_sv->add_option("--tau", sv.tau, "bending parameter");
    sub_sv->add_option("--c0", sv.c0, "truncation half-width C0");
    sub_sv->add_option("--refine", sv.refine, "mesh refinement level");
    sub_sv->add_option("--f", sv.f, "boundary data: zero | random");
    sub_sv->add_option("--seed", sv.seed, "random boundary data seed");
    sub_sv->add_option("--fnorm", sv.fnorm, "random boundary data norm");
    sub_sv->add_option("--tol", sv.tol, "newton tolerance");
    sub_sv->add_option("--max-iters", sv.max_iters, "newton iteration cap");
    sub_sv->add_option("--jacobian", sv.jacobian, "chord | full");
    sub_sv->add_option("--out", sv.out, "output directory");
    sub_sv->add_flag("--ply", sv.ply, "also write binary PLY");

    SpectrumArgs sp;
    auto* sub_sp = app.add_subcommand("spectrum", "Dirichlet spectra on the punctured sphere");
    sub_sp->add_option("--phi0", sp.phi0, "puncture radii sweep")->delimiter(',');
    sub_sp->add_option("--class", sp.cls,
                       "symmetry class: xz-inv-yz-anti | xz-anti-yz-inv | xz-inv-yz-inv | "
                       "xz-anti-yz-anti");
    sub_sp->add_option("--k", sp.k, "number of eigenvalues");
    sub_sp->add_option("--refine", sp.refine, "mesh refinement level");
    sub_sp->add_flag("--closed", sp.closed, "closed-sphere validation spectrum");
    sub_sp->add_option("--out", sp.out, "output directory");

    VerifyArgs vf;
    auto* sub_vf = app.add_subcommand("verify", "run the analytic-identity suite");
    sub_vf->add_option("--refine", vf.refine, "mesh refinement level");
    sub_vf->add_option("--json", vf.json_path, "write the machine-readable report here");
    sub_vf->add_option("--break", vf.break_name,
                       "bias the named check to validate the failure path");

    ExportArgs ex;
    auto* sub_ex = app.add_subcommand("export", "convert a mesh file");
    sub_ex->add_option("--in", ex.in, "input OBJ")->required();
    sub_ex->add_option("--format", ex.format, "obj | ply");
    sub_ex->add_option("--out", ex.out, "output path (derived from input if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sub_bc->parsed()) return cmd_build_core(bc);
        if (sub_sv->parsed()) return cmd_solve(sv);
        if (sub_sp->parsed()) return cmd_spectrum(sp);
        if (sub_vf->parsed()) return cmd_verify(vf);
        if (sub_ex->parsed()) return cmd_export(ex);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
