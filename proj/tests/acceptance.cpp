// Acceptance suite: runs the bundled scenarios at their default resolution and
// checks every gate at its pinned tolerance, printing one line per criterion.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vrl/identities.hpp"
#include "vrl/io.hpp"
#include "vrl/scenario.hpp"

using namespace vrl;

namespace {

struct Gate {
    int num;
    std::string label;
    bool pass;
    std::string detail;
};
std::vector<Gate> gates;

void record(int num, const std::string& label, bool pass, const std::string& detail) {
    gates.push_back({num, label, pass, detail});
    std::printf("[%s] criterion %d: %s -- %s\n", pass ? "PASS" : "FAIL", num, label.c_str(),
                detail.c_str());
    std::fflush(stdout);
}

double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

SourceHistory run_bundled(const std::string& name) {
    const auto cfg = bundled_scenario(name);
    cfg.validate();
    const double t0 = now_s();
    auto h = evolve(build_initial_ensemble(cfg), evolve_params(cfg));
    std::printf("-- %s: %d frames in %.1f s (drift %.2e, softening %.4f)\n", name.c_str(),
                h.frame_count(), now_s() - t0, h.relative_energy_drift(),
                cfg.effective_softening());
    std::fflush(stdout);
    return h;
}

// 4x particle count, short window ending past the comparison time.
SourceHistory run_quadrupled(const std::string& name, double u_cmp) {
    auto cfg = bundled_scenario(name);
    cfg.particles *= 4;
    cfg.dt = 0.01;
    cfg.window_min = 0.0;
    cfg.window_max = u_cmp + 5.0 * cfg.dt_record;
    cfg.drift_tolerance = 0.0;
    const double t0 = now_s();
    auto h = evolve(build_initial_ensemble(cfg), evolve_params(cfg));
    std::printf("-- %s x4: %d frames in %.1f s\n", name.c_str(), h.frame_count(), now_s() - t0);
    std::fflush(stdout);
    return h;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

int main() {
    set_worker_threads(static_cast<int>(std::thread::hardware_concurrency()));
    const double wall0 = now_s();

    // shared scenario histories (spec-default resolution)
    const SourceHistory pd = run_bundled("plasma_dipole");
    const SourceHistory ss = run_bundled("plasma_single_species");
    const SourceHistory gs = run_bundled("gravity_sphere");
    const SourceHistory ga = run_bundled("gravity_aspherical");
    const auto cfg_pd = bundled_scenario("plasma_dipole");
    const auto cfg_gs = bundled_scenario("gravity_sphere");
    const auto cfg_ga = bundled_scenario("gravity_aspherical");

    const double u_eval = 0.25;

    // ------------------------------------------------------------------ 1
    {
        const auto dirs = identity_directions(2024, 3); // axes + 3 random
        bool all_pass = true;
        double worst = 0.0;
        std::string worst_name;
        auto run_suite = [&](const SourceHistory& h, const char* tag)
            -> std::vector<IdentityResult> {
            auto res = check_vp_identities(h, u_eval, dirs);
            for (const auto& r : res) {
                if (r.rel_residual > worst) {
                    worst = r.rel_residual;
                    worst_name = std::string(tag) + ":" + r.name;
                }
                if (r.rel_residual > 1e-2) all_pass = false;
            }
            return res;
        };
        const auto res_gs = run_suite(gs, "sphere");
        const auto res_ga = run_suite(ga, "aspherical");

        // quadrupled-N improvement on the noise-dominated identities
        const double u4 = 0.16;
        const SourceHistory gs4 = run_quadrupled("gravity_sphere", u4);
        const SourceHistory ga4 = run_quadrupled("gravity_aspherical", u4);
        auto noise_mean = [&](const SourceHistory& h, const std::vector<IdentityResult>& base)
            -> std::pair<double, double> {
            // mean |residual| over noise-dominated entries, at u4 on both
            (void)base;
            return {0.0, 0.0};
        };
        (void)noise_mean;
        auto mean_noise_residual = [&](const SourceHistory& h) {
            const auto res = check_vp_identities(h, u4, dirs);
            double sum = 0.0;
            int count = 0;
            for (const auto& r : res)
                if (std::string(r.budget.dominant()) == "noise" && r.rel_residual > 1e-5) {
                    sum += r.abs_residual / r.scale;
                    ++count;
                }
            return std::make_pair(sum, count);
        };
        const auto [s2a, n2a] = mean_noise_residual(gs);
        const auto [s2b, n2b] = mean_noise_residual(ga);
        const auto [s4a, n4a] = mean_noise_residual(gs4);
        const auto [s4b, n4b] = mean_noise_residual(ga4);
        const double m2 = (s2a + s2b) / std::max(1, n2a + n2b);
        const double m4 = (s4a + s4b) / std::max(1, n4a + n4b);
        const double factor = m4 > 0.0 ? m2 / m4 : 0.0;
        const bool improve = factor >= 1.7 && (n4a + n4b) > 0;
        std::ostringstream d;
        d << "worst rel residual " << format_double(worst) << " (" << worst_name
          << "); noise-dominated mean rel " << format_double(m2) << " -> " << format_double(m4)
          << " at 4N, factor " << format_double(factor) << " over " << (n2a + n2b) << " draws";
        record(1, "vp identity suite at 1e-2 with 4N improvement", all_pass && improve, d.str());
    }

    // ------------------------------------------------------------------ 2
    {
        const double rs = cfg_pd.effective_r_star();
        Rng rng(424242);
        bool ok = true;
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            Vec3 xb;
            for (;;) {
                xb = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
                const double n2 = norm2(xb);
                if (n2 > 0.04 && n2 <= 1.0) {
                    xb = xb / std::sqrt(n2);
                    break;
                }
            }
            const double u = 0.15 + 0.2 * rng.uniform();
            const auto s = far_field(pd, xb, u, 64.0 * rs, 16.0, FieldKind::em);
            const double e1 = std::abs(dot(xb, s.E)) / norm(s.E);
            const double e2 = std::abs(dot(xb, s.B)) / norm(s.B);
            const double e3 = norm(cross(xb, s.E) - s.B) / norm(s.B);
            worst = std::max({worst, e1, e2, e3});
            if (e1 > 1e-6 || e2 > 1e-6 || e3 > 1e-6) ok = false;
        }
        record(2, "far-field transversality and cross relation at 1e-6", ok,
               "worst ratio " + format_double(worst) + " over 20 samples");
    }

    // ------------------------------------------------------------------ 3
    {
        const int k0 = pd.nearest_frame(u_eval);
        const Vec3 dd = pd.frames[k0].dipole_accel;
        auto fd2 = [&](int stride) {
            const Vec3 num = pd.frames[k0 + stride].dipole - 2.0 * pd.frames[k0].dipole +
                             pd.frames[k0 - stride].dipole;
            return num / sq(stride * pd.dt_record);
        };
        const double e1 = norm(fd2(1) - dd);
        const double e2 = norm(fd2(2) - dd);
        const double e4 = norm(fd2(4) - dd);
        const double o21 = std::log2(e2 / e1);
        const double o42 = std::log2(e4 / e2);
        const double rel = e1 / norm(dd);
        const bool ok = std::abs(o21 - 2.0) <= 0.2 && std::abs(o42 - 2.0) <= 0.2 && rel <= 1e-3;
        std::ostringstream d;
        d << "orders " << format_double(o21) << ", " << format_double(o42)
          << "; relative error at default dt_record " << format_double(rel);
        record(3, "dipole acceleration vs centered difference at order 2", ok, d.str());
    }

    // ------------------------------------------------------------------ 4
    {
        const int k0 = ss.nearest_frame(u_eval);
        const auto& e = ss.frames[k0].snapshot;
        const Vec3 dd = ss.frames[k0].dipole_accel;
        const auto pf = fields_at_particles(e, FieldMode::plasma, ss.softening);
        double emax = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) emax = std::max(emax, norm(pf.field(i)));
        const double bound = 1e-12 * static_cast<double>(e.size()) * emax;
        const bool ok = norm(dd) <= bound;
        record(4, "single-species dipole acceleration null", ok,
               "|D''| = " + format_double(norm(dd)) + " vs bound " + format_double(bound));
    }

    // ------------------------------------------------------------------ 5
    {
        const double rs = cfg_pd.effective_r_star();
        const double c5 = 16.0, r5 = 64.0 * rs;
        const Vec3 dd = pd.dipole_accel_at(u_eval);
        std::vector<Vec3> dirs;
        for (const Vec3& x : radetail::default_directions())
            if (norm2(cross(x, dd)) >= 0.3 * norm2(dd)) dirs.push_back(x);
        bool ok10 = true;
        double worst = 0.0;
        for (const Vec3& xb : dirs) {
            const auto far = far_field(pd, xb, u_eval, r5, c5, FieldKind::em);
            const double measured = -flux_integrand(far) * std::pow(c5, 4) * r5 * r5;
            const double predicted = norm2(cross(xb, dd));
            const double rel = std::abs(measured - predicted) / predicted;
            worst = std::max(worst, rel);
            if (rel > 0.10) ok10 = false;
        }
        // exact-field residual decay in r at fixed c
        std::vector<double> lr, le;
        for (double f : {4.0, 8.0, 16.0, 32.0, 64.0}) {
            const double r = f * rs;
            double res_abs = 0.0;
            for (const Vec3& xb : dirs) {
                const auto ex = retarded_field(pd, u_eval + r / c5, r * xb, c5, FieldKind::em);
                const double pred = predict_dipole(dd, xb, r, c5).density;
                res_abs += std::abs(flux_integrand(ex) - pred);
            }
            lr.push_back(std::log(r));
            le.push_back(std::log(res_abs / dirs.size()));
        }
        const double r_slope = fit_slope(lr, le);
        // relative c-exponent of the far-field residual at the largest r
        std::vector<double> lc, lrel;
        for (double c : {8.0, 16.0, 32.0}) {
            double rel_sum = 0.0;
            for (const Vec3& xb : dirs) {
                const auto far = far_field(pd, xb, u_eval, r5, c, FieldKind::em);
                const double pred = predict_dipole(dd, xb, r5, c).density;
                rel_sum += std::abs(flux_integrand(far) - pred) / std::abs(pred);
            }
            lc.push_back(std::log(c));
            lrel.push_back(std::log(rel_sum / dirs.size()));
        }
        const double c_slope = fit_slope(lc, lrel);
        const bool ok = ok10 && r_slope <= -3.0 + 0.5 && c_slope <= -1.0 + 0.5;
        std::ostringstream d;
        d << "worst flux discrepancy " << format_double(worst) << " at c=16, r=64 r*; residual "
          << "r-exponent " << format_double(r_slope) << ", relative c-exponent "
          << format_double(c_slope);
        record(5, "dipole radiation formula with error-budget exponents", ok, d.str());
    }

    // ------------------------------------------------------------------ 6
    {
        const double rs = cfg_ga.effective_r_star();
        const double c6 = 8.0, r6 = 64.0 * rs;
        // signal per direction
        std::vector<Vec3> dirs;
        double drmax = 0.0;
        for (const Vec3& x : radetail::default_directions())
            drmax = std::max(drmax, std::abs(compute_calR(ga, x, u_eval).dr_dt));
        for (const Vec3& x : radetail::default_directions())
            if (std::abs(compute_calR(ga, x, u_eval).dr_dt) >= 0.3 * drmax) dirs.push_back(x);
        bool ok10 = true;
        double worst = 0.0;
        for (const Vec3& xb : dirs) {
            const auto far = far_field(ga, xb, u_eval, r6, c6, FieldKind::vn);
            const double measured = -flux_integrand(far) * std::pow(c6, 9) * r6 * r6;
            const double predicted = sq(compute_calR(ga, xb, u_eval).dr_dt);
            const double rel = std::abs(measured - predicted) / predicted;
            worst = std::max(worst, rel);
            if (rel > 0.10) ok10 = false;
        }
        std::vector<double> lr, le;
        for (double f : {4.0, 8.0, 16.0, 32.0, 64.0}) {
            const double r = f * rs;
            double res_abs = 0.0;
            for (const Vec3& xb : dirs) {
                const auto ex = retarded_field(ga, u_eval + r / c6, r * xb, c6, FieldKind::vn);
                const double pred = -sq(compute_calR(ga, xb, u_eval).dr_dt) /
                                    (std::pow(c6, 9) * r * r);
                res_abs += std::abs(flux_integrand(ex) - pred);
            }
            lr.push_back(std::log(r));
            le.push_back(std::log(res_abs / dirs.size()));
        }
        const double r_slope = fit_slope(lr, le);
        const bool ok = ok10 && r_slope <= -3.0 + 0.5;
        std::ostringstream d;
        d << "worst flux discrepancy " << format_double(worst) << " at c=8, r=64 r*; residual "
          << "r-exponent " << format_double(r_slope);
        record(6, "vn monopole radiation formula with r-exponent", ok, d.str());
    }

    // ------------------------------------------------------------------ 7
    {
        const int k0 = gs.nearest_frame(u_eval);
        const double u = gs.frames[k0].time;
        const auto rr = compute_calR(gs, {0, 0, 1}, u);
        const double dekin =
            gs.stencil_dt(u, [](const HistoryFrame& f) { return f.energy.kinetic; });
        const double rel1 = std::abs(rr.dr_dt - 8.0 / 3.0 * dekin) /
                            std::abs(8.0 / 3.0 * dekin);
        const auto quad = SphereQuadrature::gauss_legendre(16, 32);
        const auto vp = predict_vn(gs, {0, 0, 1}, u, 64.0 * cfg_gs.effective_r_star(), 8.0, quad);
        // identity-suite budget for the corollary comparison
        const auto sph = check_spherical_reductions(gs, u, {0, 0, 1});
        double budget_rel = 0.0;
        for (const auto& r : sph)
            if (r.name == "sph_dRdt_reduction") budget_rel = r.budget.total() / r.scale;
        const double rel2 = std::abs(vp.integrated - vp.spherical_integrated) /
                            std::abs(vp.spherical_integrated);
        const bool ok = rel1 <= 1e-3 && rel2 <= 1e-3 + 2.0 * budget_rel;
        std::ostringstream d;
        d << "dR/dt vs (8/3) dE_kin/dt rel " << format_double(rel1)
          << "; theorem vs corollary rel " << format_double(rel2) << " (budget "
          << format_double(budget_rel) << ")";
        record(7, "spherical reduction at 1e-3", ok, d.str());
    }

    // ------------------------------------------------------------------ 8
    {
        ProfileSpec sp;
        sp.species = Species::positive;
        sp.scale_radii = {0.5, 0.5, 0.5};
        sp.momentum_radius = 1e-4;
        sp.total_weight = 1.0;
        const auto prof = build_profile(sp);
        const double c8 = 8.0, r8 = 16.0; // r_star = max(2 R0, R2) = 1 for the static source
        const UniformGrid g = UniformGrid::cube(1.0, 64);
        const auto hem = make_static_history(prof, g, FieldMode::plasma, -3.0, 0.5, 0.5);
        const auto sem = retarded_field(hem, 0.2, {r8, 0, 0}, c8, FieldKind::em);
        const double rel_e = std::abs(sem.E.x - 1.0 / (r8 * r8)) * r8 * r8;
        const bool ok_em = rel_e <= 1e-4 && norm(sem.B) < 1e-10;

        sp.species = Species::neutral;
        const auto prof_vn = build_profile(sp);
        const auto hvn = make_static_history(prof_vn, g, FieldMode::gravity, -3.0, 0.5, 0.5);
        const auto svn = retarded_field(hvn, 0.2, {0, r8, 0}, c8, FieldKind::vn);
        const double expect = 1.0 / (c8 * c8 * r8 * r8);
        const double rel_v = std::abs(svn.grad_phi.y - expect) / expect;
        const bool ok_vn = rel_v <= 1e-4 && std::abs(svn.dt_phi) < 1e-12;
        std::ostringstream d;
        d << "coulomb rel error " << format_double(rel_e) << ", scalar gradient rel error "
          << format_double(rel_v) << " at r = 16 r*";
        record(8, "static retarded-field oracles at 1e-4", ok_em && ok_vn, d.str());
    }

    // ------------------------------------------------------------------ 9
    {
        bool ok = true;
        std::ostringstream d;
        const std::pair<const char*, const SourceHistory*> runs[] = {
            {"plasma_dipole", &pd},
            {"plasma_single_species", &ss},
            {"gravity_sphere", &gs},
            {"gravity_aspherical", &ga}};
        for (const auto& pair : runs) {
            const SourceHistory& h = *pair.second;
            const double drift = h.relative_energy_drift();
            const int k = h.nearest_frame(u_eval);
            const double extent = -h.grid.origin.x; // cubic, centered grids
            const UniformGrid coarse = UniformGrid::cube(extent, 33);
            const UniformGrid fine = UniformGrid::cube(extent, 65);
            const double bw = 2.0 * coarse.h;
            const double rc = continuity_residual(h, k, coarse, bw);
            const double rf = continuity_residual(h, k, fine, bw);
            const double order = std::log2(rc / rf);
            if (drift > 1e-5 || order < 1.0) ok = false;
            d << pair.first << ": drift " << format_double(drift) << ", continuity order "
              << format_double(order) << "; ";
        }
        record(9, "energy drift at 1e-5 and continuity refinement order >= 1", ok, d.str());
    }

    // ------------------------------------------------------------------ 10
    {
        namespace fs = std::filesystem;
        const auto tmp = fs::temp_directory_path() / "vrl_acceptance_det";
        fs::remove_all(tmp);
        const auto cfg = bundled_scenario("static_null");
        setenv("VRL_DATA_DIR", (tmp / "a").c_str(), 1);
        std::ostringstream sink;
        const auto ra = run_scenario(cfg, sink);
        setenv("VRL_DATA_DIR", (tmp / "b").c_str(), 1);
        const auto rb = run_scenario(cfg, sink);
        unsetenv("VRL_DATA_DIR");
        bool ok = true;
        std::string diff;
        for (const char* f : {"frames.bin", "moments.bin", "scalars.csv", "identities.csv",
                              "scan.csv", "report.json"}) {
            if (slurp(ra.dir / f) != slurp(rb.dir / f)) {
                ok = false;
                diff += std::string(f) + " ";
            }
        }
        record(10, "fixed seed gives byte-identical outputs", ok,
               ok ? "all artifacts identical" : ("differs: " + diff));
    }

    std::printf("-- acceptance wall time %.1f s\n", now_s() - wall0);
    int failures = 0;
    for (const auto& g : gates)
        if (!g.pass) ++failures;
    std::printf("== %zu criteria, %d failed ==\n", gates.size(), failures);
    return failures;
}
