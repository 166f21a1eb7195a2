// Runnable numerical checks of the supporting integral identities, each with
// independently evaluated sides, explicit residuals, and a declared error
// budget (particle noise, softening, time stencils, grid quadrature).
#ifndef VRL_IDENTITIES_HPP
#define VRL_IDENTITIES_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "vrl/radiation.hpp"

namespace vrl {

struct BudgetBreakdown {
    double noise = 0.0;
    double softening = 0.0;
    double stencil = 0.0;
    double quadrature = 0.0;
    double total() const { return noise + softening + stencil + quadrature; }
    const char* dominant() const {
        const double m = std::max({noise, softening, stencil, quadrature});
        if (m == 0.0) return "floor";
        if (m == noise) return "noise";
        if (m == softening) return "softening";
        if (m == stencil) return "stencil";
        return "quadrature";
    }
};

struct IdentityResult {
    std::string name;
    double t = 0.0;
    double left = 0.0;
    double right = 0.0;
    double abs_residual = 0.0;
    double rel_residual = 0.0;
    double tolerance = 0.0; // on the relative residual
    bool pass = false;
    BudgetBreakdown budget;
    double scale = 0.0; // magnitude used for the relative residual
};

namespace iddetail {

inline IdentityResult make_result(std::string name, double t, double left, double right,
                                  double scale, double tolerance, BudgetBreakdown budget) {
    IdentityResult r;
    r.name = std::move(name);
    r.t = t;
    r.left = left;
    r.right = right;
    r.abs_residual = std::abs(left - right);
    r.scale = std::max({scale, std::abs(left), std::abs(right), 1e-300});
    r.rel_residual = r.abs_residual / r.scale;
    r.tolerance = tolerance;
    r.budget = budget;
    r.pass = r.rel_residual <= r.tolerance;
    return r;
}

// pairwise-softened potential of frame `src` evaluated at the particle
// positions of frame `at` (gravity sign)
inline std::vector<double> potential_on_positions(const SourceHistory& h, int src, int at) {
    const ParticleEnsemble& s = h.frames[src].snapshot;
    const ParticleEnsemble& a = h.frames[at].snapshot;
    const auto q = source_coefficients(s, h.mode);
    std::vector<double> out(a.size());
    const double sign = h.mode == FieldMode::gravity ? -1.0 : 1.0;
    parallel_for(a.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            out[i] = sign * kernel_potential_at(s, q, a.pos(i), h.softening);
    }, 64);
    return out;
}

} // namespace iddetail

struct IdentityOptions {
    double tolerance_scale = 1.0;
    double base_rel_tolerance = 1e-3; // identities tied to the energy ledger
};

// The five phase-space identities of the gravitational Vlasov-Poisson flow,
// checked at frame time t (interior, two frames of margin). Identities 1-3 do
// not involve xi and are emitted once; 4 and 5 are emitted per direction.
inline std::vector<IdentityResult> check_vp_identities(const SourceHistory& h, double t,
                                                       const std::vector<Vec3>& xi_list,
                                                       const IdentityOptions& opt = {}) {
    if (h.mode != FieldMode::gravity)
        throw std::invalid_argument("check_vp_identities: gravity histories only");
    const int k = h.nearest_frame(t);
    if (k < 2 || k > h.frame_count() - 3)
        throw std::out_of_range("check_vp_identities: t must have two frames on each side");
    const double tk = h.frames[k].time;
    const ParticleEnsemble& e = h.frames[k].snapshot;
    const std::size_t n = e.size();
    const double eps = h.softening;

    // pairwise field and potential at the particles (the same field that
    // drives the characteristics)
    const ParticleFields pf = fields_at_particles(e, FieldMode::gravity, eps, true);

    const double epot = h.frames[k].energy.potential;
    const double dekin =
        h.stencil_dt(tk, [](const HistoryFrame& f) { return f.energy.kinetic; });
    // stencil self-estimate: compare with the double-spacing stencil
    double dekin_coarse = 0.0;
    {
        const auto& fr = h.frames;
        dekin_coarse = (fr[k - 4 < 0 ? 0 : k - 4].energy.kinetic -
                        8.0 * fr[k - 2].energy.kinetic + 8.0 * fr[k + 2].energy.kinetic -
                        fr[k + 4 >= h.frame_count() ? h.frame_count() - 1 : k + 4].energy.kinetic) /
                       (24.0 * h.dt_record);
        if (k - 4 < 0 || k + 4 >= h.frame_count()) dekin_coarse = dekin; // no estimate
    }
    const double stencil_est = std::abs(dekin_coarse - dekin) / 15.0 * 5.0;
    // curvature scale of the kinetic series, for the integrator-consistency budget
    const double ekin_curvature =
        std::abs(h.frames[k - 1].energy.kinetic - 2.0 * h.frames[k].energy.kinetic +
                 h.frames[k + 1].energy.kinetic) /
        sq(h.dt_record);

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    std::vector<IdentityResult> out;

    // 1: int grad(phi2) f0 = 0 (exact pair antisymmetry in particle form)
    {
        Vec3 left{};
        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            left += e.w[i] * pf.field(i);
            mag += e.w[i] * norm(pf.field(i));
        }
        BudgetBreakdown b;
        b.noise = 1e-13 * mag;             // roundoff accumulation of the pair sums
        b.softening = 1e-13 * mag;
        const double tol = opt.tolerance_scale * std::max(1e-11, (b.total() / mag) * 10.0);
        out.push_back(iddetail::make_result("vp1_mean_field_zero", tk, norm(left), 0.0, mag, tol, b));
    }
    // 2: int (S~ phi2) f0 = -2 dE_kin/dt, with dt phi2 by frame differencing of
    // the pairwise potential at fixed positions
    {
        const auto pm2 = iddetail::potential_on_positions(h, k - 2, k);
        const auto pm1 = iddetail::potential_on_positions(h, k - 1, k);
        const auto pp1 = iddetail::potential_on_positions(h, k + 1, k);
        const auto pp2 = iddetail::potential_on_positions(h, k + 2, k);
        double left = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dtphi =
                (pm2[i] - 8.0 * pm1[i] + 8.0 * pp1[i] - pp2[i]) / (12.0 * h.dt_record);
            left += e.w[i] * (dtphi + dot(e.mom(i), pf.field(i)));
        }
        const double right = -2.0 * dekin;
        BudgetBreakdown b;
        b.stencil = 2.0 * stencil_est + sq(h.dt_record) * std::abs(right) +
                    sq(h.dt_step) * ekin_curvature;
        b.softening = sq(eps) * std::abs(epot);
        b.noise = 0.0; // both sides share the particle realization
        const double scale = std::max(std::abs(right), 2.0 * std::abs(dekin));
        const double tol =
            opt.tolerance_scale * std::max(opt.base_rel_tolerance, b.total() / scale);
        out.push_back(iddetail::make_result("vp2_transport_energy", tk, left, right, scale, tol, b));
    }
    // 3: int p . grad(phi2) f0 = -dE_kin/dt
    {
        double left = 0.0;
        for (std::size_t i = 0; i < n; ++i) left += e.w[i] * dot(e.mom(i), pf.field(i));
        const double right = -dekin;
        BudgetBreakdown b;
        b.stencil = stencil_est + sq(h.dt_record) * std::abs(right) +
                    0.5 * sq(h.dt_step) * ekin_curvature;
        b.softening = 0.5 * sq(eps) * std::abs(epot);
        const double scale = std::max(std::abs(right), std::abs(dekin));
        const double tol =
            opt.tolerance_scale * std::max(opt.base_rel_tolerance, b.total() / scale);
        out.push_back(iddetail::make_result("vp3_drag_energy", tk, left, right, scale, tol, b));
    }
    // 4: int (xi.p)(xi.grad phi2) f0 = -(1/2) d/dt int (xi.p)^2 f0
    for (const Vec3& xi : xi_list) {
        double left = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            left += e.w[i] * dot(xi, e.mom(i)) * dot(xi, pf.field(i));
        const double right =
            -0.5 * h.stencil_dt(tk, [&](const HistoryFrame& f) {
                return frame_p_tensor(h, h.nearest_frame(f.time)).quad(xi);
            });
        BudgetBreakdown b;
        b.stencil = sq(h.dt_record) * std::max(std::abs(right), std::abs(dekin) * norm2(xi));
        b.softening = 0.5 * sq(eps) * std::abs(epot) * norm2(xi);
        const double scale = std::max(std::abs(right), norm2(xi) * std::abs(dekin));
        const double tol =
            opt.tolerance_scale * std::max(opt.base_rel_tolerance, b.total() / scale);
        out.push_back(iddetail::make_result("vp4_pressure_transfer", tk, left, right, scale, tol, b));
    }
    // 5: int (xi.x)(xi.grad phi2) f0 = -|xi|^2 E_pot - (1/4pi) int |xi.grad phi2|^2.
    // This identity estimates continuum integrals, so both sides use the
    // unsoftened point-particle estimators: the bare pair field and potential
    // on the left and in E_pot, the kernel-deconvolved grid quadrature (plus
    // analytic tail) for the field-square integral.
    {
        const double eps0 = 1e-9 * h.grid.h;
        const ParticleFields pf0 = fields_at_particles(e, FieldMode::gravity, eps0, true);
        double epot_point = 0.0;
        for (std::size_t i = 0; i < n; ++i) epot_point += 0.5 * e.w[i] * pf0.phi[i];
        const SymTensor3& gg = frame_g_tensor_sharp(h, k);
        for (const Vec3& xi : xi_list) {
            double left = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                left += e.w[i] * dot(xi, e.pos(i)) * dot(xi, pf0.field(i));
            const double field_term = gg.quad(xi) / (4.0 * std::numbers::pi);
            const double right = -norm2(xi) * epot_point - field_term;
            BudgetBreakdown b;
            const double res_scale = std::max(std::abs(right), std::abs(field_term));
            b.noise = 2.0 / sqrt_n * res_scale;
            b.quadrature = (4.0 * sq(h.grid.h) + 4e-3) * std::abs(field_term);
            const double tol = opt.tolerance_scale * std::max(5e-3, b.total() / res_scale);
            out.push_back(
                iddetail::make_result("vp5_virial_field", tk, left, right, res_scale, tol, b));
        }
    }
    return out;
}

// Far-field radiation identities at one (x_bar, u, r, c) sample: EM
// transversality and the flux chain for plasma histories, the gradient /
// time-derivative proportionality for gravity histories.
inline std::vector<IdentityResult> check_radiation_identities(const SourceHistory& h,
                                                              const Vec3& x_bar, double u,
                                                              double r, double c,
                                                              const IdentityOptions& opt = {}) {
    std::vector<IdentityResult> out;
    const double tol6 = opt.tolerance_scale * 1e-6; // quadrature tolerance of the forms
    if (h.mode == FieldMode::plasma) {
        const FieldSample s = far_field(h, x_bar, u, r, c, FieldKind::em);
        const double em = norm(s.E), bm = norm(s.B);
        BudgetBreakdown b;
        b.quadrature = 1e-12;
        out.push_back(iddetail::make_result("rad_xbar_dot_E", u, std::abs(dot(x_bar, s.E)), 0.0,
                                            em, tol6, b));
        out.push_back(iddetail::make_result("rad_xbar_dot_B", u, std::abs(dot(x_bar, s.B)), 0.0,
                                            bm, tol6, b));
        out.push_back(iddetail::make_result("rad_cross_relation", u,
                                            norm(cross(x_bar, s.E) - s.B), 0.0, bm, tol6, b));
        out.push_back(iddetail::make_result("rad_flux_chain", u, dot(x_bar, cross(s.B, s.E)),
                                            -norm2(cross(x_bar, s.E)), norm2(cross(x_bar, s.E)),
                                            tol6, b));
        // direct-vs-transverse transverse-part agreement, reported not asserted
        const Vec3 edp = s.E_direct - dot(x_bar, s.E_direct) * x_bar;
        BudgetBreakdown b2;
        b2.quadrature = 0.02 * em;
        b2.stencil = sq(h.dt_record) * em;
        out.push_back(iddetail::make_result("rad_form_consistency", u, norm(s.E - edp), 0.0, em,
                                            opt.tolerance_scale * 0.05, b2));
    } else {
        const FieldSample s = far_field(h, x_bar, u, r, c, FieldKind::vn);
        const double gm = std::max(norm(s.grad_phi), norm(s.grad_phi_direct));
        BudgetBreakdown b;
        b.quadrature = 0.02 * gm;
        b.stencil = sq(h.dt_record) * gm;
        out.push_back(iddetail::make_result("rad_vn_proportionality", u,
                                            dot(x_bar, s.grad_phi_direct), -s.dt_phi / c, gm,
                                            opt.tolerance_scale * 0.10, b));
    }
    return out;
}

// Spherical-symmetry reductions on a gravity history flagged isotropic.
inline std::vector<IdentityResult> check_spherical_reductions(const SourceHistory& h, double u,
                                                              const Vec3& x_bar,
                                                              const IdentityOptions& opt = {}) {
    if (h.mode != FieldMode::gravity)
        throw std::invalid_argument("check_spherical_reductions: gravity histories only");
    const int k = h.nearest_frame(u);
    const double tk = h.frames[k].time;
    const double ekin = h.frames[k].energy.kinetic;
    const double epot = h.frames[k].energy.potential;
    const std::size_t n = h.frames[k].snapshot.size();
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    std::vector<IdentityResult> out;

    // (1/4pi) int |x_bar . grad phi2|^2 = -(2/3) E_pot
    {
        const SymTensor3& gg = frame_g_tensor(h, k, CalRMethod::grid);
        const double left = gg.quad(x_bar) / (4.0 * std::numbers::pi);
        const double right = -2.0 / 3.0 * epot;
        BudgetBreakdown b;
        b.noise = 2.0 / sqrt_n * std::abs(right);
        b.quadrature = (sq(h.grid.h) + sq(h.bandwidth)) * std::abs(right) * 2.0;
        b.softening = sq(h.softening) * std::abs(epot);
        const double tol =
            opt.tolerance_scale * std::max(1e-3, b.total() / std::abs(right));
        out.push_back(iddetail::make_result("sph_field_square", tk, left, right,
                                            std::abs(right), tol, b));
    }
    // int (x_bar . p)^2 f0 = (2/3) E_kin
    {
        const double left = frame_p_tensor(h, k).quad(x_bar);
        const double right = 2.0 / 3.0 * ekin;
        BudgetBreakdown b;
        b.noise = 2.0 / sqrt_n * std::abs(right);
        const double tol =
            opt.tolerance_scale * std::max(1e-3, b.total() / std::max(std::abs(right), 1e-300));
        out.push_back(iddetail::make_result("sph_momentum_square", tk, left, right,
                                            std::abs(right), tol, b));
    }
    // dR/dt = (8/3) dE_kin/dt (energy-consistent pairwise path)
    {
        const auto rr = compute_calR(h, x_bar, tk, CalRMethod::pairwise);
        const double dekin =
            h.stencil_dt(tk, [](const HistoryFrame& f) { return f.energy.kinetic; });
        const double right = 8.0 / 3.0 * dekin;
        BudgetBreakdown b;
        b.stencil = sq(h.dt_record) * std::abs(right);
        b.softening = sq(h.softening) * std::abs(dekin);
        const double tol =
            opt.tolerance_scale * std::max(1e-3, b.total() / std::max(std::abs(right), 1e-300));
        out.push_back(
            iddetail::make_result("sph_dRdt_reduction", tk, rr.dr_dt, right, std::abs(right), tol, b));
    }
    // R is direction-independent: spread over the six axes vs the single-axis
    // reduction residual
    {
        const double rhs = 2.0 / 3.0 * epot + 10.0 / 3.0 * ekin;
        double rmin = 1e300, rmax = -1e300, single = 0.0;
        const Vec3 axes[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        for (const Vec3& a : axes) {
            const double rv = compute_calR(h, a, tk, CalRMethod::pairwise).r_value;
            rmin = std::min(rmin, rv);
            rmax = std::max(rmax, rv);
        }
        single = std::abs(compute_calR(h, {1, 0, 0}, tk, CalRMethod::pairwise).r_value - rhs);
        BudgetBreakdown b;
        b.noise = single;
        const double scale = std::max(std::abs(rhs), 1e-300);
        const double tol =
            opt.tolerance_scale * std::max(3.0 * single / scale, 1e-12);
        out.push_back(iddetail::make_result("sph_R_axis_spread", tk, rmax - rmin, 0.0, scale,
                                            tol, b));
    }
    // R = (2/3) E_pot + (10/3) E_kin
    {
        const double left = compute_calR(h, x_bar, tk, CalRMethod::pairwise).r_value;
        const double right = 2.0 / 3.0 * epot + 10.0 / 3.0 * ekin;
        BudgetBreakdown b;
        b.noise = 2.0 / sqrt_n * std::abs(right);
        b.softening = sq(h.softening) * std::abs(epot);
        const double tol =
            opt.tolerance_scale * std::max(1e-3, b.total() / std::max(std::abs(right), 1e-300));
        out.push_back(
            iddetail::make_result("sph_R_reduction", tk, left, right, std::abs(right), tol, b));
    }
    return out;
}

// identities.csv row format (append; header written by the caller once):
// name,t,left,right,abs_residual,rel_residual,tolerance,pass
inline std::string identity_csv_header() {
    return "name,t,left,right,abs_residual,rel_residual,tolerance,pass";
}
inline std::string identity_csv_row(const IdentityResult& r) {
    return r.name + "," + format_double(r.t) + "," + format_double(r.left) + "," +
           format_double(r.right) + "," + format_double(r.abs_residual) + "," +
           format_double(r.rel_residual) + "," + format_double(r.tolerance) + "," +
           (r.pass ? "1" : "0");
}

} // namespace vrl

#endif // VRL_IDENTITIES_HPP
