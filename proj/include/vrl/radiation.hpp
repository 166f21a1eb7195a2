// Radiation diagnostics: Poynting-type flux densities, the dipole and
// Vlasov-Nordstrom monopole predictions, the direction-dependent radiation
// term R(x_bar, u) via frame tensors, and asymptotic-order scans.
#ifndef VRL_RADIATION_HPP
#define VRL_RADIATION_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vrl/poisson.hpp"
#include "vrl/retarded.hpp"
#include "vrl/sphere.hpp"

namespace vrl {

// Raw surface integrand of the energy-flux law: x_bar . (B x E) for EM,
// x_bar . (dt_phi grad_phi) for the scalar theory. Negative for outgoing
// radiation.
inline double flux_integrand(const FieldSample& s) {
    if (s.kind == FieldKind::em) return dot(s.x_bar, cross(s.B, s.E));
    return dot(s.x_bar, s.dt_phi * s.grad_phi);
}

// Energy-flux density: the integrand scaled by c/4pi (EM) or c^4/4pi (VN),
// so that the sphere integral of r^2 * flux_density is dE/dt.
inline double flux_density(const FieldSample& s) {
    const double raw = flux_integrand(s);
    if (s.kind == FieldKind::em) return s.c / (4.0 * std::numbers::pi) * raw;
    return std::pow(s.c, 4) / (4.0 * std::numbers::pi) * raw;
}

struct FluxPrediction {
    double density = 0.0;    // prediction for the raw integrand
    double integrated = 0.0; // prediction for dE/dt
};

// Dipole radiation: density -c^-4 r^-2 |x_bar x D''|^2 against x_bar.(B x E),
// integrated -(2/3) c^-3 |D''|^2 against dE/dt.
inline FluxPrediction predict_dipole(const Vec3& dd_dipole, const Vec3& x_bar, double r, double c) {
    if (std::abs(norm(x_bar) - 1.0) > 1e-12)
        throw std::invalid_argument("predict_dipole: |x_bar| must be 1");
    FluxPrediction p;
    p.density = -norm2(cross(x_bar, dd_dipole)) / (std::pow(c, 4) * r * r);
    p.integrated = -2.0 / (3.0 * cube(c)) * norm2(dd_dipole);
    return p;
}

// ---------------------------------------------------------------------------
// Frame tensors: R(x_bar, t_k) is the quadratic form
//   R = -x_bar^T [ G/4pi + P ] x_bar + 4 E_kin,
// with G = int grad(phi2) (x) grad(phi2) dy and P = sum w p (x) p.
// G comes from the pairwise closed form (energy-consistent, the default) or
// from grid quadrature of the recorded field plus the analytic monopole tail.
// ---------------------------------------------------------------------------

enum class CalRMethod { pairwise, grid };

namespace radetail {

inline void ensure_tensor_slot(const SourceHistory& h) {
    if (h.tensor_cache.size() != h.frames.size()) h.tensor_cache.assign(h.frames.size(), {});
}

inline PoissonSolver& poisson_for(const SourceHistory& h) {
    if (!h.poisson_cache)
        h.poisson_cache = std::static_pointer_cast<void>(std::make_shared<PoissonSolver>(h.grid));
    return *std::static_pointer_cast<PoissonSolver>(h.poisson_cache);
}

} // namespace radetail

// E0 (plasma) or grad(phi2) (gravity) on the grid for frame k, via the
// free-space Poisson convolution of the recorded density; cached on the frame.
inline const VectorField& frame_field_grid(const SourceHistory& h, int k) {
    HistoryFrame& f = const_cast<HistoryFrame&>(h.frames[k]);
    if (!f.has_field_grid) {
        PoissonSolver& solver = radetail::poisson_for(h);
        const double sign = h.mode == FieldMode::gravity ? -1.0 : 1.0;
        ScalarField phi = solver.potential(f.rho, sign);
        f.field = PoissonSolver::gradient(phi);
        if (h.mode == FieldMode::plasma) {
            // E0 = -grad(phi0)
            for (std::size_t m = 0; m < f.field.vx.size(); ++m) {
                f.field.vx[m] = -f.field.vx[m];
                f.field.vy[m] = -f.field.vy[m];
                f.field.vz[m] = -f.field.vz[m];
            }
        }
        f.has_field_grid = true;
    }
    return f.field;
}

inline const SymTensor3& frame_g_tensor(const SourceHistory& h, int k, CalRMethod method) {
    radetail::ensure_tensor_slot(h);
    auto& slot = h.tensor_cache[static_cast<std::size_t>(k)];
    if (method == CalRMethod::pairwise) {
        if (!slot.pair_ready) {
            slot.g_pair = field_gradient_tensor_pairwise(h.frames[k].snapshot, h.softening);
            slot.pair_ready = true;
        }
        return slot.g_pair;
    }
    if (!slot.grid_ready) {
        const VectorField& grad = frame_field_grid(h, k);
        const double mass = h.frames[k].snapshot.total_weight();
        slot.g_grid = field_gradient_tensor_grid(grad, mass);
        slot.grid_ready = true;
    }
    return slot.g_grid;
}

// Like the grid method but with the deposition kernel deconvolved, so the
// grid field approximates the point-particle field (identity checks against
// unsoftened pairwise estimators).
inline const SymTensor3& frame_g_tensor_sharp(const SourceHistory& h, int k) {
    radetail::ensure_tensor_slot(h);
    auto& slot = h.tensor_cache[static_cast<std::size_t>(k)];
    if (!slot.sharp_ready) {
        PoissonSolver& solver = radetail::poisson_for(h);
        ScalarField phi = solver.potential(h.frames[k].rho, -1.0, SourceSharpening::point,
                                           h.bandwidth);
        const VectorField grad = PoissonSolver::gradient(phi);
        slot.g_sharp = field_gradient_tensor_grid(grad, h.frames[k].snapshot.total_weight());
        slot.sharp_ready = true;
    }
    return slot.g_sharp;
}

inline const SymTensor3& frame_p_tensor(const SourceHistory& h, int k) {
    radetail::ensure_tensor_slot(h);
    auto& slot = h.tensor_cache[static_cast<std::size_t>(k)];
    if (!slot.p_ready) {
        slot.p = momentum_tensor(h.frames[k].snapshot);
        slot.p_ready = true;
    }
    return slot.p;
}

// The tensors of R and dR/dt at retarded time u: A(u) = G/4pi + P by cubic
// interpolation across frames, dA/du by the 5-point centered stencil when u
// sits on the frame grid (the scan contract), else the Hermite derivative.
struct CalRTensors {
    SymTensor3 a{};      // G/4pi + P at u
    SymTensor3 da{};     // d/du of the same
    double ekin = 0.0;
    double dekin = 0.0;
};

inline CalRTensors calr_tensors(const SourceHistory& h, double u,
                                CalRMethod method = CalRMethod::pairwise) {
    CalRTensors out;
    const int k = h.nearest_frame(u);
    const bool aligned = std::abs(h.frames[k].time - u) <= 1e-9 * std::max(1.0, std::abs(u));
    constexpr double inv4pi = 1.0 / (4.0 * std::numbers::pi);
    auto a_at = [&](int frame) {
        SymTensor3 t = frame_g_tensor(h, frame, method);
        t *= inv4pi;
        t += frame_p_tensor(h, frame);
        return t;
    };
    if (aligned) {
        if (k < 2 || k > h.frame_count() - 3)
            throw std::out_of_range("calr_tensors: need two frames on each side of u = " +
                                    format_double(u));
        out.a = a_at(k);
        out.ekin = h.frames[k].energy.kinetic;
        const SymTensor3 am2 = a_at(k - 2), am1 = a_at(k - 1), ap1 = a_at(k + 1), ap2 = a_at(k + 2);
        for (int m = 0; m < 6; ++m)
            out.da.c[m] = (am2.c[m] - 8.0 * am1.c[m] + 8.0 * ap1.c[m] - ap2.c[m]) /
                          (12.0 * h.dt_record);
        out.dekin = h.stencil_dt(u, [](const HistoryFrame& f) { return f.energy.kinetic; },
                                 "calr_tensors");
    } else {
        const TimeInterp ti = h.interp(u, "calr_tensors");
        for (int m = 0; m < 4; ++m) {
            SymTensor3 t = a_at(ti.i0 + m);
            SymTensor3 tv = t, td = t;
            tv *= ti.w[m];
            td *= ti.dw[m];
            out.a += tv;
            out.da += td;
            out.ekin += ti.w[m] * h.frames[ti.i0 + m].energy.kinetic;
            out.dekin += ti.dw[m] * h.frames[ti.i0 + m].energy.kinetic;
        }
    }
    return out;
}

struct CalRResult {
    double r_value = 0.0;
    double dr_dt = 0.0;
};

// R(x_bar, u) and its u-derivative.
inline CalRResult compute_calR(const SourceHistory& h, const Vec3& x_bar, double u,
                               CalRMethod method = CalRMethod::pairwise) {
    if (std::abs(norm(x_bar) - 1.0) > 1e-12)
        throw std::invalid_argument("compute_calR: |x_bar| must be 1");
    const CalRTensors t = calr_tensors(h, u, method);
    CalRResult out;
    out.r_value = -t.a.quad(x_bar) + 4.0 * t.ekin;
    out.dr_dt = -t.da.quad(x_bar) + 4.0 * t.dekin;
    return out;
}

struct VnPrediction {
    double density = 0.0;              // against x_bar . (dt_phi grad_phi)
    double integrated = 0.0;           // -(1/4pi c^5) surface integral of (dR/dt)^2
    double spherical_integrated = 0.0; // -(64/9) c^-5 (dE_kin/dt)^2
};

inline VnPrediction predict_vn(const SourceHistory& h, const Vec3& x_bar, double u, double r,
                               double c, const SphereQuadrature& quad,
                               CalRMethod method = CalRMethod::pairwise) {
    const CalRTensors t = calr_tensors(h, u, method);
    VnPrediction p;
    const double dr = -t.da.quad(x_bar) + 4.0 * t.dekin;
    p.density = -sq(dr) / (std::pow(c, 9) * r * r);
    const double surf = sphere_integrate(
        [&](const Vec3& w) { return sq(-t.da.quad(w) + 4.0 * t.dekin); }, quad);
    p.integrated = -surf / (4.0 * std::numbers::pi * std::pow(c, 5));
    p.spherical_integrated = -64.0 / 9.0 * sq(t.dekin) / std::pow(c, 5);
    return p;
}

// dE/dt measured by integrating far-field flux densities over the sphere.
inline double integrate_flux(const SourceHistory& h, double u, double r, double c, FieldKind kind,
                             const SphereQuadrature& quad, const FarFieldOptions& opt = {}) {
    double acc = 0.0;
    for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
        const FieldSample s = far_field(h, quad.nodes[i], u, r, c, kind, opt);
        acc += quad.weights[i] * flux_density(s) * r * r;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Order scan across (c, r, u) x directions: measured far-field (and optionally
// exact retarded) integrands against the closed-form predictions, plus fitted
// residual decay exponents.
// ---------------------------------------------------------------------------

struct ScanPoint {
    double c = 0.0, r = 0.0, u = 0.0;
    Vec3 x_bar{};
    double measured = 0.0;        // far-field integrand
    double predicted = 0.0;       // closed-form prediction for the integrand
    double residual = 0.0;        // measured - predicted, exactly
    double signal = 0.0;          // |predicted|
    bool has_exact = false;
    double measured_exact = 0.0;  // exact-retarded integrand (optional)
    double residual_exact = 0.0;
};

struct ExponentFit {
    std::string name;
    double exponent = 0.0;
    double fit_residual = 0.0; // rms residual of the log-log fit
    std::size_t points = 0;
    bool valid = false;
    std::string note;
};

struct RadiationReport {
    std::string scenario;
    FieldMode mode = FieldMode::gravity;
    std::vector<ScanPoint> points;
    std::vector<ExponentFit> fits;
    double noise_floor = 0.0;
    bool fits_skipped_static = false;
};

struct OrderScanConfig {
    std::vector<double> c_list;
    std::vector<double> r_list;
    std::vector<double> u_list;
    std::vector<Vec3> directions; // unit vectors; default set used when empty
    bool measure_exact = true;    // exact retarded fields on the r-scan
    double exact_max_r = 1e30;    // skip exact evaluation beyond this radius
    double static_floor = 1e-18;  // |signal| below this flags a static scan
    FarFieldOptions far_options{};
    CalRMethod calr_method = CalRMethod::pairwise;
    int sphere_n_theta = 16, sphere_n_phi = 32;
};

namespace radetail {

inline ExponentFit fit_loglog(const std::string& name, const std::vector<double>& xs,
                              const std::vector<double>& ys) {
    ExponentFit f;
    f.name = name;
    f.points = xs.size();
    if (xs.size() < 2) {
        f.note = "not enough points";
        return f;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double n = static_cast<double>(xs.size());
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) {
        f.note = "degenerate abscissae";
        return f;
    }
    f.exponent = (n * sxy - sx * sy) / denom;
    const double icept = (sy - f.exponent * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) rss += sq(ys[i] - icept - f.exponent * xs[i]);
    f.fit_residual = std::sqrt(rss / n);
    f.valid = true;
    return f;
}

inline std::vector<Vec3> default_directions() {
    std::vector<Vec3> d = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    d.push_back(normalized(Vec3{1, 1, 1}));
    d.push_back(normalized(Vec3{1, -0.5, 0.25}));
    d.push_back(normalized(Vec3{-0.3, 0.9, -0.5}));
    return d;
}

} // namespace radetail

inline RadiationReport order_scan(const SourceHistory& h, const OrderScanConfig& cfg,
                                  const std::string& scenario = "") {
    if (cfg.c_list.empty() || cfg.r_list.empty() || cfg.u_list.empty())
        throw std::invalid_argument("order_scan: empty scan axes");
    const FieldKind kind = h.mode == FieldMode::plasma ? FieldKind::em : FieldKind::vn;
    const auto dirs = cfg.directions.empty() ? radetail::default_directions() : cfg.directions;
    const auto quad = SphereQuadrature::gauss_legendre(cfg.sphere_n_theta, cfg.sphere_n_phi);

    RadiationReport rep;
    rep.scenario = scenario;
    rep.mode = h.mode;
    rep.noise_floor = cfg.static_floor;

    const double r_exact_limit = cfg.exact_max_r;
    for (double u : cfg.u_list)
        for (double c : cfg.c_list)
            for (double r : cfg.r_list)
                for (const Vec3& xb : dirs) {
                    ScanPoint p;
                    p.c = c;
                    p.r = r;
                    p.u = u;
                    p.x_bar = xb;
                    const FieldSample far = far_field(h, xb, u, r, c, kind, cfg.far_options);
                    p.measured = flux_integrand(far);
                    if (kind == FieldKind::em) {
                        p.predicted = predict_dipole(h.dipole_accel_at(u), xb, r, c).density;
                    } else {
                        p.predicted =
                            predict_vn(h, xb, u, r, c, quad, cfg.calr_method).density;
                    }
                    p.residual = p.measured - p.predicted;
                    p.signal = std::abs(p.predicted);
                    if (cfg.measure_exact && r <= r_exact_limit) {
                        const FieldSample ex =
                            retarded_field(h, u + r / c, r * xb, c, kind);
                        p.has_exact = true;
                        p.measured_exact = flux_integrand(ex);
                        p.residual_exact = p.measured_exact - p.predicted;
                    }
                    rep.points.push_back(p);
                }

    // static source: every signal below the floor; flag and skip fits
    double max_signal = 0.0;
    for (const auto& p : rep.points) max_signal = std::max(max_signal, p.signal);
    if (max_signal < cfg.static_floor) {
        rep.fits_skipped_static = true;
        ExponentFit f;
        f.name = "skipped: signals at noise floor (static scenario)";
        rep.fits.push_back(f);
        return rep;
    }

    // c-exponent of |residual| / |signal| at the largest r, per u (far-field path)
    {
        const double r_fix = *std::max_element(cfg.r_list.begin(), cfg.r_list.end());
        std::vector<double> xs, ys;
        for (const auto& p : rep.points)
            if (p.r == r_fix && p.signal > cfg.static_floor && std::abs(p.residual) > 0.0) {
                xs.push_back(std::log(p.c));
                ys.push_back(std::log(std::abs(p.residual) / p.signal));
            }
        auto f = radetail::fit_loglog("c_exponent_relative", xs, ys);
        f.note = "log(|residual|/|signal|) vs log c at r = " + format_double(r_fix);
        rep.fits.push_back(f);
    }
    // r-exponent of the exact-field residual at the smallest c
    {
        const double c_fix = *std::min_element(cfg.c_list.begin(), cfg.c_list.end());
        std::vector<double> xs, ys;
        for (const auto& p : rep.points)
            if (p.c == c_fix && p.has_exact && std::abs(p.residual_exact) > 0.0) {
                xs.push_back(std::log(p.r));
                ys.push_back(std::log(std::abs(p.residual_exact)));
            }
        auto f = radetail::fit_loglog("r_exponent_exact", xs, ys);
        f.note = "log|measured_exact - predicted| vs log r at c = " + format_double(c_fix);
        rep.fits.push_back(f);
    }
    // r-exponent of the far-field signal itself (the r^-2 law, exact by form)
    {
        const double c_fix = *std::min_element(cfg.c_list.begin(), cfg.c_list.end());
        std::vector<double> xs, ys;
        for (const auto& p : rep.points)
            if (p.c == c_fix && std::abs(p.measured) > 0.0) {
                xs.push_back(std::log(p.r));
                ys.push_back(std::log(std::abs(p.measured)));
            }
        auto f = radetail::fit_loglog("r_exponent_signal", xs, ys);
        f.note = "log|measured| vs log r at c = " + format_double(c_fix);
        rep.fits.push_back(f);
    }
    return rep;
}

} // namespace vrl

#endif // VRL_RADIATION_HPP
