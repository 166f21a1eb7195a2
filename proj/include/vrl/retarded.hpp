// Exact retarded fields of the recorded sources and their far-field
// (radiation-zone) forms. Spatial source derivatives use 4th-order stencils
// at fixed retarded time; time access uses the cubic frame interpolant.
#ifndef VRL_RETARDED_HPP
#define VRL_RETARDED_HPP

#include <cmath>
#include <stdexcept>

#include "vrl/history.hpp"

namespace vrl {

enum class FieldKind { em, vn };

// Evaluation of the far-field integrand argument u + (x_bar . y) / c: exact,
// or the first-order Taylor shortcut in (x_bar . y) / c.
enum class FarArgument { exact, taylor };

struct FieldSample {
    double t = 0.0;
    Vec3 x{};
    double c = 1.0;
    double r = 0.0;          // |x| (far-field samples store the scan radius)
    Vec3 x_bar{};            // direction (far-field samples)
    FieldKind kind = FieldKind::em;
    bool far_field = false;  // provenance: exact-retarded or far-field

    // EM: primary fields; far-field EM also carries the direct-form values
    Vec3 E{}, B{};
    Vec3 E_direct{}, B_direct{};

    // VN: grad_phi is the radial far-field form -c^-1 dt_phi x_bar (the
    // gradient integral reduces to that exactly after integration by parts);
    // grad_phi_direct keeps the direct quadrature of grad mu for cross-checks
    double dt_phi = 0.0;
    Vec3 grad_phi{};
    Vec3 grad_phi_direct{};
};

inline double retarded_time(const Vec3& x, double t, const Vec3& y, double c) {
    if (c <= 0.0) throw std::invalid_argument("retarded_time: c must be positive");
    return t - norm(y - x) / c;
}

namespace retdetail {

// Union-of-support mask over all frames, dilated by the stencil reach.
inline const std::vector<std::uint8_t>& active_mask(const SourceHistory& h) {
    if (!h.active_mask_cache.empty()) return h.active_mask_cache;
    const UniformGrid& g = h.grid;
    std::vector<std::uint8_t> raw(g.size(), 0);
    for (const auto& f : h.frames) {
        for (std::size_t m = 0; m < raw.size(); ++m)
            if (f.rho.v[m] != 0.0 || f.current.vx[m] != 0.0 || f.current.vy[m] != 0.0 ||
                f.current.vz[m] != 0.0)
                raw[m] = 1;
    }
    std::vector<std::uint8_t> dil(g.size(), 0);
    int lo[3] = {g.nx, g.ny, g.nz}, hi[3] = {-1, -1, -1};
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int k = 0; k < g.nz; ++k) {
                bool any = false;
                for (int a = -2; a <= 2 && !any; ++a)
                    for (int b = -2; b <= 2 && !any; ++b)
                        for (int c2 = -2; c2 <= 2 && !any; ++c2) {
                            const int ii = i + a, jj = j + b, kk = k + c2;
                            if (ii < 0 || jj < 0 || kk < 0 || ii >= g.nx || jj >= g.ny ||
                                kk >= g.nz)
                                continue;
                            if (raw[g.index(ii, jj, kk)]) any = true;
                        }
                if (any) {
                    dil[g.index(i, j, k)] = 1;
                    lo[0] = std::min(lo[0], i); hi[0] = std::max(hi[0], i);
                    lo[1] = std::min(lo[1], j); hi[1] = std::max(hi[1], j);
                    lo[2] = std::min(lo[2], k); hi[2] = std::max(hi[2], k);
                }
            }
    h.active_mask_cache = std::move(dil);
    for (int d = 0; d < 3; ++d) {
        h.active_lo[d] = lo[d];
        h.active_hi[d] = hi[d];
    }
    return h.active_mask_cache;
}

// Distance bounds from a point to the active bounding box.
inline void distance_bounds(const SourceHistory& h, const Vec3& x, double& rmin, double& rmax) {
    const UniformGrid& g = h.grid;
    const Vec3 lo = g.node(h.active_lo[0], h.active_lo[1], h.active_lo[2]);
    const Vec3 hi = g.node(h.active_hi[0], h.active_hi[1], h.active_hi[2]);
    double d2min = 0.0, d2max = 0.0;
    for (int d = 0; d < 3; ++d) {
        const double l = lo[d], u = hi[d], v = x[d];
        const double below = std::max(0.0, std::max(l - v, v - u));
        d2min += below * below;
        d2max += sq(std::max(std::abs(v - l), std::abs(v - u)));
    }
    rmin = std::sqrt(d2min);
    rmax = std::sqrt(d2max);
}

// max |x_bar . y| over the active box
inline double max_projection(const SourceHistory& h, const Vec3& xbar) {
    const UniformGrid& g = h.grid;
    const Vec3 lo = g.node(h.active_lo[0], h.active_lo[1], h.active_lo[2]);
    const Vec3 hi = g.node(h.active_hi[0], h.active_hi[1], h.active_hi[2]);
    double m = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
        const Vec3 y{corner & 1 ? hi.x : lo.x, corner & 2 ? hi.y : lo.y,
                     corner & 4 ? hi.z : lo.z};
        m = std::max(m, std::abs(dot(xbar, y)));
    }
    return m;
}

// Which interpolation weight lane to read: plain values or their first time
// derivative (Taylor-corrected far fields need the latter).
enum class Lane { value, dt };

inline const double* lane_weights(const TimeInterp& ti, Lane lane) {
    return lane == Lane::value ? ti.w : ti.dw;
}

// 4th-order fixed-time spatial derivative of rho along `axis` at node (i,j,k),
// all neighbor values interpolated at the same retarded time ti.
inline double drho(const SourceHistory& h, const TimeInterp& ti, int i, int j, int k, int axis,
                   Lane lane = Lane::value) {
    const UniformGrid& g = h.grid;
    const double* lw = lane_weights(ti, lane);
    auto val = [&](int di) -> double {
        int ii = i, jj = j, kk = k;
        (axis == 0 ? ii : axis == 1 ? jj : kk) += di;
        if (ii < 0 || jj < 0 || kk < 0 || ii >= g.nx || jj >= g.ny || kk >= g.nz) return 0.0;
        const std::size_t m = g.index(ii, jj, kk);
        double v = 0.0;
        for (int q = 0; q < 4; ++q) v += lw[q] * h.frames[ti.i0 + q].rho.v[m];
        return v;
    };
    return (-val(2) + 8.0 * val(1) - 8.0 * val(-1) + val(-2)) / (12.0 * g.h);
}

// same for one component of j
inline double dj(const SourceHistory& h, const TimeInterp& ti, int i, int j, int k, int axis,
                 int comp, Lane lane = Lane::value) {
    const UniformGrid& g = h.grid;
    const double* lw = lane_weights(ti, lane);
    auto val = [&](int di) -> double {
        int ii = i, jj = j, kk = k;
        (axis == 0 ? ii : axis == 1 ? jj : kk) += di;
        if (ii < 0 || jj < 0 || kk < 0 || ii >= g.nx || jj >= g.ny || kk >= g.nz) return 0.0;
        const std::size_t m = g.index(ii, jj, kk);
        double v = 0.0;
        for (int q = 0; q < 4; ++q) {
            const VectorField& jf = h.frames[ti.i0 + q].current;
            v += lw[q] * (comp == 0 ? jf.vx[m] : comp == 1 ? jf.vy[m] : jf.vz[m]);
        }
        return v;
    };
    return (-val(2) + 8.0 * val(1) - 8.0 * val(-1) + val(-2)) / (12.0 * g.h);
}

inline Vec3 curl_j(const SourceHistory& h, const TimeInterp& ti, int i, int j, int k,
                   Lane lane = Lane::value) {
    return {dj(h, ti, i, j, k, 1, 2, lane) - dj(h, ti, i, j, k, 2, 1, lane),
            dj(h, ti, i, j, k, 2, 0, lane) - dj(h, ti, i, j, k, 0, 2, lane),
            dj(h, ti, i, j, k, 0, 1, lane) - dj(h, ti, i, j, k, 1, 0, lane)};
}

// spatial derivative of the scalar-gravity source mu = rho - (3/2) c^-2 rho2;
// Lane::dt differentiates the recorded nodal time-derivative grids instead
inline double dmu(const SourceHistory& h, const TimeInterp& ti, int i, int j, int k, int axis,
                  double c, Lane lane = Lane::value) {
    const UniformGrid& g = h.grid;
    const double corr = -1.5 / (c * c);
    auto val = [&](int di) -> double {
        int ii = i, jj = j, kk = k;
        (axis == 0 ? ii : axis == 1 ? jj : kk) += di;
        if (ii < 0 || jj < 0 || kk < 0 || ii >= g.nx || jj >= g.ny || kk >= g.nz) return 0.0;
        const std::size_t m = g.index(ii, jj, kk);
        double v = 0.0;
        if (lane == Lane::value) {
            for (int q = 0; q < 4; ++q) {
                const HistoryFrame& f = h.frames[ti.i0 + q];
                v += ti.w[q] * (f.rho.v[m] + corr * f.rho2.v[m]);
            }
        } else {
            for (int q = 0; q < 4; ++q) {
                const HistoryFrame& f = h.frames[ti.i0 + q];
                v += ti.w[q] * (f.rho_dt.v[m] + corr * f.rho2_dt.v[m]);
            }
        }
        return v;
    };
    return (-val(2) + 8.0 * val(1) - 8.0 * val(-1) + val(-2)) / (12.0 * g.h);
}

struct EmAccum {
    Vec3 e{}, b{};
    EmAccum& operator+=(const EmAccum& o) {
        e += o.e;
        b += o.b;
        return *this;
    }
};

struct VnAccum {
    double dt = 0.0;
    Vec3 grad{};
    VnAccum& operator+=(const VnAccum& o) {
        dt += o.dt;
        grad += o.grad;
        return *this;
    }
};

} // namespace retdetail

// ---------------------------------------------------------------------------
// Exact retarded fields: midpoint quadrature over the moment grid with source
// arguments at t - |y - x| / c.
//   EM: E = -int (grad rho + c^-2 dt j)(ret) / |y-x|,  B = c^-1 int curl j(ret) / |y-x|
//   VN: dt_phi = -c^-2 int dt mu(ret) / |y-x|,  grad_phi = -c^-2 int grad mu(ret) / |y-x|
// ---------------------------------------------------------------------------
inline FieldSample retarded_field(const SourceHistory& h, double t, const Vec3& x, double c,
                                  FieldKind kind) {
    if (c <= 0.0) throw std::invalid_argument("retarded_field: c must be positive");
    const auto& mask = retdetail::active_mask(h);
    double rmin = 0.0, rmax = 0.0;
    retdetail::distance_bounds(h, x, rmin, rmax);
    h.require_window(t - rmax / c, "retarded_field");
    h.require_window(t - rmin / c, "retarded_field");

    const UniformGrid& g = h.grid;
    const double vol = g.cell_volume();
    const std::size_t nyz = static_cast<std::size_t>(g.ny) * g.nz;

    FieldSample s;
    s.t = t;
    s.x = x;
    s.c = c;
    s.r = norm(x);
    s.x_bar = s.r > 0.0 ? x / s.r : Vec3{};
    s.kind = kind;
    s.far_field = false;

    if (kind == FieldKind::em) {
        auto acc = chunked_reduce(
            g.size(), retdetail::EmAccum{},
            [&](std::size_t b, std::size_t e, retdetail::EmAccum& out) {
                for (std::size_t m = b; m < e; ++m) {
                    if (!mask[m]) continue;
                    const int i = static_cast<int>(m / nyz);
                    const int j = static_cast<int>((m / g.nz) % g.ny);
                    const int k = static_cast<int>(m % g.nz);
                    const Vec3 y = g.node(i, j, k);
                    const double R = norm(y - x);
                    const TimeInterp ti = h.interp(t - R / c, "retarded_field");
                    const Vec3 grad_rho{retdetail::drho(h, ti, i, j, k, 0),
                                        retdetail::drho(h, ti, i, j, k, 1),
                                        retdetail::drho(h, ti, i, j, k, 2)};
                    const Vec3 dtj = h.current_dt_at(ti, m);
                    const Vec3 curl = retdetail::curl_j(h, ti, i, j, k);
                    const double w = 1.0 / R;
                    out.e += (-w) * (grad_rho + (1.0 / (c * c)) * dtj);
                    out.b += (w / c) * curl;
                }
            },
            4096);
        s.E = vol * acc.e;
        s.B = vol * acc.b;
    } else {
        auto acc = chunked_reduce(
            g.size(), retdetail::VnAccum{},
            [&](std::size_t b, std::size_t e, retdetail::VnAccum& out) {
                for (std::size_t m = b; m < e; ++m) {
                    if (!mask[m]) continue;
                    const int i = static_cast<int>(m / nyz);
                    const int j = static_cast<int>((m / g.nz) % g.ny);
                    const int k = static_cast<int>(m % g.nz);
                    const Vec3 y = g.node(i, j, k);
                    const double R = norm(y - x);
                    const TimeInterp ti = h.interp(t - R / c, "retarded_field");
                    const double w = 1.0 / R;
                    out.dt += -w * h.mu_dt_at(ti, m, c);
                    out.grad += (-w) * Vec3{retdetail::dmu(h, ti, i, j, k, 0, c),
                                            retdetail::dmu(h, ti, i, j, k, 1, c),
                                            retdetail::dmu(h, ti, i, j, k, 2, c)};
                }
            },
            4096);
        const double pref = vol / (c * c);
        s.dt_phi = pref * acc.dt;
        s.grad_phi = pref * acc.grad;
    }
    return s;
}

struct FarFieldOptions {
    FarArgument argument = FarArgument::exact;
    bool check_em_consistency = true;
    double em_consistency_rel_tol = 0.10;   // direct vs transverse form agreement
    double em_consistency_abs_floor = 1e-14; // below this the fields are roundoff
};

// ---------------------------------------------------------------------------
// Far-field (radiation-zone) forms with integrand argument u + (x_bar.y)/c.
// EM returns the transverse form as (E, B) -- the time derivative of the
// projected current integral -- and the direct form in (E_direct, B_direct);
// the two must agree within quadrature tolerance. VN returns the direct
// integral forms for (dt_phi, grad_phi).
// ---------------------------------------------------------------------------
inline FieldSample far_field(const SourceHistory& h, const Vec3& x_bar, double u, double r,
                             double c, FieldKind kind, const FarFieldOptions& opt = {}) {
    if (std::abs(norm(x_bar) - 1.0) > 1e-12)
        throw std::invalid_argument("far_field: |x_bar| must be 1 within 1e-12");
    if (c <= 0.0 || r <= 0.0) throw std::invalid_argument("far_field: need c > 0, r > 0");
    const auto& mask = retdetail::active_mask(h);
    const double proj = retdetail::max_projection(h, x_bar);
    // transverse form differentiates in u with a 5-point stencil of spacing dt_record
    h.require_window(u - proj / c - 2.0 * h.dt_record, "far_field");
    h.require_window(u + proj / c + 2.0 * h.dt_record, "far_field");

    const UniformGrid& g = h.grid;
    const double vol = g.cell_volume();
    const std::size_t nyz = static_cast<std::size_t>(g.ny) * g.nz;
    const double inv_c2 = 1.0 / (c * c);

    FieldSample s;
    s.t = u + r / c;
    s.x = r * x_bar;
    s.c = c;
    s.r = r;
    s.x_bar = x_bar;
    s.kind = kind;
    s.far_field = true;

    // node time argument at base time v
    auto node_time = [&](double v, const Vec3& y) {
        return opt.argument == FarArgument::exact ? v + dot(x_bar, y) / c : v;
    };

    if (kind == FieldKind::em) {
        // direct form accumulators at u, plus the current integral I(v) on the
        // 5-point u-stencil for the transverse form
        struct Acc {
            Vec3 e{}, b{};
            Vec3 cur[5]{};
            Acc& operator+=(const Acc& o) {
                e += o.e;
                b += o.b;
                for (int m = 0; m < 5; ++m) cur[m] += o.cur[m];
                return *this;
            }
        };
        auto acc = chunked_reduce(
            g.size(), Acc{},
            [&](std::size_t b, std::size_t e, Acc& out) {
                for (std::size_t m = b; m < e; ++m) {
                    if (!mask[m]) continue;
                    const int i = static_cast<int>(m / nyz);
                    const int j = static_cast<int>((m / g.nz) % g.ny);
                    const int k = static_cast<int>(m % g.nz);
                    const Vec3 y = g.node(i, j, k);
                    const double shift = dot(x_bar, y) / c;
                    {
                        const TimeInterp ti = h.interp(node_time(u, y), "far_field");
                        Vec3 grad_rho{retdetail::drho(h, ti, i, j, k, 0),
                                      retdetail::drho(h, ti, i, j, k, 1),
                                      retdetail::drho(h, ti, i, j, k, 2)};
                        Vec3 dtj = h.current_dt_at(ti, m);
                        Vec3 curl = retdetail::curl_j(h, ti, i, j, k);
                        if (opt.argument == FarArgument::taylor) {
                            // f(u + shift) ~ f(u) + shift dt f(u) for every piece
                            grad_rho += shift * Vec3{retdetail::drho(h, ti, i, j, k, 0,
                                                                     retdetail::Lane::dt),
                                                     retdetail::drho(h, ti, i, j, k, 1,
                                                                     retdetail::Lane::dt),
                                                     retdetail::drho(h, ti, i, j, k, 2,
                                                                     retdetail::Lane::dt)};
                            dtj += shift * h.current_d2t_at(ti, m);
                            curl += shift * retdetail::curl_j(h, ti, i, j, k, retdetail::Lane::dt);
                        }
                        out.e += -1.0 * (grad_rho + inv_c2 * dtj);
                        out.b += (1.0 / c) * curl;
                    }
                    for (int q = -2; q <= 2; ++q) {
                        const double v = u + q * h.dt_record;
                        const TimeInterp ti = h.interp(node_time(v, y), "far_field");
                        Vec3 jv = h.current_at(ti, m);
                        if (opt.argument == FarArgument::taylor)
                            jv += shift * h.current_dt_at(ti, m);
                        out.cur[q + 2] += jv;
                    }
                }
            },
            4096);
        s.E_direct = (vol / r) * acc.e;
        s.B_direct = (vol / r) * acc.b;
        // d/du of the current integral by the 5-point stencil
        const Vec3 dI = (vol / (12.0 * h.dt_record)) *
                        (acc.cur[0] - 8.0 * acc.cur[1] + 8.0 * acc.cur[3] - acc.cur[4]);
        const Vec3 dI_perp = dI - dot(x_bar, dI) * x_bar;
        s.E = (-inv_c2 / r) * dI_perp;
        s.B = (-inv_c2 / r) * cross(x_bar, dI);
        if (opt.check_em_consistency) {
            // compare transverse parts: the longitudinal direct-form component
            // measures the discrete continuity residual, which is budgeted
            // separately and does not enter the flux x_bar . (B x E)
            const Vec3 ed_perp = s.E_direct - dot(x_bar, s.E_direct) * x_bar;
            const double scale = std::max(norm(s.E), norm(ed_perp));
            if (scale > opt.em_consistency_abs_floor &&
                norm(s.E - ed_perp) > opt.em_consistency_rel_tol * scale)
                throw std::runtime_error(
                    "far_field: direct and transverse EM forms disagree beyond tolerance (rel " +
                    format_double(norm(s.E - ed_perp) / scale) + ")");
        }
    } else {
        auto acc = chunked_reduce(
            g.size(), retdetail::VnAccum{},
            [&](std::size_t b, std::size_t e, retdetail::VnAccum& out) {
                for (std::size_t m = b; m < e; ++m) {
                    if (!mask[m]) continue;
                    const int i = static_cast<int>(m / nyz);
                    const int j = static_cast<int>((m / g.nz) % g.ny);
                    const int k = static_cast<int>(m % g.nz);
                    const Vec3 y = g.node(i, j, k);
                    const TimeInterp ti = h.interp(node_time(u, y), "far_field");
                    double dtmu = h.mu_dt_at(ti, m, c);
                    Vec3 gradmu{retdetail::dmu(h, ti, i, j, k, 0, c),
                                retdetail::dmu(h, ti, i, j, k, 1, c),
                                retdetail::dmu(h, ti, i, j, k, 2, c)};
                    if (opt.argument == FarArgument::taylor) {
                        const double shift = dot(x_bar, y) / c;
                        dtmu += shift * h.mu_d2t_at(ti, m, c);
                        gradmu += shift * Vec3{retdetail::dmu(h, ti, i, j, k, 0, c, retdetail::Lane::dt),
                                               retdetail::dmu(h, ti, i, j, k, 1, c, retdetail::Lane::dt),
                                               retdetail::dmu(h, ti, i, j, k, 2, c, retdetail::Lane::dt)};
                    }
                    out.dt += dtmu;
                    out.grad += gradmu;
                }
            },
            4096);
        const double pref = -vol * inv_c2 / r;
        s.dt_phi = pref * acc.dt;
        s.grad_phi_direct = pref * acc.grad;
        s.grad_phi = (-s.dt_phi / c) * x_bar;
    }
    return s;
}

} // namespace vrl

#endif // VRL_RETARDED_HPP
