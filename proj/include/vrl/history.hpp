// SourceHistory: the uniform-cadence record of gridded Newtonian moments,
// particle snapshots, dipole data and energies that the retarded-field and
// radiation modules consume, with cubic time interpolation.
#ifndef VRL_HISTORY_HPP
#define VRL_HISTORY_HPP

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrl/deposit.hpp"
#include "vrl/ensemble.hpp"
#include "vrl/grid.hpp"
#include "vrl/nbody.hpp"

namespace vrl {

struct HistoryFrame {
    double time = 0.0;
    ParticleEnsemble snapshot;
    ScalarField rho;       // charge (plasma) or Newtonian mass density (gravity)
    VectorField current;   // j0 = sum of s w p (Newtonian p_hat = p)
    ScalarField rho_dt;    // -div j by the 4th-order stencil: the exact nodal
                           // time derivative of the deposited density, with a
                           // grid sum that telescopes to zero
    ScalarField rho2;      // p^2-weighted density, the c^-2 moment correction
                           // of the scalar-gravity source mu
    ScalarField rho2_dt;   // its exact nodal time derivative:
                           // 2 p.(dp/dt) density - div(p^2 p flux)
    VectorField field;     // E0 (plasma) or grad(phi2) (gravity) on the grid; may be empty
    Vec3 dipole{};
    Vec3 dipole_accel{};
    EnergyEntry energy;
    bool has_field_grid = false;
};

// -div j with the 4th-order stencil and zero extension beyond the grid.
inline ScalarField minus_div_current(const VectorField& j) {
    const UniformGrid& g = j.grid;
    ScalarField out(g, MomentKind::charge);
    parallel_for(static_cast<std::size_t>(g.nx), [&](std::size_t b, std::size_t e) {
        for (std::size_t ii = b; ii < e; ++ii) {
            const int i = static_cast<int>(ii);
            for (int jj = 0; jj < g.ny; ++jj)
                for (int kk = 0; kk < g.nz; ++kk)
                    out.v[g.index(i, jj, kk)] =
                        -(stencil_d1([&](int a, int bb, int c) { return j.vx[g.index(a, bb, c)]; },
                                     i, jj, kk, 0, g.h, g.nx, g.ny, g.nz) +
                          stencil_d1([&](int a, int bb, int c) { return j.vy[g.index(a, bb, c)]; },
                                     i, jj, kk, 1, g.h, g.nx, g.ny, g.nz) +
                          stencil_d1([&](int a, int bb, int c) { return j.vz[g.index(a, bb, c)]; },
                                     i, jj, kk, 2, g.h, g.nx, g.ny, g.nz));
        }
    }, 1);
    return out;
}

// Cubic Lagrange interpolation stencil over four consecutive frames.
struct TimeInterp {
    int i0 = 0;        // first frame of the stencil
    double w[4]{};     // value weights
    double dw[4]{};    // d/dt weights
    double d2w[4]{};   // d2/dt2 weights
};

struct SourceHistory {
    FieldMode mode = FieldMode::gravity;
    double dt_record = 0.0;
    double dt_step = 0.0; // integrator step used to produce the frames
    double softening = 0.0;
    double bandwidth = 0.0;
    UniformGrid grid;
    std::vector<HistoryFrame> frames;

    // lazily built union-of-support mask used by the retarded quadratures
    mutable std::vector<std::uint8_t> active_mask_cache;
    mutable int active_lo[3] = {0, 0, 0}, active_hi[3] = {-1, -1, -1};

    // lazy per-frame tensor caches used by the radiation and identity modules
    struct FrameTensors {
        bool pair_ready = false, grid_ready = false, sharp_ready = false, p_ready = false;
        SymTensor3 g_pair{}, g_grid{}, g_sharp{}, p{};
    };
    mutable std::vector<FrameTensors> tensor_cache;
    mutable std::shared_ptr<void> poisson_cache; // PoissonSolver, type-erased

    double t_begin() const { return frames.front().time; }
    double t_end() const { return frames.back().time; }
    int frame_count() const { return static_cast<int>(frames.size()); }

    // Frames' time axis must be uniform; index of the nearest frame at t.
    int nearest_frame(double t) const {
        const int k = static_cast<int>(std::llround((t - t_begin()) / dt_record));
        if (k < 0 || k >= frame_count())
            throw std::out_of_range("history: time " + format_double(t) + " outside recorded window [" +
                                    format_double(t_begin()) + ", " + format_double(t_end()) + "]");
        return k;
    }

    bool covers(double t) const { return t >= t_begin() && t <= t_end(); }

    void require_window(double t, const std::string& who) const {
        if (!covers(t))
            throw std::out_of_range(
                who + ": retarded/interpolation time " + format_double(t) +
                " outside recorded window [" + format_double(t_begin()) + ", " + format_double(t_end()) +
                "]; extend the evolution window to cover it");
    }

    // Quintic Hermite weights on the 4-frame stencil around t, with finite
    // difference endpoint slopes and curvatures. The interpolant is C^2 across
    // frame boundaries; the retarded-field quadratures rely on that smoothness
    // because their signals survive two orders of cancellation in 1/c.
    TimeInterp interp(double t, const char* who = "history") const {
        require_window(t, who);
        if (frame_count() < 4)
            throw std::runtime_error("history: need at least 4 frames for time interpolation");
        const double s = (t - t_begin()) / dt_record;
        int k = static_cast<int>(std::floor(s));
        k = std::max(0, std::min(k, frame_count() - 2)); // interval [k, k+1]
        const double th = s - k;
        const int i0 = std::max(0, std::min(k - 1, frame_count() - 4));
        TimeInterp ti;
        ti.i0 = i0;

        // weight 4-vectors over frames [i0 .. i0+3]: endpoint selectors,
        // slopes (times dt) and curvatures (times dt^2)
        double ek[4]{}, ek1[4]{}, mk[4]{}, mk1[4]{}, ck[4]{}, ck1[4]{};
        ek[k - i0] = 1.0;
        ek1[k + 1 - i0] = 1.0;
        auto slope_into = [&](int at, double* out) {
            if (at - 1 >= i0 && at + 1 <= i0 + 3) {
                out[at - 1 - i0] -= 0.5;
                out[at + 1 - i0] += 0.5;
            } else if (at == i0) {
                out[0] -= 1.5;
                out[1] += 2.0;
                out[2] -= 0.5;
            } else { // at == i0 + 3
                out[3] += 1.5;
                out[2] -= 2.0;
                out[1] += 0.5;
            }
        };
        auto curv_into = [&](int at, double* out) {
            if (at - 1 >= i0 && at + 1 <= i0 + 3) {
                out[at - 1 - i0] += 1.0;
                out[at - i0] -= 2.0;
                out[at + 1 - i0] += 1.0;
            } else if (at == i0) {
                out[0] += 1.0;
                out[1] -= 2.0;
                out[2] += 1.0;
            } else {
                out[3] += 1.0;
                out[2] -= 2.0;
                out[1] += 1.0;
            }
        };
        slope_into(k, mk);
        slope_into(k + 1, mk1);
        curv_into(k, ck);
        curv_into(k + 1, ck1);

        // quintic Hermite basis: value / first / second derivative at each end
        const double t2 = th * th, t3 = t2 * th, t4 = t3 * th, t5 = t4 * th;
        const double H00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        const double H10 = th - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        const double H20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        const double H01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        const double H11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        const double H21 = 0.5 * t3 - t4 + 0.5 * t5;
        const double D00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        const double D10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        const double D20 = th - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
        const double D01 = -D00;
        const double D11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        const double D21 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
        const double S00 = -60.0 * th + 180.0 * t2 - 120.0 * t3;
        const double S10 = -36.0 * th + 96.0 * t2 - 60.0 * t3;
        const double S20 = 1.0 - 9.0 * th + 18.0 * t2 - 10.0 * t3;
        const double S01 = -S00;
        const double S11 = -24.0 * th + 84.0 * t2 - 60.0 * t3;
        const double S21 = 3.0 * th - 12.0 * t2 + 10.0 * t3;

        const double dt = dt_record;
        for (int m = 0; m < 4; ++m) {
            ti.w[m] = H00 * ek[m] + H01 * ek1[m] + H10 * mk[m] + H11 * mk1[m] + H20 * ck[m] +
                      H21 * ck1[m];
            ti.dw[m] = (D00 * ek[m] + D01 * ek1[m] + D10 * mk[m] + D11 * mk1[m] + D20 * ck[m] +
                        D21 * ck1[m]) /
                       dt;
            ti.d2w[m] = (S00 * ek[m] + S01 * ek1[m] + S10 * mk[m] + S11 * mk1[m] + S20 * ck[m] +
                         S21 * ck1[m]) /
                        (dt * dt);
        }
        return ti;
    }

    double rho_at(const TimeInterp& ti, std::size_t node) const {
        double v = 0.0;
        for (int m = 0; m < 4; ++m) v += ti.w[m] * frames[ti.i0 + m].rho.v[node];
        return v;
    }
    Vec3 current_at(const TimeInterp& ti, std::size_t node) const {
        Vec3 v{};
        for (int m = 0; m < 4; ++m) {
            const VectorField& j = frames[ti.i0 + m].current;
            v += ti.w[m] * Vec3{j.vx[node], j.vy[node], j.vz[node]};
        }
        return v;
    }
    Vec3 current_dt_at(const TimeInterp& ti, std::size_t node) const {
        Vec3 v{};
        for (int m = 0; m < 4; ++m) {
            const VectorField& j = frames[ti.i0 + m].current;
            v += ti.dw[m] * Vec3{j.vx[node], j.vy[node], j.vz[node]};
        }
        return v;
    }
    // dt rho from the recorded -div j series (value interpolation of exact
    // nodal derivatives; its grid sum vanishes identically)
    double rho_dt_at(const TimeInterp& ti, std::size_t node) const {
        double v = 0.0;
        for (int m = 0; m < 4; ++m) v += ti.w[m] * frames[ti.i0 + m].rho_dt.v[node];
        return v;
    }

    // scalar-gravity source mu = rho - (3/2) c^-2 rho2 and its derivatives;
    // the moment correction carries the radiation-order content of the
    // relativistic mass functional
    double mu_at(const TimeInterp& ti, std::size_t node, double c) const {
        double v = 0.0, v2 = 0.0;
        for (int m = 0; m < 4; ++m) {
            v += ti.w[m] * frames[ti.i0 + m].rho.v[node];
            v2 += ti.w[m] * frames[ti.i0 + m].rho2.v[node];
        }
        return v - 1.5 / (c * c) * v2;
    }
    double mu_dt_at(const TimeInterp& ti, std::size_t node, double c) const {
        double v = 0.0, v2 = 0.0;
        for (int m = 0; m < 4; ++m) {
            v += ti.w[m] * frames[ti.i0 + m].rho_dt.v[node];
            v2 += ti.w[m] * frames[ti.i0 + m].rho2_dt.v[node];
        }
        return v - 1.5 / (c * c) * v2;
    }
    double mu_d2t_at(const TimeInterp& ti, std::size_t node, double c) const {
        double v = 0.0, v2 = 0.0;
        for (int m = 0; m < 4; ++m) {
            v += ti.dw[m] * frames[ti.i0 + m].rho_dt.v[node];
            v2 += ti.dw[m] * frames[ti.i0 + m].rho2_dt.v[node];
        }
        return v - 1.5 / (c * c) * v2;
    }
    Vec3 current_d2t_at(const TimeInterp& ti, std::size_t node) const {
        Vec3 v{};
        for (int m = 0; m < 4; ++m) {
            const VectorField& j = frames[ti.i0 + m].current;
            v += ti.d2w[m] * Vec3{j.vx[node], j.vy[node], j.vz[node]};
        }
        return v;
    }
    double rho_d2t_at(const TimeInterp& ti, std::size_t node) const {
        double v = 0.0;
        for (int m = 0; m < 4; ++m) v += ti.dw[m] * frames[ti.i0 + m].rho_dt.v[node];
        return v;
    }

    // Interpolated scalar series (dipole and its second derivative).
    Vec3 dipole_at(double t) const {
        const TimeInterp ti = interp(t, "dipole_at");
        Vec3 v{};
        for (int m = 0; m < 4; ++m) v += ti.w[m] * frames[ti.i0 + m].dipole;
        return v;
    }
    Vec3 dipole_accel_at(double t) const {
        const TimeInterp ti = interp(t, "dipole_accel_at");
        Vec3 v{};
        for (int m = 0; m < 4; ++m) v += ti.w[m] * frames[ti.i0 + m].dipole_accel;
        return v;
    }
    double kinetic_energy_at(double t) const {
        const TimeInterp ti = interp(t, "kinetic_energy_at");
        double v = 0.0;
        for (int m = 0; m < 4; ++m) v += ti.w[m] * frames[ti.i0 + m].energy.kinetic;
        return v;
    }

    // 5-point centered first derivative of a per-frame scalar, spacing dt_record.
    template <class FrameFn>
    double stencil_dt(double t, FrameFn&& fn, const char* who = "stencil_dt") const {
        const int k = nearest_frame(t);
        if (k < 2 || k > frame_count() - 3)
            throw std::out_of_range(std::string(who) +
                                    ": need two frames on each side of t = " + format_double(t));
        const double num = fn(frames[k - 2]) - 8.0 * fn(frames[k - 1]) + 8.0 * fn(frames[k + 1]) -
                           fn(frames[k + 2]);
        return num / (12.0 * dt_record);
    }

    // Max |E(t)-E(0)| / max(|E(0)|, |Ekin(0)|, |Epot(0)|) over the history.
    double relative_energy_drift() const {
        const EnergyEntry& e0 = frames.front().energy;
        const double scale = std::max({std::abs(e0.total()), std::abs(e0.kinetic),
                                       std::abs(e0.potential), 1e-300});
        double m = 0.0;
        for (const auto& f : frames) m = std::max(m, std::abs(f.energy.total() - e0.total()));
        return m / scale;
    }
};

// Discrete continuity residual || (rho_{k+1}-rho_{k-1}) / (2 dt) + div j_k ||_2
// (L2 over the grid) at interior frame k, re-depositing moments from the
// stored snapshots at the requested resolution.
inline double continuity_residual(const SourceHistory& h, int k, const UniformGrid& g,
                                  double bandwidth) {
    if (k < 1 || k > h.frame_count() - 2)
        throw std::out_of_range("continuity_residual: interior frames only");
    const auto rp = deposit_charge(h.frames[k + 1].snapshot, g, bandwidth);
    const auto rm = deposit_charge(h.frames[k - 1].snapshot, g, bandwidth);
    const auto jj = deposit_current(h.frames[k].snapshot, g, bandwidth);
    const double inv2dt = 1.0 / (2.0 * h.dt_record);
    double acc = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int kk = 0; kk < g.nz; ++kk) {
                const double dtrho =
                    (rp.v[g.index(i, j, kk)] - rm.v[g.index(i, j, kk)]) * inv2dt;
                const double divj =
                    stencil_d1([&](int a, int b, int c) { return jj.vx[g.index(a, b, c)]; }, i, j,
                               kk, 0, g.h, g.nx, g.ny, g.nz) +
                    stencil_d1([&](int a, int b, int c) { return jj.vy[g.index(a, b, c)]; }, i, j,
                               kk, 1, g.h, g.nx, g.ny, g.nz) +
                    stencil_d1([&](int a, int b, int c) { return jj.vz[g.index(a, b, c)]; }, i, j,
                               kk, 2, g.h, g.nx, g.ny, g.nz);
                acc += sq(dtrho + divj);
            }
    return std::sqrt(acc * g.cell_volume());
}

// A history whose frames all hold the same analytic static source: rho is the
// spatial marginal of `profile` evaluated on the grid (charge-signed), j = 0.
// Used by static-field oracles and null tests.
inline SourceHistory make_static_history(const PhaseSpaceProfile& profile, const UniformGrid& grid,
                                         FieldMode mode, double t0, double t1, double dt_record) {
    SourceHistory h;
    h.mode = mode;
    h.dt_record = dt_record;
    h.softening = 0.0;
    h.bandwidth = 0.0;
    h.grid = grid;
    const int nframes = static_cast<int>(std::llround((t1 - t0) / dt_record)) + 1;
    if (nframes < 4) throw std::invalid_argument("make_static_history: need >= 4 frames");

    // spatial marginal of the product bump: W * bump_x(x) (momentum integrates out)
    ScalarField rho(grid, mode == FieldMode::gravity ? MomentKind::matter : MomentKind::charge);
    const auto& s = profile.spec();
    constexpr double ball_bump = 64.0 * std::numbers::pi / 315.0;
    const double ix = s.scale_radii.x * s.scale_radii.y * s.scale_radii.z * ball_bump;
    const double amp = charge_sign(s.species) * s.total_weight / ix;
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j)
            for (int k = 0; k < grid.nz; ++k) {
                const Vec3 d = grid.node(i, j, k) - s.center;
                const double u = sq(d.x / s.scale_radii.x) + sq(d.y / s.scale_radii.y) +
                                 sq(d.z / s.scale_radii.z);
                rho.at(i, j, k) = u >= 1.0 ? 0.0 : amp * cube(1.0 - u);
            }

    Vec3 d{};
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j)
            for (int k = 0; k < grid.nz; ++k) d += rho.at(i, j, k) * grid.node(i, j, k);
    d *= grid.cell_volume();

    ScalarField rho2(grid, MomentKind::charge);
    const double p2_mean = profile.momentum_square_mean() + norm2(s.mean_momentum);
    for (std::size_t m = 0; m < rho2.v.size(); ++m) rho2.v[m] = std::abs(rho.v[m]) * p2_mean;

    for (int k = 0; k < nframes; ++k) {
        HistoryFrame f;
        f.time = t0 + k * dt_record;
        f.rho = rho;
        f.current = VectorField(grid, MomentKind::current);
        f.rho_dt = ScalarField(grid, MomentKind::charge);
        f.rho2 = rho2;
        f.rho2_dt = ScalarField(grid, MomentKind::charge);
        f.dipole = d;
        f.energy.time = f.time;
        h.frames.push_back(std::move(f));
    }
    return h;
}

} // namespace vrl

#endif // VRL_HISTORY_HPP
