// Vlasov-Poisson characteristic solver: velocity-Verlet stepping of the
// particle ensemble and the evolve() driver that records a SourceHistory.
#ifndef VRL_SOLVER_HPP
#define VRL_SOLVER_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vrl/history.hpp"
#include "vrl/nbody.hpp"

namespace vrl {

// One kick-drift-kick step. Standalone form; evolve() uses the cached-force
// loop below to spend one force evaluation per step.
inline ParticleEnsemble step(const ParticleEnsemble& state, double dt, FieldMode mode,
                             double eps) {
    if (dt == 0.0) throw std::invalid_argument("step: dt must be nonzero");
    ParticleEnsemble e = state;
    std::vector<double> ax, ay, az;
    accelerations(e, mode, eps, ax, ay, az);
    const std::size_t n = e.size();
    const double half = 0.5 * dt;
    for (std::size_t i = 0; i < n; ++i) {
        e.px[i] += half * ax[i];
        e.py[i] += half * ay[i];
        e.pz[i] += half * az[i];
        e.x[i] += dt * e.px[i];
        e.y[i] += dt * e.py[i];
        e.z[i] += dt * e.pz[i];
    }
    accelerations(e, mode, eps, ax, ay, az);
    for (std::size_t i = 0; i < n; ++i) {
        e.px[i] += half * ax[i];
        e.py[i] += half * ay[i];
        e.pz[i] += half * az[i];
    }
    e.time += dt;
    return e;
}

struct EvolveParams {
    FieldMode mode = FieldMode::gravity;
    double dt = 0.005;
    double dt_record = 0.05;     // must be a multiple of dt
    double softening = 0.03;
    UniformGrid grid;
    double bandwidth = 0.0;      // defaults to 2 h
    double t_min = 0.0;          // rounded outward to dt_record multiples
    double t_max = 1.0;
    double drift_tolerance = 1e-5; // abort threshold; <= 0 disables the abort
};

namespace detail {

// Forward evolution from `state` (time 0) over nrec recording intervals,
// appending a frame after each. The force from the last half-kick is reused,
// so each step costs one field evaluation.
template <class RecordFn>
void evolve_forward(ParticleEnsemble state, const EvolveParams& par, int nrec,
                    int steps_per_record, RecordFn&& record) {
    const std::size_t n = state.size();
    std::vector<double> ax, ay, az;
    accelerations(state, par.mode, par.softening, ax, ay, az);
    record(state, ax, ay, az);
    const double half = 0.5 * par.dt;
    for (int rec = 0; rec < nrec; ++rec) {
        for (int st = 0; st < steps_per_record; ++st) {
            for (std::size_t i = 0; i < n; ++i) {
                state.px[i] += half * ax[i];
                state.py[i] += half * ay[i];
                state.pz[i] += half * az[i];
                state.x[i] += par.dt * state.px[i];
                state.y[i] += par.dt * state.py[i];
                state.z[i] += par.dt * state.pz[i];
            }
            accelerations(state, par.mode, par.softening, ax, ay, az);
            for (std::size_t i = 0; i < n; ++i) {
                state.px[i] += half * ax[i];
                state.py[i] += half * ay[i];
                state.pz[i] += half * az[i];
            }
            state.time += par.dt;
        }
        record(state, ax, ay, az);
    }
}

} // namespace detail

// Evolves the sampled initial state (time 0) across [t_min, t_max] and records
// moments, dipole data, and energies every dt_record. Negative times come from
// evolving the momentum-reversed state forward and flipping the result, which
// is exact for the time-reversible systems handled here.
inline SourceHistory evolve(const ParticleEnsemble& initial, const EvolveParams& par_in) {
    EvolveParams par = par_in;
    if (par.bandwidth <= 0.0) par.bandwidth = 2.0 * par.grid.h;
    if (par.dt <= 0.0 || par.dt_record <= 0.0) throw std::invalid_argument("evolve: dt > 0 required");
    if (par.t_min > 0.0 || par.t_max < 0.0)
        throw std::invalid_argument("evolve: window must contain t = 0");
    const int steps_per_record = static_cast<int>(std::llround(par.dt_record / par.dt));
    if (steps_per_record < 1 ||
        std::abs(steps_per_record * par.dt - par.dt_record) > 1e-12 * par.dt_record)
        throw std::invalid_argument("evolve: dt must divide dt_record");
    const int nrec_fwd = static_cast<int>(std::ceil(par.t_max / par.dt_record - 1e-12));
    const int nrec_bwd = static_cast<int>(std::ceil(-par.t_min / par.dt_record - 1e-12));

    SourceHistory h;
    h.mode = par.mode;
    h.dt_record = par.dt_record;
    h.dt_step = par.dt;
    h.softening = par.softening;
    h.bandwidth = par.bandwidth;
    h.grid = par.grid;
    h.frames.resize(nrec_fwd + nrec_bwd + 1);

    auto make_frame = [&](const ParticleEnsemble& state, const std::vector<double>& ax,
                          const std::vector<double>& ay, const std::vector<double>& az,
                          bool flip) {
        HistoryFrame f;
        f.snapshot = state;
        if (flip) {
            f.snapshot.time = -state.time;
            for (std::size_t i = 0; i < state.size(); ++i) {
                f.snapshot.px[i] = -state.px[i];
                f.snapshot.py[i] = -state.py[i];
                f.snapshot.pz[i] = -state.pz[i];
            }
        }
        f.time = f.snapshot.time;
        f.rho = deposit_charge(f.snapshot, par.grid, par.bandwidth);
        f.current = deposit_current(f.snapshot, par.grid, par.bandwidth);
        f.rho_dt = minus_div_current(f.current);
        {
            // p^2 moment grids for the scalar-gravity source correction
            ScalarField r2(par.grid, MomentKind::charge);
            deposit_scalar(f.snapshot, r2, par.bandwidth,
                           [&](std::size_t i) { return f.snapshot.w[i] * norm2(f.snapshot.mom(i)); });
            VectorField j2(par.grid, MomentKind::current);
            deposit_vector(f.snapshot, j2, par.bandwidth, [&](std::size_t i) {
                return (f.snapshot.w[i] * norm2(f.snapshot.mom(i))) * f.snapshot.mom(i);
            });
            f.rho2_dt = minus_div_current(j2);
            // power density 2 w p . dp/dt; the acceleration depends only on
            // positions and is flip-invariant, the snapshot momenta carry the
            // time-reversal sign
            ScalarField pw(par.grid, MomentKind::charge);
            deposit_scalar(f.snapshot, pw, par.bandwidth, [&](std::size_t i) {
                return 2.0 * f.snapshot.w[i] *
                       dot(f.snapshot.mom(i), Vec3{ax[i], ay[i], az[i]});
            });
            for (std::size_t m = 0; m < f.rho2_dt.v.size(); ++m) f.rho2_dt.v[m] += pw.v[m];
            f.rho2 = std::move(r2);
        }
        f.dipole = dipole_moment(f.snapshot);
        // E0 at the particles is sign * acceleration in plasma mode and
        // -acceleration in gravity mode; both are flip-invariant.
        Vec3 dd{};
        for (std::size_t i = 0; i < state.size(); ++i) {
            const double s = (par.mode == FieldMode::plasma) ? state.s[i] : -1.0;
            dd += state.w[i] * s * Vec3{ax[i], ay[i], az[i]};
        }
        f.dipole_accel = dd;
        f.energy = energies(f.snapshot, par.mode, par.softening);
        return f;
    };

    // forward part: frames nrec_bwd .. nrec_bwd + nrec_fwd
    {
        int idx = nrec_bwd;
        detail::evolve_forward(initial, par, nrec_fwd, steps_per_record,
                               [&](const ParticleEnsemble& st, const std::vector<double>& ax,
                                   const std::vector<double>& ay, const std::vector<double>& az) {
                                   h.frames[idx++] = make_frame(st, ax, ay, az, false);
                               });
    }
    // backward part: evolve the p-reversed state forward, flip, store mirrored
    if (nrec_bwd > 0) {
        ParticleEnsemble rev = initial;
        for (std::size_t i = 0; i < rev.size(); ++i) {
            rev.px[i] = -rev.px[i];
            rev.py[i] = -rev.py[i];
            rev.pz[i] = -rev.pz[i];
        }
        int idx = nrec_bwd;
        detail::evolve_forward(rev, par, nrec_bwd, steps_per_record,
                               [&](const ParticleEnsemble& st, const std::vector<double>& ax,
                                   const std::vector<double>& ay, const std::vector<double>& az) {
                                   if (idx < nrec_bwd) // skip the duplicate t = 0 frame
                                       h.frames[idx] = make_frame(st, ax, ay, az, true);
                                   --idx;
                               });
    }

    // drift check
    if (par.drift_tolerance > 0.0) {
        const double e0 = h.frames[nrec_bwd].energy.total();
        const double scale = std::max({std::abs(e0), std::abs(h.frames[nrec_bwd].energy.kinetic),
                                       std::abs(h.frames[nrec_bwd].energy.potential)});
        for (int k = 0; k < h.frame_count(); ++k) {
            const double drift = std::abs(h.frames[k].energy.total() - e0) / scale;
            if (drift > par.drift_tolerance)
                throw std::runtime_error("evolve: energy drift " + format_double(drift) +
                                         " exceeds tolerance " + format_double(par.drift_tolerance) +
                                         " at frame " + std::to_string(k) + " (t = " +
                                         format_double(h.frames[k].time) + ")");
        }
    }
    return h;
}

} // namespace vrl

#endif // VRL_SOLVER_HPP
