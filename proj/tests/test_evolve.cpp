#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "vrl/solver.hpp"

using namespace vrl;

namespace {

ParticleEnsemble two_body(double d, double m, double v) {
    ParticleEnsemble e;
    e.push({d / 2, 0, 0}, {0, v, 0}, m, +1.0);
    e.push({-d / 2, 0, 0}, {0, -v, 0}, m, +1.0);
    e.species.push_back({Species::neutral, 0, 2, m});
    return e;
}

} // namespace

TEST_CASE("zero field means pure drift") {
    ParticleEnsemble e;
    e.push({0.1, 0.2, 0.3}, {1.0, -0.5, 0.25}, 1.0, +1.0);
    const auto e2 = step(e, 0.25, FieldMode::gravity, 0.01);
    CHECK(e2.x[0] == doctest::Approx(0.1 + 0.25).epsilon(1e-15));
    CHECK(e2.y[0] == doctest::Approx(0.2 - 0.125).epsilon(1e-15));
    CHECK(e2.px[0] == 1.0);
    CHECK(e2.time == doctest::Approx(0.25));
}

TEST_CASE("pair forces conserve total momentum per step") {
    ParticleEnsemble e;
    e.push({0.4, 0.1, 0}, {0.2, 0, 0}, 0.5, +1.0);
    e.push({-0.4, -0.1, 0}, {-0.1, 0.3, 0}, 0.5, -1.0);
    const Vec3 p0 = total_momentum(e);
    const auto e2 = step(e, 0.05, FieldMode::plasma, 0.02);
    const Vec3 p1 = total_momentum(e2);
    CHECK(norm(p1 - p0) < 1e-14);
}

TEST_CASE("circular two-body orbit converges at order 2") {
    // masses m each at separation d: |dp/dt| = m/d^2, circular speed v = sqrt(m/(2d))
    const double d = 1.0, m = 0.5;
    const double v = std::sqrt(m / (2.0 * d));
    const double omega = 2.0 * v / d;
    const double t_end = 1.0;
    auto run = [&](double dt) {
        ParticleEnsemble e = two_body(d, m, v);
        const int n = static_cast<int>(std::llround(t_end / dt));
        for (int i = 0; i < n; ++i) e = step(e, dt, FieldMode::gravity, 1e-8);
        const double phi = omega * t_end;
        const Vec3 exact{0.5 * d * std::cos(phi), 0.5 * d * std::sin(phi), 0.0};
        return norm(e.pos(0) - exact);
    };
    const double e1 = run(0.02), e2 = run(0.01), e3 = run(0.005);
    const double order12 = std::log2(e1 / e2);
    const double order23 = std::log2(e2 / e3);
    CHECK(order12 == doctest::Approx(2.0).epsilon(0.05));
    CHECK(order23 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("stepping is time reversible") {
    const auto f = build_profile({Species::positive, {}, {0.6, 0.6, 0.6}, 0.4, 1.0});
    auto e = sample_ensemble(f, 200, 21);
    auto fwd = step(e, 0.05, FieldMode::plasma, 0.05);
    auto back = step(fwd, -0.05, FieldMode::plasma, 0.05);
    double dx = 0.0, dp = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        dx = std::max(dx, norm(back.pos(i) - e.pos(i)));
        dp = std::max(dp, norm(back.mom(i) - e.mom(i)));
    }
    CHECK(dx < 1e-12);
    CHECK(dp < 1e-12);
}

TEST_CASE("evolve: single species at rest has constant dipole") {
    const auto f = build_profile({Species::positive, {0.1, 0, 0}, {0.5, 0.5, 0.5}, 0.3, 1.0});
    EvolveParams par;
    par.mode = FieldMode::plasma;
    par.dt = 0.01;
    par.dt_record = 0.05;
    par.softening = 0.06;
    par.grid = UniformGrid::cube(1.6, 33);
    par.t_min = -0.3;
    par.t_max = 0.3;
    par.drift_tolerance = 0.0;
    auto e0 = sample_ensemble(f, 1000, 3);
    // at rest: cold ensemble
    for (std::size_t i = 0; i < e0.size(); ++i) e0.set_mom(i, {});
    const auto h = evolve(e0, par);
    const Vec3 d0 = h.frames.front().dipole;
    for (const auto& fr : h.frames) {
        CHECK(norm(fr.dipole - d0) < 1e-10);
        CHECK(norm(fr.dipole_accel) < 1e-10);
    }
    // frame uniformity
    for (int k = 1; k < h.frame_count(); ++k)
        CHECK(h.frames[k].time - h.frames[k - 1].time ==
              doctest::Approx(par.dt_record).epsilon(1e-12));
}

TEST_CASE("evolve: displaced bunches give the configured initial dipole") {
    const double sep = 0.8, q = 0.5;
    const auto fp = build_profile({Species::positive, {0, 0, sep / 2}, {0.3, 0.3, 0.3}, 0.2, q});
    const auto fm = build_profile({Species::negative, {0, 0, -sep / 2}, {0.3, 0.3, 0.3}, 0.2, q});
    const auto e0 = merge({sample_ensemble(fp, 800, 1, Symmetrize::antithetic),
                           sample_ensemble(fm, 800, 2, Symmetrize::antithetic)});
    EvolveParams par;
    par.mode = FieldMode::plasma;
    par.dt = 0.005;
    par.dt_record = 0.05;
    par.softening = 0.05;
    par.grid = UniformGrid::cube(1.5, 33);
    par.t_min = -0.2;
    par.t_max = 0.4;
    par.drift_tolerance = 0.0;
    const auto h = evolve(e0, par);
    const int k0 = h.nearest_frame(0.0);
    CHECK(h.frames[k0].time == doctest::Approx(0.0));
    // antithetic sampling pins each bunch's center exactly
    CHECK(h.frames[k0].dipole.z == doctest::Approx(q * sep).epsilon(1e-12));
    // dipole oscillates: acceleration points against the displacement
    CHECK(h.frames[k0].dipole_accel.z < 0.0);
    // momentum conservation across the full window
    const Vec3 p0 = total_momentum(h.frames.front().snapshot);
    const Vec3 p1 = total_momentum(h.frames.back().snapshot);
    CHECK(norm(p1 - p0) < 1e-12);
}

TEST_CASE("evolve: gravity bump conserves energy") {
    // near-virial momenta keep the collapse mild across the window
    const auto f = build_profile({Species::neutral, {}, {0.8, 0.8, 0.8}, 2.0, 1.0});
    const auto e0 = sample_ensemble(f, 2304, 7, Symmetrize::octahedral);
    EvolveParams par;
    par.mode = FieldMode::gravity;
    par.dt = 0.002;
    par.dt_record = 0.05;
    par.softening = 0.08;
    par.grid = UniformGrid::cube(3.0, 33);
    par.t_min = -0.25;
    par.t_max = 0.5;
    par.drift_tolerance = 1e-5; // evolve() itself aborts beyond this
    const auto h = evolve(e0, par);
    CHECK(h.relative_energy_drift() <= 1e-5);
    for (const auto& fr : h.frames) CHECK(fr.energy.kinetic >= 0.0);
}

TEST_CASE("continuity residual shrinks under refinement") {
    const auto f = build_profile({Species::neutral, {}, {0.7, 0.7, 0.7}, 0.4, 1.0});
    const auto e0 = sample_ensemble(f, 2000, 13);
    EvolveParams par;
    par.mode = FieldMode::gravity;
    par.dt = 0.005;
    par.dt_record = 0.02;
    par.softening = 0.05;
    par.grid = UniformGrid::cube(1.6, 33);
    par.t_min = 0.0;
    par.t_max = 0.12;
    par.drift_tolerance = 0.0;
    const auto h = evolve(e0, par);
    const int k = 3;
    // fixed physical bandwidth, refined grids
    const UniformGrid coarse = UniformGrid::cube(1.6, 33);
    const UniformGrid fine = UniformGrid::cube(1.6, 65);
    const double bw = 2.0 * coarse.h;
    const double rc = continuity_residual(h, k, coarse, bw);
    const double rf = continuity_residual(h, k, fine, bw);
    const double order = std::log2(rc / rf);
    CHECK(order >= 1.0);
}

TEST_CASE("dipole acceleration matches the finite difference of D at order 2") {
    const double sep = 0.7, q = 0.4;
    const auto fp = build_profile({Species::positive, {0, 0, sep / 2}, {0.25, 0.25, 0.25}, 0.2, q});
    const auto fm = build_profile({Species::negative, {0, 0, -sep / 2}, {0.25, 0.25, 0.25}, 0.2, q});
    const auto e0 = merge({sample_ensemble(fp, 600, 5, Symmetrize::antithetic),
                           sample_ensemble(fm, 600, 6, Symmetrize::antithetic)});
    EvolveParams par;
    par.mode = FieldMode::plasma;
    par.dt = 0.0025;
    par.dt_record = 0.01; // fine cadence, coarser stencils by subsampling
    par.softening = 0.05;
    par.grid = UniformGrid::cube(1.4, 33);
    par.t_min = -0.1;
    par.t_max = 0.1;
    par.drift_tolerance = 0.0;
    const auto h = evolve(e0, par);
    const int k0 = h.nearest_frame(0.0);
    const Vec3 dd = h.frames[k0].dipole_accel;
    auto fd2 = [&](int stride) {
        const Vec3 num = h.frames[k0 + stride].dipole - 2.0 * h.frames[k0].dipole +
                         h.frames[k0 - stride].dipole;
        return num / sq(stride * h.dt_record);
    };
    const double err1 = norm(fd2(1) - dd);
    const double err2 = norm(fd2(2) - dd);
    const double err4 = norm(fd2(4) - dd);
    const double order21 = std::log2(err2 / err1);
    const double order42 = std::log2(err4 / err2);
    CHECK(order21 == doctest::Approx(2.0).epsilon(0.15));
    CHECK(order42 == doctest::Approx(2.0).epsilon(0.15));
    CHECK(norm(fd2(1) - dd) / norm(dd) < 1e-3);
}

TEST_CASE("evolve rejects bad windows and stepping") {
    const auto f = build_profile({Species::positive, {}, {0.5, 0.5, 0.5}, 0.3, 1.0});
    const auto e0 = sample_ensemble(f, 10, 3);
    EvolveParams par;
    par.grid = UniformGrid::cube(1.5, 17);
    par.t_min = 0.1; // window must contain 0
    par.t_max = 0.5;
    CHECK_THROWS(evolve(e0, par));
    par.t_min = 0.0;
    par.dt = 0.03;
    par.dt_record = 0.05; // not a multiple
    CHECK_THROWS(evolve(e0, par));
}
