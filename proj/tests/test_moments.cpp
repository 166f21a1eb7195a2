#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vrl/deposit.hpp"

using namespace vrl;

namespace {

ParticleEnsemble single_particle(const Vec3& x, const Vec3& p, double w, double sign) {
    ParticleEnsemble e;
    e.push(x, p, w, sign);
    e.species.push_back({sign > 0 ? Species::positive : Species::negative, 0, 1, w});
    return e;
}

} // namespace

TEST_CASE("single particle deposits unit mass") {
    const UniformGrid g = UniformGrid::cube(1.0, 33);
    const auto e = single_particle({0, 0, 0}, {0.2, 0, 0}, 1.0, +1.0);
    const auto mu = deposit_matter(e, g, 2.0 * g.h);
    CHECK(mu.integral() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("balanced mirror ensemble has zero net charge") {
    const UniformGrid g = UniformGrid::cube(1.5, 33);
    ParticleEnsemble e;
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const Vec3 x{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        e.push(x, {}, 0.01, +1.0);
        e.push(-1.0 * x, {}, 0.01, -1.0);
    }
    const auto rho = deposit_charge(e, g, 2.0 * g.h);
    CHECK(std::abs(rho.integral()) < 1e-10);
}

TEST_CASE("charge integral equals net charge for random ensembles") {
    const UniformGrid g = UniformGrid::cube(2.0, 49);
    const auto f = build_profile({Species::positive, {0.2, 0, -0.1}, {1, 0.8, 1.1}, 0.5, 0.7});
    const auto e = sample_ensemble(f, 5000, 12);
    const auto rho = deposit_charge(e, g, 2.0 * g.h);
    CHECK(rho.integral() == doctest::Approx(0.7).epsilon(1e-10));
    // bandwidth = 4h keeps the exact partition of unity as well
    const auto rho4 = deposit_charge(e, g, 4.0 * g.h);
    CHECK(rho4.integral() == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("relativistic current weight") {
    const UniformGrid g = UniformGrid::cube(1.0, 25);
    const double p1 = 0.8, c = 2.0, w = 0.3;
    const auto e = single_particle({0.1, 0.05, -0.2}, {p1, 0, 0}, w, +1.0);
    const auto j = deposit_current(e, g, 2.0 * g.h, c);
    const double gamma = 1.0 / std::sqrt(1.0 + p1 * p1 / (c * c));
    const Vec3 total = j.integral();
    CHECK(total.x == doctest::Approx(w * gamma * p1).epsilon(1e-10));
    CHECK(std::abs(total.y) < 1e-12);
}

TEST_CASE("values vanish outside support plus bandwidth") {
    const UniformGrid g = UniformGrid::cube(2.0, 65);
    const double bw = 2.0 * g.h;
    const auto e = single_particle({0.25, 0, 0}, {}, 1.0, +1.0);
    const auto rho = deposit_charge(e, g, bw);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int k = 0; k < g.nz; ++k) {
                const Vec3 d = g.node(i, j, k) - Vec3{0.25, 0, 0};
                if (std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)}) >= bw)
                    CHECK(rho.at(i, j, k) == 0.0);
            }
}

TEST_CASE("deposition is linear in the ensemble") {
    const UniformGrid g = UniformGrid::cube(1.5, 17);
    const auto fa = build_profile({Species::positive, {0.3, 0, 0}, {0.5, 0.5, 0.5}, 0.5, 1.0});
    const auto fb = build_profile({Species::negative, {-0.3, 0, 0}, {0.5, 0.5, 0.5}, 0.5, 1.0});
    const auto a = sample_ensemble(fa, 300, 1);
    const auto b = sample_ensemble(fb, 300, 2);
    const auto ab = merge({a, b});
    auto ra = deposit_charge(a, g, 2.0 * g.h);
    const auto rb = deposit_charge(b, g, 2.0 * g.h);
    const auto rab = deposit_charge(ab, g, 2.0 * g.h);
    ra += rb;
    for (std::size_t i = 0; i < ra.v.size(); ++i)
        CHECK(std::abs(ra.v[i] - rab.v[i]) <= 1e-13 * (std::abs(ra.v[i]) + 1.0));
}

TEST_CASE("grid too small raises a descriptive error") {
    const UniformGrid g = UniformGrid::cube(0.5, 9);
    const auto e = single_particle({0.49, 0, 0}, {}, 1.0, +1.0);
    CHECK_THROWS_WITH_AS(deposit_charge(e, g, 2.0 * g.h),
                         doctest::Contains("deposition support exceeds grid extent"),
                         std::runtime_error);
}

TEST_CASE("dipole moment examples") {
    ParticleEnsemble pair;
    pair.push({1, 0, 0}, {}, 1.0, +1.0);
    pair.push({-1, 0, 0}, {}, 1.0, +1.0);
    const Vec3 d0 = dipole_moment(pair);
    CHECK(d0.x == 0.0);
    CHECK(d0.y == 0.0);

    const auto e = single_particle({0, 0, 2}, {}, 1.0, +1.0);
    const Vec3 d1 = dipole_moment(e);
    CHECK(d1.z == doctest::Approx(2.0));

    // bump of net charge q at x0: grid and particle dipoles agree and match q*x0
    const Vec3 x0{0.25, -0.3, 0.4};
    const double q = 0.8;
    const auto f = build_profile({Species::positive, x0, {0.5, 0.5, 0.5}, 0.4, q});
    const auto be = sample_ensemble(f, 4000, 3, Symmetrize::antithetic);
    const UniformGrid g = UniformGrid::cube(2.0, 65);
    const auto rho = deposit_charge(be, g, 2.0 * g.h);
    const Vec3 dp = dipole_moment(be);
    const Vec3 dg = dipole_moment(rho);
    CHECK(dp.x == doctest::Approx(q * x0.x).epsilon(1e-8));
    CHECK(dp.y == doctest::Approx(q * x0.y).epsilon(1e-8));
    CHECK(dp.z == doctest::Approx(q * x0.z).epsilon(1e-8));
    // B-spline deposition preserves first moments: grid form matches to roundoff
    CHECK(norm(dg - dp) < 1e-12);
    CHECK_THROWS(dipole_moment(deposit_matter(be, g, 2.0 * g.h)));
}

TEST_CASE("single-species current tends to the momentum sum as c grows") {
    const auto f = build_profile({Species::positive, {}, {1, 1, 1}, 0.9, 1.0});
    const auto e = sample_ensemble(f, 2000, 5);
    Vec3 psum{};
    double pcube = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        psum += e.w[i] * e.mom(i);
        pcube += e.w[i] * cube(norm(e.mom(i)));
    }
    for (double c : {10.0, 100.0}) {
        Vec3 jhat{};
        for (std::size_t i = 0; i < e.size(); ++i)
            jhat += e.w[i] * lorentz_gamma(norm2(e.mom(i)), c) * e.mom(i);
        CHECK(norm(jhat - psum) <= 0.5 * pcube / (c * c) + 1e-15);
    }
}
