#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <numbers>

#include "vrl/nbody.hpp"

using namespace vrl;

namespace {

ParticleEnsemble from_points(const std::vector<std::array<double, 8>>& rows) {
    // rows: x y z px py pz w s
    ParticleEnsemble e;
    for (const auto& r : rows) e.push({r[0], r[1], r[2]}, {r[3], r[4], r[5]}, r[6], r[7]);
    return e;
}

} // namespace

TEST_CASE("coulomb field of a single charge") {
    const auto e = from_points({{0, 0, 0, 0, 0, 0, 1.0, +1.0}});
    const double eps = 1e-5;
    const Vec3 f = field_at(e, {2, 0, 0}, FieldMode::plasma, eps);
    CHECK(f.x == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(f.y == 0.0);
    CHECK(f.z == 0.0);
}

TEST_CASE("mirror-symmetric balanced ensemble: tangential field vanishes on the plane") {
    ParticleEnsemble e;
    Rng rng(9);
    for (int i = 0; i < 50; ++i) {
        const Vec3 y{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 1.0)};
        e.push(y, {}, 0.02, +1.0);
        e.push({y.x, y.y, -y.z}, {}, 0.02, -1.0);
    }
    const Vec3 f = field_at(e, {0.3, -0.2, 0.0}, FieldMode::plasma, 0.01);
    CHECK(std::abs(f.x) < 1e-12);
    CHECK(std::abs(f.y) < 1e-12);
}

TEST_CASE("gravity field matches a brute-force oracle") {
    Rng rng(17);
    ParticleEnsemble e;
    for (int i = 0; i < 10; ++i)
        e.push({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
               {rng.uniform(-1, 1), 0, 0}, rng.uniform(0.1, 1.0), +1.0);
    const double eps = 0.05;
    const Vec3 at{0.4, -0.7, 0.2};
    // independent double-loop oracle
    Vec3 oracle{};
    for (std::size_t j = 0; j < e.size(); ++j) {
        const Vec3 d = at - e.pos(j);
        const double r2 = norm2(d) + eps * eps;
        oracle += (e.w[j] / (r2 * std::sqrt(r2))) * d;
    }
    const Vec3 f = field_at(e, at, FieldMode::gravity, eps);
    CHECK(norm(f - oracle) < 1e-14 * norm(oracle) + 1e-16);
}

TEST_CASE("softened potential energies") {
    const double d = 2.0, eps = 0.01;
    SUBCASE("two unit masses, gravity") {
        auto e = from_points({{0, 0, 0, 0, 0, 0, 1.0, +1.0}, {d, 0, 0, 0, 0, 0, 1.0, +1.0}});
        const auto en = energies(e, FieldMode::gravity, eps);
        CHECK(std::abs(en.potential + 1.0 / d) < 0.6 * eps * eps / cube(d));
        CHECK(en.kinetic == 0.0);
    }
    SUBCASE("plus-minus pair, plasma") {
        auto e = from_points({{0, 0, 0, 0, 0, 0, 1.0, +1.0}, {d, 0, 0, 0, 0, 0, 1.0, -1.0}});
        const auto en = energies(e, FieldMode::plasma, eps);
        CHECK(std::abs(en.potential + 1.0 / d) < 0.6 * eps * eps / cube(d));
    }
    SUBCASE("like charges repel: positive potential") {
        auto e = from_points({{0, 0, 0, 0, 0, 0, 1.0, +1.0}, {d, 0, 0, 0, 0, 0, 1.0, +1.0}});
        const auto en = energies(e, FieldMode::plasma, eps);
        CHECK(en.potential == doctest::Approx(1.0 / d).epsilon(1e-3));
    }
    SUBCASE("kinetic") {
        auto e = from_points({{0, 0, 0, 0.3, -0.4, 1.2, 0.5, +1.0}});
        const auto en = energies(e, FieldMode::gravity, eps);
        CHECK(en.kinetic == doctest::Approx(0.5 * 0.5 * (0.09 + 0.16 + 1.44)));
    }
}

TEST_CASE("dipole acceleration") {
    SUBCASE("single species cancels to roundoff") {
        Rng rng(3);
        ParticleEnsemble e;
        for (int i = 0; i < 100; ++i)
            e.push({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}, {}, 0.01, +1.0);
        const double eps = 0.05;
        const Vec3 dd = dipole_accel(e, eps);
        // scale comparison per the null criterion
        double emax = 0.0;
        const auto f = fields_at_particles(e, FieldMode::plasma, eps);
        for (std::size_t i = 0; i < e.size(); ++i) emax = std::max(emax, norm(f.field(i)));
        CHECK(norm(dd) <= 1e-12 * static_cast<double>(e.size()) * emax);
    }
    SUBCASE("plus-minus pair closed form") {
        const double d = 1.5, eps = 1e-4;
        auto e = from_points(
            {{0, 0, d / 2, 0, 0, 0, 1.0, +1.0}, {0, 0, -d / 2, 0, 0, 0, 1.0, -1.0}});
        const Vec3 dd = dipole_accel(e, eps);
        CHECK(std::abs(dd.z + 2.0 / (d * d)) < 3.1 * eps * eps / sq(sq(d)) + 1e-12);
        CHECK(std::abs(dd.x) < 1e-15);
    }
}

TEST_CASE("pairwise field-gradient tensor") {
    SUBCASE("two points match the closed form") {
        const double d = 1.25, eps = 1e-7;
        auto e = from_points(
            {{0, 0, 0, 0, 0, 0, 0.7, +1.0}, {0, 0, d, 0, 0, 0, 0.4, +1.0}});
        const SymTensor3 g = field_gradient_tensor_pairwise(e, eps);
        const double t0 = 2.0 * std::numbers::pi * 2.0 * 0.7 * 0.4; // both orderings
        CHECK(g.xx() == doctest::Approx(t0 / d).epsilon(1e-6));
        CHECK(g.yy() == doctest::Approx(t0 / d).epsilon(1e-6));
        CHECK(std::abs(g.zz()) < 1e-9); // axis term I - dd^T/d^2 vanishes along d
        CHECK(std::abs(g.xy()) < 1e-12);
    }
    SUBCASE("trace equals -8 pi E_pot for the softened pair potential") {
        Rng rng(31);
        ParticleEnsemble e;
        for (int i = 0; i < 60; ++i)
            e.push({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}, {},
                   rng.uniform(0.01, 0.05), +1.0);
        const double eps = 0.08;
        const SymTensor3 g = field_gradient_tensor_pairwise(e, eps);
        const auto en = energies(e, FieldMode::gravity, eps);
        CHECK(g.trace() == doctest::Approx(-8.0 * std::numbers::pi * en.potential).epsilon(1e-12));
    }
}

TEST_CASE("barnes-hut approximates the direct field") {
    Rng rng(5);
    ParticleEnsemble e;
    for (int i = 0; i < 3000; ++i)
        e.push({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}, {}, 1e-3, +1.0);
    const auto q = source_coefficients(e, FieldMode::gravity);
    BarnesHutTree tree(e, q);
    const double eps = 0.05;
    for (const Vec3 at : {Vec3{1.5, 0.2, -0.3}, Vec3{0.1, 0.0, 0.2}}) {
        const Vec3 direct = field_at(e, at, FieldMode::gravity, eps);
        const Vec3 approx = tree.field_at(at, eps, 0.3);
        CHECK(norm(approx - direct) < 2e-2 * norm(direct) + 1e-4);
    }
}

TEST_CASE("total momentum sum") {
    auto e = from_points({{0, 0, 0, 1, 0, 0, 0.5, +1.0}, {1, 0, 0, 0, 2, 0, 0.25, -1.0}});
    const Vec3 p = total_momentum(e);
    CHECK(p.x == doctest::Approx(0.5));
    CHECK(p.y == doctest::Approx(0.5));
}
