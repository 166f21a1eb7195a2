#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <sstream>

#include "vrl/ensemble.hpp"

using namespace vrl;

namespace {
PhaseSpaceProfile unit_profile() {
    return build_profile({Species::positive, {0.5, -0.25, 0.0}, {1, 1, 1}, 0.8, 1.0});
}
} // namespace

TEST_CASE("sampling is deterministic for a fixed seed") {
    const auto f = unit_profile();
    const auto a = sample_ensemble(f, 1000, 7);
    const auto b = sample_ensemble(f, 1000, 7);
    REQUIRE(a.size() == 1000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.x[i] == b.x[i]);
        CHECK(a.px[i] == b.px[i]);
    }
    const auto c = sample_ensemble(f, 1000, 8);
    CHECK(a.x[0] != c.x[0]);
}

TEST_CASE("equal weights sum to the total weight") {
    const auto f = unit_profile();
    for (std::size_t n : {1ul, 7ul, 1000ul, 20000ul}) {
        const auto e = sample_ensemble(f, n, 3);
        CHECK(e.total_weight() == 1.0);
        for (double w : e.w) CHECK(w == 1.0 / static_cast<double>(n));
    }
}

TEST_CASE("samples stay inside the support") {
    const auto f = unit_profile();
    const auto e = sample_ensemble(f, 5000, 11);
    const auto& s = f.spec();
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(norm(e.pos(i) - s.center) < f.support_radius_x());
        CHECK(norm(e.mom(i)) < s.momentum_radius);
        CHECK(f.value(e.pos(i), e.mom(i)) > 0.0);
    }
}

TEST_CASE("monte-carlo mean matches the profile center") {
    const auto f = unit_profile();
    const std::size_t n = 100000;
    const auto e = sample_ensemble(f, n, 5);
    Vec3 mean{};
    for (std::size_t i = 0; i < n; ++i) mean += e.pos(i);
    mean = mean / static_cast<double>(n);
    const double sigma = std::sqrt(f.position_variance().x); // isotropic here
    const double tol = 3.0 * sigma / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean.x - f.spec().center.x) < tol);
    CHECK(std::abs(mean.y - f.spec().center.y) < tol);
    CHECK(std::abs(mean.z - f.spec().center.z) < tol);
}

TEST_CASE("antithetic sampling pins the center of mass") {
    const auto f = unit_profile();
    const auto e = sample_ensemble(f, 2000, 17, Symmetrize::antithetic);
    Vec3 com{};
    for (std::size_t i = 0; i < e.size(); ++i) com += e.pos(i);
    com = com / static_cast<double>(e.size());
    CHECK(std::abs(com.x - 0.5) < 1e-14);
    CHECK(std::abs(com.y + 0.25) < 1e-14);
    CHECK(std::abs(com.z) < 1e-14);
}

TEST_CASE("octahedral sampling isotropizes second moments exactly") {
    const auto f = build_profile({Species::neutral, {0, 0, 0}, {1, 1, 1}, 0.5, 2.0});
    const auto e = sample_ensemble(f, 48 * 40, 23, Symmetrize::octahedral);
    SymTensor3 p{};
    for (std::size_t i = 0; i < e.size(); ++i) {
        SymTensor3 t = SymTensor3::outer(e.mom(i));
        t *= e.w[i];
        p += t;
    }
    CHECK(std::abs(p.xy()) < 1e-15 * p.trace());
    CHECK(std::abs(p.xx() - p.yy()) < 1e-15 * p.trace());
    CHECK(std::abs(p.xx() - p.zz()) < 1e-15 * p.trace());
    // anisotropic profile must be rejected
    const auto g = build_profile({Species::neutral, {0, 0, 0}, {1, 2, 1}, 0.5, 2.0});
    CHECK_THROWS(sample_ensemble(g, 96, 3, Symmetrize::octahedral));
}

TEST_CASE("n = 0 rejected") {
    CHECK_THROWS(sample_ensemble(unit_profile(), 0, 1));
}

TEST_CASE("snapshot round trip") {
    const auto f = unit_profile();
    auto e = sample_ensemble(f, 257, 9);
    e.time = 0.75;
    std::stringstream buf;
    write_snapshot(buf, e);
    const auto r = read_snapshot(buf);
    REQUIRE(r.size() == e.size());
    CHECK(r.time == e.time);
    REQUIRE(r.species.size() == 1);
    CHECK(r.species[0].species == Species::positive);
    CHECK(r.species[0].particle_weight == e.species[0].particle_weight);
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(r.x[i] == e.x[i]);
        CHECK(r.pz[i] == e.pz[i]);
        CHECK(r.w[i] == e.w[i]);
        CHECK(r.s[i] == e.s[i]);
    }
}

TEST_CASE("support check reports violations") {
    const auto f = unit_profile();
    auto e = sample_ensemble(f, 100, 9);
    std::string why;
    CHECK(check_support(e, 2.0, 1.0, &why));
    e.px[3] = 5.0;
    CHECK_FALSE(check_support(e, 2.0, 1.0, &why));
    CHECK(why.find("momentum support") != std::string::npos);
}
