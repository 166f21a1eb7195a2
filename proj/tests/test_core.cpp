#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vrl/core.hpp"
#include "vrl/rng.hpp"

using namespace vrl;

TEST_CASE("vec3 algebra") {
    const Vec3 a{1.0, 2.0, 3.0};
    const Vec3 b{-2.0, 0.5, 4.0};
    CHECK(dot(a, b) == doctest::Approx(11.0));
    const Vec3 c = cross(a, b);
    CHECK(dot(c, a) == doctest::Approx(0.0));
    CHECK(dot(c, b) == doctest::Approx(0.0));
    CHECK(norm(Vec3{3.0, 4.0, 0.0}) == doctest::Approx(5.0));
}

TEST_CASE("symmetric tensor quadratic form") {
    const Vec3 v{0.3, -1.2, 2.0};
    SymTensor3 t = SymTensor3::outer(v);
    const Vec3 u{1.0, 0.5, -0.25};
    CHECK(t.quad(u) == doctest::Approx(sq(dot(u, v))));
    CHECK(t.trace() == doctest::Approx(norm2(v)));
}

TEST_CASE("chunked reduce matches serial sum for any thread count") {
    std::vector<double> v(10001);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.01 * static_cast<double>(i));
    auto run = [&] {
        return chunked_reduce(v.size(), 0.0, [&](std::size_t b, std::size_t e, double& acc) {
            for (std::size_t i = b; i < e; ++i) acc += v[i];
        });
    };
    set_worker_threads(1);
    const double s1 = run();
    set_worker_threads(4);
    const double s4 = run();
    CHECK(s1 == s4); // bitwise equal: chunk layout is thread-count independent
}

TEST_CASE("rng determinism and uniformity") {
    Rng a(7), b(7);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(123);
    double mean = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) mean += r.uniform();
    mean /= n;
    CHECK(std::abs(mean - 0.5) < 0.005);
}
