// Small shared building blocks: 3-vectors, 3x3 symmetric tensors,
// deterministic parallel loops, and float formatting used by all writers.
#ifndef VRL_CORE_HPP
#define VRL_CORE_HPP

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace vrl {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }
inline Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }

// Symmetric 3x3 tensor stored as xx, yy, zz, xy, xz, yz.
struct SymTensor3 {
    std::array<double, 6> c{};

    double& xx() { return c[0]; }
    double& yy() { return c[1]; }
    double& zz() { return c[2]; }
    double& xy() { return c[3]; }
    double& xz() { return c[4]; }
    double& yz() { return c[5]; }
    double xx() const { return c[0]; }
    double yy() const { return c[1]; }
    double zz() const { return c[2]; }
    double xy() const { return c[3]; }
    double xz() const { return c[4]; }
    double yz() const { return c[5]; }

    SymTensor3& operator+=(const SymTensor3& o) {
        for (int i = 0; i < 6; ++i) c[i] += o.c[i];
        return *this;
    }
    SymTensor3& operator-=(const SymTensor3& o) {
        for (int i = 0; i < 6; ++i) c[i] -= o.c[i];
        return *this;
    }
    SymTensor3& operator*=(double s) {
        for (int i = 0; i < 6; ++i) c[i] *= s;
        return *this;
    }

    double trace() const { return c[0] + c[1] + c[2]; }

    // u^T T v for the symmetric tensor.
    double quad(const Vec3& u, const Vec3& v) const {
        return c[0] * u.x * v.x + c[1] * u.y * v.y + c[2] * u.z * v.z +
               c[3] * (u.x * v.y + u.y * v.x) + c[4] * (u.x * v.z + u.z * v.x) +
               c[5] * (u.y * v.z + u.z * v.y);
    }
    double quad(const Vec3& u) const { return quad(u, u); }

    static SymTensor3 outer(const Vec3& a) {
        SymTensor3 t;
        t.c = {a.x * a.x, a.y * a.y, a.z * a.z, a.x * a.y, a.x * a.z, a.y * a.z};
        return t;
    }
    static SymTensor3 identity(double s = 1.0) {
        SymTensor3 t;
        t.c = {s, s, s, 0.0, 0.0, 0.0};
        return t;
    }
};

inline SymTensor3 operator+(SymTensor3 a, const SymTensor3& b) { return a += b; }
inline SymTensor3 operator-(SymTensor3 a, const SymTensor3& b) { return a -= b; }
inline SymTensor3 operator*(double s, SymTensor3 a) { return a *= s; }

// ---------------------------------------------------------------------------
// Deterministic parallelism.
//
// Work is split into fixed-size chunks independent of the thread count, and
// reductions merge per-chunk partial results in chunk order. Outputs are
// therefore bit-identical for any --threads value.
// ---------------------------------------------------------------------------

inline int& worker_threads() {
    static int n = static_cast<int>(std::thread::hardware_concurrency());
    return n;
}

inline void set_worker_threads(int n) { worker_threads() = n > 0 ? n : 1; }

// Runs fn(begin, end) over [0, n) in chunks; chunk boundaries do not depend on
// the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                         std::size_t chunk = 2048) {
    if (n == 0) return;
    const int nt = worker_threads();
    if (nt <= 1 || n <= chunk) {
        fn(0, n);
        return;
    }
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<std::thread> pool;
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= nchunks) return;
            const std::size_t b = i * chunk;
            const std::size_t e = std::min(n, b + chunk);
            fn(b, e);
        }
    };
    pool.reserve(static_cast<std::size_t>(nt) - 1);
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

// Chunked deterministic reduction: partial[i] = reduce of chunk i, summed in
// chunk order afterwards. The chunk layout is fixed by `chunk` alone, so the
// result is bitwise independent of the thread count.
template <class T, class ChunkFn>
T chunked_reduce(std::size_t n, T zero, ChunkFn&& per_chunk, std::size_t chunk = 2048) {
    if (n == 0) return zero;
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<T> partial(nchunks, zero);
    parallel_for(
        nchunks,
        [&](std::size_t cb, std::size_t ce) {
            for (std::size_t idx = cb; idx < ce; ++idx) {
                const std::size_t b = idx * chunk;
                const std::size_t e = std::min(n, b + chunk);
                T acc = zero;
                per_chunk(b, e, acc);
                partial[idx] = acc;
            }
        },
        1);
    T total = zero;
    for (const T& p : partial) total += p;
    return total;
}

// ---------------------------------------------------------------------------
// Formatting: every number written to CSV/JSON goes through this so repeated
// runs are byte-identical.
// ---------------------------------------------------------------------------
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double sq(double v) { return v * v; }
inline double cube(double v) { return v * v * v; }

} // namespace vrl

#endif // VRL_CORE_HPP
