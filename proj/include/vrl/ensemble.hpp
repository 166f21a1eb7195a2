// Weighted particle ensembles: equal-weight sampling of phase-space profiles,
// optional symmetry-exact sampling modes, and the VRL1 binary snapshot format.
#ifndef VRL_ENSEMBLE_HPP
#define VRL_ENSEMBLE_HPP

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrl/core.hpp"
#include "vrl/profile.hpp"
#include "vrl/rng.hpp"

namespace vrl {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts are unsupported");

// Sampling symmetrization. Antithetic emits (x,p) and its mirror through the
// profile center, which pins the center of mass exactly. Octahedral emits the
// full 48-element signed-permutation orbit and makes second moments exactly
// isotropic; it requires an isotropic profile centered at the origin.
enum class Symmetrize { none, antithetic, octahedral };

struct SpeciesRange {
    Species species = Species::neutral;
    std::size_t begin = 0;
    std::size_t count = 0;
    double particle_weight = 0.0;
};

struct ParticleEnsemble {
    double time = 0.0;
    std::vector<double> x, y, z;    // positions
    std::vector<double> px, py, pz; // momenta
    std::vector<double> w;          // weights, positive
    std::vector<double> s;          // charge sign (+1/-1), +1 for neutral matter
    std::vector<SpeciesRange> species;

    std::size_t size() const { return x.size(); }

    Vec3 pos(std::size_t i) const { return {x[i], y[i], z[i]}; }
    Vec3 mom(std::size_t i) const { return {px[i], py[i], pz[i]}; }
    void set_pos(std::size_t i, const Vec3& v) { x[i] = v.x; y[i] = v.y; z[i] = v.z; }
    void set_mom(std::size_t i, const Vec3& v) { px[i] = v.x; py[i] = v.y; pz[i] = v.z; }

    void reserve(std::size_t n) {
        x.reserve(n); y.reserve(n); z.reserve(n);
        px.reserve(n); py.reserve(n); pz.reserve(n);
        w.reserve(n); s.reserve(n);
    }

    void push(const Vec3& q, const Vec3& p, double weight, double sign) {
        x.push_back(q.x); y.push_back(q.y); z.push_back(q.z);
        px.push_back(p.x); py.push_back(p.y); pz.push_back(p.z);
        w.push_back(weight); s.push_back(sign);
    }

    // Sum of weights per the equal-weight construction (count * weight per species).
    double total_weight() const {
        double t = 0.0;
        for (const auto& r : species) t += static_cast<double>(r.count) * r.particle_weight;
        return t;
    }

    double max_position_norm() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) m = std::max(m, norm(pos(i)));
        return m;
    }
    double max_momentum_norm() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) m = std::max(m, norm(mom(i)));
        return m;
    }
};

namespace detail {

// The 48 signed permutation matrices (full octahedral group), fixed order.
inline const std::array<std::array<int, 9>, 48>& octahedral_group() {
    static const auto table = [] {
        std::array<std::array<int, 9>, 48> g{};
        const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        int n = 0;
        for (const auto& p : perms)
            for (int sx = -1; sx <= 1; sx += 2)
                for (int sy = -1; sy <= 1; sy += 2)
                    for (int sz = -1; sz <= 1; sz += 2) {
                        std::array<int, 9> m{};
                        const int sgn[3] = {sx, sy, sz};
                        for (int r = 0; r < 3; ++r) m[3 * r + p[r]] = sgn[r];
                        g[n++] = m;
                    }
        return g;
    }();
    return table;
}

inline Vec3 apply_mat3(const std::array<int, 9>& m, const Vec3& v) {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

// Draw from the unit-ball bump density ~ (1 - |u|^2)^3 by rejection.
inline Vec3 draw_ball_bump(Rng& rng) {
    for (;;) {
        const double ux = rng.uniform(-1.0, 1.0);
        const double uy = rng.uniform(-1.0, 1.0);
        const double uz = rng.uniform(-1.0, 1.0);
        const double s2 = ux * ux + uy * uy + uz * uz;
        if (s2 >= 1.0) continue;
        if (rng.uniform() < cube(1.0 - s2)) return {ux, uy, uz};
    }
}

} // namespace detail

// Deterministic equal-weight sampling of one profile. The returned ensemble
// has exactly n particles of weight total_weight / n.
inline ParticleEnsemble sample_ensemble(const PhaseSpaceProfile& profile, std::size_t n,
                                        std::uint64_t seed,
                                        Symmetrize sym = Symmetrize::none) {
    if (n == 0) throw std::invalid_argument("sample_ensemble: n must be >= 1");
    std::size_t images = 1;
    if (sym == Symmetrize::antithetic) images = 2;
    if (sym == Symmetrize::octahedral) images = 48;
    if (n % images != 0)
        throw std::invalid_argument("sample_ensemble: n must be divisible by the "
                                    "symmetrization image count");
    const ProfileSpec& ps = profile.spec();
    if (sym == Symmetrize::octahedral) {
        const bool isotropic = ps.scale_radii.x == ps.scale_radii.y &&
                               ps.scale_radii.y == ps.scale_radii.z &&
                               norm2(ps.mean_momentum) == 0.0 && norm2(ps.center) == 0.0;
        if (!isotropic)
            throw std::invalid_argument("sample_ensemble: octahedral symmetrization requires an "
                                        "isotropic profile centered at the origin");
    }

    ParticleEnsemble e;
    e.reserve(n);
    const double weight = profile.total_weight() / static_cast<double>(n);
    const double sign = charge_sign(profile.species());
    Rng rng(seed);

    const std::size_t base = n / images;
    for (std::size_t i = 0; i < base; ++i) {
        const Vec3 u = detail::draw_ball_bump(rng);
        const Vec3 v = detail::draw_ball_bump(rng);
        if (sym == Symmetrize::octahedral) {
            for (const auto& m : detail::octahedral_group()) {
                const Vec3 xu = detail::apply_mat3(m, u);
                const Vec3 xv = detail::apply_mat3(m, v);
                e.push({ps.scale_radii.x * xu.x, ps.scale_radii.y * xu.y, ps.scale_radii.z * xu.z},
                       ps.momentum_radius * xv, weight, sign);
            }
        } else {
            const Vec3 q{ps.center.x + ps.scale_radii.x * u.x, ps.center.y + ps.scale_radii.y * u.y,
                         ps.center.z + ps.scale_radii.z * u.z};
            const Vec3 p = ps.mean_momentum + ps.momentum_radius * v;
            e.push(q, p, weight, sign);
            if (sym == Symmetrize::antithetic) {
                e.push(2.0 * ps.center - q, 2.0 * ps.mean_momentum - p, weight, sign);
            }
        }
    }
    e.species.push_back({profile.species(), 0, n, weight});
    return e;
}

// Concatenates ensembles (multi-species scenarios). Times must agree.
inline ParticleEnsemble merge(const std::vector<ParticleEnsemble>& parts) {
    ParticleEnsemble out;
    if (parts.empty()) return out;
    out.time = parts.front().time;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    out.reserve(total);
    for (const auto& p : parts) {
        if (p.time != out.time) throw std::invalid_argument("merge: ensemble times differ");
        const std::size_t off = out.size();
        for (std::size_t i = 0; i < p.size(); ++i) out.push(p.pos(i), p.mom(i), p.w[i], p.s[i]);
        for (auto r : p.species) {
            r.begin += off;
            out.species.push_back(r);
        }
    }
    return out;
}

// Support-bound check per the momentum-support assumption: |p| <= P1 and
// |x| <= R0 + P1 |t|. Returns an explanatory message on violation.
inline bool check_support(const ParticleEnsemble& e, double r0, double p1, std::string* why = nullptr) {
    const double limx = r0 + p1 * std::abs(e.time);
    const double mx = e.max_position_norm();
    const double mp = e.max_momentum_norm();
    if (mx > limx) {
        if (why) *why = "position support violated: max |x| = " + format_double(mx) +
                        " > R0 + P1 |t| = " + format_double(limx);
        return false;
    }
    if (mp > p1) {
        if (why) *why = "momentum support violated: max |p| = " + format_double(mp) +
                        " > P1 = " + format_double(p1);
        return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// VRL1 snapshot: magic "VRL1", u32 version, u32 species count, f64 time,
// species table {i32 sign, u64 count, f64 weight}, then 7 columns of f64
// (x, y, z, px, py, pz, w), species-grouped. Little-endian throughout.
// ---------------------------------------------------------------------------

inline void write_snapshot(std::ostream& os, const ParticleEnsemble& e) {
    os.write("VRL1", 4);
    const std::uint32_t version = 1;
    const std::uint32_t nspecies = static_cast<std::uint32_t>(e.species.size());
    os.write(reinterpret_cast<const char*>(&version), 4);
    os.write(reinterpret_cast<const char*>(&nspecies), 4);
    os.write(reinterpret_cast<const char*>(&e.time), 8);
    for (const auto& r : e.species) {
        const std::int32_t sign = static_cast<std::int32_t>(r.species);
        const std::uint64_t count = r.count;
        os.write(reinterpret_cast<const char*>(&sign), 4);
        os.write(reinterpret_cast<const char*>(&count), 8);
        os.write(reinterpret_cast<const char*>(&r.particle_weight), 8);
    }
    auto col = [&](const std::vector<double>& v) {
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    col(e.x); col(e.y); col(e.z); col(e.px); col(e.py); col(e.pz); col(e.w);
}

inline ParticleEnsemble read_snapshot(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "VRL1", 4) != 0)
        throw std::runtime_error("snapshot: bad magic (expected VRL1)");
    std::uint32_t version = 0, nspecies = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    is.read(reinterpret_cast<char*>(&nspecies), 4);
    if (version != 1) throw std::runtime_error("snapshot: unsupported version");
    ParticleEnsemble e;
    is.read(reinterpret_cast<char*>(&e.time), 8);
    std::size_t total = 0;
    for (std::uint32_t k = 0; k < nspecies; ++k) {
        std::int32_t sign = 0;
        std::uint64_t count = 0;
        double weight = 0.0;
        is.read(reinterpret_cast<char*>(&sign), 4);
        is.read(reinterpret_cast<char*>(&count), 8);
        is.read(reinterpret_cast<char*>(&weight), 8);
        SpeciesRange r;
        r.species = static_cast<Species>(sign);
        r.begin = total;
        r.count = count;
        r.particle_weight = weight;
        e.species.push_back(r);
        total += count;
    }
    auto col = [&](std::vector<double>& v) {
        v.resize(total);
        is.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(total * sizeof(double)));
    };
    col(e.x); col(e.y); col(e.z); col(e.px); col(e.py); col(e.pz); col(e.w);
    if (!is) throw std::runtime_error("snapshot: truncated file");
    e.s.resize(total);
    for (const auto& r : e.species)
        for (std::size_t i = 0; i < r.count; ++i) e.s[r.begin + i] = charge_sign(r.species);
    return e;
}

inline void save_snapshot(const std::string& path, const ParticleEnsemble& e) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    write_snapshot(f, e);
}

inline ParticleEnsemble load_snapshot(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_snapshot(f);
}

} // namespace vrl

#endif // VRL_ENSEMBLE_HPP
