// Direct-summation N-body kernels with Plummer softening: mean fields at
// particles or arbitrary points, potentials, energies, the dipole
// acceleration, and the pairwise closed form of the field-gradient tensor.
// An optional Barnes-Hut tree covers large-N exploratory runs; every
// acceptance-grade computation uses direct summation.
#ifndef VRL_NBODY_HPP
#define VRL_NBODY_HPP

#include <cmath>
#include <numbers>
#include <type_traits>
#include <stdexcept>
#include <vector>

#include "vrl/core.hpp"
#include "vrl/ensemble.hpp"

namespace vrl {

enum class FieldMode { plasma, gravity };

// Source coefficient entering the pair kernel: signed charge for plasma,
// positive mass for gravity.
inline std::vector<double> source_coefficients(const ParticleEnsemble& e, FieldMode mode) {
    std::vector<double> q(e.size());
    for (std::size_t i = 0; i < e.size(); ++i)
        q[i] = (mode == FieldMode::plasma) ? e.s[i] * e.w[i] : e.w[i];
    return q;
}

// Softened kernel field sum_j q_j (x - x_j) / (|x - x_j|^2 + eps^2)^{3/2}
// evaluated at one point. This is E0 in plasma mode and grad(phi2) in gravity
// mode. The j-term vanishes identically when x coincides with x_j.
inline Vec3 kernel_field_at(const ParticleEnsemble& e, const std::vector<double>& q,
                            const Vec3& at, double eps) {
    const double e2 = eps * eps;
    double ax = 0.0, ay = 0.0, az = 0.0;
    const std::size_t n = e.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double dx = at.x - e.x[j];
        const double dy = at.y - e.y[j];
        const double dz = at.z - e.z[j];
        const double r2 = dx * dx + dy * dy + dz * dz + e2;
        const double inv = q[j] / (r2 * std::sqrt(r2));
        ax += inv * dx;
        ay += inv * dy;
        az += inv * dz;
    }
    return {ax, ay, az};
}

// E0 (plasma) or grad(phi2) (gravity) at an arbitrary point.
inline Vec3 field_at(const ParticleEnsemble& e, const Vec3& at, FieldMode mode, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("field_at: softening must be positive");
    const auto q = source_coefficients(e, mode);
    return kernel_field_at(e, q, at, eps);
}

// Softened potential sum_j q_j / sqrt(d^2 + eps^2); the self term (j at the
// evaluation particle) must be removed by the caller where appropriate.
inline double kernel_potential_at(const ParticleEnsemble& e, const std::vector<double>& q,
                                  const Vec3& at, double eps) {
    const double e2 = eps * eps;
    double phi = 0.0;
    const std::size_t n = e.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double dx = at.x - e.x[j];
        const double dy = at.y - e.y[j];
        const double dz = at.z - e.z[j];
        const double r2 = dx * dx + dy * dy + dz * dz + e2;
        phi += q[j] / std::sqrt(r2);
    }
    return phi;
}

// Field and (optionally) the self-excluded potential at every particle.
// Plasma: field = E0, potential = phi0 with E0 = -grad(phi0).
// Gravity: field = grad(phi2), potential = phi2 = -sum w_j psi.
struct ParticleFields {
    std::vector<double> fx, fy, fz; // kernel field at each particle
    std::vector<double> phi;        // mode-signed potential, self-excluded (optional)

    Vec3 field(std::size_t i) const { return {fx[i], fy[i], fz[i]}; }
};

inline ParticleFields fields_at_particles(const ParticleEnsemble& e, FieldMode mode, double eps,
                                          bool with_potential = false) {
    if (eps <= 0.0) throw std::invalid_argument("softening must be positive");
    const std::size_t n = e.size();
    const auto q = source_coefficients(e, mode);
    ParticleFields out;
    out.fx.assign(n, 0.0);
    out.fy.assign(n, 0.0);
    out.fz.assign(n, 0.0);
    if (with_potential) out.phi.assign(n, 0.0);
    const double e2 = eps * eps;
    const double inv_eps = 1.0 / eps;
    const double* sx = e.x.data();
    const double* sy = e.y.data();
    const double* sz = e.z.data();
    const double* sq = q.data();

    auto body = [&](auto with_phi) {
        parallel_for(n, [&](std::size_t b, std::size_t end) {
            for (std::size_t i = b; i < end; ++i) {
                const double xi = sx[i], yi = sy[i], zi = sz[i];
                double ax = 0.0, ay = 0.0, az = 0.0, ph = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double dx = xi - sx[j];
                    const double dy = yi - sy[j];
                    const double dz = zi - sz[j];
                    const double r2 = dx * dx + dy * dy + dz * dz + e2;
                    const double ir = 1.0 / std::sqrt(r2);
                    const double k = sq[j] * ir * ir * ir;
                    ax += k * dx;
                    ay += k * dy;
                    az += k * dz;
                    if constexpr (with_phi.value) ph += sq[j] * ir;
                }
                out.fx[i] = ax;
                out.fy[i] = ay;
                out.fz[i] = az;
                if constexpr (with_phi.value) {
                    ph -= sq[i] * inv_eps; // remove the self term
                    out.phi[i] = (mode == FieldMode::gravity) ? -ph : ph;
                }
            }
        }, 256);
    };
    if (with_potential)
        body(std::integral_constant<bool, true>{});
    else
        body(std::integral_constant<bool, false>{});
    return out;
}

// Momentum derivative of each particle: dp/dt = s E0 (plasma) or -grad(phi2)
// (gravity).
inline void accelerations(const ParticleEnsemble& e, FieldMode mode, double eps,
                          std::vector<double>& ax, std::vector<double>& ay,
                          std::vector<double>& az) {
    const ParticleFields f = fields_at_particles(e, mode, eps);
    const std::size_t n = e.size();
    ax.resize(n);
    ay.resize(n);
    az.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = (mode == FieldMode::plasma) ? e.s[i] : -1.0;
        ax[i] = s * f.fx[i];
        ay[i] = s * f.fy[i];
        az[i] = s * f.fz[i];
    }
}

struct EnergyEntry {
    double time = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double total() const { return kinetic + potential; }
};

inline double kinetic_energy(const ParticleEnsemble& e) {
    double t = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) t += e.w[i] * norm2(e.mom(i));
    return 0.5 * t;
}

// E_kin = (1/2) sum w p^2; E_pot = (1/2) sum_i coeff_i phi_i with the pairwise
// softened potential (self-energy excluded). Gravity is attractive (negative),
// plasma is the signed Coulomb sum.
inline EnergyEntry energies(const ParticleEnsemble& e, FieldMode mode, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("energies: softening must be positive");
    EnergyEntry out;
    out.time = e.time;
    out.kinetic = kinetic_energy(e);
    const std::size_t n = e.size();
    const auto q = source_coefficients(e, mode);
    const double e2 = eps * eps;
    const double inv_eps = 1.0 / eps;
    const double* sx = e.x.data();
    const double* sy = e.y.data();
    const double* sz = e.z.data();
    const double* sq = q.data();
    const double sign = (mode == FieldMode::gravity) ? -1.0 : 1.0;
    out.potential = chunked_reduce(
        n, 0.0,
        [&](std::size_t b, std::size_t end, double& acc) {
            for (std::size_t i = b; i < end; ++i) {
                const double xi = sx[i], yi = sy[i], zi = sz[i];
                double ph = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double dx = xi - sx[j];
                    const double dy = yi - sy[j];
                    const double dz = zi - sz[j];
                    const double r2 = dx * dx + dy * dy + dz * dz + e2;
                    ph += sq[j] * (1.0 / std::sqrt(r2));
                }
                ph -= sq[i] * inv_eps;
                acc += 0.5 * sign * sq[i] * ph;
            }
        },
        256);
    return out;
}

// Second time derivative of the dipole moment: the unsigned-weight sum of the
// signed mean field, sum_i w_i E0(x_i). Exactly zero (to roundoff) for a
// single species by pair antisymmetry.
inline Vec3 dipole_accel(const ParticleEnsemble& e, double eps) {
    const ParticleFields f = fields_at_particles(e, FieldMode::plasma, eps);
    Vec3 d{};
    for (std::size_t i = 0; i < e.size(); ++i) d += e.w[i] * f.field(i);
    return d;
}

// ---------------------------------------------------------------------------
// Pairwise closed form of G = integral grad(phi2) (x) grad(phi2) dy.
//
// For point sources, int K(y-a) K(y-b)^T dy = 2 pi (I/d - dd^T/d^3) with
// d = b - a. The softened variant below keeps the exact trace relation
// tr G = -8 pi E_pot for the softened pair potential and is bounded for
// close pairs.
// ---------------------------------------------------------------------------
inline SymTensor3 field_gradient_tensor_pairwise(const ParticleEnsemble& e, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("softening must be positive");
    const std::size_t n = e.size();
    const double e2 = eps * eps;
    const double* sx = e.x.data();
    const double* sy = e.y.data();
    const double* sz = e.z.data();
    const double* sw = e.w.data();
    SymTensor3 g = chunked_reduce(
        n, SymTensor3{},
        [&](std::size_t b, std::size_t end, SymTensor3& acc) {
            for (std::size_t i = b; i < end; ++i) {
                const double xi = sx[i], yi = sy[i], zi = sz[i], wi = sw[i];
                double txx = 0, tyy = 0, tzz = 0, txy = 0, txz = 0, tyz = 0, tiso = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const double dx = xi - sx[j];
                    const double dy = yi - sy[j];
                    const double dz = zi - sz[j];
                    const double d2 = dx * dx + dy * dy + dz * dz;
                    const double ds = std::sqrt(d2 + e2);
                    const double wq = sw[j] / ds;
                    tiso += wq;
                    if (d2 > 0.0) {
                        const double k = wq / d2;
                        txx += k * dx * dx;
                        tyy += k * dy * dy;
                        tzz += k * dz * dz;
                        txy += k * dx * dy;
                        txz += k * dx * dz;
                        tyz += k * dy * dz;
                    }
                }
                SymTensor3 t;
                t.c = {wi * (tiso - txx), wi * (tiso - tyy), wi * (tiso - tzz),
                       -wi * txy,         -wi * txz,         -wi * tyz};
                acc += t;
            }
        },
        128);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    g *= two_pi;
    return g;
}

// Momentum second-moment tensor P = sum w p (x) p; tr P = 2 E_kin.
inline SymTensor3 momentum_tensor(const ParticleEnsemble& e) {
    SymTensor3 p{};
    for (std::size_t i = 0; i < e.size(); ++i) {
        SymTensor3 t = SymTensor3::outer(e.mom(i));
        t *= e.w[i];
        p += t;
    }
    return p;
}

// Total momentum sum w p (conserved by pair antisymmetry in both modes).
inline Vec3 total_momentum(const ParticleEnsemble& e) {
    Vec3 p{};
    for (std::size_t i = 0; i < e.size(); ++i) p += e.w[i] * e.mom(i);
    return p;
}

// ---------------------------------------------------------------------------
// Barnes-Hut octree (monopole, opening angle theta). Exploratory option for
// large N; deterministic given the ensemble order.
// ---------------------------------------------------------------------------
class BarnesHutTree {
  public:
    BarnesHutTree(const ParticleEnsemble& e, const std::vector<double>& coeff) {
        Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
        for (std::size_t i = 0; i < e.size(); ++i) {
            const Vec3 p = e.pos(i);
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
        const Vec3 c = 0.5 * (lo + hi);
        double half = 0.5 * std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z, 1e-12});
        half *= 1.0000001;
        nodes_.push_back(Node{c, half});
        for (std::size_t i = 0; i < e.size(); ++i) insert(0, e.pos(i), coeff[i], 0);
        finalize(0);
    }

    Vec3 field_at(const Vec3& at, double eps, double theta) const {
        Vec3 f{};
        walk(0, at, eps * eps, theta, f);
        return f;
    }

  private:
    struct Node {
        Vec3 center;       // geometric center of the cell
        double half;       // half edge length
        double charge = 0.0;
        Vec3 moment{};     // sum coeff * position
        int child[8] = {-1, -1, -1, -1, -1, -1, -1, -1};
        int count = 0;
        Vec3 point{};      // the particle, while the node is a singleton leaf
        double point_q = 0.0;
        Vec3 com{};
    };

    void insert(int idx, const Vec3& p, double q, int depth) {
        Node& nd = nodes_[idx];
        nd.charge += q;
        nd.moment += q * p;
        if (nd.count == 0) {
            nd.point = p;
            nd.point_q = q;
            nd.count = 1;
            return;
        }
        if (nd.count == 1 && depth < 48) {
            const Vec3 old = nd.point;
            const double oldq = nd.point_q;
            nd.count = 2;
            push_down(idx, old, oldq, depth);
            push_down(idx, p, q, depth);
            return;
        }
        if (depth >= 48) { // coincident points: keep aggregated
            nd.count += 1;
            return;
        }
        nd.count += 1;
        push_down(idx, p, q, depth);
    }

    void push_down(int idx, const Vec3& p, double q, int depth) {
        const Vec3 c = nodes_[idx].center;
        const int oct = (p.x >= c.x ? 1 : 0) | (p.y >= c.y ? 2 : 0) | (p.z >= c.z ? 4 : 0);
        if (nodes_[idx].child[oct] < 0) {
            const double h = 0.5 * nodes_[idx].half;
            const Vec3 cc{c.x + (oct & 1 ? h : -h), c.y + (oct & 2 ? h : -h),
                          c.z + (oct & 4 ? h : -h)};
            nodes_.push_back(Node{cc, h});
            nodes_[idx].child[oct] = static_cast<int>(nodes_.size()) - 1;
        }
        insert(nodes_[idx].child[oct], p, q, depth + 1);
    }

    void finalize(int idx) {
        Node& nd = nodes_[idx];
        nd.com = (nd.charge != 0.0) ? nd.moment / nd.charge : nd.center;
        for (int c : nd.child)
            if (c >= 0) finalize(c);
    }

    void walk(int idx, const Vec3& at, double eps2, double theta, Vec3& f) const {
        const Node& nd = nodes_[idx];
        if (nd.count == 0) return;
        const Vec3 d = at - nd.com;
        const double r2 = norm2(d);
        const bool leaf = nd.count == 1 ||
                          (nd.child[0] < 0 && nd.child[1] < 0 && nd.child[2] < 0 &&
                           nd.child[3] < 0 && nd.child[4] < 0 && nd.child[5] < 0 &&
                           nd.child[6] < 0 && nd.child[7] < 0);
        if (leaf || (2.0 * nd.half) * (2.0 * nd.half) < theta * theta * r2) {
            const double rs = r2 + eps2;
            f += (nd.charge / (rs * std::sqrt(rs))) * d;
            return;
        }
        for (int c : nd.child)
            if (c >= 0) walk(c, at, eps2, theta, f);
    }

    std::vector<Node> nodes_;
};

} // namespace vrl

#endif // VRL_NBODY_HPP
