// Moment deposition: weighted particles onto grids through a C^2 cubic
// B-spline kernel, plus dipole moments in particle and grid form.
#ifndef VRL_DEPOSIT_HPP
#define VRL_DEPOSIT_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vrl/ensemble.hpp"
#include "vrl/grid.hpp"

namespace vrl {

// Centered cubic B-spline M4, support [-2, 2], unit integral, C^2.
inline double bspline_m4(double u) {
    const double a = std::abs(u);
    if (a >= 2.0) return 0.0;
    if (a >= 1.0) {
        const double t = 2.0 - a;
        return t * t * t / 6.0;
    }
    return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
}

// Relativistic factor gamma = (1 + p^2/c^2)^(-1/2); c = infinity gives the
// Newtonian limit gamma = 1.
inline double lorentz_gamma(double p2, double c) {
    if (std::isinf(c)) return 1.0;
    return 1.0 / std::sqrt(1.0 + p2 / (c * c));
}

namespace detail {

// Per-axis node range and kernel weights for one particle coordinate.
struct AxisWeights {
    int first = 0;
    int count = 0;
    double wgt[8];
};

inline AxisWeights axis_weights(double q, double origin, double h, int n, double scale) {
    AxisWeights a;
    const double lo = q - 2.0 * scale;
    const double hi = q + 2.0 * scale;
    int i0 = static_cast<int>(std::ceil((lo - origin) / h));
    int i1 = static_cast<int>(std::floor((hi - origin) / h));
    if (i0 < 0 || i1 > n - 1)
        throw std::runtime_error(
            "deposition support exceeds grid extent: particle coordinate " + format_double(q) +
            " needs nodes [" + format_double(lo) + ", " + format_double(hi) + "] but the grid axis covers [" +
            format_double(origin) + ", " + format_double(origin + h * (n - 1)) + "]");
    a.first = i0;
    a.count = i1 - i0 + 1;
    if (a.count > 8)
        throw std::runtime_error("deposition bandwidth too large for the fixed kernel buffer");
    for (int i = 0; i < a.count; ++i) {
        const double xn = origin + h * (i0 + i);
        a.wgt[i] = bspline_m4((xn - q) / scale) / scale;
    }
    return a;
}

} // namespace detail

// Deposits one scalar coefficient per particle. coeff(i) supplies the signed
// weight of particle i.
template <class Coeff>
void deposit_scalar(const ParticleEnsemble& e, ScalarField& out, double bandwidth, Coeff&& coeff) {
    const UniformGrid& g = out.grid;
    if (bandwidth < g.h)
        throw std::invalid_argument("deposition bandwidth must be >= grid spacing");
    const double scale = 0.5 * bandwidth;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double cv = coeff(i);
        const auto ax = detail::axis_weights(e.x[i], g.origin.x, g.h, g.nx, scale);
        const auto ay = detail::axis_weights(e.y[i], g.origin.y, g.h, g.ny, scale);
        const auto az = detail::axis_weights(e.z[i], g.origin.z, g.h, g.nz, scale);
        for (int a = 0; a < ax.count; ++a)
            for (int b = 0; b < ay.count; ++b) {
                const double wab = cv * ax.wgt[a] * ay.wgt[b];
                double* row = &out.v[g.index(ax.first + a, ay.first + b, az.first)];
                for (int c = 0; c < az.count; ++c) row[c] += wab * az.wgt[c];
            }
    }
}

template <class Coeff>
void deposit_vector(const ParticleEnsemble& e, VectorField& out, double bandwidth, Coeff&& coeff) {
    const UniformGrid& g = out.grid;
    if (bandwidth < g.h)
        throw std::invalid_argument("deposition bandwidth must be >= grid spacing");
    const double scale = 0.5 * bandwidth;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const Vec3 cv = coeff(i);
        const auto ax = detail::axis_weights(e.x[i], g.origin.x, g.h, g.nx, scale);
        const auto ay = detail::axis_weights(e.y[i], g.origin.y, g.h, g.ny, scale);
        const auto az = detail::axis_weights(e.z[i], g.origin.z, g.h, g.nz, scale);
        for (int a = 0; a < ax.count; ++a)
            for (int b = 0; b < ay.count; ++b) {
                const double wab = ax.wgt[a] * ay.wgt[b];
                const std::size_t base = g.index(ax.first + a, ay.first + b, az.first);
                for (int c = 0; c < az.count; ++c) {
                    const double k = wab * az.wgt[c];
                    out.vx[base + c] += k * cv.x;
                    out.vy[base + c] += k * cv.y;
                    out.vz[base + c] += k * cv.z;
                }
            }
    }
}

// Charge density rho = f+ - f- (signed species weights); mass density for
// neutral matter.
inline ScalarField deposit_charge(const ParticleEnsemble& e, const UniformGrid& g,
                                  double bandwidth) {
    ScalarField f(g, MomentKind::charge);
    deposit_scalar(e, f, bandwidth, [&](std::size_t i) { return e.s[i] * e.w[i]; });
    return f;
}

// Matter density mu = integral of gamma f dp; Newtonian limit uses gamma = 1.
inline ScalarField deposit_matter(const ParticleEnsemble& e, const UniformGrid& g, double bandwidth,
                                  double c = std::numeric_limits<double>::infinity()) {
    ScalarField f(g, MomentKind::matter);
    deposit_scalar(e, f, bandwidth, [&](std::size_t i) {
        return e.w[i] * lorentz_gamma(norm2(e.mom(i)), c);
    });
    return f;
}

// Current j = integral of p_hat (f+ - f-) dp with p_hat = gamma p.
inline VectorField deposit_current(const ParticleEnsemble& e, const UniformGrid& g,
                                   double bandwidth,
                                   double c = std::numeric_limits<double>::infinity()) {
    VectorField f(g, MomentKind::current);
    deposit_vector(e, f, bandwidth, [&](std::size_t i) {
        const Vec3 p = e.mom(i);
        return (e.s[i] * e.w[i] * lorentz_gamma(norm2(p), c)) * p;
    });
    return f;
}

// Dipole moment D = sum of sign * weight * position.
inline Vec3 dipole_moment(const ParticleEnsemble& e) {
    Vec3 d{};
    for (std::size_t i = 0; i < e.size(); ++i) d += (e.s[i] * e.w[i]) * e.pos(i);
    return d;
}

// Grid form: D = integral of x rho(x) dx by the midpoint rule.
inline Vec3 dipole_moment(const ScalarField& rho) {
    if (rho.kind != MomentKind::charge)
        throw std::invalid_argument("dipole_moment: field is not a charge moment");
    Vec3 d{};
    const UniformGrid& g = rho.grid;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int k = 0; k < g.nz; ++k) d += rho.at(i, j, k) * g.node(i, j, k);
    return d * g.cell_volume();
}

} // namespace vrl

#endif // VRL_DEPOSIT_HPP
