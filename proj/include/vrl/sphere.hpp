// Unit-sphere quadrature: Gauss-Legendre in cos(theta) times uniform azimuth.
// Exact for spherical polynomials up to degree 2*n_theta - 1, which covers
// every surface integrand used by the radiation formulas.
#ifndef VRL_SPHERE_HPP
#define VRL_SPHERE_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vrl/core.hpp"

namespace vrl {

struct SphereQuadrature {
    std::vector<Vec3> nodes;    // unit vectors
    std::vector<double> weights; // sum to 4 pi

    static SphereQuadrature gauss_legendre(int n_theta, int n_phi) {
        if (n_theta < 1 || n_phi < 1)
            throw std::invalid_argument("sphere quadrature orders must be positive");
        SphereQuadrature q;
        q.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
        q.weights.reserve(static_cast<std::size_t>(n_theta) * n_phi);
        // Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration
        std::vector<double> ct(n_theta), wt(n_theta);
        for (int i = 0; i < n_theta; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n_theta + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n_theta; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n_theta * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            ct[i] = x;
            wt[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        }
        const double wphi = 2.0 * std::numbers::pi / n_phi;
        for (int i = 0; i < n_theta; ++i) {
            const double st = std::sqrt(std::max(0.0, 1.0 - ct[i] * ct[i]));
            for (int j = 0; j < n_phi; ++j) {
                const double phi = wphi * (j + 0.5);
                q.nodes.push_back({st * std::cos(phi), st * std::sin(phi), ct[i]});
                q.weights.push_back(wt[i] * wphi);
            }
        }
        return q;
    }

    double weight_sum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

template <class F>
double sphere_integrate(F&& f, const SphereQuadrature& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(q.nodes[i]);
    return s;
}

} // namespace vrl

#endif // VRL_SPHERE_HPP
