// Compactly supported C^2 phase-space profiles: products of polynomial bumps
// (1 - |x|^2/a^2)_+^3 in position and momentum. Closed-form normalization and
// moments keep sampling and test oracles exact.
#ifndef VRL_PROFILE_HPP
#define VRL_PROFILE_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vrl/core.hpp"

namespace vrl {

enum class Species : int { positive = +1, negative = -1, neutral = 0 };

// Charge sign used when depositing rho = f+ - f-. Neutral (gravity) matter
// deposits with +1.
inline double charge_sign(Species s) { return s == Species::negative ? -1.0 : 1.0; }

struct ProfileSpec {
    Species species = Species::neutral;
    Vec3 center{};                 // spatial center
    Vec3 scale_radii{1.0, 1.0, 1.0}; // ellipsoid semi-axes of the x-bump
    double momentum_radius = 1.0;  // P0
    double total_weight = 1.0;     // total |charge| or mass, > 0
    Vec3 mean_momentum{};          // bulk drift added to every sample
};

// f(x,p) = A * (1 - |(x-c)/a|^2)_+^3 * (1 - |p-pbar|^2/P0^2)_+^3
class PhaseSpaceProfile {
  public:
    explicit PhaseSpaceProfile(const ProfileSpec& s) : spec_(s) {
        if (s.scale_radii.x <= 0.0 || s.scale_radii.y <= 0.0 || s.scale_radii.z <= 0.0)
            throw std::invalid_argument("profile: scale radii must be positive");
        if (s.momentum_radius <= 0.0)
            throw std::invalid_argument("profile: momentum radius must be positive");
        if (s.total_weight <= 0.0)
            throw std::invalid_argument("profile: total weight must be positive "
                                        "(species sign is carried separately)");
        // int (1-|u|^2)^3 du over the unit ball = 64 pi / 315
        constexpr double ball_bump = 64.0 * std::numbers::pi / 315.0;
        const double ix = s.scale_radii.x * s.scale_radii.y * s.scale_radii.z * ball_bump;
        const double ip = cube(s.momentum_radius) * ball_bump;
        amplitude_ = s.total_weight / (ix * ip);
    }

    const ProfileSpec& spec() const { return spec_; }
    Species species() const { return spec_.species; }
    double total_weight() const { return spec_.total_weight; }

    // support radius in x (R0) and p (P0)
    double support_radius_x() const {
        return std::max({spec_.scale_radii.x, spec_.scale_radii.y, spec_.scale_radii.z});
    }
    double support_radius_p() const { return spec_.momentum_radius + norm(spec_.mean_momentum); }

    double value(const Vec3& x, const Vec3& p) const {
        const Vec3 d = x - spec_.center;
        const double sx = sq(d.x / spec_.scale_radii.x) + sq(d.y / spec_.scale_radii.y) +
                          sq(d.z / spec_.scale_radii.z);
        const double sp = norm2(p - spec_.mean_momentum) / sq(spec_.momentum_radius);
        if (sx >= 1.0 || sp >= 1.0) return 0.0;
        return amplitude_ * cube(1.0 - sx) * cube(1.0 - sp);
    }

    // Exact first and second moments of the bump.
    Vec3 mean_position() const { return spec_.center; }
    Vec3 mean_momentum() const { return spec_.mean_momentum; }
    // Var(x_i) = a_i^2 / 11 for the (1-s^2)^3 radial profile.
    Vec3 position_variance() const {
        return {sq(spec_.scale_radii.x) / 11.0, sq(spec_.scale_radii.y) / 11.0,
                sq(spec_.scale_radii.z) / 11.0};
    }
    // E|p - pbar|^2 = 3 P0^2 / 11
    double momentum_square_mean() const { return 3.0 * sq(spec_.momentum_radius) / 11.0; }

    // Total kinetic energy of the analytic profile, (1/2) W <p^2>.
    double analytic_kinetic_energy() const {
        return 0.5 * spec_.total_weight *
               (momentum_square_mean() + norm2(spec_.mean_momentum));
    }

  private:
    ProfileSpec spec_;
    double amplitude_;
};

inline PhaseSpaceProfile build_profile(const ProfileSpec& spec) { return PhaseSpaceProfile(spec); }

} // namespace vrl

#endif // VRL_PROFILE_HPP
