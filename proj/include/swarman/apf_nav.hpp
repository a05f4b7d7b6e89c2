#pragma once

// Artificial potential field steering: quadratic attraction to the assigned
// target plus short-range repulsion from other drones inside an anisotropic
// Manhattan influence region.

#include <cstddef>
#include <span>

#include "swarman/geometry.hpp"

namespace swarman {

struct ApfParams {
    double xi = 1.0;    // attraction scale
    double eta = 0.05;  // repulsion scale
    Vec3 r0{0.2, 0.2, 0.4};  // influence half-extent per world axis, meters
    double rho_min = 0.01;   // distance floor for the repulsion term, meters

    /// Throws ValidationError if any field is out of range.
    void validate() const;

    /// Scalar radius the normalized Manhattan distance is expressed in (mean of r0).
    double effective_radius() const { return r0.mean(); }
};

using ForceVector = Vec3;

/// xi * |drone - target|^2
double attraction_potential(const Vec3& drone, const Vec3& target, const ApfParams& params);

/// 0.5 * eta * (1/rho - 1/r_eff)^2 inside the influence region, 0 outside.
/// rho below rho_min is clamped.
double repulsion_potential(double rho, const ApfParams& params);

/// r_eff * sum_i |q_i - p_i| / r0_i. The influence boundary sits at r_eff,
/// i.e. at unit normalized Manhattan distance.
double scaled_distance(const Vec3& p, const Vec3& q, const ApfParams& params);

bool within_influence(const Vec3& p, const Vec3& q, const ApfParams& params);

/// Negative gradient of the repulsion potential between `self` and `other`,
/// taken with respect to `self`. Zero outside the influence region; inside the
/// clamp region the magnitude is held at its rho_min value.
ForceVector repulsion_force(const Vec3& self, const Vec3& other, const ApfParams& params);

/// U_sum seen by drone `index`: its attraction plus repulsion from every other drone.
double total_potential(std::size_t index, std::span<const Vec3> positions, const Vec3& target,
                       const ApfParams& params);

/// -grad U_sum with respect to the position of drone `index`.
ForceVector total_force(std::size_t index, std::span<const Vec3> positions, const Vec3& target,
                        const ApfParams& params);

}  // namespace swarman
