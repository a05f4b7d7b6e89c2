#include "swarman/apf_nav.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "swarman/errors.hpp"

namespace swarman {

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

void ApfParams::validate() const {
    if (!(xi > 0.0) || !std::isfinite(xi)) throw ValidationError("apf.xi must be > 0");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("apf.eta must be >= 0");
    if (!r0.allFinite() || !(r0.minCoeff() > 0.0)) throw ValidationError("apf.r0 components must be > 0");
    if (!(rho_min > 0.0) || !std::isfinite(rho_min)) throw ValidationError("apf.rho_min must be > 0");
}

double attraction_potential(const Vec3& drone, const Vec3& target, const ApfParams& params) {
    return params.xi * (drone - target).squaredNorm();
}

double repulsion_potential(double rho, const ApfParams& params) {
    const double r_eff = params.effective_radius();
    if (rho > r_eff) return 0.0;
    const double r = std::max(rho, params.rho_min);
    const double gap = 1.0 / r - 1.0 / r_eff;
    return 0.5 * params.eta * gap * gap;
}

double scaled_distance(const Vec3& p, const Vec3& q, const ApfParams& params) {
    const Vec3 d = q - p;
    const double normalized = std::abs(d[0]) / params.r0[0] + std::abs(d[1]) / params.r0[1] +
                              std::abs(d[2]) / params.r0[2];
    return params.effective_radius() * normalized;
}

bool within_influence(const Vec3& p, const Vec3& q, const ApfParams& params) {
    return scaled_distance(p, q, params) <= params.effective_radius();
}

ForceVector repulsion_force(const Vec3& self, const Vec3& other, const ApfParams& params) {
    const double r_eff = params.effective_radius();
    const double rho = scaled_distance(self, other, params);
    if (rho > r_eff) return ForceVector::Zero();
    const double r = std::max(rho, params.rho_min);
    // -dU/drho
    const double push = params.eta * (1.0 / r - 1.0 / r_eff) / (r * r);
    const Vec3 d = self - other;
    ForceVector f;
    for (int k = 0; k < 3; ++k) f[k] = push * r_eff * sign_of(d[k]) / params.r0[k];
    return f;
}

double total_potential(std::size_t index, std::span<const Vec3> positions, const Vec3& target,
                       const ApfParams& params) {
    if (index >= positions.size()) throw std::out_of_range("drone index out of range");
    const Vec3& self = positions[index];
    double u = attraction_potential(self, target, params);
    for (std::size_t j = 0; j < positions.size(); ++j) {
        if (j == index) continue;
        u += repulsion_potential(scaled_distance(self, positions[j], params), params);
    }
    return u;
}

ForceVector total_force(std::size_t index, std::span<const Vec3> positions, const Vec3& target,
                        const ApfParams& params) {
    if (index >= positions.size()) throw std::out_of_range("drone index out of range");
    const Vec3& self = positions[index];
    ForceVector f = -2.0 * params.xi * (self - target);
    for (std::size_t j = 0; j < positions.size(); ++j) {
        if (j == index) continue;
        f += repulsion_force(self, positions[j], params);
    }
    return f;
}

}  // namespace swarman
