#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "swarman/geometry.hpp"

namespace swarman {

struct AssignedPair {
    std::size_t target;
    std::size_t drone;

    friend bool operator==(const AssignedPair&, const AssignedPair&) = default;
};

/// Bijection between targets and drones, listed in target order.
struct Assignment {
    std::vector<AssignedPair> pairs;
    double total_cost = 0.0;

    /// Drone serving each target (inverse lookup is drone_to_target()).
    std::vector<std::size_t> target_to_drone() const;
    std::vector<std::size_t> drone_to_target() const;
};

/// Straight-line distance; throws ValidationError on non-finite input.
double euclidean_cost(const Vec3& p, const Vec3& q);

/// Visits targets in list order and gives each the nearest drone not yet
/// taken. Equal costs go to the lowest drone index.
Assignment greedy_assign(std::span<const Vec3> targets, std::span<const Vec3> drones);

/// Largest instance the exhaustive oracle accepts.
inline constexpr std::size_t kOptimalAssignMaxSize = 9;

/// Minimum-total-cost bijection by enumerating every permutation. Among equal
/// totals the lexicographically first drone ordering wins.
Assignment optimal_assign(std::span<const Vec3> targets, std::span<const Vec3> drones);

/// Throws ValidationError unless `a` is a bijection over n targets/drones.
void check_bijection(const Assignment& a, std::size_t n);

}  // namespace swarman
