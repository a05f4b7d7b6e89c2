#include "swarman/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "swarman/errors.hpp"

namespace swarman {

namespace {

void check_instance(std::span<const Vec3> targets, std::span<const Vec3> drones) {
    if (targets.empty() || drones.empty()) throw ValidationError("assignment needs at least one target");
    if (targets.size() != drones.size()) {
        throw ValidationError("assignment size mismatch: " + std::to_string(targets.size()) +
                              " targets vs " + std::to_string(drones.size()) + " drones");
    }
}

}  // namespace

std::vector<std::size_t> Assignment::target_to_drone() const {
    std::vector<std::size_t> out(pairs.size());
    for (const auto& p : pairs) out.at(p.target) = p.drone;
    return out;
}

std::vector<std::size_t> Assignment::drone_to_target() const {
    std::vector<std::size_t> out(pairs.size());
    for (const auto& p : pairs) out.at(p.drone) = p.target;
    return out;
}

double euclidean_cost(const Vec3& p, const Vec3& q) {
    if (!p.allFinite() || !q.allFinite()) throw ValidationError("non-finite position in cost");
    const Vec3 d = q - p;
    return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

Assignment greedy_assign(std::span<const Vec3> targets, std::span<const Vec3> drones) {
    check_instance(targets, drones);
    const std::size_t n = targets.size();
    std::vector<bool> taken(n, false);
    Assignment out;
    out.pairs.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t best = n;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t d = 0; d < n; ++d) {
            if (taken[d]) continue;
            const double c = euclidean_cost(targets[t], drones[d]);
            if (best == n || c < best_cost) {
                best = d;
                best_cost = c;
            }
        }
        taken[best] = true;
        out.pairs.push_back({t, best});
        out.total_cost += best_cost;
    }
    return out;
}

Assignment optimal_assign(std::span<const Vec3> targets, std::span<const Vec3> drones) {
    check_instance(targets, drones);
    const std::size_t n = targets.size();
    if (n > kOptimalAssignMaxSize) {
        throw ValidationError("exhaustive assignment limited to " +
                              std::to_string(kOptimalAssignMaxSize) + " drones");
    }
    std::vector<double> cost(n * n);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t d = 0; d < n; ++d) cost[t * n + d] = euclidean_cost(targets[t], drones[d]);
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    double best_total = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t t = 0; t < n; ++t) total += cost[t * n + perm[t]];
        if (total < best_total) {
            best_total = total;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    Assignment out;
    out.total_cost = best_total;
    for (std::size_t t = 0; t < n; ++t) out.pairs.push_back({t, best[t]});
    return out;
}

void check_bijection(const Assignment& a, std::size_t n) {
    if (a.pairs.size() != n) throw ValidationError("assignment has wrong number of pairs");
    std::vector<bool> seen_t(n, false), seen_d(n, false);
    for (const auto& p : a.pairs) {
        if (p.target >= n || p.drone >= n || seen_t[p.target] || seen_d[p.drone]) {
            throw ValidationError("assignment is not a bijection");
        }
        seen_t[p.target] = seen_d[p.drone] = true;
    }
}

}  // namespace swarman
