#include <cmath>
#include <random>

#include "apf_oracle.hpp"
#include "doctest.h"
#include "swarman/apf_nav.hpp"
#include "swarman/errors.hpp"

using namespace swarman;

namespace {

ApfParams isotropic(double r) {
    ApfParams p;
    p.r0 = Vec3(r, r, r);
    return p;
}

}  // namespace

TEST_CASE("attraction_potential") {
    ApfParams p;
    CHECK(attraction_potential(Vec3(1, 2, 3), Vec3(1, 2, 3), p) == 0.0);
    CHECK(attraction_potential(Vec3(1, 0, 0), Vec3::Zero(), p) == 1.0);
    p.xi = 2.0;
    CHECK(attraction_potential(Vec3(1, 2, 2), Vec3::Zero(), p) == doctest::Approx(2.0 * 9.0).epsilon(1e-15));
}

TEST_CASE("repulsion_potential") {
    ApfParams p = isotropic(0.2);
    p.eta = 0.05;
    CHECK(repulsion_potential(p.effective_radius(), p) == 0.0);
    CHECK(repulsion_potential(0.2, p) < 1e-30);
    CHECK(repulsion_potential(0.25, p) == 0.0);
    const double oracle = 0.5 * 0.05 * (1.0 / 0.1 - 1.0 / 0.2) * (1.0 / 0.1 - 1.0 / 0.2);
    CHECK(repulsion_potential(0.1, p) == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(repulsion_potential(0.1, p) == doctest::Approx(0.625).epsilon(1e-12));

    // Continuous at the boundary.
    const ApfParams def;
    CHECK(std::abs(repulsion_potential(def.effective_radius() * (1.0 - 1e-6), def)) < 1e-9);

    // Clamped below rho_min.
    CHECK(repulsion_potential(0.0, p) == repulsion_potential(p.rho_min, p));
    CHECK(std::isfinite(repulsion_potential(0.0, p)));
}

TEST_CASE("scaled_distance") {
    const ApfParams def;
    CHECK(scaled_distance(Vec3(1, 1, 1), Vec3(1, 1, 1), def) == 0.0);
    CHECK(scaled_distance(Vec3::Zero(), Vec3(1, 2, 3), isotropic(0.2)) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(scaled_distance(Vec3::Zero(), Vec3(1, 2, 3), isotropic(0.7)) == doctest::Approx(6.0).epsilon(1e-14));

    // The z axis reaches twice as far as x and y.
    const double along_z = scaled_distance(Vec3::Zero(), Vec3(0, 0, 0.4), def);
    const double along_x = scaled_distance(Vec3::Zero(), Vec3(0.2, 0, 0), def);
    CHECK(along_z == doctest::Approx(def.effective_radius()).epsilon(1e-15));
    CHECK(along_x == doctest::Approx(def.effective_radius()).epsilon(1e-15));
    CHECK(within_influence(Vec3::Zero(), Vec3(0, 0, 0.4), def));
    CHECK(within_influence(Vec3::Zero(), Vec3(0.2, 0, 0), def));
    CHECK_FALSE(within_influence(Vec3::Zero(), Vec3(0, 0, 0.41), def));
    CHECK_FALSE(within_influence(Vec3::Zero(), Vec3(0.21, 0, 0), def));

    // Monotone in each |component|.
    CHECK(scaled_distance(Vec3::Zero(), Vec3(0.1, -0.2, 0.05), def) <
          scaled_distance(Vec3::Zero(), Vec3(0.1, -0.25, 0.05), def));
}

TEST_CASE("total_force examples") {
    ApfParams p;
    const std::vector<Vec3> lone{Vec3(1, 0, 0)};
    CHECK(total_force(0, std::vector<Vec3>{Vec3(3, 2, 1)}, Vec3(3, 2, 1), p) == Vec3::Zero());
    CHECK(total_force(0, lone, Vec3::Zero(), p) == Vec3(-2, 0, 0));

    // Mirror-symmetric pair inside each other's influence region.
    const std::vector<Vec3> pair{Vec3(-0.05, 0.02, 1.0), Vec3(0.05, -0.02, 1.0)};
    const Vec3 target(0.0, 0.0, 1.0);
    const Vec3 f0 = total_force(0, pair, target, p);
    const Vec3 f1 = total_force(1, pair, target, p);
    CHECK(within_influence(pair[0], pair[1], p));
    CHECK((f0 + f1).norm() < 1e-12);
    const Vec3 r01 = repulsion_force(pair[0], pair[1], p);
    CHECK(r01.x() < 0.0);  // pushed away from the neighbor
    CHECK(r01 == -repulsion_force(pair[1], pair[0], p));
}

TEST_CASE("total_force matches finite differences of U_sum") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> cluster(-0.15, 0.15);
    std::uniform_real_distribution<double> wide(-1.0, 1.0);
    const ApfParams params;
    int checked = 0, with_repulsion = 0;
    while (checked < 100) {
        std::vector<Vec3> pos(5);
        for (auto& q : pos) q = Vec3(cluster(rng), cluster(rng), 2.0 * cluster(rng));
        const Vec3 target(wide(rng), wide(rng), wide(rng));
        if (!testing::smooth_at(0, pos, params, 1e-4)) continue;
        const Vec3 analytic = total_force(0, pos, target, params);
        const Vec3 numeric = testing::numeric_force(0, pos, target, params, 1e-7);
        const double rel = (analytic - numeric).norm() / std::max(analytic.norm(), numeric.norm());
        CHECK(rel < 1e-5);
        bool any = false;
        for (std::size_t j = 1; j < pos.size(); ++j) any = any || within_influence(pos[0], pos[j], params);
        with_repulsion += any ? 1 : 0;
        ++checked;
    }
    CHECK(with_repulsion > 50);
}

TEST_CASE("pairwise repulsion is antisymmetric") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    const ApfParams params;
    for (int i = 0; i < 500; ++i) {
        const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
        const Vec3 fab = repulsion_force(a, b, params);
        const Vec3 fba = repulsion_force(b, a, params);
        CHECK((fab + fba).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("drones outside the influence region contribute nothing") {
    const ApfParams params;
    std::vector<Vec3> pos{Vec3(0, 0, 1), Vec3(0.05, 0.05, 1.0), Vec3(0, -0.1, 1.1)};
    const Vec3 target(0.3, 0.1, 1.2);
    const Vec3 before = total_force(0, pos, target, params);
    pos.push_back(Vec3(0.15, 0.0, 1.25));  // normalized Manhattan 1.375
    CHECK_FALSE(within_influence(pos[0], pos.back(), params));
    CHECK(repulsion_force(pos[0], pos.back(), params) == Vec3::Zero());
    CHECK(total_force(0, pos, target, params) == before);
}

TEST_CASE("clamped repulsion stays finite") {
    const ApfParams params;
    const std::vector<Vec3> pos{Vec3(0, 0, 0), Vec3(1e-4, -1e-4, 0.0), Vec3(0, 0, 0)};
    const Vec3 f = total_force(0, pos, Vec3(1, 0, 0), params);
    CHECK(f.allFinite());
    CHECK(repulsion_force(pos[0], pos[2], params) == Vec3::Zero());
}

TEST_CASE("ApfParams validation") {
    ApfParams p;
    CHECK_NOTHROW(p.validate());
    p.xi = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = ApfParams{};
    p.eta = -1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = ApfParams{};
    p.r0 = Vec3(0.2, 0.0, 0.4);
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = ApfParams{};
    p.rho_min = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}
