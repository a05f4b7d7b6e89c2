#pragma once

// Kinematic point-drone swarm driven by APF steering toward formation targets.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "swarman/apf_nav.hpp"
#include "swarman/assignment.hpp"
#include "swarman/emotion.hpp"
#include "swarman/geometry.hpp"
#include "swarman/pose_model.hpp"

namespace swarman {

struct DroneState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Rgb color = emotion_color(Emotion::Neutral);
    Landmark role = Landmark::Head;
};

struct SwarmState {
    double t = 0.0;
    std::vector<DroneState> drones;
};

struct SimConfig {
    double dt = 0.02;
    double v_max = 1.0;
    double force_to_velocity_gain = 2.0;
    double collision_radius = 0.1;
    double convergence_radius = 0.05;
    double max_duration = 10.0;

    void validate() const;
};

struct RunMetrics {
    double min_pairwise_distance = 0.0;
    /// Time from the first logged state after which every drone stays within
    /// convergence_radius of its target for the rest of the run.
    std::optional<double> time_to_converge;
    std::vector<double> tracking_rms;  // per drone, meters
    std::size_t collision_count = 0;   // (state, pair) samples closer than collision_radius
    std::size_t skipped_frames = 0;    // stream frames rejected during replay
};

/// Scheduled light-ring change: applies from time `t` on.
struct ColorEvent {
    double t = 0.0;
    Emotion emotion = Emotion::Neutral;
};

struct TrajectoryLog {
    std::vector<SwarmState> states;
    /// Target of each drone at each logged state, parallel to `states`.
    std::vector<std::vector<Vec3>> drone_targets;
    Assignment assignment;
};

struct ScenarioResult {
    TrajectoryLog log;
    RunMetrics metrics;
};

/// Advances one explicit-Euler step: commanded velocity is gain * total_force,
/// scaled down to v_max if faster. Colors and roles carry over.
/// Throws SimulationError if a force or position becomes non-finite.
SwarmState step(const SwarmState& state, const FormationTargets& targets,
                const Assignment& assignment, const ApfParams& apf, const SimConfig& cfg);

SwarmState set_swarm_color(SwarmState state, Emotion emotion);
SwarmState set_swarm_color(SwarmState state, std::string_view label);

/// Spawns drones at `positions` with roles from the assignment and zero velocity.
SwarmState initial_state(double t, std::span<const Vec3> positions, const Assignment& assignment);

/// Replays a landmark stream: formation per frame (frames that fail to build
/// are skipped with a warning on stderr), one assignment against the first
/// usable formation, zero-order hold of targets between frame times, and
/// max_duration / dt steps from the first frame time.
ScenarioResult run_scenario(std::span<const LandmarkFrame> stream, const SkeletonConfig& skeleton,
                            const SimConfig& cfg, const ApfParams& apf,
                            std::span<const Vec3> initial_positions,
                            std::span<const ColorEvent> colors = {});

/// Recomputes metrics from a log; run_scenario uses this too.
RunMetrics compute_metrics(const TrajectoryLog& log, const SimConfig& cfg);

/// 3x3 grid in a plane of constant world x, centered on `center`; columns
/// spread along y, rows along z.
std::vector<Vec3> grid_positions(const Vec3& center, double column_spacing, double row_spacing);

/// Seeded takeoff grid facing the formation: 2 m standoff along world x on a
/// random side of the formation centroid, +/-0.1 m center jitter in y and z,
/// column spacing U(0.7, 0.9) m and row spacing U(0.3, 0.45) m.
std::vector<Vec3> random_takeoff_grid(const FormationTargets& formation, std::uint64_t seed);

}  // namespace swarman
