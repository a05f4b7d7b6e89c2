#include "swarman/swarm_sim.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <string>

#include "swarman/errors.hpp"

namespace swarman {

void SimConfig::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(dt) || dt > 0.1) throw ValidationError("sim.dt must be in (0, 0.1]");
    if (!positive(v_max)) throw ValidationError("sim.v_max must be > 0");
    if (!positive(force_to_velocity_gain)) throw ValidationError("sim.force_to_velocity_gain must be > 0");
    if (!positive(collision_radius)) throw ValidationError("sim.collision_radius must be > 0");
    if (!positive(convergence_radius)) throw ValidationError("sim.convergence_radius must be > 0");
    if (!positive(max_duration)) throw ValidationError("sim.max_duration must be > 0");
}

SwarmState step(const SwarmState& state, const FormationTargets& targets,
                const Assignment& assignment, const ApfParams& apf, const SimConfig& cfg) {
    const std::size_t n = state.drones.size();
    if (assignment.pairs.size() != n) throw ValidationError("assignment size does not match swarm");
    const auto target_of = assignment.drone_to_target();

    std::vector<Vec3> positions(n);
    for (std::size_t i = 0; i < n; ++i) positions[i] = state.drones[i].position;

    SwarmState next = state;
    next.t = state.t + cfg.dt;
    for (std::size_t i = 0; i < n; ++i) {
        if (target_of[i] >= kLandmarkCount) throw ValidationError("assignment target out of range");
        const ForceVector f = total_force(i, positions, targets.points[target_of[i]], apf);
        if (!f.allFinite()) {
            throw SimulationError("non-finite force on drone " + std::to_string(i) + " at t=" +
                                  std::to_string(state.t));
        }
        Vec3 v = cfg.force_to_velocity_gain * f;
        const double speed = v.norm();
        if (speed > cfg.v_max) v *= cfg.v_max / speed;
        next.drones[i].velocity = v;
        next.drones[i].position = positions[i] + v * cfg.dt;
        if (!next.drones[i].position.allFinite()) {
            throw SimulationError("non-finite position on drone " + std::to_string(i));
        }
    }
    return next;
}

SwarmState set_swarm_color(SwarmState state, Emotion emotion) {
    const Rgb c = emotion_color(emotion);
    for (auto& d : state.drones) d.color = c;
    return state;
}

SwarmState set_swarm_color(SwarmState state, std::string_view label) {
    return set_swarm_color(std::move(state), emotion_from_name(label));
}

SwarmState initial_state(double t, std::span<const Vec3> positions, const Assignment& assignment) {
    check_bijection(assignment, positions.size());
    const auto target_of = assignment.drone_to_target();
    SwarmState s;
    s.t = t;
    s.drones.resize(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        s.drones[i].position = positions[i];
        s.drones[i].role = kAllLandmarks.at(target_of[i]);
    }
    return s;
}

ScenarioResult run_scenario(std::span<const LandmarkFrame> stream, const SkeletonConfig& skeleton,
                            const SimConfig& cfg, const ApfParams& apf,
                            std::span<const Vec3> initial_positions,
                            std::span<const ColorEvent> colors) {
    if (stream.empty()) throw ValidationError("landmark stream is empty");
    if (initial_positions.size() != kLandmarkCount) {
        throw ValidationError("expected " + std::to_string(kLandmarkCount) + " initial positions, got " +
                              std::to_string(initial_positions.size()));
    }
    for (const Vec3& p : initial_positions) {
        if (!p.allFinite()) throw ValidationError("non-finite initial position");
    }
    cfg.validate();
    apf.validate();

    struct Timed {
        double t;
        FormationTargets targets;
    };
    std::vector<Timed> formations;
    std::size_t skipped = 0;
    for (std::size_t k = 0; k < stream.size(); ++k) {
        try {
            formations.push_back(
                {stream[k].t, build_formation(stream[k], skeleton.tree, skeleton.head_anchor, skeleton.axis_map)});
        } catch (const ValidationError& e) {
            ++skipped;
            std::cerr << "warning: skipping landmark frame " << k << " (t=" << stream[k].t
                      << "): " << e.what() << '\n';
        }
    }
    if (formations.empty()) throw ValidationError("no usable frame in landmark stream");

    std::vector<ColorEvent> schedule(colors.begin(), colors.end());
    std::stable_sort(schedule.begin(), schedule.end(),
                     [](const ColorEvent& a, const ColorEvent& b) { return a.t < b.t; });

    const std::vector<Vec3> first_targets(formations.front().targets.points.begin(),
                                          formations.front().targets.points.end());
    ScenarioResult result;
    TrajectoryLog& log = result.log;
    log.assignment = greedy_assign(first_targets, initial_positions);
    const auto target_of = log.assignment.drone_to_target();

    const double t0 = stream.front().t;
    const auto steps = static_cast<std::size_t>(std::llround(cfg.max_duration / cfg.dt));
    std::size_t frame_idx = 0;
    std::size_t color_idx = 0;
    std::optional<Emotion> current_color;

    auto advance_schedule = [&](double t) {
        while (frame_idx + 1 < formations.size() && formations[frame_idx + 1].t <= t) ++frame_idx;
        while (color_idx < schedule.size() && schedule[color_idx].t <= t) {
            current_color = schedule[color_idx].emotion;
            ++color_idx;
        }
    };
    auto record = [&](SwarmState s) {
        if (current_color) s = set_swarm_color(std::move(s), *current_color);
        std::vector<Vec3> tg(s.drones.size());
        for (std::size_t i = 0; i < tg.size(); ++i) tg[i] = formations[frame_idx].targets.points[target_of[i]];
        log.drone_targets.push_back(std::move(tg));
        log.states.push_back(std::move(s));
    };

    log.states.reserve(steps + 1);
    log.drone_targets.reserve(steps + 1);
    advance_schedule(t0);
    record(initial_state(t0, initial_positions, log.assignment));
    for (std::size_t k = 1; k <= steps; ++k) {
        SwarmState next = step(log.states.back(), formations[frame_idx].targets, log.assignment, apf, cfg);
        next.t = t0 + static_cast<double>(k) * cfg.dt;
        advance_schedule(next.t);
        record(std::move(next));
    }

    result.metrics = compute_metrics(log, cfg);
    result.metrics.skipped_frames = skipped;
    return result;
}

RunMetrics compute_metrics(const TrajectoryLog& log, const SimConfig& cfg) {
    RunMetrics m;
    if (log.states.empty()) return m;
    const std::size_t n = log.states.front().drones.size();
    m.min_pairwise_distance = std::numeric_limits<double>::infinity();
    m.tracking_rms.assign(n, 0.0);

    std::optional<std::size_t> settled_from;
    for (std::size_t k = 0; k < log.states.size(); ++k) {
        const auto& drones = log.states[k].drones;
        bool all_in = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double err = (drones[i].position - log.drone_targets[k][i]).norm();
            m.tracking_rms[i] += err * err;
            if (!(err <= cfg.convergence_radius)) all_in = false;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = (drones[i].position - drones[j].position).norm();
                m.min_pairwise_distance = std::min(m.min_pairwise_distance, d);
                if (d < cfg.collision_radius) ++m.collision_count;
            }
        }
        if (!all_in) {
            settled_from.reset();
        } else if (!settled_from) {
            settled_from = k;
        }
    }
    for (double& r : m.tracking_rms) r = std::sqrt(r / static_cast<double>(log.states.size()));
    if (n < 2) m.min_pairwise_distance = 0.0;
    if (settled_from) m.time_to_converge = log.states[*settled_from].t - log.states.front().t;
    return m;
}

std::vector<Vec3> grid_positions(const Vec3& center, double column_spacing, double row_spacing) {
    std::vector<Vec3> out;
    out.reserve(9);
    for (int row = -1; row <= 1; ++row) {
        for (int col = -1; col <= 1; ++col) {
            out.push_back(center + Vec3(0.0, col * column_spacing, -row * row_spacing));
        }
    }
    return out;
}

std::vector<Vec3> random_takeoff_grid(const FormationTargets& formation, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : formation.points) centroid += p;
    centroid /= static_cast<double>(formation.points.size());

    const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
    const double jitter_y = 0.2 * (unit(rng) - 0.5);
    const double jitter_z = 0.2 * (unit(rng) - 0.5);
    const double column_spacing = 0.7 + 0.2 * unit(rng);
    const double row_spacing = 0.3 + 0.15 * unit(rng);
    return grid_positions(centroid + Vec3(2.0 * side, jitter_y, jitter_z), column_spacing, row_spacing);
}

}  // namespace swarman
