#pragma once

// JSON/CSV serialization for configs, trajectories and run metrics.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "swarman/apf_nav.hpp"
#include "swarman/gesture_lstm.hpp"
#include "swarman/pose_model.hpp"
#include "swarman/swarm_sim.hpp"

namespace swarman {

nlohmann::json read_json_file(const std::filesystem::path& path);

Vec3 vec3_from_json(const nlohmann::json& j);
nlohmann::json vec3_to_json(const Vec3& v);
std::vector<Vec3> positions_from_json(const nlohmann::json& j);

/// Fields absent from `j` keep their defaults; unknown keys are rejected.
SkeletonConfig skeleton_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SkeletonConfig& cfg);

ApfParams apf_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ApfParams& p);

SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimConfig& c);

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);

/// `t,drone_id,role,x,y,z,vx,vy,vz,r,g,b`, one row per drone per logged state.
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);

nlohmann::json to_json(const RunMetrics& m);

}  // namespace swarman
