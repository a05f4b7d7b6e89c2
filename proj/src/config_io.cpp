#include "swarman/config_io.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include "swarman/errors.hpp"
#include "swarman/format.hpp"

namespace swarman {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    if (!j.is_object()) throw SchemaError(std::string(where) + " must be a JSON object");
    const std::set<std::string> ok(known.begin(), known.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) throw SchemaError(std::string("unknown key \"") + key + "\" in " + where);
    }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
        throw SchemaError("expected a 3-number array, got " + j.dump());
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::vector<Vec3> positions_from_json(const json& j) {
    if (!j.is_array()) throw SchemaError("expected an array of positions");
    std::vector<Vec3> out;
    for (const auto& p : j) out.push_back(vec3_from_json(p));
    return out;
}

SkeletonConfig skeleton_config_from_json(const json& j) {
    reject_unknown(j, {"lengths", "axis_map", "head_anchor"}, "skeleton config");
    SkeletonConfig cfg;
    if (j.contains("lengths")) {
        auto lengths = cfg.tree.lengths();
        const json& lj = j.at("lengths");
        if (!lj.is_object()) throw SchemaError("\"lengths\" must be an object");
        for (const auto& [name, v] : lj.items()) {
            const auto l = landmark_from_name(name);
            if (!l || *l == Landmark::Head) throw SchemaError("no segment ends at \"" + name + "\"");
            if (!v.is_number()) throw SchemaError("length for \"" + name + "\" must be a number");
            lengths[index_of(*l)] = v.get<double>();
        }
        cfg.tree = SkeletonTree(cfg.tree.edges(), lengths);
    }
    if (j.contains("axis_map")) {
        const json& a = j.at("axis_map");
        reject_unknown(a, {"world_x", "world_y", "world_z"}, "axis_map");
        auto s = cfg.axis_map.to_strings();
        read_if(a, "world_x", s[0]);
        read_if(a, "world_y", s[1]);
        read_if(a, "world_z", s[2]);
        cfg.axis_map = AxisMap::parse(s);
    }
    if (j.contains("head_anchor")) cfg.head_anchor = vec3_from_json(j.at("head_anchor"));
    if (!cfg.head_anchor.allFinite()) throw ValidationError("head_anchor must be finite");
    return cfg;
}

json to_json(const SkeletonConfig& cfg) {
    json lengths = json::object();
    for (const Edge& e : cfg.tree.edges()) lengths[std::string(landmark_name(e.child))] = cfg.tree.length(e.child);
    const auto axes = cfg.axis_map.to_strings();
    return {{"lengths", lengths},
            {"axis_map", {{"world_x", axes[0]}, {"world_y", axes[1]}, {"world_z", axes[2]}}},
            {"head_anchor", vec3_to_json(cfg.head_anchor)}};
}

ApfParams apf_params_from_json(const json& j) {
    reject_unknown(j, {"xi", "eta", "r0", "rho_min"}, "apf");
    ApfParams p;
    read_if(j, "xi", p.xi);
    read_if(j, "eta", p.eta);
    read_if(j, "rho_min", p.rho_min);
    if (j.contains("r0")) p.r0 = vec3_from_json(j.at("r0"));
    p.validate();
    return p;
}

json to_json(const ApfParams& p) {
    return {{"xi", p.xi}, {"eta", p.eta}, {"r0", vec3_to_json(p.r0)}, {"rho_min", p.rho_min}};
}

SimConfig sim_config_from_json(const json& j) {
    reject_unknown(j,
                   {"dt", "v_max", "force_to_velocity_gain", "collision_radius", "convergence_radius",
                    "max_duration"},
                   "sim");
    SimConfig c;
    read_if(j, "dt", c.dt);
    read_if(j, "v_max", c.v_max);
    read_if(j, "force_to_velocity_gain", c.force_to_velocity_gain);
    read_if(j, "collision_radius", c.collision_radius);
    read_if(j, "convergence_radius", c.convergence_radius);
    read_if(j, "max_duration", c.max_duration);
    c.validate();
    return c;
}

json to_json(const SimConfig& c) {
    return {{"dt", c.dt},
            {"v_max", c.v_max},
            {"force_to_velocity_gain", c.force_to_velocity_gain},
            {"collision_radius", c.collision_radius},
            {"convergence_radius", c.convergence_radius},
            {"max_duration", c.max_duration}};
}

TrainConfig train_config_from_json(const json& j) {
    reject_unknown(j,
                   {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "clip_norm",
                    "validation_split", "optimizer", "seed"},
                   "train");
    TrainConfig c;
    read_if(j, "epochs", c.epochs);
    read_if(j, "batch_size", c.batch_size);
    read_if(j, "learning_rate", c.learning_rate);
    read_if(j, "beta1", c.beta1);
    read_if(j, "beta2", c.beta2);
    read_if(j, "epsilon", c.epsilon);
    read_if(j, "clip_norm", c.clip_norm);
    read_if(j, "validation_split", c.validation_split);
    read_if(j, "seed", c.seed);
    if (j.contains("optimizer")) {
        const std::string name = j.at("optimizer").get<std::string>();
        if (name == "adam") {
            c.optimizer = Optimizer::Adam;
        } else if (name == "sgd") {
            c.optimizer = Optimizer::Sgd;
        } else {
            throw SchemaError("optimizer must be \"adam\" or \"sgd\"");
        }
    }
    c.validate();
    return c;
}

json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"clip_norm", c.clip_norm},
            {"validation_split", c.validation_split},
            {"optimizer", c.optimizer == Optimizer::Adam ? "adam" : "sgd"},
            {"seed", c.seed}};
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
    out << "t,drone_id,role,x,y,z,vx,vy,vz,r,g,b\n";
    for (const SwarmState& s : log.states) {
        const std::string t = format_double(s.t);
        for (std::size_t i = 0; i < s.drones.size(); ++i) {
            const DroneState& d = s.drones[i];
            out << t << ',' << i << ',' << landmark_name(d.role) << ',' << format_double(d.position.x()) << ','
                << format_double(d.position.y()) << ',' << format_double(d.position.z()) << ','
                << format_double(d.velocity.x()) << ',' << format_double(d.velocity.y()) << ','
                << format_double(d.velocity.z()) << ',' << int{d.color.r} << ',' << int{d.color.g} << ','
                << int{d.color.b} << '\n';
        }
    }
}

json to_json(const RunMetrics& m) {
    return {{"min_pairwise_distance", m.min_pairwise_distance},
            {"time_to_converge", m.time_to_converge ? json(*m.time_to_converge) : json(nullptr)},
            {"tracking_rms", m.tracking_rms},
            {"collision_count", m.collision_count},
            {"skipped_frames", m.skipped_frames}};
}

}  // namespace swarman
