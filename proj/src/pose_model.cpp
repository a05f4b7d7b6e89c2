#include "swarman/pose_model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "swarman/errors.hpp"
#include "swarman/format.hpp"

namespace swarman {

namespace {

constexpr std::array<std::string_view, kLandmarkCount> kNames = {
    "head", "neck", "torso", "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "l_hand", "r_hand",
};

constexpr std::array<double, kLandmarkCount> kDefaultLengths = {
    0.0,   // head (root)
    0.25,  // neck
    0.45,  // torso
    0.20,  // l_shoulder
    0.20,  // r_shoulder
    0.30,  // l_elbow (upper arm)
    0.30,  // r_elbow
    0.30,  // l_hand (forearm)
    0.30,  // r_hand
};

void check_tree(const std::array<Edge, kEdgeCount>& edges,
                const std::array<double, kLandmarkCount>& lengths) {
    std::array<bool, kLandmarkCount> reached{};
    reached[index_of(Landmark::Head)] = true;
    for (const Edge& e : edges) {
        if (!reached[index_of(e.parent)]) {
            throw ValidationError("skeleton edge " + edge_name(e) +
                                  " appears before its parent is reachable from the head");
        }
        if (reached[index_of(e.child)]) {
            throw ValidationError("skeleton edge " + edge_name(e) + " revisits a landmark");
        }
        reached[index_of(e.child)] = true;
        const double len = lengths[index_of(e.child)];
        if (!(len > 0.0) || !std::isfinite(len)) {
            throw ValidationError("segment length for " + std::string(landmark_name(e.child)) +
                                  " must be positive and finite");
        }
    }
    // 8 edges, each adding a new node, starting from the head: all 9 are covered.
}

int axis_from_char(char c) {
    switch (c) {
        case 'x': return 0;
        case 'y': return 1;
        case 'z': return 2;
        default: return -1;
    }
}

}  // namespace

std::string_view landmark_name(Landmark l) { return kNames[index_of(l)]; }

std::optional<Landmark> landmark_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        if (kNames[i] == name) return kAllLandmarks[i];
    }
    return std::nullopt;
}

std::string edge_name(const Edge& e) {
    return std::string(landmark_name(e.parent)) + "->" + std::string(landmark_name(e.child));
}

void LandmarkFrame::validate() const {
    if (!std::isfinite(t)) throw ValidationError("non-finite frame time");
    for (Landmark l : kAllLandmarks) {
        if (!(*this)[l].allFinite()) {
            throw ValidationError("non-finite coordinate for " + std::string(landmark_name(l)));
        }
    }
}

LandmarkFrame make_frame(double t, const std::map<std::string, Vec3>& named) {
    LandmarkFrame frame;
    frame.t = t;
    for (const auto& [name, _] : named) {
        if (!landmark_from_name(name)) throw SchemaError("unknown landmark \"" + name + "\"");
    }
    for (Landmark l : kAllLandmarks) {
        auto it = named.find(std::string(landmark_name(l)));
        if (it == named.end()) {
            throw SchemaError("missing landmark \"" + std::string(landmark_name(l)) + "\"");
        }
        frame[l] = it->second;
    }
    return frame;
}

SkeletonTree::SkeletonTree() : edges_(kDefaultEdges), lengths_(kDefaultLengths) {}

SkeletonTree::SkeletonTree(std::array<Edge, kEdgeCount> edges,
                           std::array<double, kLandmarkCount> lengths)
    : edges_(edges), lengths_(lengths) {
    lengths_[index_of(Landmark::Head)] = 0.0;
    check_tree(edges_, lengths_);
}

SkeletonTree SkeletonTree::with_length(Landmark child, double meters) const {
    auto lengths = lengths_;
    lengths[index_of(child)] = meters;
    return SkeletonTree(edges_, lengths);
}

AxisMap::AxisMap() : source_{2, 0, 1}, sign_{1, 1, -1} {}

AxisMap::AxisMap(std::array<int, 3> source, std::array<int, 3> sign) : source_(source), sign_(sign) {
    std::array<bool, 3> used{};
    for (int i = 0; i < 3; ++i) {
        if (source_[i] < 0 || source_[i] > 2 || used[source_[i]]) {
            throw ValidationError("axis map sources must be a permutation of x, y, z");
        }
        used[source_[i]] = true;
        if (sign_[i] != 1 && sign_[i] != -1) throw ValidationError("axis map signs must be +1 or -1");
    }
}

AxisMap AxisMap::parse(const std::array<std::string, 3>& world_from_cam) {
    std::array<int, 3> source{};
    std::array<int, 3> sign{};
    for (int i = 0; i < 3; ++i) {
        const std::string& s = world_from_cam[i];
        // "+cam_z", "-cam_y"; a bare "cam_x" is taken as positive.
        std::string_view body = s;
        sign[i] = 1;
        if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
            sign[i] = body.front() == '-' ? -1 : 1;
            body.remove_prefix(1);
        }
        if (body.size() != 5 || body.substr(0, 4) != "cam_" || axis_from_char(body[4]) < 0) {
            throw SchemaError("bad axis map entry \"" + s + "\"");
        }
        source[i] = axis_from_char(body[4]);
    }
    return AxisMap(source, sign);
}

Vec3 AxisMap::apply(const Vec3& cam) const {
    return {sign_[0] * cam[source_[0]], sign_[1] * cam[source_[1]], sign_[2] * cam[source_[2]]};
}

Eigen::Matrix3d AxisMap::matrix() const {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) m(i, source_[i]) = sign_[i];
    return m;
}

std::array<std::string, 3> AxisMap::to_strings() const {
    std::array<std::string, 3> out;
    for (int i = 0; i < 3; ++i) {
        out[i] = std::string(sign_[i] < 0 ? "-" : "+") + "cam_" + "xyz"[source_[i]];
    }
    return out;
}

LandmarkPositions to_head_frame(const LandmarkFrame& frame) {
    const Vec3 head = frame[Landmark::Head];
    LandmarkPositions rel;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) rel[i] = frame.landmarks[i] - head;
    return rel;
}

LandmarkPositions to_head_frame(const std::map<std::string, Vec3>& named) {
    return to_head_frame(make_frame(0.0, named));
}

std::array<Vec3, kEdgeCount> unit_vectors(const LandmarkPositions& head_frame,
                                          const SkeletonTree& tree) {
    std::array<Vec3, kEdgeCount> out;
    for (std::size_t k = 0; k < kEdgeCount; ++k) {
        const Edge& e = tree.edges()[k];
        const Vec3 d = head_frame[index_of(e.child)] - head_frame[index_of(e.parent)];
        const double n = d.norm();
        if (!(n > kMinSegmentNorm)) throw DegenerateSegment(edge_name(e));
        out[k] = d / n;
    }
    return out;
}

FormationTargets build_formation(const LandmarkFrame& frame, const SkeletonTree& tree,
                                 const Vec3& head_anchor, const AxisMap& axis_map) {
    frame.validate();
    const auto dirs = unit_vectors(to_head_frame(frame), tree);

    FormationTargets out;
    out.head_anchor = head_anchor;
    out.points[index_of(Landmark::Head)] = head_anchor;
    for (std::size_t k = 0; k < kEdgeCount; ++k) {
        const Edge& e = tree.edges()[k];
        out.points[index_of(e.child)] =
            axis_map.apply(dirs[k]) * tree.length(e.child) + out.points[index_of(e.parent)];
    }
    return out;
}

std::vector<LandmarkFrame> parse_landmark_stream(std::istream& in) {
    using nlohmann::json;
    std::vector<LandmarkFrame> frames;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        LandmarkFrame frame;
        try {
            const json rec = json::parse(line);
            if (!rec.is_object()) throw SchemaError("record is not an object");
            if (!rec.contains("t") || !rec["t"].is_number()) throw SchemaError("missing numeric \"t\"");
            if (!rec.contains("landmarks") || !rec["landmarks"].is_object()) {
                throw SchemaError("missing \"landmarks\" object");
            }
            std::map<std::string, Vec3> named;
            for (const auto& [name, v] : rec["landmarks"].items()) {
                if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
                    !v[2].is_number()) {
                    throw SchemaError("landmark \"" + name + "\" is not a 3-number array");
                }
                named[name] = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
            }
            frame = make_frame(rec["t"].get<double>(), named);
            frame.validate();
        } catch (const json::exception& e) {
            throw SchemaError(e.what(), lineno);
        } catch (const SchemaError& e) {
            throw SchemaError(e.what(), lineno);
        } catch (const ValidationError& e) {
            throw SchemaError(e.what(), lineno);
        }

        if (!frames.empty() && frame.t < frames.back().t) {
            throw ValidationError("line " + std::to_string(lineno) +
                                  ": timestamp decreases (" + format_double(frame.t) + " after " +
                                  format_double(frames.back().t) + ")");
        }
        frames.push_back(frame);
    }
    return frames;
}

std::vector<LandmarkFrame> load_landmark_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open landmark stream " + path.string());
    return parse_landmark_stream(in);
}

void write_landmark_stream(std::ostream& out, const std::vector<LandmarkFrame>& frames) {
    for (const LandmarkFrame& f : frames) {
        out << "{\"t\":" << format_double(f.t) << ",\"landmarks\":{";
        for (std::size_t i = 0; i < kLandmarkCount; ++i) {
            const Vec3& p = f.landmarks[i];
            out << (i ? "," : "") << '"' << kNames[i] << "\":[" << format_double(p.x()) << ','
                << format_double(p.y()) << ',' << format_double(p.z()) << ']';
        }
        out << "}}\n";
    }
}

}  // namespace swarman
