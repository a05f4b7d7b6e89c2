#pragma once

// Upper-body skeleton model: camera-frame landmarks to body-scaled world
// formation targets.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarman/geometry.hpp"

namespace swarman {

enum class Landmark : std::uint8_t {
    Head,
    Neck,
    Torso,
    LShoulder,
    RShoulder,
    LElbow,
    RElbow,
    LHand,
    RHand,
};

inline constexpr std::size_t kLandmarkCount = 9;
inline constexpr std::size_t kEdgeCount = kLandmarkCount - 1;

inline constexpr std::array<Landmark, kLandmarkCount> kAllLandmarks = {
    Landmark::Head,   Landmark::Neck,   Landmark::Torso, Landmark::LShoulder, Landmark::RShoulder,
    Landmark::LElbow, Landmark::RElbow, Landmark::LHand, Landmark::RHand,
};

constexpr std::size_t index_of(Landmark l) { return static_cast<std::size_t>(l); }

/// Wire name used in landmark streams and configs ("head", "l_shoulder", ...).
std::string_view landmark_name(Landmark l);
std::optional<Landmark> landmark_from_name(std::string_view name);

/// Per-landmark 3-vectors indexed by `index_of(Landmark)`.
using LandmarkPositions = std::array<Vec3, kLandmarkCount>;

/// One tracked frame in camera coordinates. Holding a fixed array makes the
/// "all nine landmarks present" invariant structural; finiteness is checked
/// by validate().
struct LandmarkFrame {
    double t = 0.0;
    LandmarkPositions landmarks{};

    const Vec3& operator[](Landmark l) const { return landmarks[index_of(l)]; }
    Vec3& operator[](Landmark l) { return landmarks[index_of(l)]; }

    /// Throws ValidationError on non-finite time or coordinates.
    void validate() const;
};

/// Builds a frame from a name-keyed map. Missing or unknown names raise SchemaError.
LandmarkFrame make_frame(double t, const std::map<std::string, Vec3>& named);

struct Edge {
    Landmark parent;
    Landmark child;
};

inline constexpr std::array<Edge, kEdgeCount> kDefaultEdges = {{
    {Landmark::Head, Landmark::Neck},
    {Landmark::Neck, Landmark::Torso},
    {Landmark::Neck, Landmark::LShoulder},
    {Landmark::Neck, Landmark::RShoulder},
    {Landmark::LShoulder, Landmark::LElbow},
    {Landmark::RShoulder, Landmark::RElbow},
    {Landmark::LElbow, Landmark::LHand},
    {Landmark::RElbow, Landmark::RHand},
}};

std::string edge_name(const Edge& e);

/// Parent->child vector tree rooted at the head, with the metric length of
/// the segment ending at each child.
class SkeletonTree {
public:
    /// Default roster and average adult proportions.
    SkeletonTree();

    /// Edges must be listed parents-first and span all nine landmarks from
    /// the head. `lengths` is indexed by child landmark; the head slot is ignored.
    SkeletonTree(std::array<Edge, kEdgeCount> edges, std::array<double, kLandmarkCount> lengths);

    const std::array<Edge, kEdgeCount>& edges() const { return edges_; }
    double length(Landmark child) const { return lengths_[index_of(child)]; }
    const std::array<double, kLandmarkCount>& lengths() const { return lengths_; }

    /// Copy with one segment length replaced (validated).
    SkeletonTree with_length(Landmark child, double meters) const;

private:
    std::array<Edge, kEdgeCount> edges_;
    std::array<double, kLandmarkCount> lengths_;
};

/// Signed permutation from camera axes to world axes.
class AxisMap {
public:
    /// Camera (x right, y down, z depth) -> world (x = cam z, y = cam x, z = -cam y).
    AxisMap();

    /// world[i] = sign[i] * cam[source[i]]; source must be a permutation of {0,1,2}
    /// and each sign +1 or -1.
    AxisMap(std::array<int, 3> source, std::array<int, 3> sign);

    /// Parses entries such as "+cam_z" / "-cam_y" for world x, y and z.
    static AxisMap parse(const std::array<std::string, 3>& world_from_cam);

    Vec3 apply(const Vec3& cam) const;
    Eigen::Matrix3d matrix() const;
    std::array<std::string, 3> to_strings() const;

    const std::array<int, 3>& source() const { return source_; }
    const std::array<int, 3>& sign() const { return sign_; }

private:
    std::array<int, 3> source_;
    std::array<int, 3> sign_;
};

struct FormationTargets {
    /// World targets in meters, indexed by landmark (head first, then tree order).
    LandmarkPositions points{};
    Vec3 head_anchor = Vec3::Zero();

    const Vec3& operator[](Landmark l) const { return points[index_of(l)]; }
};

/// Minimum camera-frame segment norm accepted for normalization.
inline constexpr double kMinSegmentNorm = 1e-6;

/// p' = p - h for every landmark; the head maps to zero.
LandmarkPositions to_head_frame(const LandmarkFrame& frame);
LandmarkPositions to_head_frame(const std::map<std::string, Vec3>& named);

/// Unit vector per tree edge, parent->child, in edge order.
/// Throws DegenerateSegment naming the edge if its norm is <= kMinSegmentNorm.
std::array<Vec3, kEdgeCount> unit_vectors(const LandmarkPositions& head_frame,
                                          const SkeletonTree& tree);

FormationTargets build_formation(const LandmarkFrame& frame, const SkeletonTree& tree,
                                 const Vec3& head_anchor, const AxisMap& axis_map = AxisMap{});

struct SkeletonConfig {
    SkeletonTree tree;
    AxisMap axis_map;
    Vec3 head_anchor{0.0, 0.0, 2.0};
};

/// Reads the JSONL landmark stream. Malformed records raise SchemaError with
/// the line number; decreasing timestamps raise ValidationError.
std::vector<LandmarkFrame> parse_landmark_stream(std::istream& in);
std::vector<LandmarkFrame> load_landmark_stream(const std::filesystem::path& path);

void write_landmark_stream(std::ostream& out, const std::vector<LandmarkFrame>& frames);

}  // namespace swarman
