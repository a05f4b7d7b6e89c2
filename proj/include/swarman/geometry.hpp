#pragma once

#include <Eigen/Core>

namespace swarman {

using Vec3 = Eigen::Vector3d;

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace swarman
