#pragma once

#include <Eigen/Geometry>

#include "gesturekit/synthetic.hpp"

namespace gesturekit::detail {

inline Eigen::Matrix3d rotation(const Orientation& o) {
  return (Eigen::AngleAxisd(o.yaw, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(o.pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(o.roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

inline Eigen::Vector3d to_eigen(const Vec3& v) { return {v[0], v[1], v[2]}; }
inline Vec3 from_eigen(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace gesturekit::detail
