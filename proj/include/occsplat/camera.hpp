// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_CAMERA_HPP
#define OCCSPLAT_CAMERA_HPP

#include "occsplat/grid.hpp"

#include <Eigen/Core>

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace occsplat {

enum class Projection { pinhole, orthographic };

/// Camera space is x right, y down, z forward. `extrinsics` maps world points
/// to camera space. Pixel (i, j) covers [i, i+1) x [j, j+1) so its center sits
/// at (i + 0.5, j + 0.5).
///
/// Pinhole intrinsics are the usual fx, fy, cx, cy in pixels. Orthographic
/// intrinsics hold sx, sy in pixels per meter and the principal point, so that
/// pixel = (sx * x + cx, sy * y + cy).
struct Camera {
    std::string id;
    Projection kind = Projection::pinhole;
    Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
    Eigen::Matrix4d extrinsics = Eigen::Matrix4d::Identity();
    int width = 1;
    int height = 1;
    double near = 0.0;
    double far = 1.0; // d_range: background depth and depth-loss normalizer

    void validate() const;

    Eigen::Matrix3d
    rotation() const {
        return extrinsics.topLeftCorner<3, 3>();
    }
    Eigen::Vector3d
    translation() const {
        return extrinsics.topRightCorner<3, 1>();
    }
    /// Camera position in world space.
    Eigen::Vector3d
    center() const {
        return -rotation().transpose() * translation();
    }
    /// Optical axis in world space.
    Eigen::Vector3d
    forward() const {
        return rotation().row(2).transpose();
    }
    Eigen::Vector3d
    to_camera(const Eigen::Vector3d &world) const {
        return rotation() * world + translation();
    }

    bool operator==(const Camera &other) const;
};

struct ProjectedPoint {
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
    double depth = 0.0;
    /// False for pinhole points at or behind the near plane; pixel is then meaningless.
    bool projectable = false;
};

ProjectedPoint project_point(const Camera &cam, const Eigen::Vector3d &world);

/// World-to-camera transform for a camera at `center` with rotation `world_to_cam`.
Eigen::Matrix4d make_extrinsics(const Eigen::Matrix3d &world_to_cam, const Eigen::Vector3d &center);

/// Rotation whose optical axis is `forward`, image "down" as close to world -z as possible.
Eigen::Matrix3d look_rotation(const Eigen::Vector3d &forward);

/// Pinhole camera with square pixels and a horizontal field of view in radians.
Camera make_pinhole_camera(std::string id, int width, int height, double fov_x,
                           const Eigen::Matrix3d &world_to_cam, const Eigen::Vector3d &center,
                           double near, double far);

/// Distance to the farthest grid corner from `from`, never less than the grid diagonal.
double default_far(const GridGeometry &geometry, const Eigen::Vector3d &from);

/// Top-down orthographic camera whose image covers the grid's xy extent exactly.
Camera make_bev_camera(const GridGeometry &geometry, double pixels_per_meter);

struct RigOptions {
    int count = 6;
    int width = 64;
    int height = 48;
    double fov_x = 1.5707963267948966;
    /// Cameras sit on a circle of this radius (meters) around the grid's xy center.
    double radius = 0.0;
    /// World z of the cameras; NaN means the grid's vertical center.
    double z = std::numeric_limits<double>::quiet_NaN();
    /// Look toward the center instead of away from it.
    bool inward = false;
    double near = 0.05;
};

/// Horizontal surround rig, evenly spaced in yaw. Stands in for dataset sensor cameras.
std::vector<Camera> surround_rig(const GridGeometry &geometry, const RigOptions &options = {});

nlohmann::json camera_to_json(const Camera &cam);
Camera camera_from_json(const nlohmann::json &j);
nlohmann::json cameras_to_json(const std::vector<Camera> &cams);
/// Accepts a bare array or an object with a "cameras" array.
std::vector<Camera> cameras_from_json(const nlohmann::json &j);

std::vector<Camera> load_cameras(const std::filesystem::path &path);
void save_cameras(const std::vector<Camera> &cams, const std::filesystem::path &path);

} // namespace occsplat

#endif // OCCSPLAT_CAMERA_HPP
