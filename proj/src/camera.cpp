// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/camera.hpp"

#include "occsplat/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace occsplat {

void
Camera::validate() const {
    if (width < 1 || height < 1) {
        throw ArgumentError("camera '" + id + "': image dimensions must be >= 1");
    }
    if (!(near >= 0.0) || !(far > near)) {
        throw ArgumentError("camera '" + id + "': need 0 <= near < far");
    }
    const Eigen::Matrix3d r = rotation();
    if (!(r * r.transpose()).isApprox(Eigen::Matrix3d::Identity(), 1e-6) ||
        std::abs(r.determinant() - 1.0) > 1e-6) {
        throw ArgumentError("camera '" + id + "': extrinsic rotation block is not a rotation");
    }
    const Eigen::RowVector4d last(0, 0, 0, 1);
    if (extrinsics.row(3) != last) {
        throw ArgumentError("camera '" + id + "': extrinsics last row must be (0, 0, 0, 1)");
    }
    if (!intrinsics.allFinite() || intrinsics(0, 0) <= 0.0 || intrinsics(1, 1) <= 0.0) {
        throw ArgumentError("camera '" + id + "': intrinsics need positive focal/scale terms");
    }
}

bool
Camera::operator==(const Camera &o) const {
    return id == o.id && kind == o.kind && intrinsics == o.intrinsics && extrinsics == o.extrinsics &&
           width == o.width && height == o.height && near == o.near && far == o.far;
}

ProjectedPoint
project_point(const Camera &cam, const Eigen::Vector3d &world) {
    const Eigen::Vector3d p = cam.to_camera(world);
    const auto &k = cam.intrinsics;
    ProjectedPoint out;
    out.depth = p.z();
    if (cam.kind == Projection::pinhole) {
        if (p.z() <= cam.near || p.z() <= 0.0) {
            return out;
        }
        out.pixel = {k(0, 0) * p.x() / p.z() + k(0, 2), k(1, 1) * p.y() / p.z() + k(1, 2)};
    } else {
        out.pixel = {k(0, 0) * p.x() + k(0, 2), k(1, 1) * p.y() + k(1, 2)};
    }
    out.projectable = true;
    return out;
}

Eigen::Matrix4d
make_extrinsics(const Eigen::Matrix3d &world_to_cam, const Eigen::Vector3d &center) {
    Eigen::Matrix4d w = Eigen::Matrix4d::Identity();
    w.topLeftCorner<3, 3>() = world_to_cam;
    w.topRightCorner<3, 1>() = -world_to_cam * center;
    return w;
}

Eigen::Matrix3d
look_rotation(const Eigen::Vector3d &forward) {
    const Eigen::Vector3d f = forward.normalized();
    Eigen::Vector3d right = f.cross(Eigen::Vector3d::UnitZ());
    if (right.norm() < 1e-9) {
        // Looking straight up or down: keep world +x as image right.
        right = f.z() < 0.0 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d(-1.0, 0.0, 0.0);
        right = (right - right.dot(f) * f).normalized();
    } else {
        right.normalize();
    }
    const Eigen::Vector3d down = f.cross(right);
    Eigen::Matrix3d r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = f.transpose();
    return r;
}

Camera
make_pinhole_camera(std::string id, int width, int height, double fov_x,
                    const Eigen::Matrix3d &world_to_cam, const Eigen::Vector3d &center, double near,
                    double far) {
    Camera cam;
    cam.id = std::move(id);
    cam.kind = Projection::pinhole;
    cam.width = width;
    cam.height = height;
    const double f = 0.5 * width / std::tan(0.5 * fov_x);
    cam.intrinsics << f, 0.0, 0.5 * width, 0.0, f, 0.5 * height, 0.0, 0.0, 1.0;
    cam.extrinsics = make_extrinsics(world_to_cam, center);
    cam.near = near;
    cam.far = far;
    cam.validate();
    return cam;
}

double
default_far(const GridGeometry &geometry, const Eigen::Vector3d &from) {
    const Eigen::Vector3d lo = geometry.min_corner();
    const Eigen::Vector3d hi = geometry.max_corner();
    double far = geometry.extent().norm();
    for (int c = 0; c < 8; ++c) {
        const Eigen::Vector3d corner((c & 1) ? hi.x() : lo.x(), (c & 2) ? hi.y() : lo.y(),
                                     (c & 4) ? hi.z() : lo.z());
        far = std::max(far, (corner - from).norm());
    }
    return far;
}

Camera
make_bev_camera(const GridGeometry &geometry, double pixels_per_meter) {
    if (!(pixels_per_meter > 0.0) || !std::isfinite(pixels_per_meter)) {
        throw ArgumentError("BeV pixels_per_meter must be positive");
    }
    geometry.validate();
    const Eigen::Vector3d lo = geometry.min_corner();
    const Eigen::Vector3d ext = geometry.extent();
    const double margin = geometry.voxel_size;

    Camera cam;
    cam.id = "bev";
    cam.kind = Projection::orthographic;
    cam.width = std::max(1, static_cast<int>(std::lround(ext.x() * pixels_per_meter)));
    cam.height = std::max(1, static_cast<int>(std::lround(ext.y() * pixels_per_meter)));
    cam.intrinsics << pixels_per_meter, 0.0, 0.5 * cam.width, 0.0, pixels_per_meter,
        0.5 * cam.height, 0.0, 0.0, 1.0;
    Eigen::Matrix3d down;
    down << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    const Eigen::Vector3d center(lo.x() + 0.5 * ext.x(), lo.y() + 0.5 * ext.y(),
                                 lo.z() + ext.z() + margin);
    cam.extrinsics = make_extrinsics(down, center);
    cam.near = 0.0;
    cam.far = ext.z() + 2.0 * margin;
    return cam;
}

std::vector<Camera>
surround_rig(const GridGeometry &geometry, const RigOptions &options) {
    if (options.count < 1) {
        throw ArgumentError("rig needs at least one camera");
    }
    const Eigen::Vector3d lo = geometry.min_corner();
    const Eigen::Vector3d ext = geometry.extent();
    const double z = std::isnan(options.z) ? lo.z() + 0.5 * ext.z() : options.z;
    std::vector<Camera> rig;
    for (int k = 0; k < options.count; ++k) {
        const double yaw = 2.0 * M_PI * k / options.count;
        const Eigen::Vector3d dir(std::cos(yaw), std::sin(yaw), 0.0);
        const Eigen::Vector3d center = Eigen::Vector3d(lo.x() + 0.5 * ext.x(), lo.y() + 0.5 * ext.y(), z) +
                                       options.radius * dir;
        const Eigen::Vector3d forward = options.inward ? Eigen::Vector3d(-dir) : dir;
        rig.push_back(make_pinhole_camera("sensor" + std::to_string(k), options.width, options.height,
                                          options.fov_x, look_rotation(forward), center, options.near,
                                          default_far(geometry, center)));
    }
    return rig;
}

nlohmann::json
camera_to_json(const Camera &cam) {
    nlohmann::json j;
    j["id"] = cam.id;
    j["kind"] = cam.kind == Projection::pinhole ? "pinhole" : "orthographic";
    j["width"] = cam.width;
    j["height"] = cam.height;
    std::vector<double> k, w;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            k.push_back(cam.intrinsics(r, c));
        }
    }
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            w.push_back(cam.extrinsics(r, c));
        }
    }
    j["K"] = k;
    j["W"] = w;
    j["near"] = cam.near;
    j["far"] = cam.far;
    return j;
}

Camera
camera_from_json(const nlohmann::json &j) {
    try {
        Camera cam;
        cam.id = j.value("id", std::string("cam"));
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "pinhole") {
            cam.kind = Projection::pinhole;
        } else if (kind == "orthographic") {
            cam.kind = Projection::orthographic;
        } else {
            throw ArgumentError("unknown camera kind \"" + kind + "\"");
        }
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        const auto k = j.at("K").get<std::vector<double>>();
        const auto w = j.at("W").get<std::vector<double>>();
        if (k.size() != 9 || w.size() != 16) {
            throw ArgumentError("camera K needs 9 values and W needs 16 (row-major)");
        }
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                cam.intrinsics(r, c) = k[static_cast<std::size_t>(r * 3 + c)];
            }
        }
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                cam.extrinsics(r, c) = w[static_cast<std::size_t>(r * 4 + c)];
            }
        }
        cam.near = j.at("near").get<double>();
        cam.far = j.at("far").get<double>();
        cam.validate();
        return cam;
    } catch (const nlohmann::json::exception &e) {
        throw ArgumentError(std::string("malformed camera JSON: ") + e.what());
    }
}

nlohmann::json
cameras_to_json(const std::vector<Camera> &cams) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &c : cams) {
        arr.push_back(camera_to_json(c));
    }
    return {{"cameras", arr}};
}

std::vector<Camera>
cameras_from_json(const nlohmann::json &j) {
    const nlohmann::json &arr = j.is_object() && j.contains("cameras") ? j.at("cameras") : j;
    if (!arr.is_array()) {
        throw ArgumentError("camera JSON must be an array or contain a \"cameras\" array");
    }
    std::vector<Camera> cams;
    for (const auto &c : arr) {
        cams.push_back(camera_from_json(c));
    }
    return cams;
}

std::vector<Camera>
load_cameras(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw ArgumentError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return cameras_from_json(j);
}

void
save_cameras(const std::vector<Camera> &cams, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << cameras_to_json(cams).dump(2) << '\n';
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

} // namespace occsplat
