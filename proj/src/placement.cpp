// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/placement.hpp"

#include "occsplat/error.hpp"
#include "occsplat/random.hpp"

#include <algorithm>
#include <cmath>

namespace occsplat {

std::string
strategy_name(Strategy s) {
    switch (s) {
    case Strategy::sensor: return "sensor";
    case Strategy::elevated: return "elevated";
    case Strategy::elevated_around: return "elevated_around";
    case Strategy::fully_random: return "fully_random";
    case Strategy::dynamic: return "dynamic";
    case Strategy::bev: return "bev";
    }
    return "unknown";
}

Strategy
parse_strategy(const std::string &name) {
    for (Strategy s : {Strategy::sensor, Strategy::elevated, Strategy::elevated_around,
                       Strategy::fully_random, Strategy::dynamic, Strategy::bev}) {
        if (strategy_name(s) == name) {
            return s;
        }
    }
    throw ArgumentError("unknown placement strategy \"" + name + "\"");
}

void
PlacementSpec::validate() const {
    auto check_range = [](const std::array<double, 2> &r, const char *what) {
        if (!(r[0] >= 0.0) || !(r[1] >= r[0]) || !std::isfinite(r[1])) {
            throw ArgumentError(std::string("placement ") + what + " range must satisfy 0 <= lo <= hi");
        }
    };
    check_range(elevation, "elevation");
    check_range(tilt, "tilt");
    check_range(ring, "ring");
    if (!(xy_range >= 0.0)) {
        throw ArgumentError("placement xy range must be non-negative");
    }
    if (count < 1) {
        throw ArgumentError("placement count must be >= 1");
    }
    const bool samples = strategy != Strategy::sensor && strategy != Strategy::bev;
    if (samples && !seed) {
        throw ArgumentError("strategy " + strategy_name(strategy) + " requires a seed");
    }
    const bool needs_base = strategy == Strategy::sensor || strategy == Strategy::elevated ||
                            strategy == Strategy::elevated_around;
    if (needs_base && base_cameras.empty()) {
        throw ArgumentError("strategy " + strategy_name(strategy) + " requires base cameras");
    }
}

double
effective_xy_range(const PlacementSpec &spec, const GridGeometry &geometry) {
    const Eigen::Vector3d ext = geometry.extent();
    return std::min(spec.xy_range, 0.5 * std::max(ext.x(), ext.y()));
}

double
bev_resolution(const PlacementSpec &spec, const GridGeometry &geometry) {
    return spec.bev_pixels_per_meter > 0.0 ? spec.bev_pixels_per_meter : 1.0 / geometry.voxel_size;
}

Eigen::Matrix3d
pitch_down(const Eigen::Matrix3d &world_to_cam, double angle) {
    const Eigen::RowVector3d down = world_to_cam.row(1);
    const Eigen::RowVector3d fwd = world_to_cam.row(2);
    Eigen::Matrix3d r = world_to_cam;
    r.row(1) = std::cos(angle) * down - std::sin(angle) * fwd;
    r.row(2) = std::cos(angle) * fwd + std::sin(angle) * down;
    return r;
}

namespace {

Camera
with_pose(const Camera &base, const GridGeometry &geometry, const Eigen::Matrix3d &rot,
          const Eigen::Vector3d &center, const std::string &id) {
    Camera cam = base;
    cam.id = id;
    cam.extrinsics = make_extrinsics(rot, center);
    cam.far = std::max(base.far, default_far(geometry, center));
    cam.validate();
    return cam;
}

Camera
intrinsics_template(const PlacementSpec &spec, const GridGeometry &geometry, int k) {
    if (!spec.base_cameras.empty()) {
        return spec.base_cameras[static_cast<std::size_t>(k) % spec.base_cameras.size()];
    }
    RigOptions rig;
    rig.count = 1;
    return surround_rig(geometry, rig).front();
}

} // namespace

std::vector<Camera>
place_cameras(const PlacementSpec &spec, const GridGeometry &geometry,
              std::optional<std::span<const double>> error_volume) {
    spec.validate();
    geometry.validate();
    std::vector<Camera> out;
    const std::string tag = strategy_name(spec.strategy);

    if (spec.strategy == Strategy::sensor) {
        return spec.base_cameras;
    }
    if (spec.strategy == Strategy::bev) {
        out.push_back(make_bev_camera(geometry, bev_resolution(spec, geometry)));
        return out;
    }

    Rng rng(*spec.seed);
    const Eigen::Vector3d lo = geometry.min_corner();
    const Eigen::Vector3d hi = geometry.max_corner();
    const Eigen::Vector3d ext = geometry.extent();

    switch (spec.strategy) {
    case Strategy::elevated:
    case Strategy::elevated_around: {
        const double xy = effective_xy_range(spec, geometry);
        for (const auto &base : spec.base_cameras) {
            const double dz = rng.uniform(spec.elevation[0], spec.elevation[1]);
            const double tilt = rng.uniform(spec.tilt[0], spec.tilt[1]);
            Eigen::Vector3d center = base.center() + Eigen::Vector3d(0.0, 0.0, dz);
            if (spec.strategy == Strategy::elevated_around) {
                center.x() += rng.uniform(-xy, xy);
                center.y() += rng.uniform(-xy, xy);
            }
            out.push_back(with_pose(base, geometry, pitch_down(base.rotation(), tilt), center,
                                    base.id + "_" + tag));
        }
        break;
    }
    case Strategy::fully_random: {
        for (int k = 0; k < spec.count; ++k) {
            const Eigen::Vector3d center(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()),
                                         rng.uniform(spec.elevation[0], spec.elevation[1]));
            const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double pitch = rng.uniform(spec.tilt[0], spec.tilt[1]);
            const Eigen::Vector3d fwd(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw),
                                      -std::sin(pitch));
            out.push_back(with_pose(intrinsics_template(spec, geometry, k), geometry, look_rotation(fwd),
                                    center, tag + std::to_string(k)));
        }
        break;
    }
    case Strategy::dynamic: {
        if (!error_volume || error_volume->size() != geometry.voxel_count()) {
            throw ArgumentError("dynamic strategy requires an error volume with one value per voxel");
        }
        const auto &err = *error_volume;
        // First maximum in scan order.
        const std::size_t best =
            static_cast<std::size_t>(std::max_element(err.begin(), err.end()) - err.begin());
        const Eigen::Vector3d target = voxel_center(geometry, geometry.unravel(best));
        const double scene = std::max(ext.x(), ext.y());
        const Eigen::Vector2d mid(lo.x() + 0.5 * ext.x(), lo.y() + 0.5 * ext.y());
        for (int k = 0; k < spec.count; ++k) {
            const double radius = scene * rng.uniform(spec.ring[0], spec.ring[1]);
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double z = rng.uniform(spec.elevation[0], spec.elevation[1]);
            const Eigen::Vector3d center(mid.x() + radius * std::cos(angle),
                                         mid.y() + radius * std::sin(angle), z);
            Eigen::Vector3d fwd = target - center;
            if (fwd.norm() < 1e-9) {
                fwd = -Eigen::Vector3d::UnitZ();
            }
            out.push_back(with_pose(intrinsics_template(spec, geometry, k), geometry,
                                    look_rotation(fwd), center, tag + std::to_string(k)));
        }
        break;
    }
    default: break;
    }
    return out;
}

nlohmann::json
placement_to_json(const PlacementSpec &spec) {
    nlohmann::json j;
    j["strategy"] = strategy_name(spec.strategy);
    j["elevation"] = spec.elevation;
    j["xy_range"] = spec.xy_range;
    j["tilt"] = spec.tilt;
    j["ring"] = spec.ring;
    j["count"] = spec.count;
    j["bev_pixels_per_meter"] = spec.bev_pixels_per_meter;
    if (spec.seed) {
        j["seed"] = *spec.seed;
    }
    if (!spec.base_cameras.empty()) {
        j["base_cameras"] = cameras_to_json(spec.base_cameras)["cameras"];
    }
    return j;
}

PlacementSpec
placement_from_json(const nlohmann::json &j) {
    try {
        PlacementSpec spec;
        spec.strategy = parse_strategy(j.at("strategy").get<std::string>());
        if (j.contains("elevation")) {
            spec.elevation = j.at("elevation").get<std::array<double, 2>>();
        }
        spec.xy_range = j.value("xy_range", spec.xy_range);
        if (j.contains("tilt")) {
            spec.tilt = j.at("tilt").get<std::array<double, 2>>();
        }
        if (j.contains("ring")) {
            spec.ring = j.at("ring").get<std::array<double, 2>>();
        }
        spec.count = j.value("count", spec.count);
        spec.bev_pixels_per_meter = j.value("bev_pixels_per_meter", spec.bev_pixels_per_meter);
        if (j.contains("seed")) {
            spec.seed = j.at("seed").get<std::uint64_t>();
        }
        if (j.contains("base_cameras")) {
            spec.base_cameras = cameras_from_json(j.at("base_cameras"));
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception &e) {
        throw ArgumentError(std::string("malformed placement JSON: ") + e.what());
    }
}

} // namespace occsplat
