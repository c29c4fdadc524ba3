// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_PLACEMENT_HPP
#define OCCSPLAT_PLACEMENT_HPP

#include "occsplat/camera.hpp"

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace occsplat {

enum class Strategy { sensor, elevated, elevated_around, fully_random, dynamic, bev };

std::string strategy_name(Strategy s);
Strategy parse_strategy(const std::string &name);

/// Virtual camera placement. Only extrinsics are sampled; intrinsics always
/// come from the base cameras (or the default rig when there are none).
struct PlacementSpec {
    Strategy strategy = Strategy::bev;
    /// Meters. Added to base camera height (elevated*) or used as absolute
    /// world z, measured from the ego ground plane z = 0 (fully_random, dynamic).
    std::array<double, 2> elevation{2.0, 8.0};
    /// Half-width of the uniform xy offset, clamped to half the scene's largest xy extent.
    double xy_range = 10.0;
    /// Downward pitch in radians.
    std::array<double, 2> tilt{10.0 * std::numbers::pi / 180.0, 35.0 * std::numbers::pi / 180.0};
    /// Ring radius for the dynamic strategy, as fractions of the scene's largest xy extent.
    std::array<double, 2> ring{0.25, 0.5};
    /// Cameras produced by fully_random and dynamic.
    int count = 1;
    /// BeV resolution; <= 0 selects one pixel per voxel column.
    double bev_pixels_per_meter = 0.0;
    std::optional<std::uint64_t> seed;
    std::vector<Camera> base_cameras;

    void validate() const;
};

/// Clamped xy translation half-width used by elevated_around.
double effective_xy_range(const PlacementSpec &spec, const GridGeometry &geometry);

/// BeV pixels per meter after resolving the "one pixel per voxel" default.
double bev_resolution(const PlacementSpec &spec, const GridGeometry &geometry);

/// `error_volume` is one value per voxel in scan order; required by the dynamic strategy.
std::vector<Camera> place_cameras(const PlacementSpec &spec, const GridGeometry &geometry,
                                  std::optional<std::span<const double>> error_volume = std::nullopt);

/// Rotates a world-to-camera rotation about the camera x axis so it looks further down.
Eigen::Matrix3d pitch_down(const Eigen::Matrix3d &world_to_cam, double angle);

nlohmann::json placement_to_json(const PlacementSpec &spec);
PlacementSpec placement_from_json(const nlohmann::json &j);

} // namespace occsplat

#endif // OCCSPLAT_PLACEMENT_HPP
