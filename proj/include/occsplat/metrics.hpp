// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_METRICS_HPP
#define OCCSPLAT_METRICS_HPP

#include "occsplat/camera.hpp"
#include "occsplat/grid.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace occsplat {

inline const std::vector<double> kDefaultRayTolerances{1.0, 2.0, 4.0};

struct Counts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    /// tp / (tp + fp + fn); 1 when nothing was counted (both sides empty).
    double iou() const;
    bool operator==(const Counts &) const = default;
};

struct VoxelMetrics {
    double iou = 0.0;
    double miou = 0.0;
    /// Per class; nothing for the empty class and for classes absent from both grids.
    std::vector<std::optional<double>> per_class_iou;
    Counts occupancy;
    std::vector<Counts> per_class;
};

/// `eval_mask`, when given, holds one flag per voxel; voxels with 0 are ignored.
VoxelMetrics voxel_metrics(const OccupancyGrid &pred, const OccupancyGrid &gt,
                           std::optional<std::span<const std::uint8_t>> eval_mask = std::nullopt);

struct RayHit {
    int cls = 0;
    double distance = 0.0; // from the ray origin to the hit voxel's entry face
    Index3 voxel{};
};

/// 3D-DDA traversal. Returns the first non-empty voxel along the ray.
std::optional<RayHit> first_hit(const OccupancyGrid &grid, const Eigen::Vector3d &origin,
                                const Eigen::Vector3d &dir);

struct RaySet {
    enum class Provenance { from_camera, custom };
    std::vector<Eigen::Vector3d> origins;
    std::vector<Eigen::Vector3d> directions;
    Provenance provenance = Provenance::custom;

    std::size_t
    size() const {
        return origins.size();
    }
    void validate() const;
};

/// One ray through every `stride`-th pixel center of the camera.
RaySet rays_from_camera(const Camera &cam, int stride = 1);
RaySet rays_from_cameras(std::span<const Camera> cams, int stride = 1);

struct RayIouResult {
    double rayiou = 0.0; // mean over tolerances
    std::vector<double> tolerances;
    std::vector<double> scores;
    std::vector<Counts> counts;
};

RayIouResult rayiou(const OccupancyGrid &pred, const OccupancyGrid &gt, const RaySet &rays,
                    const std::vector<double> &tolerances = kDefaultRayTolerances);

struct BevMetrics {
    double iou = 0.0;
    double miou = 0.0;
    Counts occupancy;
    std::vector<Counts> per_class;
};

/// Per-pixel top-down class map of a label grid: argmax of the rendered
/// semantics, with pixels whose residual transmittance exceeds 0.5 set to empty.
std::vector<int> bev_class_map(const OccupancyGrid &grid, double pixels_per_meter);

BevMetrics bev_metrics(const OccupancyGrid &pred, const OccupancyGrid &gt, double pixels_per_meter);

struct MetricsReport {
    VoxelMetrics voxel;
    RayIouResult ray;
    BevMetrics bev;

    nlohmann::json to_json() const;
    std::string csv_header() const;
    std::string csv_row() const;
};

MetricsReport evaluate(const OccupancyGrid &pred, const OccupancyGrid &gt, const RaySet &rays,
                       const std::vector<double> &tolerances, double bev_pixels_per_meter);

} // namespace occsplat

#endif // OCCSPLAT_METRICS_HPP
