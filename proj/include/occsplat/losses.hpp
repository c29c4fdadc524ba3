// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_LOSSES_HPP
#define OCCSPLAT_LOSSES_HPP

#include "occsplat/renderer.hpp"

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace occsplat {

/// Weight of the rendering loss against the voxel loss.
inline constexpr double kDefaultLambda = 15.0;

/// A scalar loss and its gradient w.r.t. the predicted image it was computed from.
struct ImageLoss {
    double value = 0.0;
    std::vector<double> grad;
};

/// Mean absolute difference over pixels and classes.
ImageLoss semantic_loss(const RenderedView &pred, const RenderedView &gt);

/// Mean absolute depth difference over pixels, divided by d_range.
ImageLoss depth_loss(const RenderedView &pred, const RenderedView &gt, double d_range);

struct VoxelLoss {
    double value = 0.0;
    std::vector<double> grad; // per logit
};

/// Mean over voxels of -log softmax(logits)[label].
VoxelLoss cross_entropy_3d(const GridGeometry &geometry, std::span<const double> logits,
                           const OccupancyGrid &gt);
VoxelLoss cross_entropy_3d(const OccupancyGrid &pred, const OccupancyGrid &gt);

/// Per-voxel cross-entropy, the error volume the dynamic camera strategy aims at.
std::vector<double> voxel_cross_entropy(const GridGeometry &geometry, std::span<const double> logits,
                                        const OccupancyGrid &gt);

double total_loss(double l3d, double l2d, double lambda);

struct CameraLoss {
    std::string camera_id;
    double sem_loss = 0.0;
    double depth_loss = 0.0;
};

struct LossReport {
    std::vector<CameraLoss> cameras;
    double l2d = 0.0;
    double l3d = 0.0;
    double lambda = kDefaultLambda;
    double total = 0.0;
    GradientBuffers grads;          // rendering loss w.r.t. primitive class_probs / opacity
    std::vector<double> d_logits_2d; // rendering loss w.r.t. logits
    std::vector<double> d_logits;    // total loss w.r.t. logits

    nlohmann::json to_json() const;
};

struct L2dOptions {
    RenderOptions render;
    /// Ground-truth renders per camera, reused instead of re-rendering when non-empty.
    std::vector<RenderedView> gt_views;
};

/// Rendering loss summed over the cameras: for each camera, semantic plus
/// depth L1 between prediction and ground-truth renders, each normalized by
/// that camera's far distance. Fills cameras, l2d, grads and d_logits_2d.
LossReport l2d(const GridGeometry &geometry, std::span<const double> logits, const OccupancyGrid &gt,
               std::span<const Camera> cams, double scale, const L2dOptions &opts = {});
LossReport l2d(const OccupancyGrid &pred, const OccupancyGrid &gt, std::span<const Camera> cams,
               double scale, const L2dOptions &opts = {});

/// Voxel cross-entropy plus lambda times the rendering loss, with gradients.
LossReport compute_loss(const GridGeometry &geometry, std::span<const double> logits,
                        const OccupancyGrid &gt, std::span<const Camera> cams, double scale,
                        double lambda = kDefaultLambda, const L2dOptions &opts = {});

/// The two-camera setup used for training: the BeV camera followed by one
/// elevated_around camera sampled from `base_cameras` with `seed`.
std::vector<Camera> training_cameras(const GridGeometry &geometry,
                                     const std::vector<Camera> &base_cameras, std::uint64_t seed);

} // namespace occsplat

#endif // OCCSPLAT_LOSSES_HPP
