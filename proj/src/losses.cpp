// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/losses.hpp"

#include "occsplat/error.hpp"
#include "occsplat/placement.hpp"

#include <cmath>

namespace occsplat {

namespace {

void
check_same_shape(const RenderedView &a, const RenderedView &b) {
    if (a.width != b.width || a.height != b.height || a.num_classes != b.num_classes) {
        throw GeometryError("rendered views differ in size or class count");
    }
}

double
sign(double v) {
    return static_cast<double>((v > 0.0) - (v < 0.0));
}

void
check_same_geometry(const GridGeometry &a, const GridGeometry &b) {
    if (a != b) {
        throw GeometryError("prediction and ground-truth grids have different geometry");
    }
}

} // namespace

ImageLoss
semantic_loss(const RenderedView &pred, const RenderedView &gt) {
    check_same_shape(pred, gt);
    const double norm = 1.0 / static_cast<double>(pred.sem.size());
    ImageLoss out;
    out.grad.resize(pred.sem.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.sem.size(); ++i) {
        const double diff = pred.sem[i] - gt.sem[i];
        sum += std::abs(diff);
        out.grad[i] = sign(diff) * norm;
    }
    out.value = sum * norm;
    return out;
}

ImageLoss
depth_loss(const RenderedView &pred, const RenderedView &gt, double d_range) {
    check_same_shape(pred, gt);
    if (!(d_range > 0.0)) {
        throw ArgumentError("depth normalization d_range must be positive");
    }
    const double norm = 1.0 / (static_cast<double>(pred.depth.size()) * d_range);
    ImageLoss out;
    out.grad.resize(pred.depth.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.depth.size(); ++i) {
        const double diff = pred.depth[i] - gt.depth[i];
        sum += std::abs(diff);
        out.grad[i] = sign(diff) * norm;
    }
    out.value = sum * norm;
    return out;
}

std::vector<double>
voxel_cross_entropy(const GridGeometry &geometry, std::span<const double> logits,
                    const OccupancyGrid &gt) {
    check_same_geometry(geometry, gt.geometry);
    const auto nc = static_cast<std::size_t>(geometry.num_classes);
    const auto &lab = gt.labels();
    if (logits.size() != lab.size() * nc) {
        throw GeometryError("logit count does not match geometry");
    }
    std::vector<double> out(lab.size());
    for (std::size_t i = 0; i < lab.size(); ++i) {
        const auto row = logits.subspan(i * nc, nc);
        double peak = row[0];
        for (double v : row) {
            peak = std::max(peak, v);
        }
        double z = 0.0;
        for (double v : row) {
            z += std::exp(v - peak);
        }
        out[i] = peak + std::log(z) - row[lab[i]];
    }
    return out;
}

VoxelLoss
cross_entropy_3d(const GridGeometry &geometry, std::span<const double> logits, const OccupancyGrid &gt) {
    const auto per_voxel = voxel_cross_entropy(geometry, logits, gt);
    const auto nc = static_cast<std::size_t>(geometry.num_classes);
    const auto &lab = gt.labels();
    const double norm = 1.0 / static_cast<double>(lab.size());
    VoxelLoss out;
    out.grad.resize(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < lab.size(); ++i) {
        sum += per_voxel[i];
        std::span<double> g(out.grad.data() + i * nc, nc);
        softmax(logits.subspan(i * nc, nc), g);
        g[lab[i]] -= 1.0;
        for (auto &v : g) {
            v *= norm;
        }
    }
    out.value = sum * norm;
    return out;
}

VoxelLoss
cross_entropy_3d(const OccupancyGrid &pred, const OccupancyGrid &gt) {
    const auto lg = to_double(pred.logits());
    return cross_entropy_3d(pred.geometry, lg, gt);
}

double
total_loss(double l3d, double l2d, double lambda) {
    if (!(lambda >= 0.0)) {
        throw ArgumentError("lambda must be non-negative");
    }
    return l3d + lambda * l2d;
}

nlohmann::json
LossReport::to_json() const {
    nlohmann::json j;
    j["lambda"] = lambda;
    j["l3d"] = l3d;
    j["l2d"] = l2d;
    j["total"] = total;
    nlohmann::json cams = nlohmann::json::array();
    for (const auto &c : cameras) {
        cams.push_back({{"id", c.camera_id},
                        {"sem_loss", c.sem_loss},
                        {"depth_loss", c.depth_loss},
                        {"l2d", c.sem_loss + c.depth_loss}});
    }
    j["cameras"] = cams;
    return j;
}

LossReport
l2d(const GridGeometry &geometry, std::span<const double> logits, const OccupancyGrid &gt,
    std::span<const Camera> cams, double scale, const L2dOptions &opts) {
    check_same_geometry(geometry, gt.geometry);
    if (!opts.gt_views.empty() && opts.gt_views.size() != cams.size()) {
        throw ArgumentError("cached ground-truth views do not match the camera list");
    }
    const GaussianSet pred_set = gaussianize_prediction(geometry, logits, scale);
    std::optional<GaussianSet> gt_set;
    if (opts.gt_views.empty()) {
        gt_set = gaussianize_ground_truth(gt, scale);
    }

    RenderOptions pred_opts = opts.render;
    pred_opts.record_trace = true;
    RenderOptions gt_opts = opts.render;
    gt_opts.record_trace = false;

    LossReport report;
    report.grads.d_class_probs.assign(pred_set.class_probs.size(), 0.0);
    report.grads.d_opacity.assign(pred_set.size(), 0.0);
    for (std::size_t k = 0; k < cams.size(); ++k) {
        const Camera &cam = cams[k];
        const RenderedView pred_view = render(cam, pred_set, pred_opts);
        const RenderedView gt_view = opts.gt_views.empty() ? render(cam, *gt_set, gt_opts) : opts.gt_views[k];
        const ImageLoss sem = semantic_loss(pred_view, gt_view);
        const ImageLoss dep = depth_loss(pred_view, gt_view, cam.far);
        report.cameras.push_back({cam.id, sem.value, dep.value});
        report.l2d += sem.value + dep.value;
        report.grads += render_backward(pred_view, sem.grad, dep.grad);
    }
    report.d_logits_2d = backprop_to_logits(pred_set, report.grads.d_class_probs, report.grads.d_opacity);
    return report;
}

LossReport
l2d(const OccupancyGrid &pred, const OccupancyGrid &gt, std::span<const Camera> cams, double scale,
    const L2dOptions &opts) {
    const auto lg = to_double(pred.logits());
    return l2d(pred.geometry, lg, gt, cams, scale, opts);
}

LossReport
compute_loss(const GridGeometry &geometry, std::span<const double> logits, const OccupancyGrid &gt,
             std::span<const Camera> cams, double scale, double lambda, const L2dOptions &opts) {
    LossReport report = l2d(geometry, logits, gt, cams, scale, opts);
    const VoxelLoss ce = cross_entropy_3d(geometry, logits, gt);
    report.lambda = lambda;
    report.l3d = ce.value;
    report.total = total_loss(report.l3d, report.l2d, lambda);
    report.d_logits.resize(ce.grad.size());
    for (std::size_t i = 0; i < ce.grad.size(); ++i) {
        report.d_logits[i] = ce.grad[i] + lambda * report.d_logits_2d[i];
    }
    return report;
}

std::vector<Camera>
training_cameras(const GridGeometry &geometry, const std::vector<Camera> &base_cameras,
                 std::uint64_t seed) {
    if (base_cameras.empty()) {
        throw ArgumentError("training cameras need at least one base camera");
    }
    PlacementSpec bev;
    bev.strategy = Strategy::bev;
    std::vector<Camera> cams = place_cameras(bev, geometry);

    PlacementSpec around;
    around.strategy = Strategy::elevated_around;
    around.seed = seed;
    // One virtual camera per step, derived from a seed-selected sensor.
    around.base_cameras = {base_cameras.at(static_cast<std::size_t>(seed % base_cameras.size()))};
    const auto placed = place_cameras(around, geometry);
    cams.push_back(placed.front());
    return cams;
}

} // namespace occsplat
