// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_GAUSSIANS_HPP
#define OCCSPLAT_GAUSSIANS_HPP

#include "occsplat/grid.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace occsplat {

enum class GaussianMode { prediction, ground_truth };

/// One spherical Gaussian: covariance scale^2 * I, rotation fixed to identity.
struct GaussianPrimitive {
    Eigen::Vector3d mu;
    double scale = 0.0;
    std::vector<double> class_probs;
    double opacity = 0.0;
    Index3 source_index{};
};

/// Structure-of-arrays storage for one primitive per voxel. `source` holds the
/// linear voxel index of every primitive; for sets built from a grid it is the
/// identity (voxel scan order, x-fastest).
struct GaussianSet {
    GridGeometry geometry;
    GaussianMode mode = GaussianMode::prediction;
    double scale = 0.0;
    std::vector<Eigen::Vector3d> centers;
    std::vector<double> class_probs; // size() * num_classes, class-fastest
    std::vector<double> opacity;
    std::vector<std::uint32_t> source;

    std::size_t
    size() const {
        return centers.size();
    }
    int
    num_classes() const {
        return geometry.num_classes;
    }
    std::span<const double>
    probs(std::size_t i) const {
        const auto nc = static_cast<std::size_t>(geometry.num_classes);
        return {class_probs.data() + i * nc, nc};
    }

    GaussianPrimitive primitive(std::size_t i) const;
};

/// Half the voxel side, so that two standard deviations span one voxel.
double default_scale(const GridGeometry &geometry);

/// Numerically stable softmax; `out` may alias `in`.
void softmax(std::span<const double> in, std::span<double> out);

/// One primitive per voxel with class_probs = softmax(logits) and
/// opacity = 1 - p(empty). `logits` is voxel-major, class-fastest.
GaussianSet gaussianize_prediction(const GridGeometry &geometry, std::span<const double> logits,
                                   double scale);
/// Throws ArgumentError when `grid` holds labels.
GaussianSet gaussianize_prediction(const OccupancyGrid &grid, double scale);

/// Occupied voxels become opaque one-hot primitives, empty voxels transparent.
GaussianSet gaussianize_ground_truth(const OccupancyGrid &grid, double scale);

/// Chains gradients w.r.t. class_probs and opacity of a prediction-mode set back
/// onto the logits it was built from. Returns a voxel-major, class-fastest buffer.
std::vector<double> backprop_to_logits(const GaussianSet &set, std::span<const double> d_class_probs,
                                       std::span<const double> d_opacity);

std::vector<double> to_double(const Logits &logits);

} // namespace occsplat

#endif // OCCSPLAT_GAUSSIANS_HPP
