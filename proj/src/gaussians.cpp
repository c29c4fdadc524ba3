// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/gaussians.hpp"

#include "occsplat/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace occsplat {

GaussianPrimitive
GaussianSet::primitive(std::size_t i) const {
    const auto p = probs(i);
    return {centers[i], scale, std::vector<double>(p.begin(), p.end()), opacity[i],
            geometry.unravel(source[i])};
}

double
default_scale(const GridGeometry &geometry) {
    return 0.5 * static_cast<double>(geometry.voxel_size);
}

void
softmax(std::span<const double> in, std::span<double> out) {
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t k = 0; k < in.size(); ++k) {
        out[k] = std::exp(in[k] - peak);
        total += out[k];
    }
    for (auto &v : out) {
        v /= total;
    }
}

namespace {

GaussianSet
empty_set(const GridGeometry &geometry, GaussianMode mode, double scale) {
    geometry.validate();
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw ArgumentError("gaussian scale must be positive, got " + std::to_string(scale));
    }
    const std::size_t n = geometry.voxel_count();
    GaussianSet set;
    set.geometry = geometry;
    set.mode = mode;
    set.scale = scale;
    set.centers.resize(n);
    set.class_probs.assign(n * static_cast<std::size_t>(geometry.num_classes), 0.0);
    set.opacity.assign(n, 0.0);
    set.source.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        set.centers[i] = voxel_center(geometry, geometry.unravel(i));
        set.source[i] = static_cast<std::uint32_t>(i);
    }
    return set;
}

} // namespace

GaussianSet
gaussianize_prediction(const GridGeometry &geometry, std::span<const double> logits, double scale) {
    GaussianSet set = empty_set(geometry, GaussianMode::prediction, scale);
    const auto nc = static_cast<std::size_t>(geometry.num_classes);
    if (logits.size() != set.size() * nc) {
        throw GeometryError("logit count does not match geometry");
    }
    const auto n = static_cast<std::ptrdiff_t>(set.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto off = static_cast<std::size_t>(i) * nc;
        std::span<double> p(set.class_probs.data() + off, nc);
        softmax(logits.subspan(off, nc), p);
        set.opacity[static_cast<std::size_t>(i)] = 1.0 - p[static_cast<std::size_t>(geometry.empty_class)];
    }
    return set;
}

GaussianSet
gaussianize_prediction(const OccupancyGrid &grid, double scale) {
    if (!grid.has_logits()) {
        throw ArgumentError("prediction gaussianization needs a logits grid");
    }
    const auto lg = to_double(grid.logits());
    return gaussianize_prediction(grid.geometry, lg, scale);
}

GaussianSet
gaussianize_ground_truth(const OccupancyGrid &grid, double scale) {
    if (!grid.has_labels()) {
        throw ArgumentError("ground-truth gaussianization needs a labels grid");
    }
    const auto &g = grid.geometry;
    GaussianSet set = empty_set(g, GaussianMode::ground_truth, scale);
    const auto nc = static_cast<std::size_t>(g.num_classes);
    const auto &lab = grid.labels();
    if (lab.size() != set.size()) {
        throw GeometryError("label count does not match geometry");
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
        set.class_probs[i * nc + lab[i]] = 1.0;
        set.opacity[i] = lab[i] == g.empty_class ? 0.0 : 1.0;
    }
    return set;
}

std::vector<double>
backprop_to_logits(const GaussianSet &set, std::span<const double> d_class_probs,
                   std::span<const double> d_opacity) {
    const auto nc = static_cast<std::size_t>(set.num_classes());
    const auto empty = static_cast<std::size_t>(set.geometry.empty_class);
    if (d_class_probs.size() != set.class_probs.size() || d_opacity.size() != set.size()) {
        throw GeometryError("gradient buffers do not match the gaussian set");
    }
    std::vector<double> out(set.class_probs.size(), 0.0);
    std::vector<double> g(nc);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto p = set.probs(i);
        // Upstream w.r.t. probabilities; opacity = 1 - p[empty].
        double mean = 0.0;
        for (std::size_t k = 0; k < nc; ++k) {
            g[k] = d_class_probs[i * nc + k] - (k == empty ? d_opacity[i] : 0.0);
            mean += p[k] * g[k];
        }
        const auto voxel = static_cast<std::size_t>(set.source[i]);
        for (std::size_t k = 0; k < nc; ++k) {
            out[voxel * nc + k] += p[k] * (g[k] - mean);
        }
    }
    return out;
}

std::vector<double>
to_double(const Logits &logits) {
    return {logits.begin(), logits.end()};
}

} // namespace occsplat
