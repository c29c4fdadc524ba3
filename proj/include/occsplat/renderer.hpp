// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_RENDERER_HPP
#define OCCSPLAT_RENDERER_HPP

#include "occsplat/camera.hpp"
#include "occsplat/gaussians.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace occsplat {

struct RenderOptions {
    /// Per-pixel contributions below this alpha are skipped, and primitives
    /// whose opacity is below it are dropped before binning.
    double alpha_cutoff = 1.0 / 255.0;
    /// Compositing stops once transmittance falls below this value.
    double min_transmittance = 1e-4;
    int tile_size = 16;
    double alpha_max = 0.99;
    /// Added to the diagonal of every projected covariance (pixels^2).
    double lowpass = 0.3;
    /// Fill leftover transmittance with the empty class at depth = camera far.
    bool composite_background = true;
    /// Keep the per-pixel compositing trace needed by render_backward.
    bool record_trace = false;
};

/// Projected footprint of one primitive.
struct Splat2D {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero(); // pixels
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity(); // pixels^2, low-pass floor included
    std::array<double, 3> conic{}; // inverse covariance (xx, xy, yy)
    double depth = 0.0;             // view-space z, meters
    double radius = 0.0;            // 3 sigma along the major axis, pixels
    std::uint32_t primitive_id = 0; // index into the GaussianSet
    std::uint32_t source_index = 0; // voxel index, used as the depth tie-break
};

/// Projects one spherical Gaussian. Returns nothing when the center lies in
/// front of the near plane, beyond the far plane, or the 3 sigma footprint
/// misses the image.
std::optional<Splat2D> project_gaussian(const Camera &cam, const Eigen::Vector3d &mu, double scale,
                                        double lowpass = 0.3);
std::optional<Splat2D> project_gaussian(const Camera &cam, const GaussianPrimitive &g,
                                        double lowpass = 0.3);

/// All surviving splats sorted front to back, ties broken by voxel index.
std::vector<Splat2D> project_and_sort(const Camera &cam, const GaussianSet &set,
                                      const RenderOptions &opts);

struct TraceEntry {
    std::uint32_t primitive;
    double alpha;
    double transmittance; // before this entry
    double footprint;     // exp(-q/2) at the pixel
};

/// Everything render_backward needs, captured at render time.
struct CompositTrace {
    std::vector<std::size_t> offsets; // per pixel, size H*W + 1
    std::vector<TraceEntry> entries;  // front to back within a pixel
    std::vector<double> primitive_depth;
    std::vector<double> opacity;
    std::vector<double> class_probs;
    double alpha_max = 0.99;
    bool composite_background = true;
};

/// Semantic planes are stored plane-major: sem[(c * height + y) * width + x].
struct RenderedView {
    int width = 0;
    int height = 0;
    int num_classes = 0;
    int empty_class = 0;
    double d_range = 0.0;
    std::size_t splat_count = 0;
    std::vector<double> sem;
    std::vector<double> depth;
    std::vector<double> residual_transmittance;
    std::shared_ptr<const CompositTrace> trace;

    std::size_t
    pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }
    double
    sem_at(int c, int x, int y) const {
        return sem[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double
    depth_at(int x, int y) const {
        return depth[static_cast<std::size_t>(y) * width + x];
    }
    /// Most probable class per pixel (lowest index on ties).
    std::vector<int> argmax() const;
};

struct GradientBuffers {
    std::vector<double> d_class_probs; // per primitive, class-fastest
    std::vector<double> d_opacity;

    GradientBuffers &operator+=(const GradientBuffers &other);
};

/// Tile-binned splatting renderer, parallel over tiles.
RenderedView render(const Camera &cam, const GaussianSet &set, const RenderOptions &opts = {});

/// Adjoint of render: maps upstream gradients on the semantic planes and the
/// depth map onto class_probs and opacity of every primitive. Requires a view
/// rendered with record_trace. Accumulation order is fixed, so results do not
/// depend on the thread count.
GradientBuffers render_backward(const RenderedView &view, std::span<const double> d_sem,
                                std::span<const double> d_depth);

} // namespace occsplat

#endif // OCCSPLAT_RENDERER_HPP
