// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

// Brute-force references for the renderer and its gradients. Everything here
// is single-threaded and slow on purpose.

#ifndef OCCSPLAT_ORACLE_HPP
#define OCCSPLAT_ORACLE_HPP

#include "occsplat/camera.hpp"
#include "occsplat/gaussians.hpp"
#include "occsplat/grid.hpp"
#include "occsplat/renderer.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace occsplat {

struct OracleConfig {
    /// Ray-marching step in meters; 0 picks scale / 20.
    double step_size = 0.0;
    /// Density per unit opacity; 0 picks the gain that makes a ray through
    /// the center of an opacity-1 Gaussian absorb alpha_max of the light.
    double density_gain = 0.0;
    double fd_epsilon = 1e-3;
    /// Combine central differences at eps and eps/2 to cancel the eps^2 term.
    bool richardson = true;
    /// Entries with |analytic| at or below this are not compared.
    double grad_threshold = 1e-8;
    double abs_tolerance = 1e-6;
    double rel_tolerance = 1e-4;

    void validate() const;
};

/// Same compositing rules as render(), without tiles: every pixel walks the
/// full depth-sorted splat list.
RenderedView naive_splat(const Camera &cam, const GaussianSet &set, const RenderOptions &opts = {});

/// Volumetric reference: march each pixel ray through the density field
/// sigma(x) = gain * sum_i o_i exp(-|x - mu_i|^2 / (2 s^2)) and composite with
/// alpha = 1 - exp(-sigma * dt). Depth is view-space z.
RenderedView raymarch_reference(const Camera &cam, const GaussianSet &set, const OracleConfig &cfg = {});

struct GradcheckReport {
    double max_rel_error = 0.0;
    double mean_rel_error = 0.0;
    /// Same comparison against the plain central difference at eps.
    double max_central_error = 0.0;
    std::size_t checked = 0;
    std::size_t below_threshold = 0;
    std::size_t excluded_kinks = 0;
    Index3 worst_voxel{};
    int worst_class = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::vector<std::uint64_t> seeds;

    bool passed(double rel_tolerance) const;
    nlohmann::json to_json() const;
};

/// Central differences of the rendering loss on every logit, compared with the
/// analytic gradient from l2d(). Entries whose +-eps probes land on a different
/// piecewise branch of the loss (splat lists, alpha saturation, L1 residual
/// signs) are counted in excluded_kinks and not compared.
GradcheckReport fd_gradcheck(const GridGeometry &geometry, std::span<const double> logits,
                             const OccupancyGrid &gt, std::span<const Camera> cams, double scale,
                             const OracleConfig &cfg = {});

struct Fixture {
    std::string name;
    OccupancyGrid grid;
};

/// Geometry shared by the standard fixtures: 8x8x8 voxels of 0.5 m, four
/// classes, class 0 empty, minimum corner at the origin.
GridGeometry fixture_geometry();

/// empty, single_voxel, floor, box and two_walls on fixture_geometry().
std::vector<Fixture> standard_fixtures();

/// The BeV camera followed by `count - 1` pinhole cameras on a ring above
/// the grid, each aimed at the grid center.
std::vector<Camera> fixture_poses(const GridGeometry &geometry, int count = 5, int width = 32, int height = 24);

/// Worst case over several runs; the mean is weighted by checked entries.
GradcheckReport merge_reports(std::span<const GradcheckReport> reports);

} // namespace occsplat

#endif // OCCSPLAT_ORACLE_HPP
