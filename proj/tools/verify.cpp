// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include "occsplat/losses.hpp"
#include "occsplat/oracle.hpp"
#include "occsplat/placement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace occsplat::cli {

namespace {

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
    nlohmann::json detail;
};

Check
tile_vs_naive(int poses) {
    Check c{"tile_vs_naive", 0.0, 1e-6, false, {}};
    std::size_t views = 0;
    for (const auto &fx : standard_fixtures()) {
        const GaussianSet set = gaussianize_ground_truth(fx.grid, default_scale(fx.grid.geometry));
        for (const auto &cam : fixture_poses(fx.grid.geometry, poses)) {
            const RenderedView a = render(cam, set);
            const RenderedView b = naive_splat(cam, set);
            for (std::size_t i = 0; i < a.sem.size(); ++i) {
                c.value = std::max(c.value, std::abs(a.sem[i] - b.sem[i]));
            }
            for (std::size_t i = 0; i < a.depth.size(); ++i) {
                c.value = std::max(c.value, std::abs(a.depth[i] - b.depth[i]));
            }
            ++views;
        }
    }
    c.passed = c.value <= c.threshold;
    c.detail = {{"views", views}};
    return c;
}

Check
compositing(int poses) {
    Check c{"compositing", 0.0, 1e-5, false, {}};
    bool depth_ok = true;
    for (const auto &fx : standard_fixtures()) {
        const auto &g = fx.grid.geometry;
        // Soft predictions as well as hard ground truth.
        const auto soft = to_double(random_logits(g, 11, 1.0).logits());
        const GaussianSet sets[] = {gaussianize_ground_truth(fx.grid, default_scale(g)),
                                    gaussianize_prediction(g, soft, default_scale(g))};
        for (const auto &set : sets) {
            for (const auto &cam : fixture_poses(g, poses)) {
                const RenderedView v = render(cam, set);
                const std::size_t hw = v.pixel_count();
                for (std::size_t p = 0; p < hw; ++p) {
                    double sum = 0.0;
                    for (int k = 0; k < v.num_classes; ++k) {
                        sum += v.sem[static_cast<std::size_t>(k) * hw + p];
                    }
                    c.value = std::max(c.value, std::abs(sum - 1.0));
                    depth_ok = depth_ok && v.depth[p] >= 0.0 && v.depth[p] <= v.d_range * (1.0 + 1e-12);
                }
            }
        }
    }
    c.passed = c.value <= c.threshold && depth_ok;
    c.detail = {{"depth_in_range", depth_ok}};
    return c;
}

Check
gradcheck(std::uint64_t seed, int seeds) {
    GridGeometry g;
    g.dims = {4, 4, 4};
    g.voxel_size = 0.5f;
    g.num_classes = 4;
    RigOptions rig;
    rig.width = 8;
    rig.height = 8;
    const auto base = surround_rig(g, rig);
    std::vector<GradcheckReport> reports;
    for (int k = 0; k < seeds; ++k) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
        const auto logits = to_double(random_logits(g, s, 1.0).logits());
        const OccupancyGrid gt = argmax_labels(g, to_double(random_logits(g, s + 1000, 1.0).logits()));
        const auto cams = training_cameras(g, base, s);
        GradcheckReport r = fd_gradcheck(g, logits, gt, cams, default_scale(g));
        r.seeds = {s};
        reports.push_back(r);
    }
    const GradcheckReport merged = merge_reports(reports);
    Check c{"gradcheck", merged.max_rel_error, 1e-4, merged.passed(1e-4), merged.to_json()};
    return c;
}

Check
raymarch() {
    const GridGeometry g = fixture_geometry();
    const OccupancyGrid walls = synth_scene(g, scene::TwoWalls{2, 6, 1, 2});
    const GaussianSet set = gaussianize_ground_truth(walls, default_scale(g));
    const Eigen::Vector3d pos(-1.0, 2.0, 2.0);
    const Camera cam = make_pinhole_camera("walls", 32, 32, 2.0 * std::atan(1.25 / 2.25), look_rotation({1, 0, 0}),
                                           pos, 0.05, default_far(g, pos));
    const RenderedView a = render(cam, set);
    const RenderedView b = raymarch_reference(cam, set);
    double mad = 0.0;
    for (std::size_t p = 0; p < a.pixel_count(); ++p) {
        mad += std::abs(a.depth[p] - b.depth[p]);
    }
    mad /= static_cast<double>(a.pixel_count());
    Check c{"raymarch_depth", mad, g.voxel_size, mad < g.voxel_size, {}};
    return c;
}

} // namespace

bool
run_verify(const VerifyOptions &opts, std::ostream &out, std::ostream &err) {
    std::vector<Check> checks;
    checks.push_back(tile_vs_naive(opts.poses));
    checks.push_back(compositing(opts.poses));
    checks.push_back(gradcheck(opts.seed, opts.seeds));
    checks.push_back(raymarch());

    bool all = true;
    char line[160];
    std::snprintf(line, sizeof(line), "%-16s %-6s %14s %14s\n", "check", "result", "value", "threshold");
    err << line;
    for (const auto &c : checks) {
        all = all && c.passed;
        nlohmann::json j = {{"event", "verify"},
                            {"check", c.name},
                            {"passed", c.passed},
                            {"value", c.value},
                            {"threshold", c.threshold}};
        if (!c.detail.is_null()) {
            j["detail"] = c.detail;
        }
        out << j.dump() << "\n";
        std::snprintf(line, sizeof(line), "%-16s %-6s %14.6g %14.6g\n", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                      c.value, c.threshold);
        err << line;
    }
    for (const auto &c : checks) {
        if (!c.passed) {
            err << "verification failed: " << c.name << "\n";
        }
    }
    return all;
}

} // namespace occsplat::cli
