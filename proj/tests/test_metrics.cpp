// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/error.hpp"
#include "occsplat/metrics.hpp"
#include "occsplat/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace occsplat;

namespace {

GridGeometry
cube(int n, float voxel = 1.0f, int classes = 4) {
    GridGeometry g;
    g.dims = {n, n, n};
    g.voxel_size = voxel;
    g.num_classes = classes;
    return g;
}

OccupancyGrid
random_labels(const GridGeometry &g, std::uint64_t seed, double fill) {
    Rng rng(seed);
    OccupancyGrid grid = make_label_grid(g);
    for (auto &v : grid.labels()) {
        if (rng.uniform() < fill) {
            v = static_cast<std::uint8_t>(1 + static_cast<int>(rng.uniform() * (g.num_classes - 1)));
        }
    }
    return grid;
}

// Reference confusion counts, voxel by voxel.
struct Brute {
    Counts occ;
    std::vector<Counts> cls;
};

Brute
brute_force(const OccupancyGrid &pred, const OccupancyGrid &gt, const std::vector<std::uint8_t> *mask = nullptr) {
    const int nc = gt.geometry.num_classes;
    const int empty = gt.geometry.empty_class;
    Brute b;
    b.cls.resize(static_cast<std::size_t>(nc));
    for (std::size_t i = 0; i < gt.labels().size(); ++i) {
        if (mask && !(*mask)[i]) {
            continue;
        }
        const int p = pred.labels()[i];
        const int q = gt.labels()[i];
        const bool po = p != empty;
        const bool qo = q != empty;
        b.occ.tp += po && qo;
        b.occ.fp += po && !qo;
        b.occ.fn += !po && qo;
        for (int c = 0; c < nc; ++c) {
            if (c == empty) {
                continue;
            }
            b.cls[c].tp += p == c && q == c;
            b.cls[c].fp += p == c && q != c;
            b.cls[c].fn += p != c && q == c;
        }
    }
    return b;
}

// Fixed-step march; reports the first sample inside an occupied voxel.
std::optional<RayHit>
march(const OccupancyGrid &grid, const Eigen::Vector3d &o, const Eigen::Vector3d &d, double step) {
    const auto &g = grid.geometry;
    const double len = (o - g.min_corner()).norm() + (g.max_corner() - g.min_corner()).norm() + (o - g.max_corner()).norm();
    for (double t = 0.0; t < len; t += step) {
        const auto v = voxel_of(g, o + t * d);
        if (v && grid.label_at(*v) != g.empty_class) {
            return RayHit{grid.label_at(*v), t, *v};
        }
    }
    return std::nullopt;
}

} // namespace

TEST(VoxelMetrics, MatchesBruteForce) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GridGeometry g = cube(6, 1.0f, 5);
        const OccupancyGrid a = random_labels(g, seed, 0.3);
        const OccupancyGrid b = random_labels(g, seed + 100, 0.3);
        const VoxelMetrics m = voxel_metrics(a, b);
        const Brute ref = brute_force(a, b);
        EXPECT_EQ(m.occupancy, ref.occ);
        ASSERT_EQ(m.per_class.size(), 5u);
        double sum = 0.0;
        int present = 0;
        for (int c = 1; c < 5; ++c) {
            EXPECT_EQ(m.per_class[c], ref.cls[c]);
            if (ref.cls[c].tp + ref.cls[c].fp + ref.cls[c].fn > 0) {
                sum += ref.cls[c].iou();
                ++present;
                ASSERT_TRUE(m.per_class_iou[c]);
                EXPECT_DOUBLE_EQ(*m.per_class_iou[c], ref.cls[c].iou());
            }
        }
        EXPECT_FALSE(m.per_class_iou[0]);
        EXPECT_NEAR(m.miou, sum / present, 1e-15);
        EXPECT_DOUBLE_EQ(m.iou, static_cast<double>(ref.occ.tp) / (ref.occ.tp + ref.occ.fp + ref.occ.fn));

        std::vector<std::uint8_t> mask(g.voxel_count());
        Rng rng(seed + 7);
        for (auto &v : mask) {
            v = rng.uniform() < 0.5;
        }
        const VoxelMetrics mm = voxel_metrics(a, b, std::span<const std::uint8_t>(mask));
        EXPECT_EQ(mm.occupancy, brute_force(a, b, &mask).occ);
    }
}

TEST(VoxelMetrics, Examples) {
    const GridGeometry g = cube(8);
    const OccupancyGrid box = synth_scene(g, scene::Box{{2, 2, 2}, {4, 5, 3}, 1});
    const VoxelMetrics same = voxel_metrics(box, box);
    EXPECT_EQ(same.iou, 1.0);
    EXPECT_EQ(same.miou, 1.0);
    EXPECT_EQ(voxel_metrics(make_label_grid(g), box).iou, 0.0);
    // Shifted by one voxel along x: {3..5} vs {2..4} in x, 4x2 in y, z.
    const OccupancyGrid shifted = synth_scene(g, scene::Box{{3, 2, 2}, {5, 5, 3}, 1});
    std::set<std::size_t> a;
    std::set<std::size_t> b;
    for (int z = 2; z <= 3; ++z) {
        for (int y = 2; y <= 5; ++y) {
            for (int x = 2; x <= 5; ++x) {
                if (x <= 4) {
                    a.insert(g.linear_index({x, y, z}));
                }
                if (x >= 3) {
                    b.insert(g.linear_index({x, y, z}));
                }
            }
        }
    }
    std::size_t inter = 0;
    for (auto i : a) {
        inter += b.count(i);
    }
    const double expected = static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
    EXPECT_DOUBLE_EQ(voxel_metrics(shifted, box).iou, expected);
    EXPECT_DOUBLE_EQ(expected, 0.5);
    // Both empty: nothing to count.
    EXPECT_EQ(voxel_metrics(make_label_grid(g), make_label_grid(g)).iou, 1.0);
    EXPECT_THROW(voxel_metrics(box, make_label_grid(cube(7))), GeometryError);
}

TEST(VoxelMetrics, SwapSymmetry) {
    const GridGeometry g = cube(6, 1.0f, 4);
    const OccupancyGrid a = random_labels(g, 1, 0.4);
    const OccupancyGrid b = random_labels(g, 2, 0.4);
    const VoxelMetrics ab = voxel_metrics(a, b);
    const VoxelMetrics ba = voxel_metrics(b, a);
    EXPECT_EQ(ab.iou, ba.iou);
    EXPECT_EQ(ab.occupancy.tp, ba.occupancy.tp);
    EXPECT_EQ(ab.occupancy.fp, ba.occupancy.fn);
}

TEST(FirstHit, AxisAligned) {
    const GridGeometry g = cube(1, 1.0f, 2);
    OccupancyGrid grid = synth_scene(g, scene::SingleVoxel{{0, 0, 0}, 1});
    const auto hit = first_hit(grid, {-1.0, 0.5, 0.5}, {1.0, 0.0, 0.0});
    ASSERT_TRUE(hit);
    EXPECT_DOUBLE_EQ(hit->distance, 1.0);
    EXPECT_EQ(hit->cls, 1);
    EXPECT_FALSE(first_hit(grid, {-1.0, 5.0, 0.5}, {1.0, 0.0, 0.0}));
    EXPECT_FALSE(first_hit(grid, {-1.0, 0.5, 0.5}, {-1.0, 0.0, 0.0}));
    // Starting inside the hit voxel gives distance 0.
    const auto inside = first_hit(grid, {0.5, 0.5, 0.5}, {0.0, 0.0, 1.0});
    ASSERT_TRUE(inside);
    EXPECT_EQ(inside->distance, 0.0);
}

TEST(FirstHit, MatchesFineStepMarch) {
    Rng rng(42);
    int hits = 0;
    for (int k = 0; k < 100; ++k) {
        GridGeometry g = cube(8, 0.5f, 4);
        g.origin = {-1.0f, 0.5f, -2.0f};
        const OccupancyGrid grid = random_labels(g, static_cast<std::uint64_t>(k), 0.05);
        const Eigen::Vector3d center = 0.5 * (g.min_corner() + g.max_corner());
        Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
        dir.normalize();
        const Eigen::Vector3d origin = center - 4.0 * dir + Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double step = 0.01 * g.voxel_size;
        const auto a = first_hit(grid, origin, dir);
        const auto b = march(grid, origin, dir, step);
        ASSERT_EQ(a.has_value(), b.has_value()) << "ray " << k;
        if (a) {
            ++hits;
            EXPECT_EQ(a->voxel, b->voxel) << "ray " << k;
            EXPECT_EQ(a->cls, b->cls);
            EXPECT_LE(a->distance, b->distance + 1e-9);
            EXPECT_GE(a->distance, b->distance - step - 1e-9);
        }
    }
    EXPECT_GT(hits, 20);
}

TEST(RaySet, FromCameraAndValidation) {
    const GridGeometry g = cube(8, 0.5f);
    const Camera bev = make_bev_camera(g, 2.0);
    const RaySet rays = rays_from_camera(bev);
    ASSERT_EQ(rays.size(), 64u);
    EXPECT_EQ(rays.provenance, RaySet::Provenance::from_camera);
    for (std::size_t i = 0; i < rays.size(); ++i) {
        EXPECT_TRUE(rays.directions[i].isApprox(Eigen::Vector3d(0, 0, -1), 1e-12));
    }
    EXPECT_EQ(rays_from_camera(bev, 2).size(), 16u);
    RaySet bad = rays;
    bad.directions[3] *= 1.01;
    EXPECT_THROW(bad.validate(), ArgumentError);
    const auto rig = surround_rig(g);
    EXPECT_EQ(rays_from_cameras(rig, 4).size(), 6u * 16u * 12u);
}

TEST(RayIou, IdentityIsOne) {
    const GridGeometry g = cube(8, 0.5f);
    const OccupancyGrid a = random_labels(g, 5, 0.1);
    const RaySet rays = rays_from_cameras(surround_rig(g), 2);
    const RayIouResult r = rayiou(a, a, rays);
    EXPECT_EQ(r.tolerances, kDefaultRayTolerances);
    for (double s : r.scores) {
        EXPECT_EQ(s, 1.0);
    }
    EXPECT_EQ(r.rayiou, 1.0);
}

TEST(RayIou, DisplacedFloor) {
    const GridGeometry g = cube(8, 0.5f);
    const OccupancyGrid gt = synth_scene(g, scene::FloorPlane{0, 1});
    const OccupancyGrid pred = synth_scene(g, scene::FloorPlane{5, 1});
    const RaySet rays = rays_from_camera(make_bev_camera(g, 2.0));
    for (std::size_t i = 0; i < rays.size(); ++i) {
        const auto hp = first_hit(pred, rays.origins[i], rays.directions[i]);
        const auto hg = first_hit(gt, rays.origins[i], rays.directions[i]);
        ASSERT_TRUE(hp && hg);
        EXPECT_NEAR(hg->distance - hp->distance, 2.5, 1e-9);
    }
    const RayIouResult r = rayiou(pred, gt, rays, {1.0, 2.0, 4.0});
    EXPECT_EQ(r.scores[0], 0.0);
    EXPECT_EQ(r.scores[1], 0.0);
    EXPECT_EQ(r.scores[2], 1.0);
    EXPECT_NEAR(r.rayiou, 1.0 / 3.0, 1e-15);
}

TEST(RayIou, MonotoneAndSwapSymmetric) {
    const GridGeometry g = cube(8, 0.5f);
    const RaySet rays = rays_from_cameras(surround_rig(g), 2);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const OccupancyGrid a = random_labels(g, seed, 0.08);
        const OccupancyGrid b = random_labels(g, seed + 50, 0.08);
        const std::vector<double> tol{0.25, 0.5, 1.0, 2.0, 4.0};
        const RayIouResult ab = rayiou(a, b, rays, tol);
        const RayIouResult ba = rayiou(b, a, rays, tol);
        for (std::size_t k = 0; k < tol.size(); ++k) {
            if (k > 0) {
                EXPECT_GE(ab.scores[k], ab.scores[k - 1]);
            }
            EXPECT_EQ(ab.counts[k].tp, ba.counts[k].tp);
            const auto &c = ab.counts[k];
            EXPECT_DOUBLE_EQ(ab.scores[k], c.iou());
            EXPECT_GE(ab.scores[k], 0.0);
            EXPECT_LE(ab.scores[k], 1.0);
        }
    }
}

TEST(RayIou, Errors) {
    const GridGeometry g = cube(4);
    const OccupancyGrid a = make_label_grid(g);
    EXPECT_THROW(rayiou(a, a, RaySet{}), ArgumentError);
    const RaySet rays = rays_from_camera(make_bev_camera(g, 1.0));
    EXPECT_THROW(rayiou(a, a, rays, {}), ArgumentError);
    EXPECT_THROW(rayiou(a, a, rays, {1.0, 0.0}), ArgumentError);
}

TEST(BevMetrics, Examples) {
    const GridGeometry g = cube(8, 0.5f);
    const OccupancyGrid box = synth_scene(g, scene::Box{{2, 2, 1}, {5, 4, 3}, 3});
    const BevMetrics same = bev_metrics(box, box, 2.0);
    EXPECT_EQ(same.iou, 1.0);
    EXPECT_EQ(same.miou, 1.0);
    OccupancyGrid column = make_label_grid(g);
    for (int z = 0; z < 8; ++z) {
        column.labels()[g.linear_index({3, 3, z})] = 2;
    }
    EXPECT_EQ(bev_metrics(make_label_grid(g), column, 2.0).iou, 0.0);

    OccupancyGrid stack = make_label_grid(g);
    stack.labels()[g.linear_index({4, 1, 2})] = 1;
    stack.labels()[g.linear_index({4, 1, 3})] = 2;
    const auto map = bev_class_map(stack, 2.0);
    // Row index grows with decreasing world y.
    EXPECT_EQ(map[static_cast<std::size_t>(8 - 1 - 1) * 8 + 4], 2);
}

TEST(MetricsReport, JsonAndCsv) {
    const GridGeometry g = cube(8, 0.5f);
    const OccupancyGrid a = synth_scene(g, scene::Box{{2, 2, 1}, {5, 4, 3}, 3});
    const RaySet rays = rays_from_cameras(surround_rig(g), 4);
    const MetricsReport r = evaluate(a, a, rays, {0.5, 1.0}, 2.0);
    const auto j = r.to_json();
    EXPECT_EQ(j.at("iou").get<double>(), 1.0);
    EXPECT_TRUE(j.at("rayiou_at").contains("0.5"));
    EXPECT_TRUE(j.at("rayiou_at").contains("1"));
    const MetricsReport d = evaluate(a, a, rays, kDefaultRayTolerances, 2.0);
    EXPECT_EQ(d.csv_header(), "iou,miou,rayiou,rayiou@1,rayiou@2,rayiou@4,bev_iou,bev_miou");
    EXPECT_EQ(d.csv_row(), "1.000000,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000");
}
