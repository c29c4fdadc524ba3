// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/error.hpp"
#include "occsplat/gaussians.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace occsplat;

namespace {

GridGeometry
cube(int n, float voxel = 1.0f, int classes = 4, int empty = 0) {
    GridGeometry g;
    g.dims = {n, n, n};
    g.voxel_size = voxel;
    g.num_classes = classes;
    g.empty_class = empty;
    return g;
}

} // namespace

TEST(DefaultScale, HalfVoxel) {
    EXPECT_DOUBLE_EQ(default_scale(cube(1, 0.5f)), 0.25);
    EXPECT_NEAR(default_scale(cube(1, 0.4f)), 0.2, 1e-7);
    EXPECT_NEAR(default_scale(cube(1, 0.2f)), 0.1, 1e-7);
    EXPECT_DOUBLE_EQ(default_scale(cube(1, 1.0f)), 0.5);
}

TEST(GaussianizePrediction, EqualLogits) {
    const GridGeometry g = cube(1);
    const std::vector<double> logits{0.3, 0.3, 0.3, 0.3};
    const GaussianSet set = gaussianize_prediction(g, logits, 0.5);
    ASSERT_EQ(set.size(), 1u);
    for (double p : set.probs(0)) {
        EXPECT_NEAR(p, 0.25, 1e-12);
    }
    EXPECT_NEAR(set.opacity[0], 0.75, 1e-12);
    EXPECT_EQ(set.mode, GaussianMode::prediction);
}

TEST(GaussianizePrediction, SaturatedEmpty) {
    const GridGeometry g = cube(1);
    const std::vector<double> logits{20.0, 0.0, 0.0, 0.0};
    EXPECT_LT(gaussianize_prediction(g, logits, 0.5).opacity[0], 1e-8);
}

TEST(GaussianizePrediction, MatchesIndependentSoftmax) {
    const GridGeometry g = cube(3, 0.4f, 5, 2);
    const OccupancyGrid lg = random_logits(g, 4, 3.0);
    const GaussianSet set = gaussianize_prediction(lg, default_scale(g));
    ASSERT_EQ(set.size(), g.voxel_count());
    for (std::size_t i = 0; i < set.size(); ++i) {
        double z = 0.0;
        for (int c = 0; c < 5; ++c) {
            z += std::exp(static_cast<double>(lg.logits()[i * 5 + c]));
        }
        double sum = 0.0;
        for (int c = 0; c < 5; ++c) {
            const double p = std::exp(static_cast<double>(lg.logits()[i * 5 + c])) / z;
            EXPECT_NEAR(set.probs(i)[c], p, 1e-12);
            sum += set.probs(i)[c];
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        EXPECT_NEAR(set.opacity[i], 1.0 - set.probs(i)[2], 1e-15);
        EXPECT_EQ(set.source[i], i);
        const auto center = voxel_center(g, g.unravel(i));
        EXPECT_TRUE(set.centers[i].isApprox(center));
    }
}

TEST(GaussianizePrediction, Errors) {
    const GridGeometry g = cube(2);
    EXPECT_THROW(gaussianize_prediction(make_label_grid(g), 0.5), ArgumentError);
    const std::vector<double> short_logits(3);
    EXPECT_THROW(gaussianize_prediction(g, short_logits, 0.5), GeometryError);
    const auto lg = to_double(random_logits(g, 1).logits());
    EXPECT_THROW(gaussianize_prediction(g, lg, 0.0), ArgumentError);
}

TEST(GaussianizeGroundTruth, Examples) {
    const GridGeometry g = cube(2);
    const GaussianSet empty = gaussianize_ground_truth(make_label_grid(g), 0.5);
    ASSERT_EQ(empty.size(), 8u);
    for (double o : empty.opacity) {
        EXPECT_EQ(o, 0.0);
    }

    const GaussianSet single = gaussianize_ground_truth(synth_scene(g, scene::SingleVoxel{{0, 0, 0}, 3}), 0.5);
    int opaque = 0;
    for (std::size_t i = 0; i < single.size(); ++i) {
        opaque += single.opacity[i] == 1.0;
    }
    EXPECT_EQ(opaque, 1);
    EXPECT_EQ(single.opacity[0], 1.0);
    EXPECT_EQ(single.probs(0)[3], 1.0);
    EXPECT_EQ(single.probs(0)[0] + single.probs(0)[1] + single.probs(0)[2], 0.0);
    EXPECT_EQ(single.mode, GaussianMode::ground_truth);

    const GaussianSet floor = gaussianize_ground_truth(synth_scene(cube(8), scene::FloorPlane{0, 1}), 0.5);
    int count = 0;
    for (double o : floor.opacity) {
        EXPECT_TRUE(o == 0.0 || o == 1.0);
        count += o == 1.0;
    }
    EXPECT_EQ(count, 64);

    EXPECT_THROW(gaussianize_ground_truth(random_logits(g, 1), 0.5), ArgumentError);
}

TEST(GaussianizeGroundTruth, Idempotent) {
    const auto grid = synth_scene(cube(4), scene::Box{{1, 1, 1}, {2, 3, 2}, 2});
    const GaussianSet a = gaussianize_ground_truth(grid, 0.5);
    const GaussianSet b = gaussianize_ground_truth(grid, 0.5);
    EXPECT_EQ(a.class_probs, b.class_probs);
    EXPECT_EQ(a.opacity, b.opacity);
    EXPECT_EQ(a.centers, b.centers);
}

TEST(BackpropToLogits, MatchesFiniteDifferences) {
    const GridGeometry g = cube(2, 1.0f, 4, 1);
    auto logits = to_double(random_logits(g, 9, 1.5).logits());
    // Arbitrary linear functional of probs and opacity.
    std::vector<double> wp(logits.size());
    std::vector<double> wo(g.voxel_count());
    for (std::size_t i = 0; i < wp.size(); ++i) {
        wp[i] = std::sin(1.0 + static_cast<double>(i));
    }
    for (std::size_t i = 0; i < wo.size(); ++i) {
        wo[i] = std::cos(2.0 * static_cast<double>(i));
    }
    auto f = [&](const std::vector<double> &x) {
        const GaussianSet s = gaussianize_prediction(g, x, 0.5);
        double v = 0.0;
        for (std::size_t i = 0; i < wp.size(); ++i) {
            v += wp[i] * s.class_probs[i];
        }
        for (std::size_t i = 0; i < wo.size(); ++i) {
            v += wo[i] * s.opacity[i];
        }
        return v;
    };
    const GaussianSet set = gaussianize_prediction(g, logits, 0.5);
    const auto grad = backprop_to_logits(set, wp, wo);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double h = 1e-5;
        auto x = logits;
        x[i] += h;
        const double up = f(x);
        x[i] -= 2 * h;
        const double down = f(x);
        EXPECT_NEAR(grad[i], (up - down) / (2 * h), 1e-8);
    }
}
