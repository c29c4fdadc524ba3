// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/error.hpp"
#include "occsplat/gaussians.hpp"
#include "occsplat/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

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

std::size_t
occupied(const OccupancyGrid &grid) {
    std::size_t n = 0;
    for (auto v : grid.labels()) {
        n += v != grid.geometry.empty_class;
    }
    return n;
}

std::filesystem::path
temp_file(const std::string &name) {
    return std::filesystem::temp_directory_path() / ("occsplat_test_" + name);
}

} // namespace

TEST(GridGeometry, RejectsInvalid) {
    GridGeometry g = cube(2);
    g.dims[1] = 0;
    EXPECT_THROW(g.validate(), ArgumentError);
    g = cube(2);
    g.voxel_size = 0.0f;
    EXPECT_THROW(g.validate(), ArgumentError);
    g = cube(2);
    g.empty_class = 4;
    EXPECT_THROW(g.validate(), ArgumentError);
    g = cube(2);
    g.num_classes = 0;
    EXPECT_THROW(g.validate(), ArgumentError);
}

TEST(GridGeometry, LinearIndexIsXFastest) {
    GridGeometry g;
    g.dims = {3, 4, 5};
    EXPECT_EQ(g.linear_index({1, 0, 0}), 1u);
    EXPECT_EQ(g.linear_index({0, 1, 0}), 3u);
    EXPECT_EQ(g.linear_index({0, 0, 1}), 12u);
    for (std::size_t i = 0; i < g.voxel_count(); ++i) {
        EXPECT_EQ(g.linear_index(g.unravel(i)), i);
    }
}

TEST(VoxelCenter, Examples) {
    const auto a = voxel_center(cube(1), {0, 0, 0});
    EXPECT_DOUBLE_EQ(a.x(), 0.5);
    EXPECT_DOUBLE_EQ(a.y(), 0.5);
    EXPECT_DOUBLE_EQ(a.z(), 0.5);

    GridGeometry surround;
    surround.dims = {200, 200, 16};
    surround.origin = {-50.0f, -50.0f, -5.0f};
    surround.voxel_size = 0.5f;
    const auto b = voxel_center(surround, {0, 0, 0});
    EXPECT_NEAR(b.x(), -49.75, 1e-9);
    EXPECT_NEAR(b.y(), -49.75, 1e-9);
    EXPECT_NEAR(b.z(), -4.75, 1e-9);

    GridGeometry kitti;
    kitti.dims = {256, 256, 32};
    kitti.voxel_size = 0.2f;
    const auto c = voxel_center(kitti, {255, 255, 31});
    EXPECT_NEAR(c.x(), 51.1, 1e-5);
    EXPECT_NEAR(c.y(), 51.1, 1e-5);
    EXPECT_NEAR(c.z(), 6.3, 1e-5);

    EXPECT_THROW(voxel_center(kitti, {256, 0, 0}), ArgumentError);
    EXPECT_THROW(voxel_center(kitti, {0, -1, 0}), ArgumentError);
}

TEST(VoxelCenter, AdjacentCentersDifferByVoxelSize) {
    GridGeometry g = cube(4, 0.4f);
    g.origin = {-1.0f, 2.0f, 0.5f};
    for (int k = 0; k < 3; ++k) {
        Index3 a{1, 2, 1};
        Index3 b = a;
        b[k] += 1;
        const Eigen::Vector3d d = voxel_center(g, b) - voxel_center(g, a);
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(d[j], j == k ? 0.4 : 0.0, 1e-6);
        }
    }
}

TEST(VoxelOf, InvertsVoxelCenter) {
    GridGeometry g = cube(5, 0.5f);
    g.origin = {-1.0f, -1.0f, 0.0f};
    for (std::size_t i = 0; i < g.voxel_count(); ++i) {
        const auto idx = g.unravel(i);
        const auto hit = voxel_of(g, voxel_center(g, idx));
        ASSERT_TRUE(hit);
        EXPECT_EQ(*hit, idx);
    }
    EXPECT_FALSE(voxel_of(g, Eigen::Vector3d(-1.01, 0.0, 0.0)));
    EXPECT_FALSE(voxel_of(g, Eigen::Vector3d(0.0, 0.0, 2.5)));
}

TEST(Occg, MinimalFile) {
    OccupancyGrid grid = make_label_grid(cube(1, 1.0f, 2));
    const auto bytes = encode_grid(grid);
    EXPECT_EQ(bytes.size(), kOccgHeaderBytes + 2);
    EXPECT_EQ(std::memcmp(bytes.data(), "OCCG", 4), 0);
    const OccupancyGrid back = decode_grid(bytes);
    ASSERT_TRUE(back.has_labels());
    EXPECT_EQ(back.labels(), Labels{0});
}

TEST(Occg, LogitsGrid) {
    GridGeometry g = cube(2, 1.0f, 3);
    Logits lg(24);
    for (std::size_t i = 0; i < lg.size(); ++i) {
        lg[i] = static_cast<float>(i) * 0.5f - 3.0f;
    }
    const OccupancyGrid grid{g, lg};
    const OccupancyGrid back = decode_grid(encode_grid(grid));
    ASSERT_TRUE(back.has_logits());
    EXPECT_EQ(back, grid);
}

TEST(Occg, HeaderLayout) {
    GridGeometry g;
    g.dims = {3, 2, 1};
    g.origin = {-1.5f, 2.0f, 0.25f};
    g.voxel_size = 0.4f;
    g.num_classes = 5;
    g.empty_class = 4;
    const auto bytes = encode_grid(make_label_grid(g));
    auto u32 = [&](std::size_t off) {
        std::uint32_t v;
        std::memcpy(&v, bytes.data() + off, 4);
        return v;
    };
    auto f32 = [&](std::size_t off) {
        float v;
        std::memcpy(&v, bytes.data() + off, 4);
        return v;
    };
    EXPECT_EQ(u32(4), 1u);
    EXPECT_EQ(bytes[8], 0);
    EXPECT_EQ(u32(9), 3u);
    EXPECT_EQ(u32(13), 2u);
    EXPECT_EQ(u32(17), 1u);
    EXPECT_EQ(f32(21), -1.5f);
    EXPECT_EQ(f32(25), 2.0f);
    EXPECT_EQ(f32(29), 0.25f);
    EXPECT_EQ(f32(33), 0.4f);
    EXPECT_EQ(u32(37), 5u);
    EXPECT_EQ(u32(41), 4u);
    EXPECT_EQ(bytes.size(), kOccgHeaderBytes + 6 * 2);
}

TEST(Occg, ErrorsCarryOffsets) {
    OccupancyGrid grid = synth_scene(cube(2), scene::SingleVoxel{{1, 1, 1}, 2});
    const auto good = encode_grid(grid);

    auto bad = good;
    bad[0] = 'X';
    try {
        decode_grid(bad);
        FAIL();
    } catch (const FormatError &e) {
        EXPECT_EQ(e.offset(), 0u);
    }

    bad = good;
    bad[4] = 9;
    try {
        decode_grid(bad);
        FAIL();
    } catch (const FormatError &e) {
        EXPECT_EQ(e.offset(), 4u);
    }

    // Header declares 8 voxels, payload holds 7.
    bad = good;
    bad.resize(bad.size() - 2);
    try {
        decode_grid(bad);
        FAIL();
    } catch (const FormatError &e) {
        EXPECT_EQ(e.offset(), bad.size());
    }

    bad = good;
    bad.push_back(0);
    EXPECT_THROW(decode_grid(bad), FormatError);

    bad = good;
    const std::size_t last = kOccgHeaderBytes + 7 * 2;
    bad[last] = 7; // label 7 with 4 classes
    try {
        decode_grid(bad);
        FAIL();
    } catch (const FormatError &e) {
        EXPECT_EQ(e.offset(), last);
    }

    OccupancyGrid lg{cube(1, 1.0f, 2), Logits{0.0f, 1.0f}};
    auto nan_bytes = encode_grid(lg);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(nan_bytes.data() + kOccgHeaderBytes + 4, &nan, 4);
    try {
        decode_grid(nan_bytes);
        FAIL();
    } catch (const FormatError &e) {
        EXPECT_EQ(e.offset(), kOccgHeaderBytes + 4);
    }

    EXPECT_THROW(decode_grid(std::vector<std::uint8_t>(10, 0)), FormatError);
}

TEST(Occg, SaveLoadRoundTrip) {
    const auto path = temp_file("roundtrip.occg");
    const OccupancyGrid grid = synth_scene(cube(4), scene::Box{{0, 1, 1}, {2, 3, 2}, 3});
    save_grid(grid, path);
    EXPECT_EQ(load_grid(path), grid);
    const auto first = encode_grid(load_grid(path));
    save_grid(load_grid(path), path);
    EXPECT_EQ(encode_grid(load_grid(path)), first);

    const OccupancyGrid lg{cube(1, 1.0f, 3), Logits{-1.5f, 0.0f, 2.25f}};
    save_grid(lg, path);
    EXPECT_EQ(load_grid(path).logits(), (Logits{-1.5f, 0.0f, 2.25f}));
    std::filesystem::remove(path);

    EXPECT_THROW(save_grid(grid, "/nonexistent_dir/sub/x.occg"), IoError);
    EXPECT_THROW(load_grid("/nonexistent_dir/x.occg"), IoError);
}

TEST(Synth, Counts) {
    const GridGeometry g = cube(8);
    EXPECT_EQ(occupied(synth_scene(g, scene::Empty{})), 0u);
    const auto single = synth_scene(g, scene::SingleVoxel{{4, 4, 4}, 2});
    EXPECT_EQ(occupied(single), 1u);
    EXPECT_EQ(single.label_at({4, 4, 4}), 2);
    EXPECT_EQ(occupied(synth_scene(g, scene::TwoWalls{2, 6, 1, 2})), 128u);
    EXPECT_EQ(occupied(synth_scene(g, scene::FloorPlane{0, 1})), 64u);
    EXPECT_EQ(occupied(synth_scene(g, scene::Box{{1, 1, 1}, {3, 4, 5}, 1})), 3u * 4u * 5u);
}

TEST(Synth, DeterministicAndHashStable) {
    const GridGeometry g = cube(8);
    const auto a = synth_scene(g, scene::TwoWalls{2, 6, 1, 2});
    const auto b = synth_scene(g, scene::TwoWalls{2, 6, 1, 2});
    EXPECT_EQ(encode_grid(a), encode_grid(b));
    EXPECT_EQ(content_hash(a), content_hash(b));
    EXPECT_NE(content_hash(a), content_hash(synth_scene(g, scene::TwoWalls{2, 5, 1, 2})));
}

TEST(Synth, RejectsOutOfBounds) {
    const GridGeometry g = cube(4);
    EXPECT_THROW(synth_scene(g, scene::SingleVoxel{{4, 0, 0}, 1}), ArgumentError);
    EXPECT_THROW(synth_scene(g, scene::FloorPlane{-1, 1}), ArgumentError);
    EXPECT_THROW(synth_scene(g, scene::Box{{0, 0, 0}, {1, 5, 1}, 1}), ArgumentError);
    EXPECT_THROW(synth_scene(g, scene::SingleVoxel{{0, 0, 0}, 4}), ArgumentError);
}

TEST(Synth, ParseSceneSpec) {
    const GridGeometry g = cube(8);
    EXPECT_EQ(synth_scene(g, parse_scene_spec("two_walls:2:6:1:2")),
              synth_scene(g, scene::TwoWalls{2, 6, 1, 2}));
    EXPECT_EQ(synth_scene(g, parse_scene_spec("box:1,2,3:4,5,6:3")),
              synth_scene(g, scene::Box{{1, 2, 3}, {4, 5, 6}, 3}));
    EXPECT_EQ(synth_scene(g, parse_scene_spec("single_voxel:1,2,3:2")),
              synth_scene(g, scene::SingleVoxel{{1, 2, 3}, 2}));
    EXPECT_EQ(synth_scene(g, parse_scene_spec("floor:0:1")), synth_scene(g, scene::FloorPlane{0, 1}));
    EXPECT_EQ(synth_scene(g, parse_scene_spec("empty")), make_label_grid(g));
    EXPECT_THROW(parse_scene_spec("pyramid:1"), ArgumentError);
    EXPECT_THROW(parse_scene_spec("box:1,2:3,4,5:1"), ArgumentError);
    EXPECT_THROW(parse_scene_spec("floor:x:1"), ArgumentError);
}

TEST(Logits, HelpersAgree) {
    const GridGeometry g = cube(4);
    const auto labels = synth_scene(g, scene::Box{{0, 0, 0}, {1, 2, 3}, 3});
    const auto lg = logits_from_labels(labels, 20.0f);
    EXPECT_EQ(argmax_labels(g, to_double(lg.logits())), labels);
}

TEST(Logits, RandomIsSeeded) {
    const GridGeometry g = cube(3);
    EXPECT_EQ(random_logits(g, 5), random_logits(g, 5));
    EXPECT_NE(random_logits(g, 5), random_logits(g, 6));
    double sum = 0.0;
    double sq = 0.0;
    const auto lg = random_logits(cube(16), 1, 2.0).logits();
    for (float v : lg) {
        sum += v;
        sq += static_cast<double>(v) * v;
    }
    const double mean = sum / lg.size();
    EXPECT_NEAR(mean, 0.0, 0.05);
    EXPECT_NEAR(std::sqrt(sq / lg.size() - mean * mean), 2.0, 0.05);
}
