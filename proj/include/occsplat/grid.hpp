// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_GRID_HPP
#define OCCSPLAT_GRID_HPP

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace occsplat {

using Index3 = std::array<int, 3>;

/// Placement and labelling of a dense voxel grid in the world frame
/// (right-handed, z up, meters). Voxels are cubic with side `voxel_size`.
struct GridGeometry {
    Index3 dims{1, 1, 1};
    std::array<float, 3> origin{0.0f, 0.0f, 0.0f}; // minimum corner
    float voxel_size = 1.0f;
    int num_classes = 2;
    int empty_class = 0;

    /// Throws ArgumentError when an invariant does not hold.
    void validate() const;

    std::size_t
    voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }

    /// Linear index in x-fastest, then y, then z order.
    std::size_t
    linear_index(const Index3 &idx) const {
        return static_cast<std::size_t>(idx[0]) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(idx[1]) + static_cast<std::size_t>(dims[1]) * idx[2]);
    }

    Index3
    unravel(std::size_t linear) const {
        const auto nx = static_cast<std::size_t>(dims[0]);
        const auto ny = static_cast<std::size_t>(dims[1]);
        return {static_cast<int>(linear % nx), static_cast<int>((linear / nx) % ny),
                static_cast<int>(linear / (nx * ny))};
    }

    bool
    contains(const Index3 &idx) const {
        return idx[0] >= 0 && idx[1] >= 0 && idx[2] >= 0 && idx[0] < dims[0] && idx[1] < dims[1] &&
               idx[2] < dims[2];
    }

    Eigen::Vector3d min_corner() const;
    Eigen::Vector3d max_corner() const;
    Eigen::Vector3d extent() const;

    bool operator==(const GridGeometry &) const = default;
};

/// World-space center of a voxel. Throws ArgumentError if `index` is outside the grid.
Eigen::Vector3d voxel_center(const GridGeometry &geometry, const Index3 &index);

/// Integer voxel that contains a world point, or nothing when the point is outside.
std::optional<Index3> voxel_of(const GridGeometry &geometry, const Eigen::Vector3d &point);

using Labels = std::vector<std::uint16_t>;
/// `num_classes` unnormalized scores per voxel, class-fastest.
using Logits = std::vector<float>;

struct OccupancyGrid {
    GridGeometry geometry;
    std::variant<Labels, Logits> payload;

    bool
    has_labels() const {
        return std::holds_alternative<Labels>(payload);
    }
    bool
    has_logits() const {
        return std::holds_alternative<Logits>(payload);
    }

    /// Throw ArgumentError when the payload is of the other kind.
    const Labels &labels() const;
    Labels &labels();
    const Logits &logits() const;
    Logits &logits();

    std::uint16_t
    label_at(const Index3 &idx) const {
        return labels()[geometry.linear_index(idx)];
    }

    /// Checks payload size, label range and logit finiteness.
    void validate() const;

    bool operator==(const OccupancyGrid &) const = default;
};

OccupancyGrid make_label_grid(const GridGeometry &geometry);

/// OCCG binary format, see README. All integers and floats little-endian.
inline constexpr char kOccgMagic[4] = {'O', 'C', 'C', 'G'};
inline constexpr std::uint32_t kOccgVersion = 1;
inline constexpr std::size_t kOccgHeaderBytes = 45;

std::vector<std::uint8_t> encode_grid(const OccupancyGrid &grid);
OccupancyGrid decode_grid(const std::vector<std::uint8_t> &bytes);

OccupancyGrid load_grid(const std::filesystem::path &path);
void save_grid(const OccupancyGrid &grid, const std::filesystem::path &path);

// Synthetic scenes used as fixtures by tests, the CLI and benchmarks.
namespace scene {
struct Empty {};
struct SingleVoxel {
    Index3 index;
    int cls;
};
struct FloorPlane {
    int z;
    int cls;
};
/// Inclusive bounds.
struct Box {
    Index3 min;
    Index3 max;
    int cls;
};
/// Two full y-z planes at x = front_x and x = back_x.
struct TwoWalls {
    int front_x;
    int back_x;
    int front_cls;
    int back_cls;
};
} // namespace scene

using SceneSpec =
    std::variant<scene::Empty, scene::SingleVoxel, scene::FloorPlane, scene::Box, scene::TwoWalls>;

/// Parses "empty", "single_voxel:x,y,z:cls", "floor:z:cls", "box:x,y,z:x,y,z:cls",
/// "two_walls:front_x:back_x:front_cls:back_cls".
SceneSpec parse_scene_spec(const std::string &text);

OccupancyGrid synth_scene(const GridGeometry &geometry, const SceneSpec &spec);

/// Hard one-hot logits: +magnitude on the label, -magnitude elsewhere.
OccupancyGrid logits_from_labels(const OccupancyGrid &labels, float magnitude = 20.0f);

/// I.i.d. normal logits with the given standard deviation, deterministic in `seed`.
OccupancyGrid random_logits(const GridGeometry &geometry, std::uint64_t seed, double stddev = 1.0);

/// Argmax class per voxel.
OccupancyGrid argmax_labels(const GridGeometry &geometry, const std::vector<double> &logits);

/// 64-bit FNV-1a over the encoded file bytes; stable across runs and platforms.
std::uint64_t content_hash(const OccupancyGrid &grid);

} // namespace occsplat

#endif // OCCSPLAT_GRID_HPP
