// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_IMAGE_IO_HPP
#define OCCSPLAT_IMAGE_IO_HPP

#include "occsplat/renderer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace occsplat {

/// Single-channel little-endian PFM ("Pf", scale -1), rows stored bottom to top.
std::string encode_pfm(int width, int height, const std::vector<double> &values);
void write_pfm(const std::filesystem::path &path, int width, int height, const std::vector<double> &values);

struct FloatImage {
    int width = 0;
    int height = 0;
    std::vector<float> values; // row-major, top row first
};
FloatImage read_pfm(const std::filesystem::path &path);

/// Binary PGM of class indices; 16-bit big-endian samples when classes exceed 256.
std::string encode_pgm(int width, int height, const std::vector<int> &classes, int num_classes);
void write_pgm(const std::filesystem::path &path, int width, int height, const std::vector<int> &classes,
               int num_classes);

struct LabelImage {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<int> values;
};
LabelImage read_pgm(const std::filesystem::path &path);

/// Raw float32 class probabilities (plane-major) plus a JSON sidecar at
/// `path` with ".json" appended.
void write_probabilities(const std::filesystem::path &path, const RenderedView &view);

} // namespace occsplat

#endif // OCCSPLAT_IMAGE_IO_HPP
