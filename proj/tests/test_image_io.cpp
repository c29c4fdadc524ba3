// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/error.hpp"
#include "occsplat/image_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <fstream>

using namespace occsplat;

namespace {

std::filesystem::path
temp_file(const std::string &name) {
    return std::filesystem::temp_directory_path() / ("occsplat_test_" + name);
}

} // namespace

TEST(Pfm, RoundTripAndRowOrder) {
    const std::vector<double> values{1.0, 2.0, 3.0, 4.5, 5.25, 6.0};
    const std::string bytes = encode_pfm(3, 2, values);
    EXPECT_EQ(bytes.substr(0, 3), "Pf\n");
    // Bottom row first on disk.
    float first = 0.0f;
    const std::size_t data = bytes.size() - 6 * sizeof(float);
    std::memcpy(&first, bytes.data() + data, sizeof(float));
    EXPECT_EQ(first, 4.5f);

    const auto path = temp_file("rt.pfm");
    write_pfm(path, 3, 2, values);
    const FloatImage img = read_pfm(path);
    EXPECT_EQ(img.width, 3);
    EXPECT_EQ(img.height, 2);
    for (std::size_t i = 0; i < values.size(); ++i) {
        EXPECT_EQ(img.values[i], static_cast<float>(values[i]));
    }
    std::filesystem::remove(path);
    EXPECT_THROW(read_pfm(temp_file("missing.pfm")), IoError);
}

TEST(Pgm, EightAndSixteenBit) {
    const std::vector<int> classes{0, 3, 17, 2};
    const auto path = temp_file("rt.pgm");
    write_pgm(path, 2, 2, classes, 18);
    LabelImage img = read_pgm(path);
    EXPECT_EQ(img.maxval, 17);
    EXPECT_EQ(img.values, classes);

    const std::vector<int> wide{0, 300, 511, 7};
    write_pgm(path, 4, 1, wide, 512);
    img = read_pgm(path);
    EXPECT_EQ(img.maxval, 511);
    EXPECT_EQ(img.values, wide);
    const std::string raw = encode_pgm(4, 1, wide, 512);
    // Big-endian 300 = 0x012C.
    EXPECT_EQ(static_cast<unsigned char>(raw[raw.size() - 6]), 0x01);
    EXPECT_EQ(static_cast<unsigned char>(raw[raw.size() - 5]), 0x2C);
    std::filesystem::remove(path);
}

TEST(Probabilities, RawWithSidecar) {
    RenderedView v;
    v.width = 2;
    v.height = 1;
    v.num_classes = 2;
    v.sem = {0.25, 0.5, 0.75, 0.5};
    v.depth = {1.0, 2.0};
    const auto path = temp_file("probs.f32");
    write_probabilities(path, v);
    EXPECT_EQ(std::filesystem::file_size(path), 4 * sizeof(float));
    std::ifstream in(path.string() + ".json");
    ASSERT_TRUE(in.good());
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + ".json");
}
