// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/image_io.hpp"

#include "occsplat/error.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace occsplat {

namespace {

void
write_bytes(const std::filesystem::path &path, const std::string &bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::string
read_bytes(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void
check_size(int width, int height, std::size_t n) {
    if (width <= 0 || height <= 0 || n != static_cast<std::size_t>(width) * height) {
        throw ArgumentError("image buffer does not match its dimensions");
    }
}

/// Parses a netpbm-style header of `fields` whitespace-separated tokens
/// (magic included) followed by a single whitespace byte.
std::vector<std::string>
parse_header(const std::string &bytes, int fields, std::size_t &pos) {
    std::vector<std::string> tokens;
    pos = 0;
    while (static_cast<int>(tokens.size()) < fields) {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) {
            ++pos;
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
            ++pos;
        }
        if (start == pos) {
            throw FormatError("truncated image header", pos);
        }
        tokens.push_back(bytes.substr(start, pos - start));
    }
    if (pos >= bytes.size()) {
        throw FormatError("truncated image header", pos);
    }
    ++pos;
    return tokens;
}

} // namespace

std::string
encode_pfm(int width, int height, const std::vector<double> &values) {
    check_size(width, height, values.size());
    std::string out = "Pf\n" + std::to_string(width) + " " + std::to_string(height) + "\n-1.0\n";
    const std::size_t header = out.size();
    out.resize(header + values.size() * sizeof(float));
    char *dst = out.data() + header;
    for (int y = height - 1; y >= 0; --y) {
        for (int x = 0; x < width; ++x) {
            const auto f = static_cast<float>(values[static_cast<std::size_t>(y) * width + x]);
            std::memcpy(dst, &f, sizeof(float));
            dst += sizeof(float);
        }
    }
    return out;
}

void
write_pfm(const std::filesystem::path &path, int width, int height, const std::vector<double> &values) {
    write_bytes(path, encode_pfm(width, height, values));
}

FloatImage
read_pfm(const std::filesystem::path &path) {
    const std::string bytes = read_bytes(path);
    std::size_t pos = 0;
    const auto tok = parse_header(bytes, 4, pos);
    if (tok[0] != "Pf") {
        throw FormatError("not a single-channel PFM", 0);
    }
    FloatImage img;
    img.width = std::stoi(tok[1]);
    img.height = std::stoi(tok[2]);
    if (std::stod(tok[3]) >= 0.0) {
        throw FormatError("big-endian PFM is not supported", pos);
    }
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    if (bytes.size() - pos != n * sizeof(float)) {
        throw FormatError("PFM payload size mismatch", bytes.size());
    }
    img.values.resize(n);
    for (int y = img.height - 1; y >= 0; --y) {
        std::memcpy(img.values.data() + static_cast<std::size_t>(y) * img.width, bytes.data() + pos,
                    static_cast<std::size_t>(img.width) * sizeof(float));
        pos += static_cast<std::size_t>(img.width) * sizeof(float);
    }
    return img;
}

std::string
encode_pgm(int width, int height, const std::vector<int> &classes, int num_classes) {
    check_size(width, height, classes.size());
    const bool wide = num_classes > 256;
    const int maxval = std::max(1, num_classes - 1);
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n" +
                      std::to_string(maxval) + "\n";
    for (int c : classes) {
        if (c < 0 || c >= num_classes) {
            throw ArgumentError("class index out of range in label image");
        }
        if (wide) {
            out.push_back(static_cast<char>((c >> 8) & 0xff));
        }
        out.push_back(static_cast<char>(c & 0xff));
    }
    return out;
}

void
write_pgm(const std::filesystem::path &path, int width, int height, const std::vector<int> &classes,
          int num_classes) {
    write_bytes(path, encode_pgm(width, height, classes, num_classes));
}

LabelImage
read_pgm(const std::filesystem::path &path) {
    const std::string bytes = read_bytes(path);
    std::size_t pos = 0;
    const auto tok = parse_header(bytes, 4, pos);
    if (tok[0] != "P5") {
        throw FormatError("not a binary PGM", 0);
    }
    LabelImage img;
    img.width = std::stoi(tok[1]);
    img.height = std::stoi(tok[2]);
    img.maxval = std::stoi(tok[3]);
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    const std::size_t bpp = img.maxval > 255 ? 2 : 1;
    if (bytes.size() - pos != n * bpp) {
        throw FormatError("PGM payload size mismatch", bytes.size());
    }
    img.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto *b = reinterpret_cast<const unsigned char *>(bytes.data() + pos + i * bpp);
        img.values[i] = bpp == 2 ? (b[0] << 8) | b[1] : b[0];
    }
    return img;
}

void
write_probabilities(const std::filesystem::path &path, const RenderedView &view) {
    std::string raw(view.sem.size() * sizeof(float), '\0');
    for (std::size_t i = 0; i < view.sem.size(); ++i) {
        const auto f = static_cast<float>(view.sem[i]);
        std::memcpy(raw.data() + i * sizeof(float), &f, sizeof(float));
    }
    write_bytes(path, raw);
    const nlohmann::json meta = {{"width", view.width},
                                 {"height", view.height},
                                 {"num_classes", view.num_classes},
                                 {"dtype", "float32"},
                                 {"endianness", "little"},
                                 {"layout", "class, row, column"}};
    write_bytes(path.string() + ".json", meta.dump(2) + "\n");
}

} // namespace occsplat
