// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/grid.hpp"

#include "occsplat/error.hpp"
#include "occsplat/random.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "OCCG encoding assumes a little-endian host");

namespace occsplat {

void
GridGeometry::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 1) {
            throw ArgumentError("grid dims must be >= 1 along every axis");
        }
        if (!std::isfinite(origin[a])) {
            throw ArgumentError("grid origin must be finite");
        }
    }
    if (!(voxel_size > 0.0f) || !std::isfinite(voxel_size)) {
        throw ArgumentError("voxel_size must be a positive finite number");
    }
    if (num_classes < 1 || num_classes > std::numeric_limits<std::uint16_t>::max()) {
        throw ArgumentError("num_classes must be in [1, 65535]");
    }
    if (empty_class < 0 || empty_class >= num_classes) {
        throw ArgumentError("empty_class must be in [0, num_classes)");
    }
}

Eigen::Vector3d
GridGeometry::min_corner() const {
    return {origin[0], origin[1], origin[2]};
}

Eigen::Vector3d
GridGeometry::extent() const {
    const double c = voxel_size;
    return {dims[0] * c, dims[1] * c, dims[2] * c};
}

Eigen::Vector3d
GridGeometry::max_corner() const {
    return min_corner() + extent();
}

Eigen::Vector3d
voxel_center(const GridGeometry &geometry, const Index3 &index) {
    if (!geometry.contains(index)) {
        throw ArgumentError("voxel index (" + std::to_string(index[0]) + "," +
                            std::to_string(index[1]) + "," + std::to_string(index[2]) +
                            ") is outside the grid");
    }
    const double c = geometry.voxel_size;
    return geometry.min_corner() +
           c * Eigen::Vector3d(index[0] + 0.5, index[1] + 0.5, index[2] + 0.5);
}

std::optional<Index3>
voxel_of(const GridGeometry &geometry, const Eigen::Vector3d &point) {
    const Eigen::Vector3d local = (point - geometry.min_corner()) / geometry.voxel_size;
    Index3 idx{};
    for (int a = 0; a < 3; ++a) {
        const double f = std::floor(local[a]);
        if (!(f >= 0.0) || f >= geometry.dims[a]) {
            return std::nullopt;
        }
        idx[a] = static_cast<int>(f);
    }
    return idx;
}

const Labels &
OccupancyGrid::labels() const {
    if (const auto *p = std::get_if<Labels>(&payload)) {
        return *p;
    }
    throw ArgumentError("grid holds logits but labels were required");
}

Labels &
OccupancyGrid::labels() {
    if (auto *p = std::get_if<Labels>(&payload)) {
        return *p;
    }
    throw ArgumentError("grid holds logits but labels were required");
}

const Logits &
OccupancyGrid::logits() const {
    if (const auto *p = std::get_if<Logits>(&payload)) {
        return *p;
    }
    throw ArgumentError("grid holds labels but logits were required");
}

Logits &
OccupancyGrid::logits() {
    if (auto *p = std::get_if<Logits>(&payload)) {
        return *p;
    }
    throw ArgumentError("grid holds labels but logits were required");
}

void
OccupancyGrid::validate() const {
    geometry.validate();
    const std::size_t n = geometry.voxel_count();
    if (const auto *lab = std::get_if<Labels>(&payload)) {
        if (lab->size() != n) {
            throw ArgumentError("label payload size does not match dims");
        }
        for (std::uint16_t v : *lab) {
            if (v >= geometry.num_classes) {
                throw ArgumentError("label " + std::to_string(v) + " out of range");
            }
        }
    } else {
        const auto &lg = std::get<Logits>(payload);
        if (lg.size() != n * static_cast<std::size_t>(geometry.num_classes)) {
            throw ArgumentError("logit payload size does not match dims * num_classes");
        }
        for (float v : lg) {
            if (!std::isfinite(v)) {
                throw ArgumentError("non-finite logit");
            }
        }
    }
}

OccupancyGrid
make_label_grid(const GridGeometry &geometry) {
    geometry.validate();
    return {geometry, Labels(geometry.voxel_count(), static_cast<std::uint16_t>(geometry.empty_class))};
}

namespace {

class Writer {
  public:
    template <typename T>
    void
    put(T value) {
        const auto *p = reinterpret_cast<const std::uint8_t *>(&value);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }

    std::vector<std::uint8_t> bytes;
};

class Reader {
  public:
    explicit Reader(const std::vector<std::uint8_t> &bytes) : bytes_(bytes) {}

    template <typename T>
    T
    get(const char *what) {
        if (bytes_.size() - pos_ < sizeof(T) || pos_ > bytes_.size()) {
            throw FormatError(std::string("truncated file while reading ") + what, pos_);
        }
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::uint64_t
    pos() const {
        return pos_;
    }
    std::uint64_t
    remaining() const {
        return bytes_.size() - pos_;
    }

  private:
    const std::vector<std::uint8_t> &bytes_;
    std::uint64_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t>
encode_grid(const OccupancyGrid &grid) {
    grid.validate();
    const auto &g = grid.geometry;
    Writer w;
    for (char ch : kOccgMagic) {
        w.put(ch);
    }
    w.put(kOccgVersion);
    w.put(static_cast<std::uint8_t>(grid.has_labels() ? 0 : 1));
    for (int a = 0; a < 3; ++a) {
        w.put(static_cast<std::uint32_t>(g.dims[a]));
    }
    for (int a = 0; a < 3; ++a) {
        w.put(g.origin[a]);
    }
    w.put(g.voxel_size);
    w.put(static_cast<std::uint32_t>(g.num_classes));
    w.put(static_cast<std::uint32_t>(g.empty_class));
    if (grid.has_labels()) {
        for (std::uint16_t v : grid.labels()) {
            w.put(v);
        }
    } else {
        for (float v : grid.logits()) {
            w.put(v);
        }
    }
    return std::move(w.bytes);
}

OccupancyGrid
decode_grid(const std::vector<std::uint8_t> &bytes) {
    Reader r(bytes);
    for (char expected : kOccgMagic) {
        const auto at = r.pos();
        if (r.get<char>("magic") != expected) {
            throw FormatError("bad magic, expected \"OCCG\"", at);
        }
    }
    {
        const auto at = r.pos();
        const auto version = r.get<std::uint32_t>("version");
        if (version != kOccgVersion) {
            throw FormatError("unsupported version " + std::to_string(version), at);
        }
    }
    const auto kind_at = r.pos();
    const auto kind = r.get<std::uint8_t>("payload kind");
    if (kind > 1) {
        throw FormatError("unknown payload kind " + std::to_string(kind), kind_at);
    }

    GridGeometry g;
    const auto dims_at = r.pos();
    std::array<std::uint32_t, 3> dims{};
    for (auto &d : dims) {
        d = r.get<std::uint32_t>("dims");
    }
    for (auto &o : g.origin) {
        o = r.get<float>("origin");
    }
    g.voxel_size = r.get<float>("voxel_size");
    const auto nc_at = r.pos();
    const auto num_classes = r.get<std::uint32_t>("num_classes");
    const auto empty_class = r.get<std::uint32_t>("empty_class");
    for (int a = 0; a < 3; ++a) {
        if (dims[a] == 0 || dims[a] > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
            throw FormatError("invalid dims", dims_at);
        }
        g.dims[a] = static_cast<int>(dims[a]);
    }
    if (num_classes == 0 || num_classes > std::numeric_limits<std::uint16_t>::max() ||
        empty_class >= num_classes) {
        throw FormatError("invalid num_classes/empty_class", nc_at);
    }
    g.num_classes = static_cast<int>(num_classes);
    g.empty_class = static_cast<int>(empty_class);
    try {
        g.validate();
    } catch (const ArgumentError &e) {
        throw FormatError(e.what(), dims_at);
    }

    const std::uint64_t voxels = static_cast<std::uint64_t>(dims[0]) * dims[1] * dims[2];
    const std::uint64_t values = kind == 0 ? voxels : voxels * num_classes;
    const std::uint64_t width = kind == 0 ? sizeof(std::uint16_t) : sizeof(float);
    if (r.remaining() / width < values) {
        throw FormatError("truncated payload: header declares " + std::to_string(values) +
                              " values but only " + std::to_string(r.remaining() / width) +
                              " are present",
                          bytes.size());
    }
    if (r.remaining() != values * width) {
        throw FormatError("trailing bytes after payload", r.pos() + values * width);
    }

    OccupancyGrid grid{g, Labels{}};
    if (kind == 0) {
        Labels lab(voxels);
        for (auto &v : lab) {
            const auto at = r.pos();
            v = r.get<std::uint16_t>("label");
            if (v >= num_classes) {
                throw FormatError("label " + std::to_string(v) + " out of range", at);
            }
        }
        grid.payload = std::move(lab);
    } else {
        Logits lg(values);
        for (auto &v : lg) {
            const auto at = r.pos();
            v = r.get<float>("logit");
            if (!std::isfinite(v)) {
                throw FormatError("non-finite logit", at);
            }
        }
        grid.payload = std::move(lg);
    }
    return grid;
}

OccupancyGrid
load_grid(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failed: " + path.string());
    }
    return decode_grid(bytes);
}

void
save_grid(const OccupancyGrid &grid, const std::filesystem::path &path) {
    const auto bytes = encode_grid(grid);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

namespace {

std::vector<std::string>
split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) {
        out.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

int
parse_int(const std::string &s) {
    int v = 0;
    const auto *end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ArgumentError("expected an integer, got \"" + s + "\"");
    }
    return v;
}

Index3
parse_index(const std::string &s) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) {
        throw ArgumentError("expected x,y,z, got \"" + s + "\"");
    }
    return {parse_int(parts[0]), parse_int(parts[1]), parse_int(parts[2])};
}

void
check_class(const GridGeometry &g, int cls) {
    if (cls < 0 || cls >= g.num_classes) {
        throw ArgumentError("scene class " + std::to_string(cls) + " out of range");
    }
}

void
check_index(const GridGeometry &g, const Index3 &idx) {
    if (!g.contains(idx)) {
        throw ArgumentError("scene index (" + std::to_string(idx[0]) + "," + std::to_string(idx[1]) +
                            "," + std::to_string(idx[2]) + ") out of bounds");
    }
}

} // namespace

SceneSpec
parse_scene_spec(const std::string &text) {
    const auto parts = split(text, ':');
    const std::string &name = parts.empty() ? text : parts[0];
    auto expect = [&](std::size_t n) {
        if (parts.size() != n) {
            throw ArgumentError("scene \"" + name + "\" expects " + std::to_string(n - 1) +
                                " fields, got \"" + text + "\"");
        }
    };
    if (name == "empty") {
        expect(1);
        return scene::Empty{};
    }
    if (name == "single_voxel") {
        expect(3);
        return scene::SingleVoxel{parse_index(parts[1]), parse_int(parts[2])};
    }
    if (name == "floor" || name == "floor_plane") {
        expect(3);
        return scene::FloorPlane{parse_int(parts[1]), parse_int(parts[2])};
    }
    if (name == "box") {
        expect(4);
        return scene::Box{parse_index(parts[1]), parse_index(parts[2]), parse_int(parts[3])};
    }
    if (name == "two_walls") {
        expect(5);
        return scene::TwoWalls{parse_int(parts[1]), parse_int(parts[2]), parse_int(parts[3]),
                               parse_int(parts[4])};
    }
    throw ArgumentError("unknown scene \"" + name + "\"");
}

OccupancyGrid
synth_scene(const GridGeometry &geometry, const SceneSpec &spec) {
    OccupancyGrid grid = make_label_grid(geometry);
    auto &lab = grid.labels();
    const auto &d = geometry.dims;
    auto fill = [&](const Index3 &lo, const Index3 &hi, int cls) {
        for (int z = lo[2]; z <= hi[2]; ++z) {
            for (int y = lo[1]; y <= hi[1]; ++y) {
                for (int x = lo[0]; x <= hi[0]; ++x) {
                    lab[geometry.linear_index({x, y, z})] = static_cast<std::uint16_t>(cls);
                }
            }
        }
    };

    std::visit(
        [&](const auto &s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, scene::SingleVoxel>) {
                check_index(geometry, s.index);
                check_class(geometry, s.cls);
                fill(s.index, s.index, s.cls);
            } else if constexpr (std::is_same_v<T, scene::FloorPlane>) {
                check_index(geometry, {0, 0, s.z});
                check_class(geometry, s.cls);
                fill({0, 0, s.z}, {d[0] - 1, d[1] - 1, s.z}, s.cls);
            } else if constexpr (std::is_same_v<T, scene::Box>) {
                check_index(geometry, s.min);
                check_index(geometry, s.max);
                check_class(geometry, s.cls);
                for (int a = 0; a < 3; ++a) {
                    if (s.min[a] > s.max[a]) {
                        throw ArgumentError("box min exceeds max");
                    }
                }
                fill(s.min, s.max, s.cls);
            } else if constexpr (std::is_same_v<T, scene::TwoWalls>) {
                check_index(geometry, {s.front_x, 0, 0});
                check_index(geometry, {s.back_x, 0, 0});
                check_class(geometry, s.front_cls);
                check_class(geometry, s.back_cls);
                fill({s.front_x, 0, 0}, {s.front_x, d[1] - 1, d[2] - 1}, s.front_cls);
                fill({s.back_x, 0, 0}, {s.back_x, d[1] - 1, d[2] - 1}, s.back_cls);
            }
        },
        spec);
    return grid;
}

OccupancyGrid
logits_from_labels(const OccupancyGrid &labels, float magnitude) {
    const auto &g = labels.geometry;
    const auto &lab = labels.labels();
    const auto nc = static_cast<std::size_t>(g.num_classes);
    Logits lg(lab.size() * nc, -magnitude);
    for (std::size_t i = 0; i < lab.size(); ++i) {
        lg[i * nc + lab[i]] = magnitude;
    }
    return {g, std::move(lg)};
}

OccupancyGrid
random_logits(const GridGeometry &geometry, std::uint64_t seed, double stddev) {
    geometry.validate();
    Rng rng(seed);
    Logits lg(geometry.voxel_count() * static_cast<std::size_t>(geometry.num_classes));
    for (auto &v : lg) {
        v = static_cast<float>(stddev * rng.normal());
    }
    return {geometry, std::move(lg)};
}

OccupancyGrid
argmax_labels(const GridGeometry &geometry, const std::vector<double> &logits) {
    const auto nc = static_cast<std::size_t>(geometry.num_classes);
    if (logits.size() != geometry.voxel_count() * nc) {
        throw GeometryError("logit count does not match geometry");
    }
    OccupancyGrid grid = make_label_grid(geometry);
    auto &lab = grid.labels();
    for (std::size_t i = 0; i < lab.size(); ++i) {
        const auto first = logits.begin() + static_cast<std::ptrdiff_t>(i * nc);
        lab[i] = static_cast<std::uint16_t>(std::max_element(first, first + static_cast<std::ptrdiff_t>(nc)) - first);
    }
    return grid;
}

std::uint64_t
content_hash(const OccupancyGrid &grid) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint8_t b : encode_grid(grid)) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace occsplat
