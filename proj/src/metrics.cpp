// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/metrics.hpp"

#include "occsplat/error.hpp"
#include "occsplat/gaussians.hpp"
#include "occsplat/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace occsplat {

double
Counts::iou() const {
    const std::uint64_t denom = tp + fp + fn;
    return denom == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(denom);
}

namespace {

void
check_pair(const OccupancyGrid &pred, const OccupancyGrid &gt) {
    if (pred.geometry != gt.geometry) {
        throw GeometryError("prediction and ground-truth grids have different geometry");
    }
    if (!pred.has_labels() || !gt.has_labels()) {
        throw ArgumentError("metrics need label grids");
    }
}

/// Binary occupancy and per-class tallies over parallel label arrays.
template <typename Keep>
void
tally(std::span<const int> pred, std::span<const int> gt, int num_classes, int empty, Keep keep,
      Counts &occupancy, std::vector<Counts> &per_class) {
    per_class.assign(static_cast<std::size_t>(num_classes), Counts{});
    occupancy = {};
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!keep(i)) {
            continue;
        }
        const int p = pred[i];
        const int g = gt[i];
        const bool po = p != empty;
        const bool go = g != empty;
        occupancy.tp += po && go;
        occupancy.fp += po && !go;
        occupancy.fn += !po && go;
        if (p == g) {
            ++per_class[static_cast<std::size_t>(p)].tp;
        } else {
            ++per_class[static_cast<std::size_t>(p)].fp;
            ++per_class[static_cast<std::size_t>(g)].fn;
        }
    }
}

/// Mean IoU over non-empty classes that occur in either input; 1 when none do.
double
mean_iou(const std::vector<Counts> &per_class, int empty,
         std::vector<std::optional<double>> *per_class_iou = nullptr) {
    double sum = 0.0;
    int present = 0;
    if (per_class_iou) {
        per_class_iou->assign(per_class.size(), std::nullopt);
    }
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        const auto &k = per_class[c];
        if (static_cast<int>(c) == empty || k.tp + k.fp + k.fn == 0) {
            continue;
        }
        sum += k.iou();
        ++present;
        if (per_class_iou) {
            (*per_class_iou)[c] = k.iou();
        }
    }
    return present == 0 ? 1.0 : sum / present;
}

std::vector<int>
as_int(const Labels &labels) {
    return {labels.begin(), labels.end()};
}

} // namespace

VoxelMetrics
voxel_metrics(const OccupancyGrid &pred, const OccupancyGrid &gt,
              std::optional<std::span<const std::uint8_t>> eval_mask) {
    check_pair(pred, gt);
    const auto &g = gt.geometry;
    if (eval_mask && eval_mask->size() != g.voxel_count()) {
        throw GeometryError("evaluation mask does not match grid dims");
    }
    const auto p = as_int(pred.labels());
    const auto q = as_int(gt.labels());
    VoxelMetrics m;
    tally(p, q, g.num_classes, g.empty_class,
          [&](std::size_t i) { return !eval_mask || (*eval_mask)[i] != 0; }, m.occupancy, m.per_class);
    m.iou = m.occupancy.iou();
    m.miou = mean_iou(m.per_class, g.empty_class, &m.per_class_iou);
    return m;
}

std::optional<RayHit>
first_hit(const OccupancyGrid &grid, const Eigen::Vector3d &origin, const Eigen::Vector3d &dir) {
    const auto &g = grid.geometry;
    const auto &lab = grid.labels();
    const double c = g.voxel_size;
    const Eigen::Vector3d lo = g.min_corner();
    const Eigen::Vector3d hi = g.max_corner();
    constexpr double inf = std::numeric_limits<double>::infinity();

    // Slab test against the grid bounds.
    double t_enter = 0.0;
    double t_exit = inf;
    for (int a = 0; a < 3; ++a) {
        if (dir[a] == 0.0) {
            if (origin[a] < lo[a] || origin[a] >= hi[a]) {
                return std::nullopt;
            }
            continue;
        }
        double t0 = (lo[a] - origin[a]) / dir[a];
        double t1 = (hi[a] - origin[a]) / dir[a];
        if (t0 > t1) {
            std::swap(t0, t1);
        }
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
    }
    if (t_enter >= t_exit) {
        return std::nullopt;
    }

    const Eigen::Vector3d start = origin + t_enter * dir;
    Index3 voxel{};
    std::array<int, 3> step{};
    std::array<double, 3> t_max{};
    std::array<double, 3> t_delta{};
    for (int a = 0; a < 3; ++a) {
        const double local = (start[a] - lo[a]) / c;
        voxel[a] = std::clamp(static_cast<int>(std::floor(local)), 0, g.dims[a] - 1);
        if (dir[a] > 0.0) {
            step[a] = 1;
            t_max[a] = (lo[a] + (voxel[a] + 1) * c - origin[a]) / dir[a];
            t_delta[a] = c / dir[a];
        } else if (dir[a] < 0.0) {
            step[a] = -1;
            t_max[a] = (lo[a] + voxel[a] * c - origin[a]) / dir[a];
            t_delta[a] = -c / dir[a];
        } else {
            step[a] = 0;
            t_max[a] = inf;
            t_delta[a] = inf;
        }
    }

    double t = t_enter;
    while (true) {
        const int cls = lab[g.linear_index(voxel)];
        if (cls != g.empty_class) {
            return RayHit{cls, t, voxel};
        }
        int axis = 0;
        if (t_max[1] < t_max[axis]) {
            axis = 1;
        }
        if (t_max[2] < t_max[axis]) {
            axis = 2;
        }
        t = t_max[axis];
        voxel[axis] += step[axis];
        if (voxel[axis] < 0 || voxel[axis] >= g.dims[axis]) {
            return std::nullopt;
        }
        t_max[axis] += t_delta[axis];
    }
}

void
RaySet::validate() const {
    if (origins.size() != directions.size()) {
        throw ArgumentError("ray set has mismatched origin/direction counts");
    }
    for (const auto &d : directions) {
        if (std::abs(d.norm() - 1.0) > 1e-9) {
            throw ArgumentError("ray directions must be unit length");
        }
    }
}

RaySet
rays_from_camera(const Camera &cam, int stride) {
    cam.validate();
    if (stride < 1) {
        throw ArgumentError("ray stride must be >= 1");
    }
    RaySet rays;
    rays.provenance = RaySet::Provenance::from_camera;
    const Eigen::Matrix3d rt = cam.rotation().transpose();
    const Eigen::Vector3d center = cam.center();
    const auto &k = cam.intrinsics;
    for (int v = 0; v < cam.height; v += stride) {
        for (int u = 0; u < cam.width; u += stride) {
            const double x = (u + 0.5 - k(0, 2)) / k(0, 0);
            const double y = (v + 0.5 - k(1, 2)) / k(1, 1);
            if (cam.kind == Projection::pinhole) {
                rays.origins.push_back(center);
                rays.directions.push_back((rt * Eigen::Vector3d(x, y, 1.0)).normalized());
            } else {
                rays.origins.push_back(center + rt * Eigen::Vector3d(x, y, 0.0));
                rays.directions.push_back(cam.forward().normalized());
            }
        }
    }
    return rays;
}

RaySet
rays_from_cameras(std::span<const Camera> cams, int stride) {
    RaySet all;
    all.provenance = RaySet::Provenance::from_camera;
    for (const auto &cam : cams) {
        RaySet r = rays_from_camera(cam, stride);
        all.origins.insert(all.origins.end(), r.origins.begin(), r.origins.end());
        all.directions.insert(all.directions.end(), r.directions.begin(), r.directions.end());
    }
    return all;
}

RayIouResult
rayiou(const OccupancyGrid &pred, const OccupancyGrid &gt, const RaySet &rays,
       const std::vector<double> &tolerances) {
    check_pair(pred, gt);
    rays.validate();
    if (rays.size() == 0) {
        throw ArgumentError("RayIoU needs at least one ray");
    }
    if (tolerances.empty()) {
        throw ArgumentError("RayIoU needs at least one tolerance");
    }
    for (double t : tolerances) {
        if (!(t > 0.0)) {
            throw ArgumentError("RayIoU tolerances must be positive");
        }
    }

    const auto n = static_cast<std::ptrdiff_t>(rays.size());
    std::vector<std::optional<RayHit>> pred_hits(rays.size());
    std::vector<std::optional<RayHit>> gt_hits(rays.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        pred_hits[u] = first_hit(pred, rays.origins[u], rays.directions[u]);
        gt_hits[u] = first_hit(gt, rays.origins[u], rays.directions[u]);
    }

    RayIouResult out;
    out.tolerances = tolerances;
    for (double tol : tolerances) {
        Counts k;
        for (std::size_t i = 0; i < rays.size(); ++i) {
            const auto &p = pred_hits[i];
            const auto &g = gt_hits[i];
            if (g) {
                if (p && p->cls == g->cls && std::abs(p->distance - g->distance) <= tol) {
                    ++k.tp;
                } else {
                    ++k.fn;
                }
            } else if (p) {
                ++k.fp;
            }
        }
        out.counts.push_back(k);
        out.scores.push_back(k.iou());
    }
    double sum = 0.0;
    for (double s : out.scores) {
        sum += s;
    }
    out.rayiou = sum / static_cast<double>(out.scores.size());
    return out;
}

std::vector<int>
bev_class_map(const OccupancyGrid &grid, double pixels_per_meter) {
    const auto &g = grid.geometry;
    const Camera cam = make_bev_camera(g, pixels_per_meter);
    const GaussianSet set = gaussianize_ground_truth(grid, default_scale(g));
    const RenderedView view = render(cam, set);
    std::vector<int> classes = view.argmax();
    for (std::size_t p = 0; p < classes.size(); ++p) {
        if (view.residual_transmittance[p] > 0.5) {
            classes[p] = g.empty_class;
        }
    }
    return classes;
}

BevMetrics
bev_metrics(const OccupancyGrid &pred, const OccupancyGrid &gt, double pixels_per_meter) {
    check_pair(pred, gt);
    const auto p = bev_class_map(pred, pixels_per_meter);
    const auto q = bev_class_map(gt, pixels_per_meter);
    BevMetrics m;
    tally(p, q, gt.geometry.num_classes, gt.geometry.empty_class, [](std::size_t) { return true; },
          m.occupancy, m.per_class);
    m.iou = m.occupancy.iou();
    m.miou = mean_iou(m.per_class, gt.geometry.empty_class);
    return m;
}

namespace {

std::string
tolerance_key(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", t);
    return buf;
}

nlohmann::json
counts_json(const Counts &k) {
    return {{"tp", k.tp}, {"fp", k.fp}, {"fn", k.fn}};
}

} // namespace

nlohmann::json
MetricsReport::to_json() const {
    nlohmann::json j;
    j["iou"] = voxel.iou;
    j["miou"] = voxel.miou;
    nlohmann::json pc = nlohmann::json::array();
    for (const auto &v : voxel.per_class_iou) {
        pc.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    }
    j["per_class_iou"] = pc;
    j["rayiou"] = ray.rayiou;
    nlohmann::json at = nlohmann::json::object();
    for (std::size_t i = 0; i < ray.tolerances.size(); ++i) {
        at[tolerance_key(ray.tolerances[i])] = ray.scores[i];
    }
    j["rayiou_at"] = at;
    j["bev_iou"] = bev.iou;
    j["bev_miou"] = bev.miou;

    nlohmann::json counts;
    counts["voxel_occupancy"] = counts_json(voxel.occupancy);
    nlohmann::json vc = nlohmann::json::array();
    for (const auto &k : voxel.per_class) {
        vc.push_back(counts_json(k));
    }
    counts["voxel_per_class"] = vc;
    nlohmann::json rc = nlohmann::json::object();
    for (std::size_t i = 0; i < ray.tolerances.size(); ++i) {
        rc[tolerance_key(ray.tolerances[i])] = counts_json(ray.counts[i]);
    }
    counts["ray"] = rc;
    counts["bev_occupancy"] = counts_json(bev.occupancy);
    nlohmann::json bc = nlohmann::json::array();
    for (const auto &k : bev.per_class) {
        bc.push_back(counts_json(k));
    }
    counts["bev_per_class"] = bc;
    j["counts"] = counts;
    return j;
}

std::string
MetricsReport::csv_header() const {
    std::string h = "iou,miou,rayiou";
    for (double t : ray.tolerances) {
        h += ",rayiou@" + tolerance_key(t);
    }
    h += ",bev_iou,bev_miou";
    return h;
}

std::string
MetricsReport::csv_row() const {
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        return std::string(buf);
    };
    std::string row = fmt(voxel.iou) + "," + fmt(voxel.miou) + "," + fmt(ray.rayiou);
    for (double s : ray.scores) {
        row += "," + fmt(s);
    }
    row += "," + fmt(bev.iou) + "," + fmt(bev.miou);
    return row;
}

MetricsReport
evaluate(const OccupancyGrid &pred, const OccupancyGrid &gt, const RaySet &rays,
         const std::vector<double> &tolerances, double bev_pixels_per_meter) {
    MetricsReport r;
    r.voxel = voxel_metrics(pred, gt);
    r.ray = rayiou(pred, gt, rays, tolerances);
    r.bev = bev_metrics(pred, gt, bev_pixels_per_meter);
    return r;
}

} // namespace occsplat
