// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/oracle.hpp"

#include "occsplat/error.hpp"
#include "occsplat/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace occsplat {

void
OracleConfig::validate() const {
    if (!(step_size >= 0.0) || !(density_gain >= 0.0)) {
        throw ArgumentError("oracle step size and density gain must be non-negative");
    }
    if (!(fd_epsilon > 0.0)) {
        throw ArgumentError("finite-difference epsilon must be positive");
    }
    if (!(grad_threshold >= 0.0)) {
        throw ArgumentError("invalid gradcheck thresholds");
    }
}

namespace {

constexpr double kMaxQuad = 9.0;

RenderedView
blank_view(const Camera &cam, const GaussianSet &set) {
    RenderedView view;
    view.width = cam.width;
    view.height = cam.height;
    view.num_classes = set.num_classes();
    view.empty_class = set.geometry.empty_class;
    view.d_range = cam.far;
    view.sem.assign(view.pixel_count() * static_cast<std::size_t>(view.num_classes), 0.0);
    view.depth.assign(view.pixel_count(), 0.0);
    view.residual_transmittance.assign(view.pixel_count(), 1.0);
    return view;
}

} // namespace

RenderedView
naive_splat(const Camera &cam, const GaussianSet &set, const RenderOptions &opts) {
    RenderedView view = blank_view(cam, set);
    const std::vector<Splat2D> splats = project_and_sort(cam, set, opts);
    view.splat_count = splats.size();
    const std::size_t hw = view.pixel_count();
    const auto nc = static_cast<std::size_t>(view.num_classes);
    const auto empty = static_cast<std::size_t>(view.empty_class);

    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const std::size_t pix = static_cast<std::size_t>(y) * cam.width + x;
            double t = 1.0;
            double depth = 0.0;
            for (const Splat2D &sp : splats) {
                const double dx = x + 0.5 - sp.mean.x();
                const double dy = y + 0.5 - sp.mean.y();
                const double q = sp.conic[0] * dx * dx + 2.0 * sp.conic[1] * dx * dy + sp.conic[2] * dy * dy;
                if (q > kMaxQuad) {
                    continue;
                }
                const double alpha = std::min(opts.alpha_max, set.opacity[sp.primitive_id] * std::exp(-0.5 * q));
                if (alpha < opts.alpha_cutoff) {
                    continue;
                }
                const auto probs = set.probs(sp.primitive_id);
                for (std::size_t c = 0; c < nc; ++c) {
                    view.sem[c * hw + pix] += t * alpha * probs[c];
                }
                depth += t * alpha * sp.depth;
                t *= 1.0 - alpha;
                if (t < opts.min_transmittance) {
                    break;
                }
            }
            if (opts.composite_background) {
                view.sem[empty * hw + pix] += t;
                depth += t * cam.far;
            }
            view.depth[pix] = depth;
            view.residual_transmittance[pix] = t;
        }
    }
    return view;
}

RenderedView
raymarch_reference(const Camera &cam, const GaussianSet &set, const OracleConfig &cfg) {
    cam.validate();
    cfg.validate();
    RenderedView view = blank_view(cam, set);
    if (!(set.scale > 0.0)) {
        throw ArgumentError("ray marching needs a positive Gaussian scale");
    }
    const double s = set.scale;
    const double step = cfg.step_size > 0.0 ? cfg.step_size : s / 20.0;
    const double gain =
        cfg.density_gain > 0.0 ? cfg.density_gain : -std::log(1.0 - 0.99) / (s * std::sqrt(2.0 * std::numbers::pi));
    const std::size_t hw = view.pixel_count();
    const auto nc = static_cast<std::size_t>(view.num_classes);
    const auto empty = static_cast<std::size_t>(view.empty_class);
    const Eigen::Matrix3d rt = cam.rotation().transpose();
    const auto &k = cam.intrinsics;
    const double cutoff = 5.0 * s;

    std::vector<std::size_t> near_ray;
    std::vector<double> mix(nc);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const std::size_t pix = static_cast<std::size_t>(y) * cam.width + x;
            const double u = (x + 0.5 - k(0, 2)) / k(0, 0);
            const double v = (y + 0.5 - k(1, 2)) / k(1, 1);
            // Ray parametrized by view depth z: p(z) = origin + z * dir.
            Eigen::Vector3d origin = cam.center();
            Eigen::Vector3d dir;
            if (cam.kind == Projection::pinhole) {
                dir = rt * Eigen::Vector3d(u, v, 1.0);
            } else {
                origin += rt * Eigen::Vector3d(u, v, 0.0);
                dir = rt * Eigen::Vector3d(0.0, 0.0, 1.0);
            }
            const double len = dir.norm();
            const Eigen::Vector3d unit = dir / len;

            near_ray.clear();
            for (std::size_t i = 0; i < set.size(); ++i) {
                if (set.opacity[i] <= 0.0) {
                    continue;
                }
                const Eigen::Vector3d rel = set.centers[i] - origin;
                if ((rel - rel.dot(unit) * unit).norm() < cutoff) {
                    near_ray.push_back(i);
                }
            }

            double t = 1.0;
            double depth = 0.0;
            if (!near_ray.empty()) {
                for (double z0 = cam.near; z0 < cam.far && t > 1e-12; z0 += step) {
                    const double dz = std::min(step, cam.far - z0);
                    const double zm = z0 + 0.5 * dz;
                    const Eigen::Vector3d p = origin + zm * dir;
                    double sigma = 0.0;
                    std::fill(mix.begin(), mix.end(), 0.0);
                    for (std::size_t i : near_ray) {
                        const double d2 = (p - set.centers[i]).squaredNorm();
                        const double dens = gain * set.opacity[i] * std::exp(-0.5 * d2 / (s * s));
                        sigma += dens;
                        const auto probs = set.probs(i);
                        for (std::size_t c = 0; c < nc; ++c) {
                            mix[c] += dens * probs[c];
                        }
                    }
                    if (sigma <= 0.0) {
                        continue;
                    }
                    const double alpha = 1.0 - std::exp(-sigma * dz * len);
                    for (std::size_t c = 0; c < nc; ++c) {
                        view.sem[c * hw + pix] += t * alpha * mix[c] / sigma;
                    }
                    depth += t * alpha * zm;
                    t *= 1.0 - alpha;
                }
            }
            view.sem[empty * hw + pix] += t;
            depth += t * cam.far;
            view.depth[pix] = depth;
            view.residual_transmittance[pix] = t;
        }
    }
    return view;
}

bool
GradcheckReport::passed(double rel_tolerance) const {
    return checked > 0 && max_rel_error < rel_tolerance;
}

nlohmann::json
GradcheckReport::to_json() const {
    return {{"max_rel_error", max_rel_error},
            {"mean_rel_error", mean_rel_error},
            {"max_central_error", max_central_error},
            {"checked", checked},
            {"below_threshold", below_threshold},
            {"excluded_kinks", excluded_kinks},
            {"worst_voxel", {worst_voxel[0], worst_voxel[1], worst_voxel[2]}},
            {"worst_class", worst_class},
            {"worst_analytic", worst_analytic},
            {"worst_numeric", worst_numeric},
            {"seeds", seeds}};
}

namespace {

/// Hash of every discrete choice the rendering loss makes: which splats reach
/// each pixel, which alphas saturate, and the sign of every L1 residual. The
/// loss is smooth in the logits as long as this stays fixed.
std::uint64_t
branch_signature(const GridGeometry &geometry, std::span<const double> logits, std::span<const Camera> cams,
                 double scale, const L2dOptions &opts) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    auto sign = [](double v) { return static_cast<std::uint64_t>((v > 0.0) - (v < 0.0) + 1); };
    const GaussianSet set = gaussianize_prediction(geometry, logits, scale);
    RenderOptions ro = opts.render;
    ro.record_trace = true;
    for (std::size_t k = 0; k < cams.size(); ++k) {
        const RenderedView view = render(cams[k], set, ro);
        const auto &tr = *view.trace;
        for (std::size_t p = 0; p + 1 < tr.offsets.size(); ++p) {
            mix(tr.offsets[p + 1] - tr.offsets[p]);
            for (std::size_t e = tr.offsets[p]; e < tr.offsets[p + 1]; ++e) {
                const auto &entry = tr.entries[e];
                mix(entry.primitive);
                mix(set.opacity[entry.primitive] * entry.footprint >= ro.alpha_max);
            }
        }
        const RenderedView &gt_view = opts.gt_views[k];
        for (std::size_t i = 0; i < view.sem.size(); ++i) {
            mix(sign(view.sem[i] - gt_view.sem[i]));
        }
        for (std::size_t i = 0; i < view.depth.size(); ++i) {
            mix(sign(view.depth[i] - gt_view.depth[i]));
        }
    }
    return h;
}

} // namespace

GradcheckReport
fd_gradcheck(const GridGeometry &geometry, std::span<const double> logits, const OccupancyGrid &gt,
             std::span<const Camera> cams, double scale, const OracleConfig &cfg) {
    cfg.validate();
    // Cache ground-truth renders; only the prediction changes below.
    L2dOptions opts;
    {
        const GaussianSet gt_set = gaussianize_ground_truth(gt, scale);
        for (const auto &cam : cams) {
            opts.gt_views.push_back(render(cam, gt_set, opts.render));
        }
    }
    const LossReport analytic = l2d(geometry, logits, gt, cams, scale, opts);
    const auto &grad = analytic.d_logits_2d;

    std::vector<double> x(logits.begin(), logits.end());
    const std::uint64_t base_branch = branch_signature(geometry, x, cams, scale, opts);
    auto probe = [&](std::size_t i, double delta, bool &smooth) {
        const double saved = x[i];
        x[i] = saved + delta;
        const double value = l2d(geometry, x, gt, cams, scale, opts).l2d;
        smooth = smooth && branch_signature(geometry, x, cams, scale, opts) == base_branch;
        x[i] = saved;
        return value;
    };

    GradcheckReport report;
    const auto nc = static_cast<std::size_t>(geometry.num_classes);
    const double eps = cfg.fd_epsilon;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = grad[i];
        if (std::abs(a) <= cfg.grad_threshold) {
            ++report.below_threshold;
            continue;
        }
        bool smooth = true;
        const double fd = (probe(i, eps, smooth) - probe(i, -eps, smooth)) / (2.0 * eps);
        double numeric = fd;
        if (cfg.richardson) {
            const double fd_half = (probe(i, 0.5 * eps, smooth) - probe(i, -0.5 * eps, smooth)) / eps;
            numeric = (4.0 * fd_half - fd) / 3.0;
        }
        if (!smooth) {
            ++report.excluded_kinks;
            continue;
        }
        const double err = std::abs(a - numeric) / std::max(std::abs(a), std::abs(numeric));
        report.max_central_error =
            std::max(report.max_central_error, std::abs(a - fd) / std::max(std::abs(a), std::abs(fd)));
        ++report.checked;
        sum += err;
        if (err > report.max_rel_error || report.checked == 1) {
            report.max_rel_error = err;
            report.worst_voxel = geometry.unravel(i / nc);
            report.worst_class = static_cast<int>(i % nc);
            report.worst_analytic = a;
            report.worst_numeric = numeric;
        }
    }
    report.mean_rel_error = report.checked ? sum / static_cast<double>(report.checked) : 0.0;
    return report;
}

GradcheckReport
merge_reports(std::span<const GradcheckReport> reports) {
    GradcheckReport out;
    double weighted = 0.0;
    bool first = true;
    for (const auto &r : reports) {
        out.checked += r.checked;
        out.below_threshold += r.below_threshold;
        out.excluded_kinks += r.excluded_kinks;
        out.max_central_error = std::max(out.max_central_error, r.max_central_error);
        weighted += r.mean_rel_error * static_cast<double>(r.checked);
        out.seeds.insert(out.seeds.end(), r.seeds.begin(), r.seeds.end());
        if (r.checked > 0 && (first || r.max_rel_error > out.max_rel_error)) {
            first = false;
            out.max_rel_error = r.max_rel_error;
            out.worst_voxel = r.worst_voxel;
            out.worst_class = r.worst_class;
            out.worst_analytic = r.worst_analytic;
            out.worst_numeric = r.worst_numeric;
        }
    }
    out.mean_rel_error = out.checked ? weighted / static_cast<double>(out.checked) : 0.0;
    return out;
}

GridGeometry
fixture_geometry() {
    GridGeometry g;
    g.dims = {8, 8, 8};
    g.voxel_size = 0.5f;
    g.num_classes = 4;
    g.empty_class = 0;
    return g;
}

std::vector<Fixture>
standard_fixtures() {
    const GridGeometry g = fixture_geometry();
    return {{"empty", synth_scene(g, scene::Empty{})},
            {"single_voxel", synth_scene(g, scene::SingleVoxel{{3, 4, 2}, 1})},
            {"floor", synth_scene(g, scene::FloorPlane{0, 2})},
            {"box", synth_scene(g, scene::Box{{2, 2, 1}, {5, 4, 3}, 3})},
            {"two_walls", synth_scene(g, scene::TwoWalls{2, 6, 1, 2})}};
}

std::vector<Camera>
fixture_poses(const GridGeometry &geometry, int count, int width, int height) {
    if (count < 1) {
        throw ArgumentError("need at least one fixture pose");
    }
    std::vector<Camera> cams{make_bev_camera(geometry, 1.0 / geometry.voxel_size)};
    const Eigen::Vector3d lo = geometry.min_corner();
    const Eigen::Vector3d hi = geometry.max_corner();
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    const double reach = (hi - lo).norm();
    for (int k = 1; k < count; ++k) {
        const double yaw = 2.0 * std::numbers::pi * (k - 1) / (count - 1) + 0.3;
        const double lift = 0.25 + 0.15 * k;
        const Eigen::Vector3d pos =
            center + reach * Eigen::Vector3d(std::cos(yaw), std::sin(yaw), lift);
        cams.push_back(make_pinhole_camera("pose" + std::to_string(k), width, height, std::numbers::pi / 3.0,
                                           look_rotation(center - pos), pos, 0.05, default_far(geometry, pos)));
    }
    return cams;
}

} // namespace occsplat
