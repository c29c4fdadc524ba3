// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "occsplat/renderer.hpp"

#include "occsplat/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cassert>
#include <cmath>

namespace occsplat {

namespace {

constexpr double kFootprintSigmas = 3.0;
constexpr double kMaxQuadForm = kFootprintSigmas * kFootprintSigmas;

} // namespace

std::optional<Splat2D>
project_gaussian(const Camera &cam, const Eigen::Vector3d &mu, double scale, double lowpass) {
    const Eigen::Matrix3d rot = cam.rotation();
    const Eigen::Vector3d t = rot * mu + cam.translation();
    if (t.z() <= cam.near || t.z() <= 0.0 || t.z() > cam.far) {
        return std::nullopt;
    }
    const auto &k = cam.intrinsics;

    Splat2D s;
    Eigen::Matrix<double, 2, 3> jac = Eigen::Matrix<double, 2, 3>::Zero();
    if (cam.kind == Projection::pinhole) {
        const double inv_z = 1.0 / t.z();
        s.mean = {k(0, 0) * t.x() * inv_z + k(0, 2), k(1, 1) * t.y() * inv_z + k(1, 2)};
        jac(0, 0) = k(0, 0) * inv_z;
        jac(0, 2) = -k(0, 0) * t.x() * inv_z * inv_z;
        jac(1, 1) = k(1, 1) * inv_z;
        jac(1, 2) = -k(1, 1) * t.y() * inv_z * inv_z;
    } else {
        s.mean = {k(0, 0) * t.x() + k(0, 2), k(1, 1) * t.y() + k(1, 2)};
        jac(0, 0) = k(0, 0);
        jac(1, 1) = k(1, 1);
    }
    const Eigen::Matrix3d cov3 = scale * scale * Eigen::Matrix3d::Identity();
    s.cov = jac * rot * cov3 * rot.transpose() * jac.transpose();
    s.cov(0, 1) = s.cov(1, 0) = 0.5 * (s.cov(0, 1) + s.cov(1, 0));
    s.cov(0, 0) += lowpass;
    s.cov(1, 1) += lowpass;

    const double det = s.cov.determinant();
    assert(det > 0.0);
    if (!(det > 0.0)) {
        return std::nullopt;
    }
    s.conic = {s.cov(1, 1) / det, -s.cov(0, 1) / det, s.cov(0, 0) / det};
    const double mid = 0.5 * (s.cov(0, 0) + s.cov(1, 1));
    const double half = 0.5 * (s.cov(0, 0) - s.cov(1, 1));
    const double lambda_max = mid + std::sqrt(half * half + s.cov(0, 1) * s.cov(0, 1));
    s.radius = kFootprintSigmas * std::sqrt(lambda_max);
    s.depth = t.z();

    if (s.mean.x() + s.radius < 0.0 || s.mean.x() - s.radius > cam.width ||
        s.mean.y() + s.radius < 0.0 || s.mean.y() - s.radius > cam.height) {
        return std::nullopt;
    }
    return s;
}

std::optional<Splat2D>
project_gaussian(const Camera &cam, const GaussianPrimitive &g, double lowpass) {
    return project_gaussian(cam, g.mu, g.scale, lowpass);
}

std::vector<Splat2D>
project_and_sort(const Camera &cam, const GaussianSet &set, const RenderOptions &opts) {
    const auto n = static_cast<std::ptrdiff_t>(set.size());
    std::vector<std::optional<Splat2D>> projected(set.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (set.opacity[u] < opts.alpha_cutoff) {
            continue;
        }
        auto s = project_gaussian(cam, set.centers[u], set.scale, opts.lowpass);
        if (s) {
            s->primitive_id = static_cast<std::uint32_t>(u);
            s->source_index = set.source[u];
            projected[u] = *s;
        }
    }
    std::vector<Splat2D> splats;
    splats.reserve(set.size());
    for (auto &p : projected) {
        if (p) {
            splats.push_back(*p);
        }
    }
    std::sort(splats.begin(), splats.end(), [](const Splat2D &a, const Splat2D &b) {
        return a.depth < b.depth || (a.depth == b.depth && a.source_index < b.source_index);
    });
    return splats;
}

std::vector<int>
RenderedView::argmax() const {
    const std::size_t hw = pixel_count();
    std::vector<int> out(hw, 0);
    for (std::size_t p = 0; p < hw; ++p) {
        double best = sem[p];
        for (int c = 1; c < num_classes; ++c) {
            const double v = sem[static_cast<std::size_t>(c) * hw + p];
            if (v > best) {
                best = v;
                out[p] = c;
            }
        }
    }
    return out;
}

GradientBuffers &
GradientBuffers::operator+=(const GradientBuffers &other) {
    if (d_class_probs.size() != other.d_class_probs.size() ||
        d_opacity.size() != other.d_opacity.size()) {
        throw GeometryError("gradient buffers of different sizes cannot be summed");
    }
    for (std::size_t i = 0; i < d_class_probs.size(); ++i) {
        d_class_probs[i] += other.d_class_probs[i];
    }
    for (std::size_t i = 0; i < d_opacity.size(); ++i) {
        d_opacity[i] += other.d_opacity[i];
    }
    return *this;
}

namespace {

void
check_inputs(const Camera &cam, const GaussianSet &set, const RenderOptions &opts) {
    cam.validate();
    if (opts.tile_size < 1) {
        throw ArgumentError("tile size must be >= 1");
    }
    if (!(opts.alpha_max > 0.0 && opts.alpha_max < 1.0)) {
        throw ArgumentError("alpha_max must lie in (0, 1)");
    }
    if (!(opts.lowpass > 0.0)) {
        throw ArgumentError("low-pass floor must be positive");
    }
    if (set.class_probs.size() != set.size() * static_cast<std::size_t>(set.num_classes()) ||
        set.opacity.size() != set.size() || set.source.size() != set.size()) {
        throw GeometryError("inconsistent gaussian set");
    }
}

struct TileTrace {
    std::vector<std::uint32_t> counts; // per tile pixel, row-major within the tile
    std::vector<TraceEntry> entries;
};

} // namespace

RenderedView
render(const Camera &cam, const GaussianSet &set, const RenderOptions &opts) {
    check_inputs(cam, set, opts);
    const int width = cam.width;
    const int height = cam.height;
    const int nc = set.num_classes();
    const auto hw = static_cast<std::size_t>(width) * height;
    const auto ncu = static_cast<std::size_t>(nc);

    RenderedView view;
    view.width = width;
    view.height = height;
    view.num_classes = nc;
    view.empty_class = set.geometry.empty_class;
    view.d_range = cam.far;
    view.sem.assign(hw * ncu, 0.0);
    view.depth.assign(hw, 0.0);
    view.residual_transmittance.assign(hw, 1.0);

    const std::vector<Splat2D> splats = project_and_sort(cam, set, opts);
    view.splat_count = splats.size();

    // Bin splats into tiles; each tile list inherits the global depth order.
    const int ts = opts.tile_size;
    const int tiles_x = (width + ts - 1) / ts;
    const int tiles_y = (height + ts - 1) / ts;
    const auto tile_count = static_cast<std::size_t>(tiles_x) * tiles_y;
    std::vector<std::array<int, 4>> rects(splats.size());
    std::vector<std::size_t> tile_offsets(tile_count + 1, 0);
    for (std::size_t s = 0; s < splats.size(); ++s) {
        const auto &sp = splats[s];
        auto tile_lo = [&](double v, int n) {
            return std::clamp(static_cast<int>(std::floor(v / ts)), 0, n - 1);
        };
        rects[s] = {tile_lo(sp.mean.x() - sp.radius, tiles_x), tile_lo(sp.mean.x() + sp.radius, tiles_x),
                    tile_lo(sp.mean.y() - sp.radius, tiles_y), tile_lo(sp.mean.y() + sp.radius, tiles_y)};
        for (int ty = rects[s][2]; ty <= rects[s][3]; ++ty) {
            for (int tx = rects[s][0]; tx <= rects[s][1]; ++tx) {
                ++tile_offsets[static_cast<std::size_t>(ty) * tiles_x + tx + 1];
            }
        }
    }
    for (std::size_t t = 0; t < tile_count; ++t) {
        tile_offsets[t + 1] += tile_offsets[t];
    }
    std::vector<std::uint32_t> tile_splats(tile_offsets.back());
    {
        std::vector<std::size_t> cursor(tile_offsets.begin(), tile_offsets.end() - 1);
        for (std::size_t s = 0; s < splats.size(); ++s) {
            for (int ty = rects[s][2]; ty <= rects[s][3]; ++ty) {
                for (int tx = rects[s][0]; tx <= rects[s][1]; ++tx) {
                    tile_splats[cursor[static_cast<std::size_t>(ty) * tiles_x + tx]++] =
                        static_cast<std::uint32_t>(s);
                }
            }
        }
    }

    std::vector<TileTrace> tile_traces(opts.record_trace ? tile_count : 0);
    const auto empty = static_cast<std::size_t>(set.geometry.empty_class);
    const double far = cam.far;
    const auto tiles = static_cast<std::ptrdiff_t>(tile_count);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < tiles; ++t) {
        const int tx = static_cast<int>(t % tiles_x);
        const int ty = static_cast<int>(t / tiles_x);
        const int x0 = tx * ts;
        const int y0 = ty * ts;
        const int x1 = std::min(x0 + ts, width);
        const int y1 = std::min(y0 + ts, height);
        const auto first = tile_splats.begin() + static_cast<std::ptrdiff_t>(tile_offsets[static_cast<std::size_t>(t)]);
        const auto last = tile_splats.begin() + static_cast<std::ptrdiff_t>(tile_offsets[static_cast<std::size_t>(t) + 1]);
        TileTrace *trace = opts.record_trace ? &tile_traces[static_cast<std::size_t>(t)] : nullptr;

        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                const std::size_t pix = static_cast<std::size_t>(y) * width + x;
                const double px = x + 0.5;
                const double py = y + 0.5;
                double transmittance = 1.0;
                double depth = 0.0;
                std::uint32_t recorded = 0;
                for (auto it = first; it != last; ++it) {
                    const Splat2D &sp = splats[*it];
                    const double dx = px - sp.mean.x();
                    const double dy = py - sp.mean.y();
                    const double q = sp.conic[0] * dx * dx + 2.0 * sp.conic[1] * dx * dy + sp.conic[2] * dy * dy;
                    if (q > kMaxQuadForm) {
                        continue;
                    }
                    const double footprint = std::exp(-0.5 * q);
                    const double alpha = std::min(opts.alpha_max, set.opacity[sp.primitive_id] * footprint);
                    if (alpha < opts.alpha_cutoff) {
                        continue;
                    }
                    const double w = transmittance * alpha;
                    const auto probs = set.probs(sp.primitive_id);
                    for (std::size_t c = 0; c < ncu; ++c) {
                        view.sem[c * hw + pix] += w * probs[c];
                    }
                    depth += w * sp.depth;
                    if (trace) {
                        trace->entries.push_back({sp.primitive_id, alpha, transmittance, footprint});
                        ++recorded;
                    }
                    transmittance *= 1.0 - alpha;
                    if (transmittance < opts.min_transmittance) {
                        break;
                    }
                }
                if (opts.composite_background) {
                    view.sem[empty * hw + pix] += transmittance;
                    depth += transmittance * far;
                }
                view.depth[pix] = depth;
                view.residual_transmittance[pix] = transmittance;
                if (trace) {
                    trace->counts.push_back(recorded);
                }
            }
        }
    }

    if (opts.record_trace) {
        auto trace = std::make_shared<CompositTrace>();
        trace->alpha_max = opts.alpha_max;
        trace->composite_background = opts.composite_background;
        trace->opacity = set.opacity;
        trace->class_probs = set.class_probs;
        trace->primitive_depth.assign(set.size(), 0.0);
        for (const auto &sp : splats) {
            trace->primitive_depth[sp.primitive_id] = sp.depth;
        }
        // Scatter tile-local lists into one per-pixel CSR layout.
        trace->offsets.assign(hw + 1, 0);
        for (std::size_t t = 0; t < tile_count; ++t) {
            const int x0 = static_cast<int>(t % tiles_x) * ts;
            const int y0 = static_cast<int>(t / tiles_x) * ts;
            const int tw = std::min(ts, width - x0);
            const auto &tt = tile_traces[t];
            for (std::size_t k = 0; k < tt.counts.size(); ++k) {
                const int x = x0 + static_cast<int>(k) % tw;
                const int y = y0 + static_cast<int>(k) / tw;
                trace->offsets[static_cast<std::size_t>(y) * width + x + 1] = tt.counts[k];
            }
        }
        for (std::size_t p = 0; p < hw; ++p) {
            trace->offsets[p + 1] += trace->offsets[p];
        }
        trace->entries.resize(trace->offsets.back());
        for (std::size_t t = 0; t < tile_count; ++t) {
            const int x0 = static_cast<int>(t % tiles_x) * ts;
            const int y0 = static_cast<int>(t / tiles_x) * ts;
            const int tw = std::min(ts, width - x0);
            const auto &tt = tile_traces[t];
            std::size_t src = 0;
            for (std::size_t k = 0; k < tt.counts.size(); ++k) {
                const int x = x0 + static_cast<int>(k) % tw;
                const int y = y0 + static_cast<int>(k) / tw;
                const std::size_t dst = trace->offsets[static_cast<std::size_t>(y) * width + x];
                std::copy_n(tt.entries.begin() + static_cast<std::ptrdiff_t>(src), tt.counts[k],
                            trace->entries.begin() + static_cast<std::ptrdiff_t>(dst));
                src += tt.counts[k];
            }
        }
        view.trace = std::move(trace);
    }
    return view;
}

GradientBuffers
render_backward(const RenderedView &view, std::span<const double> d_sem, std::span<const double> d_depth) {
    if (!view.trace) {
        throw ArgumentError("render_backward needs a view rendered with record_trace");
    }
    const auto &tr = *view.trace;
    const std::size_t hw = view.pixel_count();
    const auto nc = static_cast<std::size_t>(view.num_classes);
    if (d_sem.size() != hw * nc || d_depth.size() != hw) {
        throw GeometryError("upstream gradient shape does not match the rendered view");
    }
    const std::size_t n = tr.opacity.size();
    const auto empty = static_cast<std::size_t>(view.empty_class);

    // dL/dalpha for every trace entry, computed back to front per pixel.
    std::vector<double> d_alpha(tr.entries.size(), 0.0);
    const auto pixels = static_cast<std::ptrdiff_t>(hw);
#pragma omp parallel
    {
        std::vector<double> behind_sem(nc);
#pragma omp for schedule(static)
        for (std::ptrdiff_t pi = 0; pi < pixels; ++pi) {
            const auto p = static_cast<std::size_t>(pi);
            std::fill(behind_sem.begin(), behind_sem.end(), 0.0);
            double behind_depth = 0.0;
            if (tr.composite_background) {
                behind_sem[empty] = 1.0;
                behind_depth = view.d_range;
            }
            for (std::size_t k = tr.offsets[p + 1]; k-- > tr.offsets[p];) {
                const TraceEntry &e = tr.entries[k];
                const double *c = tr.class_probs.data() + static_cast<std::size_t>(e.primitive) * nc;
                const double d = tr.primitive_depth[e.primitive];
                double g = d_depth[p] * (d - behind_depth);
                for (std::size_t ch = 0; ch < nc; ++ch) {
                    g += d_sem[ch * hw + p] * (c[ch] - behind_sem[ch]);
                }
                d_alpha[k] = e.transmittance * g;
                for (std::size_t ch = 0; ch < nc; ++ch) {
                    behind_sem[ch] = e.alpha * c[ch] + (1.0 - e.alpha) * behind_sem[ch];
                }
                behind_depth = e.alpha * d + (1.0 - e.alpha) * behind_depth;
            }
        }
    }

    // Scatter in pixel order so the sums are independent of the thread count.
    GradientBuffers grads;
    grads.d_class_probs.assign(n * nc, 0.0);
    grads.d_opacity.assign(n, 0.0);
    for (std::size_t p = 0; p < hw; ++p) {
        for (std::size_t k = tr.offsets[p]; k < tr.offsets[p + 1]; ++k) {
            const TraceEntry &e = tr.entries[k];
            const double w = e.transmittance * e.alpha;
            double *dc = grads.d_class_probs.data() + static_cast<std::size_t>(e.primitive) * nc;
            for (std::size_t ch = 0; ch < nc; ++ch) {
                dc[ch] += w * d_sem[ch * hw + p];
            }
            const bool clamped = tr.opacity[e.primitive] * e.footprint >= tr.alpha_max;
            if (!clamped) {
#ifdef OCCSPLAT_FAULT_BACKWARD_SIGN
                grads.d_opacity[e.primitive] -= d_alpha[k] * e.footprint;
#else
                grads.d_opacity[e.primitive] += d_alpha[k] * e.footprint;
#endif
            }
        }
    }
    return grads;
}

} // namespace occsplat
