// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

// Tiled OpenMP renderer against the serial full-list reference.

#include "occsplat/oracle.hpp"
#include "occsplat/renderer.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>
#include <numbers>

using namespace occsplat;

namespace {

struct Scene {
    GaussianSet set;
    Camera cam;
};

// Street-scale grid seen by a forward camera; `n` voxels per xy side.
const Scene &
scene(int n) {
    static std::map<int, Scene> cache;
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    GridGeometry g;
    g.dims = {n, n, 16};
    g.voxel_size = 100.0f / static_cast<float>(n);
    g.origin = {-50.0f, -50.0f, -5.0f};
    g.num_classes = 18;
    g.empty_class = 17;
    Scene s;
    s.set = gaussianize_prediction(random_logits(g, 1, 1.0), default_scale(g));
    const Eigen::Vector3d pos(0.0, 0.0, 0.0);
    s.cam = make_pinhole_camera("front", 400, 225, 70.0 * std::numbers::pi / 180.0, look_rotation({1, 0, 0}), pos,
                                0.1, default_far(g, pos));
    return cache.emplace(n, std::move(s)).first->second;
}

void
BM_RenderTiled(benchmark::State &state) {
    const Scene &s = scene(static_cast<int>(state.range(0)));
    const int saved = omp_get_max_threads();
    omp_set_num_threads(static_cast<int>(state.range(1)));
    std::size_t splats = 0;
    for (auto _ : state) {
        const RenderedView v = render(s.cam, s.set);
        splats = v.splat_count;
        benchmark::DoNotOptimize(v.depth.data());
    }
    omp_set_num_threads(saved);
    state.counters["splats"] = static_cast<double>(splats);
}

void
BM_RenderNaive(benchmark::State &state) {
    const Scene &s = scene(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const RenderedView v = naive_splat(s.cam, s.set);
        benchmark::DoNotOptimize(v.depth.data());
    }
}

void
BM_RenderBackward(benchmark::State &state) {
    const Scene &s = scene(static_cast<int>(state.range(0)));
    RenderOptions opts;
    opts.record_trace = true;
    const RenderedView v = render(s.cam, s.set, opts);
    const std::vector<double> ds(v.sem.size(), 1e-3);
    const std::vector<double> dd(v.depth.size(), 1e-3);
    for (auto _ : state) {
        const GradientBuffers g = render_backward(v, ds, dd);
        benchmark::DoNotOptimize(g.d_opacity.data());
    }
}

void
BM_Gaussianize(benchmark::State &state) {
    GridGeometry g;
    g.dims = {200, 200, 16};
    g.voxel_size = 0.5f;
    g.num_classes = 18;
    g.empty_class = 17;
    const auto logits = to_double(random_logits(g, 2, 1.0).logits());
    for (auto _ : state) {
        const GaussianSet set = gaussianize_prediction(g, logits, default_scale(g));
        benchmark::DoNotOptimize(set.opacity.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.voxel_count()));
}

} // namespace

BENCHMARK(BM_RenderTiled)->ArgsProduct({{25, 50, 100, 200}, {1, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderNaive)->Args({25})->Args({50})->Args({100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderBackward)->Args({25})->Args({50})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gaussianize)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
