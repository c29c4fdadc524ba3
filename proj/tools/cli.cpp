// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include "occsplat/error.hpp"
#include "occsplat/image_io.hpp"
#include "occsplat/losses.hpp"
#include "occsplat/metrics.hpp"
#include "occsplat/placement.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace occsplat::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Argument helpers

std::vector<double>
parse_list(const std::string &text, const char *what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception &) {
            throw ArgumentError(std::string("bad value in ") + what + ": \"" + item + "\"");
        }
    }
    if (out.empty()) {
        throw ArgumentError(std::string(what) + " is empty");
    }
    return out;
}

/// Turns a JSON config object into command-line tokens.
std::vector<std::string>
config_tokens(const fs::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw ArgumentError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw ArgumentError("config must be a JSON object");
    }
    auto scalar = [](const nlohmann::json &v) {
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_number_integer()) {
            return std::to_string(v.get<long long>());
        }
        if (v.is_number()) {
            std::ostringstream ss;
            ss.precision(17);
            ss << v.get<double>();
            return ss.str();
        }
        throw ArgumentError("unsupported config value " + v.dump());
    };
    std::vector<std::string> tokens;
    for (const auto &[key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (value.is_boolean()) {
            if (value.get<bool>()) {
                tokens.push_back(flag);
            }
        } else if (value.is_array()) {
            std::string joined;
            for (const auto &v : value) {
                joined += (joined.empty() ? "" : ",") + scalar(v);
            }
            tokens.push_back(flag);
            tokens.push_back(joined);
        } else {
            tokens.push_back(flag);
            tokens.push_back(scalar(value));
        }
    }
    return tokens;
}

/// Config-file values are placed right after the subcommand so that flags
/// given on the command line, which come later, take precedence.
std::vector<std::string>
expand_config(int argc, char **argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::optional<std::string> config;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        }
    }
    if (!config || args.size() < 2) {
        return args;
    }
    const auto extra = config_tokens(*config);
    args.insert(args.begin() + 2, extra.begin(), extra.end());
    return args;
}

void
emit(const nlohmann::json &j) {
    std::cout << j.dump() << "\n";
}

std::string
file_stem(const Camera &cam) {
    std::string s = cam.id.empty() ? "camera" : cam.id;
    for (char &c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
            c = '_';
        }
    }
    return s;
}

void
write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw IoError("failed writing " + path.string());
    }
}

void
ensure_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

// ---------------------------------------------------------------------------
// Camera selection

struct CameraArgs {
    std::string cameras;
    std::string strategy;
    std::optional<std::uint64_t> seed;
    double ppm = 0.0;
    int count = 1;
};

double
bev_ppm(const CameraArgs &a, const GridGeometry &g) {
    return a.ppm > 0.0 ? a.ppm : 1.0 / g.voxel_size;
}

std::vector<Camera>
base_cameras(const CameraArgs &a, const GridGeometry &g) {
    return a.cameras.empty() ? surround_rig(g) : load_cameras(a.cameras);
}

std::vector<Camera>
placed_cameras(const CameraArgs &a, const GridGeometry &g, std::optional<std::span<const double>> error_volume) {
    PlacementSpec spec;
    spec.strategy = parse_strategy(a.strategy);
    spec.seed = a.seed;
    spec.count = a.count;
    spec.bev_pixels_per_meter = bev_ppm(a, g);
    if (spec.strategy != Strategy::bev) {
        spec.base_cameras = base_cameras(a, g);
    }
    return place_cameras(spec, g, error_volume);
}

// ---------------------------------------------------------------------------
// Ground-truth render cache

std::uint64_t
fnv(std::uint64_t h, const void *data, std::size_t n) {
    const auto *p = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string
cache_key(const OccupancyGrid &gt, const Camera &cam, double scale) {
    std::uint64_t h = 1469598103934665603ull;
    const std::uint64_t grid_hash = content_hash(gt);
    h = fnv(h, &grid_hash, sizeof grid_hash);
    const std::string cam_text = camera_to_json(cam).dump();
    h = fnv(h, cam_text.data(), cam_text.size());
    h = fnv(h, &scale, sizeof scale);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

constexpr char kCacheMagic[4] = {'O', 'G', 'T', 'V'};

void
save_view(const fs::path &path, const RenderedView &v) {
    std::string bytes(kCacheMagic, 4);
    auto put = [&bytes](const void *p, std::size_t n) { bytes.append(static_cast<const char *>(p), n); };
    const std::int32_t head[4] = {v.width, v.height, v.num_classes, v.empty_class};
    put(head, sizeof head);
    put(&v.d_range, sizeof v.d_range);
    const auto splats = static_cast<std::uint64_t>(v.splat_count);
    put(&splats, sizeof splats);
    put(v.sem.data(), v.sem.size() * sizeof(double));
    put(v.depth.data(), v.depth.size() * sizeof(double));
    put(v.residual_transmittance.data(), v.residual_transmittance.size() * sizeof(double));
    write_text(path, bytes);
}

std::optional<RenderedView>
load_view(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    std::size_t pos = 0;
    auto get = [&](void *p, std::size_t n) {
        if (pos + n > bytes.size()) {
            throw FormatError("truncated ground-truth cache entry " + path.string(), bytes.size());
        }
        std::memcpy(p, bytes.data() + pos, n);
        pos += n;
    };
    char magic[4];
    get(magic, 4);
    if (std::memcmp(magic, kCacheMagic, 4) != 0) {
        throw FormatError("bad ground-truth cache entry " + path.string(), 0);
    }
    RenderedView v;
    std::int32_t head[4];
    get(head, sizeof head);
    v.width = head[0];
    v.height = head[1];
    v.num_classes = head[2];
    v.empty_class = head[3];
    get(&v.d_range, sizeof v.d_range);
    std::uint64_t splats = 0;
    get(&splats, sizeof splats);
    v.splat_count = splats;
    const std::size_t hw = static_cast<std::size_t>(v.width) * v.height;
    v.sem.resize(hw * static_cast<std::size_t>(v.num_classes));
    v.depth.resize(hw);
    v.residual_transmittance.resize(hw);
    get(v.sem.data(), v.sem.size() * sizeof(double));
    get(v.depth.data(), v.depth.size() * sizeof(double));
    get(v.residual_transmittance.data(), v.residual_transmittance.size() * sizeof(double));
    if (pos != bytes.size()) {
        throw FormatError("trailing bytes in ground-truth cache entry " + path.string(), pos);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Commands

struct RenderArgs {
    std::string pred;
    std::string gt;
    CameraArgs cams;
    double scale = 0.0;
    std::string out;
    bool dump_probs = false;
};

double
resolve_scale(double requested, const GridGeometry &g) {
    if (requested == 0.0) {
        return default_scale(g);
    }
    if (!(requested > 0.0)) {
        throw ArgumentError("--scale must be positive");
    }
    return requested;
}

int
cmd_render(const RenderArgs &a) {
    const OccupancyGrid grid = load_grid(a.pred);
    const auto &g = grid.geometry;
    const double scale = resolve_scale(a.scale, g);

    std::optional<std::vector<double>> error_volume;
    if (!a.cams.strategy.empty() && parse_strategy(a.cams.strategy) == Strategy::dynamic) {
        if (a.gt.empty() || !grid.has_logits()) {
            throw ArgumentError("the dynamic strategy needs logits in --pred and labels in --gt");
        }
        error_volume = voxel_cross_entropy(g, to_double(grid.logits()), load_grid(a.gt));
    }
    std::vector<Camera> cams;
    if (!a.cams.strategy.empty()) {
        cams = placed_cameras(a.cams, g, error_volume ? std::optional<std::span<const double>>(*error_volume)
                                                      : std::nullopt);
    } else if (!a.cams.cameras.empty()) {
        cams = load_cameras(a.cams.cameras);
    } else {
        cams = {make_bev_camera(g, bev_ppm(a.cams, g))};
    }

    const GaussianSet set =
        grid.has_logits() ? gaussianize_prediction(grid, scale) : gaussianize_ground_truth(grid, scale);
    const fs::path out(a.out);
    ensure_dir(out);
    save_cameras(cams, out / "cameras.json");
    for (const auto &cam : cams) {
        const auto t0 = std::chrono::steady_clock::now();
        const RenderedView view = render(cam, set);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const std::string stem = file_stem(cam);
        write_pfm(out / (stem + "_depth.pfm"), view.width, view.height, view.depth);
        write_pgm(out / (stem + "_sem.pgm"), view.width, view.height, view.argmax(), view.num_classes);
        if (a.dump_probs) {
            write_probabilities(out / (stem + "_probs.f32"), view);
        }
        emit({{"event", "render"},
              {"camera", cam.id},
              {"width", view.width},
              {"height", view.height},
              {"primitives", set.size()},
              {"splats", view.splat_count},
              {"ms", ms}});
    }
    return kOk;
}

struct LossArgs {
    std::string pred;
    std::string gt;
    CameraArgs cams;
    double scale = 0.0;
    double lambda = kDefaultLambda;
    std::string out;
    bool cache_gt = false;
    bool dump_grads = false;
};

int
cmd_loss(const LossArgs &a) {
    const OccupancyGrid pred = load_grid(a.pred);
    const OccupancyGrid gt = load_grid(a.gt);
    if (!pred.has_logits()) {
        throw ArgumentError("--pred must hold logits for the loss command");
    }
    if (!gt.has_labels()) {
        throw ArgumentError("--gt must hold labels");
    }
    if (pred.geometry != gt.geometry) {
        throw GeometryError("prediction and ground-truth grids have different geometry");
    }
    if (!(a.lambda >= 0.0)) {
        throw ArgumentError("--lambda must be non-negative");
    }
    const auto &g = pred.geometry;
    const double scale = resolve_scale(a.scale, g);
    const auto logits = to_double(pred.logits());

    std::vector<Camera> cams;
    if (!a.cams.strategy.empty()) {
        const Strategy s = parse_strategy(a.cams.strategy);
        std::optional<std::vector<double>> error_volume;
        if (s == Strategy::dynamic) {
            error_volume = voxel_cross_entropy(g, logits, gt);
        }
        if (s != Strategy::bev) {
            cams.push_back(make_bev_camera(g, bev_ppm(a.cams, g)));
        }
        const auto placed = placed_cameras(
            a.cams, g, error_volume ? std::optional<std::span<const double>>(*error_volume) : std::nullopt);
        cams.insert(cams.end(), placed.begin(), placed.end());
    } else if (!a.cams.cameras.empty()) {
        cams = load_cameras(a.cams.cameras);
    } else {
        cams = {make_bev_camera(g, bev_ppm(a.cams, g)), surround_rig(g).front()};
    }

    std::optional<fs::path> out;
    if (!a.out.empty()) {
        out = fs::path(a.out);
        ensure_dir(*out);
    }
    L2dOptions opts;
    if (a.cache_gt) {
        if (!out) {
            throw ArgumentError("--cache-gt needs --out");
        }
        const fs::path dir = *out / "gt_cache";
        ensure_dir(dir);
        std::optional<GaussianSet> gt_set;
        for (const auto &cam : cams) {
            const fs::path entry = dir / (cache_key(gt, cam, scale) + ".ogtv");
            std::optional<RenderedView> view = load_view(entry);
            const bool hit = view.has_value();
            if (!hit) {
                if (!gt_set) {
                    gt_set = gaussianize_ground_truth(gt, scale);
                }
                view = render(cam, *gt_set, opts.render);
                save_view(entry, *view);
            }
            emit({{"event", "gt_cache"}, {"camera", cam.id}, {"hit", hit}});
            opts.gt_views.push_back(std::move(*view));
        }
    }

    const LossReport report = compute_loss(g, logits, gt, cams, scale, a.lambda, opts);
    nlohmann::json j = report.to_json();
    j["scale"] = scale;
    if (out) {
        write_text(*out / "loss.json", j.dump(2) + "\n");
        if (a.dump_grads) {
            std::string raw(report.d_logits.size() * sizeof(float), '\0');
            for (std::size_t i = 0; i < report.d_logits.size(); ++i) {
                const auto f = static_cast<float>(report.d_logits[i]);
                std::memcpy(raw.data() + i * sizeof(float), &f, sizeof(float));
            }
            write_text(*out / "grad_logits.f32", raw);
            write_text(*out / "grad_logits.f32.json",
                       nlohmann::json({{"dims", {g.dims[0], g.dims[1], g.dims[2]}},
                                       {"num_classes", g.num_classes},
                                       {"dtype", "float32"},
                                       {"endianness", "little"},
                                       {"layout", "z, y, x, class"},
                                       {"of", "total"}})
                               .dump(2) +
                           "\n");
        }
    } else if (a.dump_grads) {
        throw ArgumentError("--dump-grads needs --out");
    }
    j["event"] = "loss";
    emit(j);
    return kOk;
}

struct EvalArgs {
    std::string pred;
    std::string gt;
    std::string cameras;
    std::string tolerances = "1,2,4";
    double ppm = 0.0;
    int stride = 1;
    std::string out;
};

int
cmd_eval(const EvalArgs &a) {
    OccupancyGrid pred = load_grid(a.pred);
    const OccupancyGrid gt = load_grid(a.gt);
    if (pred.geometry != gt.geometry) {
        throw GeometryError("prediction and ground-truth grids have different geometry");
    }
    if (!gt.has_labels()) {
        throw ArgumentError("--gt must hold labels");
    }
    if (pred.has_logits()) {
        pred = argmax_labels(pred.geometry, to_double(pred.logits()));
    }
    const auto &g = gt.geometry;
    const auto tolerances = parse_list(a.tolerances, "--tolerances");
    const double ppm = a.ppm > 0.0 ? a.ppm : 1.0 / g.voxel_size;
    const auto cams = a.cameras.empty() ? surround_rig(g) : load_cameras(a.cameras);
    const RaySet rays = rays_from_cameras(cams, a.stride);
    const MetricsReport report = evaluate(pred, gt, rays, tolerances, ppm);

    nlohmann::json j = report.to_json();
    j["rays"] = rays.size();
    if (!a.out.empty()) {
        const fs::path out(a.out);
        ensure_dir(out);
        write_text(out / "metrics.json", j.dump(2) + "\n");
        write_text(out / "metrics.csv", report.csv_header() + "\n" + report.csv_row() + "\n");
    }
    j["event"] = "eval";
    emit(j);
    return kOk;
}

struct SynthArgs {
    std::string dims = "8,8,8";
    std::string origin = "0,0,0";
    double voxel = 0.5;
    int classes = 4;
    int empty = 0;
    std::string scene = "empty";
    std::string kind = "labels";
    double magnitude = 20.0;
    double stddev = 1.0;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int
cmd_synth(const SynthArgs &a) {
    const auto dims = parse_list(a.dims, "--dims");
    const auto origin = parse_list(a.origin, "--origin");
    if (dims.size() != 3 || origin.size() != 3) {
        throw ArgumentError("--dims and --origin take three values");
    }
    GridGeometry g;
    for (int k = 0; k < 3; ++k) {
        if (dims[k] != std::floor(dims[k])) {
            throw ArgumentError("--dims must be integers");
        }
        g.dims[k] = static_cast<int>(dims[k]);
        g.origin[k] = static_cast<float>(origin[k]);
    }
    g.voxel_size = static_cast<float>(a.voxel);
    g.num_classes = a.classes;
    g.empty_class = a.empty;
    g.validate();

    OccupancyGrid grid;
    if (a.kind == "random") {
        if (!a.seed) {
            throw ArgumentError("random logits need --seed");
        }
        grid = random_logits(g, *a.seed, a.stddev);
    } else {
        grid = synth_scene(g, parse_scene_spec(a.scene));
        if (a.kind == "logits") {
            grid = logits_from_labels(grid, static_cast<float>(a.magnitude));
        } else if (a.kind != "labels") {
            throw ArgumentError("--kind must be labels, logits or random");
        }
    }
    save_grid(grid, a.out);
    emit({{"event", "synth"},
          {"out", a.out},
          {"kind", a.kind},
          {"voxels", g.voxel_count()},
          {"content_hash", content_hash(grid)}});
    return kOk;
}

void
add_camera_options(CLI::App *app, CameraArgs &c) {
    app->add_option("--cameras", c.cameras, "Camera JSON file (base cameras when --strategy is set)");
    app->add_option("--strategy", c.strategy, "sensor|elevated|elevated_around|fully_random|dynamic|bev");
    app->add_option("--seed", c.seed, "Seed for sampling strategies");
    app->add_option("--ppm", c.ppm, "BeV pixels per meter (default: one pixel per voxel)");
    app->add_option("--count", c.count, "Cameras drawn by fully_random and dynamic");
}

} // namespace

int
run(int argc, char **argv) {
    CLI::App app{"Gaussian-splat rendering losses and metrics for semantic occupancy grids", "occsplat"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::string config;
    auto add_config = [&config](CLI::App *sub) {
        sub->add_option("--config", config, "JSON file whose keys mirror the flags; flags win");
    };

    RenderArgs ra;
    auto *render_cmd = app.add_subcommand("render", "Render a grid into depth and semantic images");
    render_cmd->add_option("--pred", ra.pred, "Grid to render (labels or logits)")->required();
    render_cmd->add_option("--gt", ra.gt, "Ground-truth labels, needed by the dynamic strategy");
    add_camera_options(render_cmd, ra.cams);
    render_cmd->add_option("--scale", ra.scale, "Gaussian standard deviation in meters (default voxel/2)");
    render_cmd->add_option("--out", ra.out, "Output directory")->required();
    render_cmd->add_flag("--dump-probs", ra.dump_probs, "Also write per-class probabilities");
    add_config(render_cmd);

    LossArgs la;
    auto *loss_cmd = app.add_subcommand("loss", "Rendering and voxel losses with gradients");
    loss_cmd->add_option("--pred", la.pred, "Predicted logits")->required();
    loss_cmd->add_option("--gt", la.gt, "Ground-truth labels")->required();
    add_camera_options(loss_cmd, la.cams);
    loss_cmd->add_option("--scale", la.scale, "Gaussian standard deviation in meters (default voxel/2)");
    loss_cmd->add_option("--lambda", la.lambda, "Weight of the rendering loss");
    loss_cmd->add_option("--out", la.out, "Output directory");
    loss_cmd->add_flag("--cache-gt", la.cache_gt, "Reuse ground-truth renders from <out>/gt_cache");
    loss_cmd->add_flag("--dump-grads", la.dump_grads, "Write total-loss logit gradients");
    add_config(loss_cmd);

    EvalArgs ea;
    auto *eval_cmd = app.add_subcommand("eval", "Voxel, ray and BeV metrics");
    eval_cmd->add_option("--pred", ea.pred, "Predicted labels or logits")->required();
    eval_cmd->add_option("--gt", ea.gt, "Ground-truth labels")->required();
    eval_cmd->add_option("--cameras", ea.cameras, "Cameras whose pixel rays are cast (default surround rig)");
    eval_cmd->add_option("--tolerances", ea.tolerances, "RayIoU depth tolerances in meters, comma separated");
    eval_cmd->add_option("--ppm", ea.ppm, "BeV pixels per meter");
    eval_cmd->add_option("--stride", ea.stride, "Cast a ray through every n-th pixel");
    eval_cmd->add_option("--out", ea.out, "Output directory");
    add_config(eval_cmd);

    VerifyOptions va;
    auto *verify_cmd = app.add_subcommand("verify", "Run the oracle suite");
    verify_cmd->add_option("--seed", va.seed, "First gradcheck seed");
    verify_cmd->add_option("--sweep", va.seeds, "Number of gradcheck seeds");
    verify_cmd->add_option("--poses", va.poses, "Camera poses per fixture");
    add_config(verify_cmd);

    SynthArgs sa;
    auto *synth_cmd = app.add_subcommand("synth", "Write a synthetic fixture grid");
    synth_cmd->add_option("--dims", sa.dims, "Grid dims x,y,z");
    synth_cmd->add_option("--origin", sa.origin, "Minimum corner x,y,z in meters");
    synth_cmd->add_option("--voxel", sa.voxel, "Voxel size in meters");
    synth_cmd->add_option("--classes", sa.classes, "Number of classes including empty");
    synth_cmd->add_option("--empty", sa.empty, "Index of the empty class");
    synth_cmd->add_option("--scene", sa.scene,
                          "empty | single_voxel:x,y,z:c | floor:z:c | box:x,y,z:x,y,z:c | two_walls:fx:bx:fc:bc");
    synth_cmd->add_option("--kind", sa.kind, "labels | logits (saturated one-hot) | random");
    synth_cmd->add_option("--magnitude", sa.magnitude, "Logit magnitude for --kind logits");
    synth_cmd->add_option("--stddev", sa.stddev, "Standard deviation for --kind random");
    synth_cmd->add_option("--seed", sa.seed, "Seed for --kind random");
    synth_cmd->add_option("--out", sa.out, "Output OCCG file")->required();
    add_config(synth_cmd);

    try {
        const auto args = expand_config(argc, argv);
        std::vector<const char *> raw;
        raw.reserve(args.size());
        for (const auto &s : args) {
            raw.push_back(s.c_str());
        }
        try {
            app.parse(static_cast<int>(raw.size()), raw.data());
        } catch (const CLI::CallForHelp &e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp &e) {
            return app.exit(e);
        } catch (const CLI::ParseError &e) {
            std::cerr << "error: " << e.what() << "\n";
            return kConfigError;
        }

        if (render_cmd->parsed()) {
            return cmd_render(ra);
        }
        if (loss_cmd->parsed()) {
            return cmd_loss(la);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(ea);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(sa);
        }
        if (verify_cmd->parsed()) {
            if (va.seeds < 1 || va.poses < 1) {
                throw ArgumentError("--sweep and --poses must be >= 1");
            }
            return run_verify(va, std::cout, std::cerr) ? kOk : kVerifyFailed;
        }
        return kConfigError;
    } catch (const IoError &e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const FormatError &e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "error: malformed JSON input: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

} // namespace occsplat::cli
