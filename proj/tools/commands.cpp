#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/spdlog.h>

#include "loggpis/error.hpp"
#include "loggpis/evaluation.hpp"
#include "loggpis/scenario.hpp"

namespace loggpis::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::optional<double> lambda;
    std::optional<std::string> kernel;
    std::optional<std::string> method;
    std::string frames;      // manifest.json from simulate
    std::string map;         // saved map file
    std::string trajectory;  // pose CSV for sign recovery
    std::string points;      // query points file
    bool baseline = false;
    bool verbose = false;
};

ScenarioConfig LoadConfig(const Options &o) {
    if (o.config.empty()) throw Error(ErrorCode::kConfig, "--config is required");
    ScenarioConfig c = LoadScenario(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.lambda) c.map.kernel.lambda = *o.lambda;
    if (o.kernel) c.map.kernel.kind = KernelKindFromString(*o.kernel);
    if (o.method) c.map.method = MethodFromString(*o.method);
    if (!o.out.empty()) c.out_dir = o.out;
    c.Validate();
    return c;
}

fs::path OutDir(const ScenarioConfig &c) {
    fs::path dir(c.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIo, "cannot create output dir " + dir.string());
    return dir;
}

struct Built {
    ClusterMap map;
    std::vector<Pose> poses;
    double seconds = 0.0;
};

// Frames from --frames when given, otherwise simulated from the config.
std::pair<FrameSet, std::vector<std::string>> Frames(const Options &o, const ScenarioConfig &c) {
    if (o.frames.empty()) return {SimulateFrames(c), {}};
    LoadedFrames loaded = ReadFrames(o.frames);
    return {std::move(loaded.frames), std::move(loaded.errors)};
}

Built BuildFromFrames(const Options &o, const ScenarioConfig &c) {
    const auto t0 = std::chrono::steady_clock::now();
    auto [frames, errors] = Frames(o, c);
    for (const std::string &e : errors) spdlog::error("{}", e);
    const auto points = FramePoints(c, frames);
    ClusterMap map(c.map);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const InsertReport ins = map.Insert(points[i]);
        const RefitReport refit = map.RefitDirty();
        spdlog::info("frame {}: {} points, {} inserted, {} fused, {} rejected, {} leaves refit, {} failed", i,
                     points[i].size(), ins.inserted, ins.fused, ins.rejected, refit.refit, refit.failed);
    }
    if (points.empty()) spdlog::warn("no frames; writing an empty map");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(map), frames.poses, seconds};
}

// A saved map from --map, otherwise a fresh build.
Built ObtainMap(const Options &o, const ScenarioConfig &c) {
    if (o.map.empty()) return BuildFromFrames(o, c);
    const auto t0 = std::chrono::steady_clock::now();
    ClusterMap map = ClusterMap::Load(o.map);
    std::vector<Pose> poses;
    if (!o.trajectory.empty()) poses = ReadTrajectory(o.trajectory, map.config().dim);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(map), std::move(poses), seconds};
}

std::vector<Vector> Positions(const std::vector<Pose> &poses) {
    std::vector<Vector> out;
    for (const Pose &p : poses) out.push_back(p.translation);
    return out;
}

int CmdSimulate(const Options &o) {
    const ScenarioConfig c = LoadConfig(o);
    const FrameSet frames = SimulateFrames(c);
    const std::string manifest = WriteFrames(OutDir(c).string(), c, frames);
    spdlog::info("{} frames written", frames.size());
    std::cout << manifest << '\n';
    return 0;
}

int CmdBuild(const Options &o) {
    const ScenarioConfig c = LoadConfig(o);
    const fs::path dir = OutDir(c);
    Built b = BuildFromFrames(o, c);
    const HealthReport h = b.map.Health();
    const std::string path = (dir / "map.txt").string();
    b.map.Save(path);
    if (!b.poses.empty()) WriteTrajectory((dir / "trajectory.csv").string(), b.poses);
    spdlog::info("{} points, {} leaves, {} usable, {} failed, {:.3f} s", b.map.points().size(), h.leaves,
                 h.usable, h.failed, b.seconds);
    std::cout << path << '\n';
    return 0;
}

int CmdQuery(const Options &o) {
    const ScenarioConfig c = LoadConfig(o);
    const fs::path dir = OutDir(c);
    Built b = ObtainMap(o, c);
    const int dim = b.map.config().dim;
    const Points queries = o.points.empty() ? c.grid.NodePositions() : ReadPoints(o.points, dim);
    const std::vector<FieldEstimate> est =
        queries.rows() > 0 && b.map.HasUsableLeaf() ? b.map.QueryBatch(queries) : std::vector<FieldEstimate>{};
    if (queries.rows() > 0 && est.empty()) throw Error(ErrorCode::kEmptyMap, "no usable clusters");
    std::vector<SignedSample> signs;
    if (!est.empty() && b.map.config().method == Method::kLogGpis) {
        signs = MapSignedField(b.map, Positions(b.poses)).SampleBatch(queries);
    }

    const std::string path = (dir / "query.csv").string();
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
    os.precision(12);
    const char *axes[] = {"x", "y", "z"};
    for (int a = 0; a < dim; ++a) os << axes[a] << ',';
    os << "distance,";
    for (int a = 0; a < dim; ++a) os << 'g' << axes[a] << ',';
    os << "variance,sign,clamped,latent_mean\n";
    for (std::size_t i = 0; i < est.size(); ++i) {
        const FieldEstimate &e = est[i];
        const Sign sign = signs.empty() ? e.sign : signs[i].sign;
        for (int a = 0; a < dim; ++a) os << queries(static_cast<Eigen::Index>(i), a) << ',';
        os << e.distance << ',';
        for (int a = 0; a < dim; ++a) os << (e.gradient_defined ? e.gradient(a) : 0.0) << ',';
        os << e.variance << ',' << static_cast<int>(sign) << ',' << (e.clamped ? 1 : 0) << ','
           << e.latent_mean << '\n';
    }
    std::cout << path << '\n';
    return 0;
}

int CmdMesh(const Options &o) {
    const ScenarioConfig c = LoadConfig(o);
    const fs::path dir = OutDir(c);
    Built b = ObtainMap(o, c);
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh mesh = ExtractIso(b.map, c.mesh_grid, b.poses);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (mesh.empty()) spdlog::warn("no zero crossing in the grid; the mesh is empty");
    std::string path;
    if (mesh.dim() == 3 || c.dim() == 3) {
        path = (dir / "mesh.ply").string();
        WriteMeshPly(path, mesh);
    } else {
        path = (dir / "contour.csv").string();
        WriteContourCsv(path, mesh);
    }
    spdlog::info("{} vertices, {} faces, {} segments, {:.2f} s", mesh.vertices.rows(), mesh.faces.size(),
                 mesh.segments.size(), seconds);
    if (!c.scene.empty() && !mesh.empty()) {
        const MeshErrorReport err = MeshError(mesh, c.scene);
        WriteHistogramCsv((dir / "mesh_error_hist.csv").string(), err);
        spdlog::info("vertex error median {:.4f} m, p95 {:.4f} m, variance-error spearman {:.3f}", err.median,
                     err.p95, err.spearman);
    }
    std::cout << path << '\n';
    return 0;
}

int CmdEval(const Options &o) {
    const ScenarioConfig c = LoadConfig(o);
    if (c.scene.empty()) throw Error(ErrorCode::kConfig, "evaluation needs a non-empty scene");
    const fs::path dir = OutDir(c);
    Built b = ObtainMap(o, c);
    std::vector<MetricsReport> reports;
    SliceOptions opt;
    opt.csv_path = (dir / ("slice_" + std::string(ToString(b.map.config().method)) + ".csv")).string();
    SliceResult main = EvaluateSlice(b.map, c.scene, c.grid, opt);
    main.report.build_seconds = b.seconds;
    reports.push_back(main.report);
    if (o.baseline) {
        const auto t0 = std::chrono::steady_clock::now();
        const ClusterMap standard = MakeStandardGpis(b.map);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        SliceOptions bopt;
        std::vector<bool> mask;
        for (const NodeRecord &n : main.nodes) mask.push_back(!n.clamped);
        bopt.mask = std::move(mask);
        bopt.csv_path = (dir / "slice_gpis.csv").string();
        SliceResult base = EvaluateSlice(standard, c.scene, c.grid, bopt);
        base.report.build_seconds = seconds;
        reports.push_back(base.report);
    }
    const std::string path = (dir / "eval.json").string();
    WriteReportJson(path, reports);
    for (const MetricsReport &r : reports) {
        spdlog::info("{}: rmse {:.4f} m over {} nodes, clamp {:.3f}, eikonal p95 {:.3f}", r.method, r.rmse,
                     r.evaluated, r.clamp_fraction, r.eikonal_p95);
    }
    std::cout << path << '\n';
    return 0;
}

int CmdCompare(const Options &o) {
    ScenarioConfig c = LoadConfig(o);
    if (c.scene.empty()) throw Error(ErrorCode::kConfig, "comparison needs a non-empty scene");
    const fs::path dir = OutDir(c);
    auto [frames, errors] = Frames(o, c);
    for (const std::string &e : errors) spdlog::error("{}", e);
    const auto points = FramePoints(c, frames);

    std::vector<std::string> kernels{"matern32", "whittle"};
    if (o.kernel) kernels = {*o.kernel};
    std::vector<double> lambdas = c.lambda_sweep;
    if (o.lambda) lambdas = {*o.lambda};

    const std::string path = (dir / "compare.csv").string();
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
    os << "method,kernel,lambda,rmse,mean_abs_err,eikonal_p95,clamp_fraction,evaluated,build_s,query_us\n";
    std::vector<MetricsReport> all;
    for (const std::string &kernel : kernels) {
        for (double lambda : lambdas) {
            MapConfig mc = c.map;
            mc.kernel.kind = KernelKindFromString(kernel);
            mc.kernel.lambda = lambda;
            mc.method = Method::kLogGpis;
            const auto t0 = std::chrono::steady_clock::now();
            const ClusterMap log_map = BuildMap(mc, points, false);
            const double log_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            SliceResult log_res = EvaluateSlice(log_map, c.scene, c.grid);
            log_res.report.build_seconds = log_s;

            const auto t1 = std::chrono::steady_clock::now();
            const ClusterMap std_map = MakeStandardGpis(log_map);
            const double std_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
            SliceOptions so;
            std::vector<bool> mask;
            for (const NodeRecord &n : log_res.nodes) mask.push_back(!n.clamped);
            so.mask = std::move(mask);
            SliceResult std_res = EvaluateSlice(std_map, c.scene, c.grid, so);
            std_res.report.build_seconds = std_s;

            for (MetricsReport *r : {&log_res.report, &std_res.report}) {
                os << r->method << ',' << kernel << ',' << lambda << ',' << r->rmse << ',' << r->mean_abs_err
                   << ',' << r->eikonal_p95 << ',' << r->clamp_fraction << ',' << r->evaluated << ','
                   << r->build_seconds << ',' << r->query_us_per_point << '\n';
                spdlog::info("{} {} lambda {}: rmse {:.4f}", r->method, kernel, lambda, r->rmse);
                all.push_back(*r);
            }
        }
    }
    WriteReportJson((dir / "compare.json").string(), all);
    std::cout << path << '\n';
    return 0;
}

}  // namespace

int Run(const std::vector<std::string> &args) {
    CLI::App app{"Log-GPIS mapping: simulate, build, query, mesh, eval, compare"};
    app.require_subcommand(1);
    Options o;
    auto common = [&o](CLI::App *sub) {
        sub->add_option("--config", o.config, "scenario config file")->required();
        sub->add_option("--out", o.out, "output directory (overrides out_dir)");
        sub->add_option("--seed", o.seed, "random seed override");
        sub->add_option("--threads", o.threads, "worker thread cap (0 = OpenMP default)");
        sub->add_option("--lambda", o.lambda, "kernel lambda override")->check(CLI::Range(1e-9, 1000.0));
        sub->add_option("--kernel", o.kernel, "kernel override")->check(CLI::IsMember({"whittle", "matern32"}));
        sub->add_option("--method", o.method, "method override")->check(CLI::IsMember({"loggpis", "gpis"}));
        sub->add_flag("-v,--verbose", o.verbose, "debug logging");
    };
    auto with_map = [&o](CLI::App *sub) {
        sub->add_option("--map", o.map, "saved map (built from the config when absent)");
        sub->add_option("--trajectory", o.trajectory, "pose CSV for sign recovery");
        sub->add_option("--frames", o.frames, "manifest.json from simulate, used when building");
    };
    CLI::App *simulate = app.add_subcommand("simulate", "write simulated frames and a manifest");
    common(simulate);
    CLI::App *build = app.add_subcommand("build", "build and save a map from frames");
    common(build);
    build->add_option("--frames", o.frames, "manifest.json from simulate (simulated when absent)");
    CLI::App *query = app.add_subcommand("query", "query a map at points or the slice grid");
    common(query);
    with_map(query);
    query->add_option("--points", o.points, "query points file (slice grid when absent)");
    CLI::App *mesh = app.add_subcommand("mesh", "extract the zero level set");
    common(mesh);
    with_map(mesh);
    CLI::App *eval = app.add_subcommand("eval", "slice metrics against the analytic scene");
    common(eval);
    with_map(eval);
    eval->add_flag("--baseline", o.baseline, "also evaluate standard GPIS on the same points");
    CLI::App *compare = app.add_subcommand("compare", "RMSE over methods, kernels and the lambda sweep");
    common(compare);
    compare->add_option("--frames", o.frames, "manifest.json from simulate (simulated when absent)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    spdlog::set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);
    if (o.threads > 0) omp_set_num_threads(o.threads);

    try {
        if (simulate->parsed()) return CmdSimulate(o);
        if (build->parsed()) return CmdBuild(o);
        if (query->parsed()) return CmdQuery(o);
        if (mesh->parsed()) return CmdMesh(o);
        if (eval->parsed()) return CmdEval(o);
        if (compare->parsed()) return CmdCompare(o);
    } catch (const std::exception &e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 2;
}

}  // namespace loggpis::cli
