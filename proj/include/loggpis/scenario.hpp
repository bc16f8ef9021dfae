#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loggpis/map.hpp"
#include "loggpis/scene.hpp"
#include "loggpis/sensor.hpp"
#include "loggpis/surface.hpp"

namespace loggpis {

/// How surface observations are produced for a scenario.
enum class SensorKind {
    kOracle,  // exact boundary samples with analytic normals
    kLidar,
    kDepth,
};
std::string_view ToString(SensorKind kind);

/// Everything one run needs; loaded from a flat `key = value` file.
struct ScenarioConfig {
    std::string name = "scenario";
    std::string source_dir = ".";  // directory of the top-level config file
    AnalyticScene scene;
    SensorKind sensor = SensorKind::kOracle;
    double oracle_spacing = 0.02;
    double oracle_noise = 0.01;
    Scan2D scan;
    DepthFrame depth;
    int depth_stride = 2;
    std::vector<Pose> poses;
    MapConfig map;
    GridSpec grid;       // evaluation slice
    GridSpec mesh_grid;  // surface extraction
    std::uint64_t seed = 1;
    std::vector<double> lambda_sweep{5.0, 10.0, 20.0, 40.0};
    std::string out_dir = "out";

    [[nodiscard]] int dim() const { return map.dim; }
    void Validate() const;
};

/// Parses config text. `include = file` lines are read in place, relative
/// to `base_dir`; later keys override earlier ones except repeatable
/// primitive keys (circle, box, pose), which accumulate.
ScenarioConfig ParseScenario(const std::string &text, const std::string &base_dir);
ScenarioConfig LoadScenario(const std::string &path);

/// Seed for frame i of a run.
std::uint64_t FrameSeed(std::uint64_t seed, std::size_t frame);

/// Simulated observations of a scenario, one entry per pose.
struct FrameSet {
    SensorKind sensor = SensorKind::kOracle;
    std::vector<Pose> poses;
    std::vector<Scan2D> scans;
    std::vector<DepthFrame> depths;
    std::vector<SurfacePoint> oracle_points;  // kOracle only, a single frame
    [[nodiscard]] std::size_t size() const;
};

FrameSet SimulateFrames(const ScenarioConfig &config);
/// Surface points of each frame in order.
std::vector<std::vector<SurfacePoint>> FramePoints(const ScenarioConfig &config, const FrameSet &frames);
/// Dense oracle samples of the scene boundary with outward normals.
std::vector<SurfacePoint> OracleSurfacePoints(const AnalyticScene &scene, double spacing, double noise);

/// Inserts frames one by one; refits after every frame when `incremental`,
/// otherwise once at the end.
ClusterMap BuildMap(const MapConfig &config, const std::vector<std::vector<SurfacePoint>> &frames,
                    bool incremental);

/// Writes frame files, a trajectory CSV and manifest.json into `dir`.
/// Returns the manifest path.
std::string WriteFrames(const std::string &dir, const ScenarioConfig &config, const FrameSet &frames);

struct LoadedFrames {
    FrameSet frames;
    std::vector<std::string> errors;  // one entry per frame that failed to load
};
LoadedFrames ReadFrames(const std::string &manifest_path);

/// Pose CSV: 2D rows `tx,ty,heading`, 3D rows `tx,ty,tz,qw,qx,qy,qz`.
std::vector<Pose> ReadTrajectory(const std::string &path, int dim);
void WriteTrajectory(const std::string &path, const std::vector<Pose> &poses);

/// Query points, one per line, comma or space separated.
Points ReadPoints(const std::string &path, int dim);

}  // namespace loggpis
