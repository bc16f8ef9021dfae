#include "loggpis/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "loggpis/error.hpp"

namespace loggpis {

namespace fs = std::filesystem;

std::string_view ToString(SensorKind kind) {
    switch (kind) {
        case SensorKind::kOracle: return "oracle";
        case SensorKind::kLidar: return "lidar";
        case SensorKind::kDepth: return "depth";
    }
    return "oracle";
}

namespace {

SensorKind SensorFromString(const std::string &name) {
    if (name == "oracle") return SensorKind::kOracle;
    if (name == "lidar") return SensorKind::kLidar;
    if (name == "depth") return SensorKind::kDepth;
    throw Error(ErrorCode::kConfig, "unknown sensor '" + name + "'");
}

struct Entry {
    std::string key;
    std::string value;
    std::string origin;  // file:line for messages
    std::string dir;     // directory of the file the entry came from
};

std::string Trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string ReadFile(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::kIo, "cannot read " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void Collect(const std::string &text, const std::string &origin, const std::string &dir, int depth,
             std::vector<Entry> &out) {
    if (depth > 16) throw Error(ErrorCode::kConfig, origin + ": include nesting too deep");
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = Trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::kConfig, where + ": expected key = value");
        Entry e{Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)), where, dir};
        if (e.key.empty()) throw Error(ErrorCode::kConfig, where + ": empty key");
        if (e.key == "include") {
            const fs::path p = fs::path(dir) / e.value;
            Collect(ReadFile(p.string()), p.string(), p.parent_path().string(), depth + 1, out);
            continue;
        }
        out.push_back(std::move(e));
    }
}

std::vector<double> Numbers(const Entry &e) {
    std::istringstream is(e.value);
    std::vector<double> v;
    std::string tok;
    while (is >> tok) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception &) {
            throw Error(ErrorCode::kConfig, e.origin + ": '" + e.key + "' expects numbers, got '" + tok + "'");
        }
    }
    return v;
}

double Number(const Entry &e) {
    const auto v = Numbers(e);
    if (v.size() != 1) throw Error(ErrorCode::kConfig, e.origin + ": '" + e.key + "' expects one number");
    return v[0];
}

Vector VectorOf(const Entry &e, std::size_t n) {
    const auto v = Numbers(e);
    if (v.size() != n) {
        throw Error(ErrorCode::kConfig, e.origin + ": '" + e.key + "' expects " + std::to_string(n) + " numbers");
    }
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(n));
}

int Integer(const Entry &e) {
    const double v = Number(e);
    if (v != std::floor(v)) throw Error(ErrorCode::kConfig, e.origin + ": '" + e.key + "' expects an integer");
    return static_cast<int>(v);
}

Pose PoseFromRow(const std::vector<double> &v, int dim, const std::string &where) {
    if (dim == 2 && v.size() == 3) return Pose::FromHeading(v[0], v[1], v[2]);
    if (dim == 3 && v.size() == 7) {
        return Pose::FromQuaternion(Eigen::Vector3d(v[0], v[1], v[2]), v[3], v[4], v[5], v[6]);
    }
    throw Error(ErrorCode::kConfig, where + ": pose needs " + std::string(dim == 2 ? "tx ty heading" : "tx ty tz qw qx qy qz"));
}

std::vector<Pose> RingPoses(const std::vector<double> &v, const std::string &where) {
    // cx cy radius count [phase_deg]
    if (v.size() < 4 || v.size() > 5 || v[3] < 1) {
        throw Error(ErrorCode::kConfig, where + ": poses.ring = cx cy radius count [phase_deg]");
    }
    const int count = static_cast<int>(v[3]);
    const double phase = v.size() == 5 ? v[4] * M_PI / 180.0 : 0.0;
    std::vector<Pose> out;
    for (int i = 0; i < count; ++i) {
        const double a = phase + 2.0 * M_PI * i / count;
        const double x = v[0] + v[2] * std::cos(a);
        const double y = v[1] + v[2] * std::sin(a);
        out.push_back(Pose::FromHeading(x, y, std::atan2(v[1] - y, v[0] - x)));
    }
    return out;
}

std::vector<Pose> OrbitPoses(const std::vector<double> &v, const std::string &where) {
    // cx cy cz radius height count [phase_deg]
    if (v.size() < 6 || v.size() > 7 || v[5] < 1) {
        throw Error(ErrorCode::kConfig, where + ": poses.orbit = cx cy cz radius height count [phase_deg]");
    }
    const int count = static_cast<int>(v[5]);
    const double phase = v.size() == 7 ? v[6] * M_PI / 180.0 : 0.0;
    const Eigen::Vector3d target(v[0], v[1], v[2]);
    std::vector<Pose> out;
    for (int i = 0; i < count; ++i) {
        const double a = phase + 2.0 * M_PI * i / count;
        // Alternate between two heights so the pile is seen from above and
        // closer to the side.
        const double h = (i % 2 == 0) ? v[4] : 0.5 * v[4];
        const Eigen::Vector3d eye(v[0] + v[3] * std::cos(a), v[1] + v[3] * std::sin(a), v[2] + h);
        out.push_back(Pose::LookAt(eye, target, Eigen::Vector3d::UnitZ()));
    }
    return out;
}

GridSpec GridFrom(const std::map<std::string, const Entry *> &last, const std::string &prefix, int dim) {
    GridSpec g;
    const auto o = last.find(prefix + ".origin");
    const auto c = last.find(prefix + ".cell");
    const auto n = last.find(prefix + ".counts");
    if (o == last.end() && c == last.end() && n == last.end()) return g;
    if (o == last.end() || c == last.end() || n == last.end()) {
        throw Error(ErrorCode::kConfig, prefix + " grid needs origin, cell and counts");
    }
    g.origin = VectorOf(*o->second, static_cast<std::size_t>(dim));
    g.cell_size = Number(*c->second);
    for (double v : Numbers(*n->second)) g.counts.push_back(static_cast<int>(v));
    if (static_cast<int>(g.counts.size()) != dim) {
        throw Error(ErrorCode::kConfig, n->second->origin + ": counts needs one entry per axis");
    }
    return g;
}

}  // namespace

std::size_t FrameSet::size() const {
    switch (sensor) {
        case SensorKind::kOracle: return oracle_points.empty() ? 0 : 1;
        case SensorKind::kLidar: return scans.size();
        case SensorKind::kDepth: return depths.size();
    }
    return 0;
}

void ScenarioConfig::Validate() const {
    map.Validate();
    scene.Validate();
    if (scene.dim() != map.dim) throw Error(ErrorCode::kConfig, "scene and map dimensions differ");
    if (!(map.kernel.lambda > 0.0) || map.kernel.lambda > 1000.0) {
        throw Error(ErrorCode::kConfig, "lambda must lie in (0, 1000]");
    }
    if (sensor == SensorKind::kLidar && map.dim != 2) throw Error(ErrorCode::kConfig, "lidar needs a 2D scene");
    if (sensor == SensorKind::kDepth && map.dim != 3) throw Error(ErrorCode::kConfig, "depth needs a 3D scene");
    if (sensor != SensorKind::kOracle && poses.empty()) throw Error(ErrorCode::kConfig, "sensor needs poses");
    if (sensor == SensorKind::kOracle && !(oracle_spacing > 0.0)) {
        throw Error(ErrorCode::kConfig, "oracle.spacing must be > 0");
    }
    if (depth_stride < 1) throw Error(ErrorCode::kConfig, "depth.stride must be >= 1");
    for (const GridSpec *g : {&grid, &mesh_grid}) {
        if (g->counts.empty()) continue;
        if (g->dim() != map.dim) throw Error(ErrorCode::kConfig, "grid dimension differs from the map");
        g->Validate(false);
    }
    for (double l : lambda_sweep) {
        if (!(l > 0.0) || l > 1000.0) throw Error(ErrorCode::kConfig, "lambda_sweep values must lie in (0, 1000]");
    }
}

ScenarioConfig ParseScenario(const std::string &text, const std::string &base_dir) {
    std::vector<Entry> entries;
    Collect(text, "<config>", base_dir, 0, entries);

    static const std::vector<std::string> kKnown = {
        "name", "dim", "arena_min", "arena_max", "circle", "box", "sensor", "oracle.spacing",
        "oracle.noise", "scan.angle_min_deg", "scan.angle_max_deg", "scan.step_deg", "scan.noise",
        "scan.max_range", "depth.width", "depth.height", "depth.fx", "depth.fy", "depth.cx", "depth.cy",
        "depth.noise", "depth.stride", "poses_file", "poses.ring", "poses.orbit", "pose", "lambda",
        "kernel", "sigma2", "noise_y", "noise_grad", "method", "gradient_target", "latent_floor",
        "leaf_capacity", "support_margin", "fuse_radius", "blend", "additive_cutoff", "max_fuse_angle_deg", "grid.origin",
        "grid.cell", "grid.counts", "mesh.origin", "mesh.cell", "mesh.counts", "seed", "lambda_sweep",
        "out_dir"};
    std::map<std::string, const Entry *> last;
    for (const Entry &e : entries) {
        if (std::find(kKnown.begin(), kKnown.end(), e.key) == kKnown.end()) {
            throw Error(ErrorCode::kConfig, e.origin + ": unknown key '" + e.key + "'");
        }
        last[e.key] = &e;
    }
    auto get = [&](const std::string &key) -> const Entry * {
        const auto it = last.find(key);
        return it == last.end() ? nullptr : it->second;
    };

    ScenarioConfig c;
    c.source_dir = base_dir;
    if (const Entry *e = get("name")) c.name = e->value;
    if (const Entry *e = get("dim")) c.map.dim = Integer(*e);
    const int dim = c.map.dim;
    if (!IsSupportedDim(dim)) throw Error(ErrorCode::kConfig, "dim must be 2 or 3");
    const auto ud = static_cast<std::size_t>(dim);
    if (const Entry *e = get("arena_min")) c.map.arena_min = VectorOf(*e, ud);
    if (const Entry *e = get("arena_max")) c.map.arena_max = VectorOf(*e, ud);

    c.scene = AnalyticScene(dim);
    for (const Entry &e : entries) {
        if (e.key == "circle") {
            const Vector v = VectorOf(e, 3);
            c.scene.AddCircle(v.head(2), v(2));
        } else if (e.key == "box") {
            const Vector v = VectorOf(e, 6);
            c.scene.AddBox(v.head(3), v.tail(3));
        }
    }

    if (const Entry *e = get("sensor")) c.sensor = SensorFromString(e->value);
    if (const Entry *e = get("oracle.spacing")) c.oracle_spacing = Number(*e);
    if (const Entry *e = get("oracle.noise")) c.oracle_noise = Number(*e);
    constexpr double kDeg = M_PI / 180.0;
    if (const Entry *e = get("scan.angle_min_deg")) c.scan.angle_min = Number(*e) * kDeg;
    if (const Entry *e = get("scan.angle_max_deg")) c.scan.angle_max = Number(*e) * kDeg;
    if (const Entry *e = get("scan.step_deg")) c.scan.angle_step = Number(*e) * kDeg;
    if (const Entry *e = get("scan.noise")) c.scan.range_noise = Number(*e);
    if (const Entry *e = get("scan.max_range")) c.scan.max_range = Number(*e);
    if (const Entry *e = get("depth.width")) c.depth.intrinsics.width = Integer(*e);
    if (const Entry *e = get("depth.height")) c.depth.intrinsics.height = Integer(*e);
    if (const Entry *e = get("depth.fx")) c.depth.intrinsics.fx = Number(*e);
    if (const Entry *e = get("depth.fy")) c.depth.intrinsics.fy = Number(*e);
    if (const Entry *e = get("depth.cx")) c.depth.intrinsics.cx = Number(*e);
    if (const Entry *e = get("depth.cy")) c.depth.intrinsics.cy = Number(*e);
    if (const Entry *e = get("depth.noise")) c.depth.depth_noise = Number(*e);
    if (const Entry *e = get("depth.stride")) c.depth_stride = Integer(*e);

    for (const Entry &e : entries) {
        if (e.key == "poses_file") {
            const fs::path p = fs::path(e.dir) / e.value;
            if (!fs::exists(p)) throw Error(ErrorCode::kConfig, e.origin + ": poses file " + p.string() + " not found");
            for (Pose &pose : ReadTrajectory(p.string(), dim)) c.poses.push_back(std::move(pose));
        } else if (e.key == "poses.ring") {
            if (dim != 2) throw Error(ErrorCode::kConfig, e.origin + ": poses.ring is 2D only");
            for (Pose &pose : RingPoses(Numbers(e), e.origin)) c.poses.push_back(std::move(pose));
        } else if (e.key == "poses.orbit") {
            if (dim != 3) throw Error(ErrorCode::kConfig, e.origin + ": poses.orbit is 3D only");
            for (Pose &pose : OrbitPoses(Numbers(e), e.origin)) c.poses.push_back(std::move(pose));
        } else if (e.key == "pose") {
            c.poses.push_back(PoseFromRow(Numbers(e), dim, e.origin));
        }
    }

    KernelParams &k = c.map.kernel;
    if (const Entry *e = get("lambda")) k.lambda = Number(*e);
    if (const Entry *e = get("kernel")) k.kind = KernelKindFromString(e->value);
    if (const Entry *e = get("sigma2")) k.sigma2 = Number(*e);
    if (const Entry *e = get("noise_y")) k.noise_y = Number(*e);
    if (const Entry *e = get("noise_grad")) k.noise_grad = Number(*e);
    if (const Entry *e = get("method")) c.map.method = MethodFromString(e->value);
    if (const Entry *e = get("gradient_target")) c.map.gradient_target = GradientTargetFromString(e->value);
    if (const Entry *e = get("latent_floor")) c.map.field.latent_floor = Number(*e);
    if (const Entry *e = get("leaf_capacity")) c.map.leaf_capacity = Integer(*e);
    if (const Entry *e = get("support_margin")) c.map.support_margin = Number(*e);
    if (const Entry *e = get("blend")) c.map.blend = BlendModeFromString(e->value);
    if (const Entry *e = get("additive_cutoff")) c.map.additive_cutoff = Number(*e);
    if (const Entry *e = get("fuse_radius")) c.map.fuse_radius = Number(*e);
    if (const Entry *e = get("max_fuse_angle_deg")) c.map.max_fuse_angle = Number(*e) * kDeg;

    c.grid = GridFrom(last, "grid", dim);
    c.mesh_grid = GridFrom(last, "mesh", dim);
    if (const Entry *e = get("seed")) {
        const double s = Number(*e);
        if (s < 0 || s != std::floor(s)) throw Error(ErrorCode::kConfig, e->origin + ": seed must be a non-negative integer");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (const Entry *e = get("lambda_sweep")) c.lambda_sweep = Numbers(*e);
    if (const Entry *e = get("out_dir")) c.out_dir = e->value;

    try {
        c.Validate();
    } catch (const Error &err) {
        throw Error(ErrorCode::kConfig, std::string("invalid scenario '") + c.name + "': " + err.what());
    }
    return c;
}

ScenarioConfig LoadScenario(const std::string &path) {
    const std::string text = ReadFile(path);
    const std::string dir = fs::path(path).parent_path().string();
    return ParseScenario(text, dir.empty() ? "." : dir);
}

std::uint64_t FrameSeed(std::uint64_t seed, std::size_t frame) {
    // splitmix64 step so neighbouring frames get unrelated streams
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(frame) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<SurfacePoint> OracleSurfacePoints(const AnalyticScene &scene, double spacing, double noise) {
    Points positions(0, scene.dim());
    Points normals(0, scene.dim());
    scene.SampleSurface(spacing, positions, normals);
    std::vector<SurfacePoint> out;
    out.reserve(static_cast<std::size_t>(positions.rows()));
    for (Eigen::Index i = 0; i < positions.rows(); ++i) {
        out.push_back({positions.row(i).transpose(), normals.row(i).transpose(), noise, 1});
    }
    return out;
}

FrameSet SimulateFrames(const ScenarioConfig &config) {
    config.Validate();
    FrameSet set;
    set.sensor = config.sensor;
    set.poses = config.poses;
    switch (config.sensor) {
        case SensorKind::kOracle:
            set.oracle_points = OracleSurfacePoints(config.scene, config.oracle_spacing, config.oracle_noise);
            break;
        case SensorKind::kLidar:
            for (std::size_t i = 0; i < config.poses.size(); ++i) {
                set.scans.push_back(SimulateScan(config.scene, config.poses[i], config.scan,
                                                 FrameSeed(config.seed, i)));
            }
            break;
        case SensorKind::kDepth:
            for (std::size_t i = 0; i < config.poses.size(); ++i) {
                set.depths.push_back(SimulateDepth(config.scene, config.poses[i], config.depth,
                                                   FrameSeed(config.seed, i)));
            }
            break;
    }
    return set;
}

std::vector<std::vector<SurfacePoint>> FramePoints(const ScenarioConfig &config, const FrameSet &frames) {
    std::vector<std::vector<SurfacePoint>> out;
    switch (frames.sensor) {
        case SensorKind::kOracle:
            if (!frames.oracle_points.empty()) out.push_back(frames.oracle_points);
            break;
        case SensorKind::kLidar:
            for (const Scan2D &s : frames.scans) out.push_back(ScanToPoints(s));
            break;
        case SensorKind::kDepth:
            for (const DepthFrame &d : frames.depths) out.push_back(DepthToPoints(d, config.depth_stride));
            break;
    }
    return out;
}

ClusterMap BuildMap(const MapConfig &config, const std::vector<std::vector<SurfacePoint>> &frames,
                    bool incremental) {
    ClusterMap map(config);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const InsertReport ins = map.Insert(frames[i]);
        RefitReport refit;
        if (incremental) refit = map.RefitDirty();
        spdlog::debug("frame {}: {} points, {} inserted, {} fused, {} rejected, {} leaves refit", i,
                      frames[i].size(), ins.inserted, ins.fused, ins.rejected, refit.refit);
        if (ins.rejected > 0) spdlog::warn("frame {}: {} points outside the arena", i, ins.rejected);
    }
    const RefitReport final_refit = map.RefitDirty();
    if (final_refit.failed > 0) spdlog::warn("{} leaves failed to fit", final_refit.failed);
    if (frames.empty()) spdlog::warn("no frames; the map is empty");
    return map;
}

namespace {

void PutPose(nlohmann::ordered_json &j, const Pose &p) {
    std::vector<double> v(p.translation.data(), p.translation.data() + p.translation.size());
    if (p.dim() == 2) {
        v.push_back(p.Heading());
    } else {
        const Eigen::Vector4d q = p.Quaternion();
        v.insert(v.end(), {q(0), q(1), q(2), q(3)});
    }
    j["pose"] = v;
}

std::ofstream OpenOut(const fs::path &p) {
    std::ofstream os(p);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + p.string());
    os << std::setprecision(17);
    return os;
}

std::vector<std::vector<std::string>> ReadCsv(const std::string &path, bool skip_header) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::kIo, "cannot read " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first && skip_header) {
            first = false;
            continue;
        }
        first = false;
        if (Trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(Trim(cell));
        rows.push_back(std::move(cells));
    }
    return rows;
}

double ParseCell(const std::string &s, const std::string &where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception &) {
    }
    throw Error(ErrorCode::kParse, where + ": not a number '" + s + "'");
}

}  // namespace

void WriteTrajectory(const std::string &path, const std::vector<Pose> &poses) {
    auto os = OpenOut(path);
    if (poses.empty() || poses.front().dim() == 2) {
        os << "tx,ty,heading\n";
    } else {
        os << "tx,ty,tz,qw,qx,qy,qz\n";
    }
    for (const Pose &p : poses) {
        nlohmann::ordered_json j;
        PutPose(j, p);
        const auto v = j["pose"].get<std::vector<double>>();
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << '\n';
    }
}

std::vector<Pose> ReadTrajectory(const std::string &path, int dim) {
    std::vector<Pose> out;
    const auto rows = ReadCsv(path, true);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string where = path + ":" + std::to_string(r + 2);
        std::vector<double> v;
        for (const auto &c : rows[r]) v.push_back(ParseCell(c, where));
        out.push_back(PoseFromRow(v, dim, where));
    }
    return out;
}

Points ReadPoints(const std::string &path, int dim) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::kIo, "cannot read " + path);
    std::vector<double> flat;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        for (char &ch : line) {
            if (ch == ',') ch = ' ';
        }
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (toks.empty() || toks[0][0] == '#') continue;
        const std::string where = path + ":" + std::to_string(line_no);
        if (static_cast<int>(toks.size()) != dim) {
            // a header line is allowed first
            if (line_no == 1 && !std::isdigit(static_cast<unsigned char>(toks[0][0])) && toks[0][0] != '-' &&
                toks[0][0] != '.') {
                continue;
            }
            throw Error(ErrorCode::kParse, where + ": expected " + std::to_string(dim) + " coordinates");
        }
        for (const auto &tok : toks) flat.push_back(ParseCell(tok, where));
    }
    Points out(static_cast<Eigen::Index>(flat.size() / static_cast<std::size_t>(dim)), dim);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (int a = 0; a < dim; ++a) out(i, a) = flat[static_cast<std::size_t>(i * dim + a)];
    }
    return out;
}

std::string WriteFrames(const std::string &dir, const ScenarioConfig &config, const FrameSet &frames) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIo, "cannot create output directory " + dir);

    nlohmann::ordered_json manifest;
    manifest["name"] = config.name;
    manifest["sensor"] = std::string(ToString(frames.sensor));
    manifest["dim"] = config.dim();
    manifest["seed"] = config.seed;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    const fs::path root(dir);

    if (frames.sensor == SensorKind::kOracle) {
        auto os = OpenOut(root / "points.csv");
        os << (config.dim() == 2 ? "x,y,nx,ny,noise\n" : "x,y,z,nx,ny,nz,noise\n");
        for (const SurfacePoint &p : frames.oracle_points) {
            for (int a = 0; a < config.dim(); ++a) os << p.position(a) << ',';
            for (int a = 0; a < config.dim(); ++a) os << p.normal(a) << ',';
            os << p.pos_noise << '\n';
        }
        list.push_back({{"file", "points.csv"}});
    } else if (frames.sensor == SensorKind::kLidar) {
        const Scan2D &t = config.scan;
        manifest["scan"] = {{"angle_min", t.angle_min}, {"angle_max", t.angle_max},
                            {"angle_step", t.angle_step}, {"range_noise", t.range_noise}};
        for (std::size_t i = 0; i < frames.scans.size(); ++i) {
            std::ostringstream name;
            name << "scan_" << std::setw(3) << std::setfill('0') << i << ".csv";
            auto os = OpenOut(root / name.str());
            os << "beam,angle,range\n";
            const Scan2D &s = frames.scans[i];
            for (std::size_t b = 0; b < s.ranges.size(); ++b) {
                os << b << ',' << s.Angle(b) << ',';
                if (std::isfinite(s.ranges[b])) {
                    os << s.ranges[b];
                } else {
                    os << "nan";
                }
                os << '\n';
            }
            nlohmann::ordered_json f{{"file", name.str()}};
            PutPose(f, s.pose);
            list.push_back(f);
        }
    } else {
        const Intrinsics &k = config.depth.intrinsics;
        manifest["depth"] = {{"width", k.width}, {"height", k.height}, {"fx", k.fx}, {"fy", k.fy},
                             {"cx", k.cx},       {"cy", k.cy},         {"depth_noise", config.depth.depth_noise},
                             {"stride", config.depth_stride}};
        for (std::size_t i = 0; i < frames.depths.size(); ++i) {
            std::ostringstream name;
            name << "depth_" << std::setw(3) << std::setfill('0') << i << ".csv";
            auto os = OpenOut(root / name.str());
            const DepthFrame &d = frames.depths[i];
            for (Eigen::Index v = 0; v < d.depth.rows(); ++v) {
                for (Eigen::Index u = 0; u < d.depth.cols(); ++u) {
                    if (u) os << ',';
                    if (std::isfinite(d.depth(v, u))) {
                        os << d.depth(v, u);
                    } else {
                        os << "nan";
                    }
                }
                os << '\n';
            }
            nlohmann::ordered_json f{{"file", name.str()}};
            PutPose(f, d.pose);
            list.push_back(f);
        }
    }
    if (!frames.poses.empty()) {
        WriteTrajectory((root / "trajectory.csv").string(), frames.poses);
        manifest["trajectory"] = "trajectory.csv";
    }
    manifest["frames"] = list;
    const fs::path path = root / "manifest.json";
    auto os = OpenOut(path);
    os << manifest.dump(2) << '\n';
    if (!os) throw Error(ErrorCode::kIo, "write failed for " + path.string());
    return path.string();
}

LoadedFrames ReadFrames(const std::string &manifest_path) {
    nlohmann::json m;
    try {
        std::ifstream is(manifest_path);
        if (!is) throw Error(ErrorCode::kIo, "cannot read " + manifest_path);
        m = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::kParse, manifest_path + ": " + e.what());
    }
    const fs::path root = fs::path(manifest_path).parent_path();
    LoadedFrames out;
    try {
        out.frames.sensor = SensorFromString(m.at("sensor").get<std::string>());
        const int dim = m.at("dim").get<int>();
        if (m.contains("trajectory")) {
            out.frames.poses = ReadTrajectory((root / m["trajectory"].get<std::string>()).string(), dim);
        }
        for (const auto &f : m.at("frames")) {
            const std::string file = (root / f.at("file").get<std::string>()).string();
            try {
                if (out.frames.sensor == SensorKind::kOracle) {
                    for (const auto &row : ReadCsv(file, true)) {
                        if (static_cast<int>(row.size()) != 2 * dim + 1) {
                            throw Error(ErrorCode::kParse, file + ": bad point row");
                        }
                        SurfacePoint sp;
                        sp.position.resize(dim);
                        sp.normal.resize(dim);
                        for (int a = 0; a < dim; ++a) {
                            sp.position(a) = ParseCell(row[static_cast<std::size_t>(a)], file);
                            sp.normal(a) = ParseCell(row[static_cast<std::size_t>(dim + a)], file);
                        }
                        sp.pos_noise = ParseCell(row.back(), file);
                        out.frames.oracle_points.push_back(std::move(sp));
                    }
                    continue;
                }
                const auto pv = f.at("pose").get<std::vector<double>>();
                const Pose pose = PoseFromRow(pv, dim, file);
                if (out.frames.sensor == SensorKind::kLidar) {
                    const auto &s = m.at("scan");
                    Scan2D scan;
                    scan.pose = pose;
                    scan.angle_min = s.at("angle_min").get<double>();
                    scan.angle_max = s.at("angle_max").get<double>();
                    scan.angle_step = s.at("angle_step").get<double>();
                    scan.range_noise = s.at("range_noise").get<double>();
                    for (const auto &row : ReadCsv(file, true)) {
                        if (row.size() != 3) throw Error(ErrorCode::kParse, file + ": bad scan row");
                        scan.ranges.push_back(ParseCell(row[2], file));
                    }
                    scan.Validate();
                    out.frames.scans.push_back(std::move(scan));
                } else {
                    const auto &d = m.at("depth");
                    DepthFrame frame;
                    frame.pose = pose;
                    frame.intrinsics = {d.at("width").get<int>(), d.at("height").get<int>(),
                                        d.at("fx").get<double>(),  d.at("fy").get<double>(),
                                        d.at("cx").get<double>(),  d.at("cy").get<double>()};
                    frame.depth_noise = d.at("depth_noise").get<double>();
                    const auto rows = ReadCsv(file, false);
                    frame.depth.resize(static_cast<Eigen::Index>(rows.size()),
                                       rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
                    for (std::size_t v = 0; v < rows.size(); ++v) {
                        if (static_cast<Eigen::Index>(rows[v].size()) != frame.depth.cols()) {
                            throw Error(ErrorCode::kParse, file + ": ragged depth row " + std::to_string(v));
                        }
                        for (std::size_t u = 0; u < rows[v].size(); ++u) {
                            frame.depth(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) =
                                ParseCell(rows[v][u], file);
                        }
                    }
                    frame.Validate();
                    out.frames.depths.push_back(std::move(frame));
                }
            } catch (const Error &e) {
                out.errors.push_back(e.what());
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::kParse, manifest_path + ": " + e.what());
    }
    return out;
}

}  // namespace loggpis
