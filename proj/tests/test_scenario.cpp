#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "loggpis/error.hpp"
#include "loggpis/scenario.hpp"

using namespace loggpis;
namespace fs = std::filesystem;

namespace {

const char *kSmall = R"(name = small
dim = 2
arena_min = -4 -4
arena_max = 4 4
circle = 0 0 1.5
sensor = lidar
scan.step_deg = 2
poses.ring = 0 0 3 4
lambda = 10
grid.origin = -3 -3
grid.cell = 0.5
grid.counts = 13 13
seed = 5
)";

std::string Slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path FreshDir(const std::string &name) {
    const fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("parse a scenario") {
    const ScenarioConfig c = ParseScenario(kSmall, ".");
    CHECK(c.name == "small");
    CHECK(c.dim() == 2);
    CHECK(c.sensor == SensorKind::kLidar);
    CHECK(c.poses.size() == 4);
    CHECK(c.scene.circles().size() == 1);
    CHECK(c.map.kernel.lambda == 10.0);
    CHECK(c.scan.angle_step == doctest::Approx(2 * M_PI / 180));
    CHECK(c.grid.NodeCount() == 169);
    CHECK(c.seed == 5);
    // ring poses look at the centre
    for (const Pose &p : c.poses) {
        const Vector ahead = p.rotation.col(0);
        CHECK(ahead.dot(-p.translation.normalized()) == doctest::Approx(1.0));
    }
}

TEST_CASE("later keys win, primitives accumulate") {
    const ScenarioConfig c = ParseScenario(std::string(kSmall) + "lambda = 20\ncircle = 2.5 2.5 0.5\n", ".");
    CHECK(c.map.kernel.lambda == 20.0);
    CHECK(c.scene.circles().size() == 2);
}

TEST_CASE("include") {
    const fs::path dir = FreshDir("loggpis_include");
    {
        std::ofstream(dir / "base.cfg") << kSmall;
        std::ofstream(dir / "top.cfg") << "include = base.cfg\nlatent_floor = 1e-300\nname = top\n";
    }
    const ScenarioConfig c = LoadScenario((dir / "top.cfg").string());
    CHECK(c.name == "top");
    CHECK(c.map.field.latent_floor == 1e-300);
    CHECK(c.poses.size() == 4);
    {
        std::ofstream(dir / "loop.cfg") << "include = loop.cfg\n";
    }
    CHECK_THROWS_AS(LoadScenario((dir / "loop.cfg").string()), Error);
    fs::remove_all(dir);
}

TEST_CASE("config errors") {
    auto code = [](const std::string &text) -> std::optional<ErrorCode> {
        try {
            (void)ParseScenario(text, ".");
        } catch (const Error &e) {
            return e.code();
        }
        return std::nullopt;
    };
    CHECK(code(std::string(kSmall) + "colour = red\n") == ErrorCode::kConfig);
    CHECK(code(std::string(kSmall) + "lambda = 0\n") == ErrorCode::kConfig);
    CHECK(code(std::string(kSmall) + "lambda = 2000\n") == ErrorCode::kConfig);
    CHECK(code(std::string(kSmall) + "lambda = -3\n") == ErrorCode::kConfig);
    CHECK(code(std::string(kSmall) + "kernel = rbf\n") == ErrorCode::kUnsupportedKernel);
    CHECK(code(std::string(kSmall) + "lambda = abc\n").has_value());
    CHECK(code(std::string(kSmall) + "seed = 1.5\n") == ErrorCode::kConfig);
    CHECK_THROWS_AS(LoadScenario("/nonexistent/x.cfg"), Error);
}

TEST_CASE("frame seeds") {
    CHECK(FrameSeed(1, 0) == FrameSeed(1, 0));
    CHECK(FrameSeed(1, 0) != FrameSeed(1, 1));
    CHECK(FrameSeed(1, 0) != FrameSeed(2, 0));
}

TEST_CASE("frames round trip through files") {
    const ScenarioConfig c = ParseScenario(kSmall, ".");
    const FrameSet frames = SimulateFrames(c);
    REQUIRE(frames.size() == 4);
    const fs::path dir = FreshDir("loggpis_frames");
    const std::string manifest = WriteFrames(dir.string(), c, frames);
    const LoadedFrames loaded = ReadFrames(manifest);
    CHECK(loaded.errors.empty());
    REQUIRE(loaded.frames.scans.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        const Scan2D &a = frames.scans[i];
        const Scan2D &b = loaded.frames.scans[i];
        REQUIRE(a.ranges.size() == b.ranges.size());
        for (std::size_t k = 0; k < a.ranges.size(); ++k) {
            if (std::isnan(a.ranges[k])) {
                CHECK(std::isnan(b.ranges[k]));
            } else {
                CHECK(b.ranges[k] == doctest::Approx(a.ranges[k]).epsilon(1e-12));
            }
        }
        CHECK((a.pose.translation - b.pose.translation).norm() < 1e-12);
        CHECK(std::abs(a.pose.Heading() - b.pose.Heading()) < 1e-12);
    }

    // same seed, same bytes
    const fs::path dir2 = FreshDir("loggpis_frames2");
    const std::string manifest2 = WriteFrames(dir2.string(), c, SimulateFrames(c));
    CHECK(Slurp(manifest) == Slurp(manifest2));
    for (const auto &entry : fs::directory_iterator(dir)) {
        CHECK(Slurp(entry.path()) == Slurp(dir2 / entry.path().filename()));
    }

    // a damaged frame is reported, the rest still load
    fs::path victim;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.path().filename().string().rfind("scan_", 0) == 0) victim = entry.path();
    }
    REQUIRE_FALSE(victim.empty());
    std::ofstream(victim) << "garbage,\n";
    const LoadedFrames partial = ReadFrames(manifest);
    CHECK(partial.errors.size() == 1);
    CHECK(partial.frames.scans.size() == 3);
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("lidar scenario writes one file per scan") {
    const ScenarioConfig c = LoadScenario(LOGGPIS_SOURCE_DIR "/configs/lidar2d.cfg");
    const FrameSet frames = SimulateFrames(c);
    const fs::path dir = FreshDir("loggpis_lidar_files");
    WriteFrames(dir.string(), c, frames);
    int scans = 0;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.path().filename().string().rfind("scan_", 0) == 0) ++scans;
    }
    CHECK(scans == 28);
    fs::remove_all(dir);
}

TEST_CASE("trajectory and point files") {
    const fs::path dir = FreshDir("loggpis_traj");
    std::vector<Pose> poses{Pose::FromHeading(1, 2, 0.3), Pose::FromHeading(-1, 0.5, -2.0)};
    WriteTrajectory((dir / "t.csv").string(), poses);
    const auto back = ReadTrajectory((dir / "t.csv").string(), 2);
    REQUIRE(back.size() == 2);
    CHECK(back[1].Heading() == doctest::Approx(-2.0));
    std::ofstream(dir / "p.txt") << "1,2\n3 4\n\n";
    const Points p = ReadPoints((dir / "p.txt").string(), 2);
    REQUIRE(p.rows() == 2);
    CHECK(p(1, 0) == 3.0);
    std::ofstream(dir / "bad.txt") << "1,2,3\n";
    CHECK_THROWS_AS(ReadPoints((dir / "bad.txt").string(), 2), Error);
    fs::remove_all(dir);
}
