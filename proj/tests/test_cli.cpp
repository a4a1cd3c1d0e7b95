#include "dforge/formats.hpp"
#include "dforge/fusion.hpp"
#include "dforge/hash.hpp"
#include "dforge/image_io.hpp"
#include "dforge/manifest_io.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace dforge;

namespace {

namespace fs = std::filesystem;

const char* binary_path() {
    return std::getenv("DFORGE_BIN");
}

struct CliDir {
    fs::path path;
    CliDir() {
        path = fs::temp_directory_path() /
               ("dforge_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~CliDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    std::string dir(const std::string& name) const {
        fs::create_directories(path / name);
        return (path / name).string();
    }

    static int& counter() {
        static int n = 0;
        return n;
    }
};

int run_cli(const CliDir& dir, const std::string& args) {
    const std::string cmd = std::string(binary_path()) + " " + args + " >" + dir.file("stdout.txt") +
                            " 2>" + dir.file("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_ring_manifest(const std::string& path, bool with_bad_line) {
    const SceneBundle ring = fixtures::ring_bundle("ring36", 36, 2.0, {0, 0, 0});
    write_pose_manifest(path, {ring});
    if (with_bad_line) {
        std::ofstream out(path, std::ios::app);
        out << "{broken\n";
    }
}

} // namespace

TEST_CASE("cli: analyze classifies a ring manifest and flags bad lines") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;
    write_ring_manifest(dir.file("scenes.jsonl"), false);

    const std::string out = dir.dir("out");
    CHECK(run_cli(dir, "analyze " + dir.file("scenes.jsonl") + " --out " + out) == 0);

    std::ifstream report(out + "/analyze_report.jsonl");
    std::string line;
    REQUIRE(std::getline(report, line));
    CHECK(line.find("SURROUND_360") != std::string::npos);

    // Corrupted line: partial exit.
    write_ring_manifest(dir.file("bad.jsonl"), true);
    CHECK(run_cli(dir, "analyze " + dir.file("bad.jsonl") + " --out " + dir.dir("out_bad")) == 1);

    // Empty manifest: clean exit, empty report.
    std::ofstream(dir.file("empty.jsonl")).close();
    CHECK(run_cli(dir, "analyze " + dir.file("empty.jsonl") + " --out " + dir.dir("out_e")) == 0);
    CHECK(fs::file_size(dir.dir("out_e") + "/analyze_report.jsonl") == 0);
}

TEST_CASE("cli: plan emits a closed orbit ring and honors occupancy") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;

    const std::string out = dir.dir("out");
    CHECK(run_cli(dir, "plan orbit:6.283185307179586,frames=49 --out " + out) == 0);
    const Trajectory traj = read_trajectory_file(out + "/trajectory.jsonl");
    REQUIRE(traj.poses.size() == 49);
    CHECK((traj.poses.front().position - traj.poses.back().position).norm() < 1e-9);

    // A grid fully occupied around the path forces exit 3.
    OccupancyGrid grid;
    grid.origin = Eigen::Vector3d(-2, -2, -2);
    grid.voxel_size = 0.5;
    grid.dims = Eigen::Vector3i(8, 8, 8);
    grid.occupied.assign(grid.voxel_count(), 1);
    write_occupancy_file(dir.file("blocked.occ"), grid);
    CHECK(run_cli(dir, "plan trans_x_pos:1.0,frames=5 --occupancy " + dir.file("blocked.occ") +
                           " --out " + dir.dir("out_blocked")) == 3);
    std::ifstream feas(dir.dir("out_blocked") + "/feasibility.json");
    nlohmann::json j;
    feas >> j;
    CHECK(j["feasible"] == false);
    CHECK(j["first_violation_frame"] == 0);

    // Bad spec: exit 2.
    CHECK(run_cli(dir, "plan bogus:1.0 --out " + dir.dir("out_bogus")) == 2);
}

TEST_CASE("cli: plan round-trips through replay bit-exactly") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;
    const std::string out = dir.dir("out");
    CHECK(run_cli(dir, "plan trans_x_pos:1.0,trans_y_pos:1.0,frames=9 --out " + out) == 0);
    const std::string digest = file_digest_hex(out + "/trajectory.jsonl");
    CHECK(run_cli(dir, "replay " + out + "/run_manifest.json") == 0);
    CHECK(file_digest_hex(out + "/trajectory.jsonl") == digest);
}

TEST_CASE("cli: simulate recovers the clean latent and is seed-deterministic") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;

    const std::string out1 = dir.dir("s1");
    const std::string out2 = dir.dir("s2");
    CHECK(run_cli(dir, "simulate --seed 42 --out " + out1) == 0);
    CHECK(run_cli(dir, "simulate --seed 42 --out " + out2) == 0);
    CHECK(file_digest_hex(out1 + "/sample.latv") == file_digest_hex(out2 + "/sample.latv"));
    CHECK(file_digest_hex(out1 + "/init.latv") == file_digest_hex(out2 + "/init.latv"));

    // Oracle mock: the sample is the clean latent up to solver tolerance.
    const LatentVideo clean = read_latent_file(out1 + "/clean.latv");
    const LatentVideo sample = read_latent_file(out1 + "/sample.latv");
    REQUIRE(clean.shape == sample.shape);
    for (std::size_t i = 0; i < clean.data.size(); ++i) {
        CHECK(sample.data[i] == doctest::Approx(clean.data[i]).epsilon(1e-5));
    }

    // Different seed changes the outputs.
    const std::string out3 = dir.dir("s3");
    CHECK(run_cli(dir, "simulate --seed 43 --out " + out3) == 0);
    CHECK(file_digest_hex(out1 + "/sample.latv") != file_digest_hex(out3 + "/sample.latv"));
}

TEST_CASE("cli: switch step changes director-sensitive runs") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;
    {
        std::ofstream cfg(dir.file("a.cfg"));
        cfg << "[sampler]\nmock = director_sensitive\nswitch_step = 0\n";
    }
    {
        std::ofstream cfg(dir.file("b.cfg"));
        cfg << "[sampler]\nmock = director_sensitive\nswitch_step = 50\n";
    }
    CHECK(run_cli(dir, "simulate --seed 7 --config " + dir.file("a.cfg") + " --out " +
                           dir.dir("oa")) == 0);
    CHECK(run_cli(dir, "simulate --seed 7 --config " + dir.file("b.cfg") + " --out " +
                           dir.dir("ob")) == 0);
    CHECK(file_digest_hex(dir.dir("oa") + "/sample.latv") !=
          file_digest_hex(dir.dir("ob") + "/sample.latv"));

    // Unknown config key: exit 2.
    {
        std::ofstream cfg(dir.file("bad.cfg"));
        cfg << "[sampler]\nnot_a_key = 1\n";
    }
    CHECK(run_cli(dir, "simulate --config " + dir.file("bad.cfg") + " --out " + dir.dir("ox")) ==
          2);
}

TEST_CASE("cli: fuse produces deterministic artifacts and rejects empty inputs") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;

    const std::string depth = dir.dir("depth");
    {
        CameraPose pose;
        pose.intrinsics = {60.0, 60.0, 32.0, 24.0};
        pose.image_size = {64, 48};
        nlohmann::ordered_json sidecar;
        sidecar["pose"] = pose_to_json(pose);
        sidecar["frame_id"] = 0;
        std::ofstream meta(depth + "/frame0.json");
        meta << sidecar.dump();
        std::ofstream raw(depth + "/frame0.f32", std::ios::binary);
        std::vector<float> d(64 * 48, 2.0f);
        raw.write(reinterpret_cast<const char*>(d.data()),
                  static_cast<std::streamsize>(d.size() * 4));
    }
    {
        std::ofstream cfg(dir.file("tsdf.cfg"));
        cfg << "[tsdf]\nvoxel_size = 0.02\ngrid_dim = 48\norigin_x = -0.48\norigin_y = "
               "-0.48\norigin_z = 1.365\n";
    }

    const std::string out1 = dir.dir("f1");
    const std::string out2 = dir.dir("f2");
    CHECK(run_cli(dir, "fuse " + depth + " --config " + dir.file("tsdf.cfg") + " --out " + out1) ==
          0);
    CHECK(run_cli(dir, "fuse " + depth + " --config " + dir.file("tsdf.cfg") + " --out " + out2) ==
          0);
    CHECK(file_digest_hex(out1 + "/volume.tsdf") == file_digest_hex(out2 + "/volume.tsdf"));
    CHECK(file_digest_hex(out1 + "/mesh.ply") == file_digest_hex(out2 + "/mesh.ply"));
    CHECK(file_digest_hex(out1 + "/occupancy.occ") == file_digest_hex(out2 + "/occupancy.occ"));

    CHECK(run_cli(dir, "fuse " + dir.dir("nothing") + " --config " + dir.file("tsdf.cfg") +
                           " --out " + dir.dir("fe")) == 2);
}

TEST_CASE("cli: flowstats and pickref") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;

    const std::string flows = dir.dir("flows");
    const std::string masks = dir.dir("masks");
    for (int i = 0; i < 5; ++i) {
        FlowField flow;
        flow.width = 24;
        flow.height = 24;
        flow.frame_index = i;
        flow.u.assign(24 * 24, 0.0f);
        flow.v.assign(24 * 24, 0.0f);
        // Radially expanding block: static background, incoherent motion.
        for (int y = 8; y < 16; ++y) {
            for (int x = 8; x < 16; ++x) {
                const double dy = y - 11.75, dx = x - 11.75;
                const double n = std::hypot(dx, dy);
                flow.u[static_cast<std::size_t>(y) * 24 + x] = static_cast<float>(3.0 * dx / n);
                flow.v[static_cast<std::size_t>(y) * 24 + x] = static_cast<float>(3.0 * dy / n);
            }
        }
        char name[32];
        std::snprintf(name, sizeof(name), "f%03d.flo", i);
        write_flo_file(flows + "/" + name, flow);

        GrayImage8 mask;
        mask.width = 24;
        mask.height = 24;
        mask.pixels.assign(24 * 24, 0);
        const int grow = i == 3 ? 4 : 0; // frame 3 has the largest mask
        for (int y = 8 - grow; y < 16 + grow; ++y) {
            for (int x = 8 - grow; x < 16 + grow; ++x) {
                mask.pixels[static_cast<std::size_t>(y) * 24 + x] = 255;
            }
        }
        std::snprintf(name, sizeof(name), "m%03d.png", i);
        write_png_gray8(masks + "/" + name, mask);
    }

    CHECK(run_cli(dir, "flowstats " + flows + " --out " + dir.dir("fo")) == 0);
    {
        std::ifstream in(dir.dir("fo") + "/flowstats.json");
        nlohmann::json j;
        in >> j;
        CHECK(j["accepted"] == true);
    }

    CHECK(run_cli(dir, "pickref " + flows + " " + masks + " --out " + dir.dir("po")) == 0);
    {
        std::ifstream in(dir.dir("po") + "/reference.json");
        nlohmann::json j;
        in >> j;
        CHECK(j["index"] == 3);
        CHECK(j["all_zero"] == false);
    }

    // A pan sequence is rejected.
    const std::string pan = dir.dir("pan");
    for (int i = 0; i < 5; ++i) {
        FlowField flow;
        flow.width = 24;
        flow.height = 24;
        flow.frame_index = i;
        flow.u.assign(24 * 24, 5.0f);
        flow.v.assign(24 * 24, 0.0f);
        char name[32];
        std::snprintf(name, sizeof(name), "f%03d.flo", i);
        write_flo_file(pan + "/" + name, flow);
    }
    CHECK(run_cli(dir, "flowstats " + pan + " --out " + dir.dir("pano")) == 0);
    {
        std::ifstream in(dir.dir("pano") + "/flowstats.json");
        nlohmann::json j;
        in >> j;
        CHECK(j["accepted"] == false);
    }
}

TEST_CASE("cli: fusing the 24-view sphere fixtures meets the radius criterion") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;

    const std::string depth = dir.dir("depth");
    const auto frames = fixtures::sphere_views({0, 0, 0}, 0.5, 1.5);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof(stem), "frame%02zu", i);
        nlohmann::ordered_json sidecar;
        sidecar["pose"] = pose_to_json(frames[i].pose);
        sidecar["frame_id"] = frames[i].frame_id;
        std::ofstream meta(depth + "/" + stem + ".json");
        meta << sidecar.dump();
        std::ofstream raw(depth + "/" + stem + ".f32", std::ios::binary);
        raw.write(reinterpret_cast<const char*>(frames[i].depth.data()),
                  static_cast<std::streamsize>(frames[i].depth.size() * 4));
    }
    {
        std::ofstream cfg(dir.file("tsdf.cfg"));
        cfg << "[tsdf]\nvoxel_size = 0.023\ngrid_dim = 64\norigin_x = -0.736\norigin_y = "
               "-0.736\norigin_z = -0.736\n";
    }

    const std::string out = dir.dir("out");
    CHECK(run_cli(dir, "fuse " + depth + " --config " + dir.file("tsdf.cfg") + " --out " + out) ==
          0);

    const TsdfVolume volume = read_volume_file(out + "/volume.tsdf");
    const TriangleMesh mesh = extract_mesh(volume);
    REQUIRE(mesh.vertices.size() > 1000);
    double err = 0.0;
    for (const auto& v : mesh.vertices) {
        err += std::abs(v.norm() - 0.5);
    }
    CHECK(err / static_cast<double>(mesh.vertices.size()) < volume.voxel_size);
}

TEST_CASE("cli: fuse digests are independent of the thread budget") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;

    const std::string depth = dir.dir("depth");
    {
        CameraPose pose;
        pose.intrinsics = {60.0, 60.0, 32.0, 24.0};
        pose.image_size = {64, 48};
        nlohmann::ordered_json sidecar;
        sidecar["pose"] = pose_to_json(pose);
        std::ofstream meta(depth + "/frame0.json");
        meta << sidecar.dump();
        std::ofstream raw(depth + "/frame0.f32", std::ios::binary);
        std::vector<float> d(64 * 48, 2.0f);
        raw.write(reinterpret_cast<const char*>(d.data()),
                  static_cast<std::streamsize>(d.size() * 4));
        std::ofstream cfg(dir.file("tsdf.cfg"));
        cfg << "[tsdf]\nvoxel_size = 0.02\ngrid_dim = 48\norigin_x = -0.48\norigin_y = "
               "-0.48\norigin_z = 1.365\n";
    }

    const std::string base = "fuse " + depth + " --config " + dir.file("tsdf.cfg") + " --out ";
    const std::string cmd1 = "DFORGE_THREADS=1 " + std::string(binary_path()) + " " + base +
                             dir.dir("t1") + " >/dev/null 2>&1";
    const std::string cmd2 = "DFORGE_THREADS=3 " + std::string(binary_path()) + " " + base +
                             dir.dir("t3") + " >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd1.c_str())) == 0);
    CHECK(WEXITSTATUS(std::system(cmd2.c_str())) == 0);
    CHECK(file_digest_hex(dir.dir("t1") + "/volume.tsdf") ==
          file_digest_hex(dir.dir("t3") + "/volume.tsdf"));
}

TEST_CASE("cli: colmap directories feed analyze directly") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;
    const std::string model = dir.dir("model");
    {
        std::ofstream cameras(model + "/cameras.txt");
        cameras << "1 PINHOLE 640 480 500.0 500.0 320.0 240.0\n";
        std::ofstream images(model + "/images.txt");
        for (int i = 0; i < 8; ++i) {
            // Ring of inward-looking cameras expressed world-to-camera.
            const double az = 2 * M_PI * i / 8;
            const Eigen::Vector3d c(2 * std::cos(az), 2 * std::sin(az), 0.0);
            const CameraPose pose = look_at_pose(c, {0, 0, 0});
            const Eigen::Matrix3d r_cw = pose.rotation.transpose();
            const Eigen::Quaterniond q(r_cw);
            const Eigen::Vector3d t = -(r_cw * c);
            images << (i + 1) << " " << q.w() << " " << q.x() << " " << q.y() << " " << q.z()
                   << " " << t.x() << " " << t.y() << " " << t.z() << " 1 img" << i << ".png\n";
            images << "\n";
        }
    }
    CHECK(run_cli(dir, "analyze " + model + " --colmap --scene-id ringA --out " + dir.dir("o")) ==
          0);
    std::ifstream report(dir.dir("o") + "/analyze_report.jsonl");
    std::string line;
    REQUIRE(std::getline(report, line));
    CHECK(line.find("ringA") != std::string::npos);
    CHECK(line.find("SURROUND_360") != std::string::npos);
}

TEST_CASE("cli: reference sharing and refinement artifacts") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;
    {
        std::ofstream cfg(dir.file("share.cfg"));
        cfg << "[sampler]\nmock = director_sensitive\nshare_reference = 1\nrefine_t0 = "
               "40\nrefine_repeats = 2\nrefine_mid = 15\n";
    }
    const std::string out = dir.dir("out");
    CHECK(run_cli(dir, "simulate --seed 3 --config " + dir.file("share.cfg") + " --out " + out) ==
          0);
    CHECK(fs::is_regular_file(out + "/shared.latv"));
    CHECK(fs::is_regular_file(out + "/refined.latv"));

    // Replays bitwise like everything else.
    CHECK(run_cli(dir, "replay " + out + "/run_manifest.json") == 0);
}

TEST_CASE("cli: loss command evaluates the confidence objective") {
    REQUIRE(binary_path() != nullptr);
    CliDir dir;

    CounterRng rng(99);
    const ImageBuffer pred_buf = fixtures::random_image(32, 32, rng);
    const ImageBuffer gt_buf = fixtures::random_image(32, 32, rng);
    write_png_rgb8(dir.file("pred.png"), to_rgb8(pred_buf));
    write_png_rgb8(dir.file("gt.png"), to_rgb8(gt_buf));

    CHECK(run_cli(dir, "loss " + dir.file("pred.png") + " " + dir.file("gt.png") + " --out " +
                           dir.dir("lo")) == 0);
    std::ifstream in(dir.dir("lo") + "/loss.json");
    nlohmann::json j;
    in >> j;
    CHECK(j["total"].get<double>() > 0.0);
    CHECK(j["terms"].contains("l1"));
    CHECK(j["terms"].contains("ssim"));
    CHECK(j["terms"].contains("lpips"));

    // With a zero confidence map everything vanishes.
    GrayImage8 zero;
    zero.width = 32;
    zero.height = 32;
    zero.pixels.assign(32 * 32, 0);
    write_png_gray8(dir.file("conf.png"), zero);
    CHECK(run_cli(dir, "loss " + dir.file("pred.png") + " " + dir.file("gt.png") +
                           " --confidence " + dir.file("conf.png") + " --out " + dir.dir("lz")) ==
          0);
    std::ifstream zin(dir.dir("lz") + "/loss.json");
    nlohmann::json zj;
    zin >> zj;
    CHECK(zj["total"].get<double>() == 0.0);
}
