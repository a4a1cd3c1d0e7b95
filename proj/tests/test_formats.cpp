#include "dforge/errors.hpp"
#include "dforge/formats.hpp"
#include "dforge/hash.hpp"
#include "dforge/image_io.hpp"
#include "dforge/manifest_io.hpp"
#include "dforge/trajectory.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

#include <filesystem>
#include <fstream>

using namespace dforge;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("dforge_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }

    static int& counter() {
        static int n = 0;
        return n;
    }
};

} // namespace

TEST_CASE("latent files round-trip byte-exactly") {
    TempDir dir;
    CounterRng rng(1);
    const LatentVideo latent = LatentVideo::seeded_normal(LatentShape{3, 2, 4, 5}, rng);

    const std::string first = dir.file("a.latv");
    const std::string second = dir.file("b.latv");
    write_latent_file(first, latent);
    const LatentVideo loaded = read_latent_file(first);
    CHECK(loaded.shape == latent.shape);
    write_latent_file(second, loaded);
    CHECK(file_digest_hex(first) == file_digest_hex(second));

    // f32 payload: double -> f32 -> double is exact for f32-representable
    // values, so a second round trip is the identity.
    const LatentVideo again = read_latent_file(second);
    CHECK(again.data == loaded.data);
}

TEST_CASE("volume files round-trip byte-exactly") {
    TempDir dir;
    TsdfVolume volume(Eigen::Vector3d(-0.5, 0.25, 1.0), 0.05, Eigen::Vector3i(6, 5, 4), 0.2);
    CounterRng rng(2);
    for (std::size_t i = 0; i < volume.tsdf.size(); ++i) {
        volume.tsdf[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
        volume.weight[i] = static_cast<float>(rng.uniform(0.0, 8.0));
    }

    const std::string first = dir.file("a.tsdf");
    const std::string second = dir.file("b.tsdf");
    write_volume_file(first, volume);
    const TsdfVolume loaded = read_volume_file(first);
    CHECK(loaded.dims == volume.dims);
    CHECK(loaded.voxel_size == volume.voxel_size);
    CHECK(loaded.truncation == volume.truncation);
    CHECK(loaded.tsdf == volume.tsdf);
    CHECK(loaded.weight == volume.weight);
    write_volume_file(second, loaded);
    CHECK(file_digest_hex(first) == file_digest_hex(second));

    // Header is magic + version + dims + voxel_size + origin + truncation.
    CHECK(fs::file_size(first) == 4 + 4 + 12 + 8 + 24 + 8 + volume.voxel_count() * 8);
}

TEST_CASE("occupancy files round-trip") {
    TempDir dir;
    OccupancyGrid grid;
    grid.origin = Eigen::Vector3d(1, 2, 3);
    grid.voxel_size = 0.1;
    grid.dims = Eigen::Vector3i(4, 3, 2);
    grid.occupied.assign(grid.voxel_count(), 0);
    grid.occupied[5] = 1;
    grid.occupied[17] = 1;

    const std::string path = dir.file("a.occ");
    write_occupancy_file(path, grid);
    const OccupancyGrid loaded = read_occupancy_file(path);
    CHECK(loaded.dims == grid.dims);
    CHECK(loaded.occupied == grid.occupied);

    const std::string again = dir.file("b.occ");
    write_occupancy_file(again, loaded);
    CHECK(file_digest_hex(path) == file_digest_hex(again));
}

TEST_CASE("flo files round-trip and reject bad magic") {
    TempDir dir;
    FlowField flow;
    flow.width = 7;
    flow.height = 5;
    flow.frame_index = 3;
    CounterRng rng(3);
    flow.u.resize(flow.pixel_count());
    flow.v.resize(flow.pixel_count());
    for (std::size_t i = 0; i < flow.pixel_count(); ++i) {
        flow.u[i] = static_cast<float>(rng.normal());
        flow.v[i] = static_cast<float>(rng.normal());
    }

    const std::string path = dir.file("a.flo");
    write_flo_file(path, flow);
    const FlowField loaded = read_flo_file(path);
    CHECK(loaded.width == flow.width);
    CHECK(loaded.height == flow.height);
    CHECK(loaded.u == flow.u);
    CHECK(loaded.v == flow.v);

    // The magic float encodes the bytes "PIEH".
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "PIEH");

    std::ofstream bad(dir.file("bad.flo"), std::ios::binary);
    bad << "nope";
    bad.close();
    CHECK_THROWS_AS(read_flo_file(dir.file("bad.flo")), Error);
}

TEST_CASE("raw flow with sidecar") {
    TempDir dir;
    const std::string raw = dir.file("f.f32");
    const std::string sidecar = dir.file("f.json");
    {
        std::ofstream out(raw, std::ios::binary);
        const float values[8] = {1, 2, 3, 4, 5, 6, 7, 8}; // u plane then v plane
        out.write(reinterpret_cast<const char*>(values), sizeof(values));
    }
    {
        std::ofstream out(sidecar);
        out << R"({"width": 2, "height": 2, "frame_index": 9})";
    }
    const FlowField flow = read_raw_flow(raw, sidecar);
    CHECK(flow.frame_index == 9);
    CHECK(flow.u == std::vector<float>{1, 2, 3, 4});
    CHECK(flow.v == std::vector<float>{5, 6, 7, 8});
}

TEST_CASE("trajectory files round-trip byte-exactly") {
    TempDir dir;
    TrajectorySpec spec;
    spec.primitives = {{PrimitiveKind::kTransXPos, 0.37}, {PrimitiveKind::kRotYawNeg, 0.9}};
    spec.n_frames = 11;
    spec.start = CameraPose{};
    const Trajectory traj = synthesize_trajectory(spec);

    const std::string first = dir.file("a.traj");
    const std::string second = dir.file("b.traj");
    write_trajectory_file(first, traj);
    const Trajectory loaded = read_trajectory_file(first);
    CHECK(loaded.spec_hash == traj.spec_hash);
    REQUIRE(loaded.poses.size() == traj.poses.size());
    for (std::size_t i = 0; i < traj.poses.size(); ++i) {
        CHECK(loaded.poses[i].position == traj.poses[i].position);
        CHECK(loaded.poses[i].rotation == traj.poses[i].rotation);
    }
    write_trajectory_file(second, loaded);
    CHECK(file_digest_hex(first) == file_digest_hex(second));
}

TEST_CASE("ply output is deterministic") {
    TempDir dir;
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    mesh.triangles = {{0, 1, 2}};
    write_ply_ascii(dir.file("a.ply"), mesh);
    write_ply_ascii(dir.file("b.ply"), mesh);
    CHECK(file_digest_hex(dir.file("a.ply")) == file_digest_hex(dir.file("b.ply")));

    std::ifstream in(dir.file("a.ply"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "ply");
}

TEST_CASE("pose manifests round-trip and collect bad lines") {
    TempDir dir;
    const SceneBundle ring = fixtures::ring_bundle("ring", 6, 1.0, {0, 0, 0});
    const SceneBundle pair = fixtures::bundle_of("pair", {{0, 0, 0}, {1, 1, 1}});

    const std::string path = dir.file("scenes.jsonl");
    write_pose_manifest(path, {ring, pair});
    const ManifestReadResult result = read_pose_manifest(path);
    CHECK(result.errors.empty());
    REQUIRE(result.bundles.size() == 2);
    CHECK(result.bundles[0].scene_id == "ring");
    CHECK(result.bundles[1].poses.size() == 2);
    for (std::size_t i = 0; i < ring.poses.size(); ++i) {
        CHECK(result.bundles[0].poses[i].position == ring.poses[i].position);
        CHECK(result.bundles[0].poses[i].rotation == ring.poses[i].rotation);
    }

    // Corrupted line is recorded, the rest still parses.
    {
        std::ofstream out(path, std::ios::app);
        out << "{not json}\n";
        out << bundle_to_json(ring).dump() << "\n";
    }
    const ManifestReadResult partial = read_pose_manifest(path);
    CHECK(partial.bundles.size() == 3);
    CHECK(partial.errors.size() == 1);
}

TEST_CASE("colmap text scenes convert to world-from-camera poses") {
    TempDir dir;
    {
        std::ofstream cameras(dir.file("cameras.txt"));
        cameras << "# Camera list\n";
        cameras << "1 PINHOLE 640 480 500.0 510.0 320.0 240.0\n";
    }
    {
        std::ofstream images(dir.file("images.txt"));
        images << "# Image list: IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME\n";
        // Identity rotation, camera center at (1, 2, 3): t = -R * C.
        images << "2 1 0 0 0 -1 -2 -3 1 b.png\n";
        images << "\n";
        // 90 degree yaw about world z, center at origin.
        const double s = std::sqrt(0.5);
        images << "1 " << s << " 0 0 " << s << " 0 0 0 1 a.png\n";
        images << "\n";
    }

    const SceneBundle bundle = read_colmap_scene(dir.path.string(), "colmap_scene");
    REQUIRE(bundle.poses.size() == 2);

    // Ordered by image id: id 1 first.
    const CameraPose& rotated = bundle.poses[0];
    CHECK((rotated.position - Eigen::Vector3d(0, 0, 0)).norm() < 1e-12);
    const CameraPose& shifted = bundle.poses[1];
    CHECK((shifted.position - Eigen::Vector3d(1, 2, 3)).norm() < 1e-12);
    CHECK((shifted.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(shifted.intrinsics.fx == 500.0);
    CHECK(shifted.intrinsics.fy == 510.0);

    // Rotation stored world-to-camera: world-from-camera is its transpose.
    Eigen::Matrix3d cam_from_world;
    cam_from_world = Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    CHECK((rotated.rotation - cam_from_world.transpose()).norm() < 1e-9);
}

TEST_CASE("filter reports serialize with stable field order") {
    TempDir dir;
    FilterReport report;
    report.scene_id = "s1";
    report.distribution_class = DistributionClass::kSurround360;
    report.aspect_ok = true;
    report.distance_score = 1.5;
    report.accepted = true;

    write_filter_reports(dir.file("r.jsonl"), {report});
    std::ifstream in(dir.file("r.jsonl"));
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          R"({"scene_id":"s1","distribution_class":"SURROUND_360","aspect_ok":true,"distance_score":1.5,"accepted":true})");
}

TEST_CASE("depth frames load from raw f32 and 16-bit png") {
    TempDir dir;
    CameraPose pose;
    pose.intrinsics = {100, 100, 4, 3};
    pose.image_size = {8, 6};

    nlohmann::ordered_json sidecar;
    sidecar["pose"] = pose_to_json(pose);
    sidecar["frame_id"] = 7;

    {
        std::ofstream meta(dir.file("f.json"));
        meta << sidecar.dump();
    }
    {
        std::ofstream raw(dir.file("f.f32"), std::ios::binary);
        std::vector<float> depth(48, 2.5f);
        raw.write(reinterpret_cast<const char*>(depth.data()),
                  static_cast<std::streamsize>(depth.size() * 4));
    }
    const DepthFrame raw_frame = read_depth_frame(dir.file("f.f32"), dir.file("f.json"));
    CHECK(raw_frame.frame_id == 7);
    CHECK(raw_frame.depth_at(2, 3) == 2.5f);

    // 16-bit millimeter png: 1234 mm -> 1.234 m.
    GrayImage16 png;
    png.width = 8;
    png.height = 6;
    png.pixels.assign(48, 1234);
    write_png_gray16(dir.file("d.png"), png);
    {
        std::ofstream meta(dir.file("d.json"));
        meta << sidecar.dump();
    }
    const DepthFrame png_frame = read_depth_frame(dir.file("d.png"), dir.file("d.json"));
    CHECK(png_frame.depth_at(0, 0) == doctest::Approx(1.234).epsilon(1e-6));
}

TEST_CASE("png color images round-trip through the buffer type") {
    TempDir dir;
    RgbImage8 img;
    img.width = 5;
    img.height = 4;
    img.pixels.resize(60);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        img.pixels[i] = static_cast<std::uint8_t>((i * 37) % 256);
    }
    write_png_rgb8(dir.file("c.png"), img);
    const RgbImage8 loaded = read_png_rgb8(dir.file("c.png"));
    CHECK(loaded.width == img.width);
    CHECK(loaded.pixels == img.pixels);

    const ImageBuffer buffer = to_image_buffer(loaded);
    const RgbImage8 back = to_rgb8(buffer);
    CHECK(back.pixels == img.pixels);
}
