#include "dforge/formats.hpp"

#include "dforge/errors.hpp"
#include "dforge/image_io.hpp"
#include "dforge/manifest_io.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>

namespace dforge {

namespace {

class LeWriter {
public:
    explicit LeWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) {
            throw IoError("cannot open for writing: " + path);
        }
        path_ = path;
    }

    void bytes(const void* data, std::size_t size) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out_) {
            throw IoError("write failed: " + path_);
        }
    }
    void u32(std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        bytes(b, 4);
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u32(static_cast<std::uint32_t>(bits));
        u32(static_cast<std::uint32_t>(bits >> 32));
    }

private:
    std::ofstream out_;
    std::string path_;
};

class LeReader {
public:
    explicit LeReader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) {
            throw IoError("cannot open for reading: " + path);
        }
        path_ = path;
    }

    void bytes(void* data, std::size_t size) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
        if (static_cast<std::size_t>(in_.gcount()) != size) {
            throw IoError("unexpected end of file: " + path_);
        }
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const std::uint64_t lo = u32();
        const std::uint64_t hi = u32();
        const std::uint64_t bits = lo | (hi << 32);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

private:
    std::ifstream in_;
    std::string path_;
};

void write_f32_span(LeWriter& w, const std::vector<float>& values) {
    for (float v : values) {
        w.f32(v);
    }
}

void read_f32_span(LeReader& r, std::vector<float>& values) {
    for (float& v : values) {
        v = r.f32();
    }
}

void expect_magic(LeReader& r, const char expected[4], const std::string& what) {
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, expected, 4) != 0) {
        throw ParseError("bad magic for " + what);
    }
}

constexpr std::uint32_t kFormatVersion = 1;
constexpr float kFloMagic = 202021.25f;

} // namespace

void write_latent_file(const std::string& path, const LatentVideo& latent) {
    latent.validate();
    LeWriter w(path);
    w.bytes("LATV", 4);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(latent.shape.frames));
    w.u32(static_cast<std::uint32_t>(latent.shape.channels));
    w.u32(static_cast<std::uint32_t>(latent.shape.height));
    w.u32(static_cast<std::uint32_t>(latent.shape.width));
    for (double v : latent.data) {
        w.f32(static_cast<float>(v));
    }
}

LatentVideo read_latent_file(const std::string& path) {
    LeReader r(path);
    expect_magic(r, "LATV", path);
    if (r.u32() != kFormatVersion) {
        throw ParseError("unsupported latent file version: " + path);
    }
    LatentShape shape;
    shape.frames = static_cast<int>(r.u32());
    shape.channels = static_cast<int>(r.u32());
    shape.height = static_cast<int>(r.u32());
    shape.width = static_cast<int>(r.u32());
    LatentVideo latent(shape);
    for (double& v : latent.data) {
        v = static_cast<double>(r.f32());
    }
    latent.validate();
    return latent;
}

void write_volume_file(const std::string& path, const TsdfVolume& volume) {
    LeWriter w(path);
    w.bytes("TSDF", 4);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(volume.dims.x()));
    w.u32(static_cast<std::uint32_t>(volume.dims.y()));
    w.u32(static_cast<std::uint32_t>(volume.dims.z()));
    w.f64(volume.voxel_size);
    w.f64(volume.origin.x());
    w.f64(volume.origin.y());
    w.f64(volume.origin.z());
    w.f64(volume.truncation);
    write_f32_span(w, volume.tsdf);
    write_f32_span(w, volume.weight);
}

TsdfVolume read_volume_file(const std::string& path) {
    LeReader r(path);
    expect_magic(r, "TSDF", path);
    if (r.u32() != kFormatVersion) {
        throw ParseError("unsupported volume file version: " + path);
    }
    Eigen::Vector3i dims;
    dims.x() = static_cast<int>(r.u32());
    dims.y() = static_cast<int>(r.u32());
    dims.z() = static_cast<int>(r.u32());
    const double voxel_size = r.f64();
    Eigen::Vector3d origin;
    origin.x() = r.f64();
    origin.y() = r.f64();
    origin.z() = r.f64();
    const double truncation = r.f64();

    TsdfVolume volume(origin, voxel_size, dims, truncation);
    read_f32_span(r, volume.tsdf);
    read_f32_span(r, volume.weight);
    return volume;
}

void write_occupancy_file(const std::string& path, const OccupancyGrid& grid) {
    LeWriter w(path);
    w.bytes("OCCG", 4);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(grid.dims.x()));
    w.u32(static_cast<std::uint32_t>(grid.dims.y()));
    w.u32(static_cast<std::uint32_t>(grid.dims.z()));
    w.f64(grid.voxel_size);
    w.f64(grid.origin.x());
    w.f64(grid.origin.y());
    w.f64(grid.origin.z());
    w.bytes(grid.occupied.data(), grid.occupied.size());
}

OccupancyGrid read_occupancy_file(const std::string& path) {
    LeReader r(path);
    expect_magic(r, "OCCG", path);
    if (r.u32() != kFormatVersion) {
        throw ParseError("unsupported occupancy file version: " + path);
    }
    OccupancyGrid grid;
    grid.dims.x() = static_cast<int>(r.u32());
    grid.dims.y() = static_cast<int>(r.u32());
    grid.dims.z() = static_cast<int>(r.u32());
    grid.voxel_size = r.f64();
    grid.origin.x() = r.f64();
    grid.origin.y() = r.f64();
    grid.origin.z() = r.f64();
    grid.occupied.resize(grid.voxel_count());
    r.bytes(grid.occupied.data(), grid.occupied.size());
    return grid;
}

void write_flo_file(const std::string& path, const FlowField& flow) {
    flow.validate();
    LeWriter w(path);
    w.f32(kFloMagic);
    w.i32(flow.width);
    w.i32(flow.height);
    for (std::size_t i = 0; i < flow.pixel_count(); ++i) {
        w.f32(flow.u[i]);
        w.f32(flow.v[i]);
    }
}

FlowField read_flo_file(const std::string& path) {
    LeReader r(path);
    if (r.f32() != kFloMagic) {
        throw ParseError("bad flow magic in " + path);
    }
    FlowField flow;
    flow.width = r.i32();
    flow.height = r.i32();
    if (flow.width <= 0 || flow.height <= 0) {
        throw ParseError("bad flow dimensions in " + path);
    }
    flow.u.resize(flow.pixel_count());
    flow.v.resize(flow.pixel_count());
    for (std::size_t i = 0; i < flow.pixel_count(); ++i) {
        flow.u[i] = r.f32();
        flow.v[i] = r.f32();
    }
    flow.validate();
    return flow;
}

FlowField read_raw_flow(const std::string& raw_path, const std::string& sidecar_path) {
    std::ifstream sidecar(sidecar_path);
    if (!sidecar) {
        throw IoError("cannot open flow sidecar: " + sidecar_path);
    }
    nlohmann::json meta;
    try {
        sidecar >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad flow sidecar " + sidecar_path + ": " + e.what());
    }

    FlowField flow;
    flow.width = meta.at("width").get<int>();
    flow.height = meta.at("height").get<int>();
    flow.frame_index = meta.value("frame_index", 0);
    if (flow.width <= 0 || flow.height <= 0) {
        throw ParseError("bad flow dimensions in sidecar " + sidecar_path);
    }

    LeReader r(raw_path);
    flow.u.resize(flow.pixel_count());
    flow.v.resize(flow.pixel_count());
    read_f32_span(r, flow.u);
    read_f32_span(r, flow.v);
    flow.validate();
    return flow;
}

void write_ply_ascii(const std::string& path, const TriangleMesh& mesh) {
    mesh.validate();
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    const bool has_color = mesh.vertex_colors.size() == mesh.vertices.size();
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (has_color) {
        out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    }
    out << "element face " << mesh.triangles.size() << "\n";
    out << "property list uchar int vertex_indices\n";
    out << "end_header\n";

    std::ostringstream line;
    line.precision(9);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        line.str("");
        line << static_cast<float>(mesh.vertices[i].x()) << " "
             << static_cast<float>(mesh.vertices[i].y()) << " "
             << static_cast<float>(mesh.vertices[i].z());
        if (has_color) {
            line << " " << static_cast<int>(mesh.vertex_colors[i][0]) << " "
                 << static_cast<int>(mesh.vertex_colors[i][1]) << " "
                 << static_cast<int>(mesh.vertex_colors[i][2]);
        }
        out << line.str() << "\n";
    }
    for (const auto& t : mesh.triangles) {
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

void write_trajectory_file(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    nlohmann::ordered_json header;
    header["spec"] = traj.spec_text;
    header["n_frames"] = traj.poses.size();
    header["spec_hash"] = traj.spec_hash;
    out << header.dump() << "\n";
    for (const CameraPose& pose : traj.poses) {
        out << pose_to_json(pose).dump() << "\n";
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

Trajectory read_trajectory_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("trajectory file is empty: " + path);
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad trajectory header in " + path + ": " + e.what());
    }

    Trajectory traj;
    traj.spec_text = header.value("spec", "");
    traj.spec_hash = header.value("spec_hash", "");
    const auto n_frames = header.at("n_frames").get<std::size_t>();
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            traj.poses.push_back(pose_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("bad pose line in " + path + ": " + e.what());
        }
    }
    if (traj.poses.size() != n_frames) {
        throw ParseError("trajectory header frame count does not match the pose lines");
    }
    return traj;
}

DepthFrame read_depth_frame(const std::string& data_path, const std::string& sidecar_path) {
    std::ifstream sidecar(sidecar_path);
    if (!sidecar) {
        throw IoError("cannot open depth sidecar: " + sidecar_path);
    }
    nlohmann::json meta;
    try {
        sidecar >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad depth sidecar " + sidecar_path + ": " + e.what());
    }

    DepthFrame frame;
    frame.pose = pose_from_json(meta.at("pose"));
    frame.frame_id = meta.value("frame_id", 0);
    frame.width = frame.pose.image_size.width;
    frame.height = frame.pose.image_size.height;

    if (data_path.size() >= 4 && data_path.substr(data_path.size() - 4) == ".png") {
        const GrayImage16 png = read_png_gray16(data_path);
        if (png.width != frame.width || png.height != frame.height) {
            throw GridMismatch("depth PNG does not match the pose image size");
        }
        // Millimeters by default.
        const double scale = meta.value("depth_scale", 0.001);
        frame.depth.resize(png.pixels.size());
        for (std::size_t i = 0; i < png.pixels.size(); ++i) {
            frame.depth[i] = static_cast<float>(png.pixels[i] * scale);
        }
    } else {
        LeReader r(data_path);
        frame.depth.resize(static_cast<std::size_t>(frame.width) *
                           static_cast<std::size_t>(frame.height));
        read_f32_span(r, frame.depth);
    }
    frame.validate();
    return frame;
}

} // namespace dforge
