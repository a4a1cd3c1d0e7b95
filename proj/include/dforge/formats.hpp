#pragma once

#include "dforge/flow.hpp"
#include "dforge/fusion.hpp"
#include "dforge/latent.hpp"
#include "dforge/trajectory.hpp"

#include <string>

namespace dforge {

// Latent file: magic "LATV", version u32, then F, C, H, W as u32,
// little-endian, followed by an f32 payload in frame-major order.
void write_latent_file(const std::string& path, const LatentVideo& latent);
LatentVideo read_latent_file(const std::string& path);

// Volume file: magic "TSDF", version u32, dims 3 x u32, voxel_size f64,
// origin 3 x f64, truncation f64, then voxel-count f32 tsdf values and
// voxel-count f32 weights, little-endian, x-fastest.
void write_volume_file(const std::string& path, const TsdfVolume& volume);
TsdfVolume read_volume_file(const std::string& path);

// Occupancy file: magic "OCCG", version u32, dims 3 x u32, voxel_size f64,
// origin 3 x f64, then voxel-count u8 flags, x-fastest.
void write_occupancy_file(const std::string& path, const OccupancyGrid& grid);
OccupancyGrid read_occupancy_file(const std::string& path);

// Middlebury-style flow file: the magic float 202021.25 ("PIEH"), i32
// width, i32 height, then row-major interleaved (u, v) float32 pairs.
void write_flo_file(const std::string& path, const FlowField& flow);
FlowField read_flo_file(const std::string& path);

// Raw flow alternative: u plane then v plane as f32, dimensions from a
// sidecar JSON {"width": W, "height": H, "frame_index": i}.
FlowField read_raw_flow(const std::string& raw_path, const std::string& sidecar_path);

// ASCII PLY with deterministic vertex and face ordering.
void write_ply_ascii(const std::string& path, const TriangleMesh& mesh);

// Trajectory file: one JSON header line {spec, n_frames, spec_hash}
// followed by one CameraPose JSON object per line. Write -> read -> write
// is byte-identical.
void write_trajectory_file(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_file(const std::string& path);

// Depth frame from a 16-bit millimeter PNG or a raw f32 meter grid, with
// the pose (and optional depth_scale / frame_id) in a sidecar JSON.
DepthFrame read_depth_frame(const std::string& data_path, const std::string& sidecar_path);

} // namespace dforge
