#pragma once

#include "dforge/camera.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace dforge {

// Posed depth image. Depth is row-major H x W in meters; 0 marks an invalid
// sample and is skipped during fusion.
struct DepthFrame {
    std::vector<float> depth;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> color; // optional, H*W*3
    CameraPose pose;
    int frame_id = 0;

    float depth_at(int row, int col) const {
        return depth[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(col)];
    }

    void validate() const;
};

// Truncated signed-distance voxel grid with per-voxel fusion weights.
// `origin` is the world position of the grid corner; the center of voxel
// (i,j,k) is origin + (i+0.5, j+0.5, k+0.5) * voxel_size. Storage is
// x-fastest, matching the on-disk layout.
struct TsdfVolume {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    double voxel_size = 0.0;
    Eigen::Vector3i dims = Eigen::Vector3i::Zero();
    std::vector<float> tsdf;   // in [-1, 1]; 1 where unobserved
    std::vector<float> weight; // 0 iff unobserved
    double truncation = 0.0;
    double max_weight = 64.0;

    TsdfVolume() = default;
    // truncation defaults to 4 voxels when not given.
    TsdfVolume(const Eigen::Vector3d& origin, double voxel_size, const Eigen::Vector3i& dims,
               double truncation = 0.0);

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims.x()) * static_cast<std::size_t>(dims.y()) *
               static_cast<std::size_t>(dims.z());
    }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims.x()) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims.y()) * static_cast<std::size_t>(k));
    }
    Eigen::Vector3d voxel_center(int i, int j, int k) const {
        return origin + voxel_size * Eigen::Vector3d(i + 0.5, j + 0.5, k + 0.5);
    }
};

struct TriangleMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<std::uint8_t, 3>> vertex_colors; // optional

    void validate() const;
};

// Boolean voxelization of space a rendering camera must avoid.
struct OccupancyGrid {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    double voxel_size = 0.0;
    Eigen::Vector3i dims = Eigen::Vector3i::Zero();
    std::vector<std::uint8_t> occupied;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims.x()) * static_cast<std::size_t>(dims.y()) *
               static_cast<std::size_t>(dims.z());
    }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims.x()) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims.y()) * static_cast<std::size_t>(k));
    }
    Eigen::Vector3d voxel_center(int i, int j, int k) const {
        return origin + voxel_size * Eigen::Vector3d(i + 0.5, j + 0.5, k + 0.5);
    }
    // True if `p` falls inside an occupied voxel; points outside the grid
    // are free.
    bool is_occupied_at(const Eigen::Vector3d& p) const;
    std::vector<Eigen::Vector3d> occupied_centers() const;
};

// Fuse one depth frame into the volume: projective point-to-ray SDF,
// clamped to [-1, 1], merged by weighted running average with per-sample
// weight 1 and weights capped at max_weight. Voxels behind the surface by
// more than the truncation distance are untouched.
void integrate_frame(TsdfVolume& volume, const DepthFrame& frame);

// Marching-cubes triangulation of the tsdf = 0 isosurface over cells whose
// 8 corners are all observed. Vertices are welded on shared cell edges, so
// closed surfaces come out watertight. Throws EmptyVolume when no observed
// sign change exists.
TriangleMesh extract_mesh(const TsdfVolume& volume);

// Binarize: occupied iff observed and tsdf * truncation <= band. Unobserved
// space is treated as free.
OccupancyGrid to_occupancy(const TsdfVolume& volume, double band);

} // namespace dforge
