#include "dforge/fusion.hpp"

#include "dforge/errors.hpp"
#include "dforge/threads.hpp"
#include "marching_tables.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace dforge {

void DepthFrame::validate() const {
    if (width <= 0 || height <= 0 ||
        depth.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw GridMismatch("depth buffer does not match its declared size");
    }
    if (width != pose.image_size.width || height != pose.image_size.height) {
        throw GridMismatch("depth dimensions do not match the pose image size");
    }
    pose.validate();
    for (float d : depth) {
        if (!(d >= 0.0f) || !std::isfinite(d)) {
            throw GridMismatch("depth values must be finite and nonnegative");
        }
    }
}

TsdfVolume::TsdfVolume(const Eigen::Vector3d& origin_, double voxel_size_,
                       const Eigen::Vector3i& dims_, double truncation_)
    : origin(origin_), voxel_size(voxel_size_), dims(dims_),
      truncation(truncation_ > 0.0 ? truncation_ : 4.0 * voxel_size_) {
    if (voxel_size <= 0.0 || dims.minCoeff() <= 0) {
        throw InvalidSpec("volume needs positive voxel size and dimensions");
    }
    if (truncation < voxel_size) {
        throw InvalidSpec("truncation must be at least one voxel");
    }
    tsdf.assign(voxel_count(), 1.0f);
    weight.assign(voxel_count(), 0.0f);
}

void TriangleMesh::validate() const {
    const int n = static_cast<int>(vertices.size());
    for (const auto& t : triangles) {
        for (int idx : t) {
            if (idx < 0 || idx >= n) {
                throw InvalidSpec("triangle index out of range");
            }
        }
    }
    for (const auto& v : vertices) {
        if (!v.allFinite()) {
            throw InvalidSpec("mesh vertex is not finite");
        }
    }
}

bool OccupancyGrid::is_occupied_at(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d local = (p - origin) / voxel_size;
    const int i = static_cast<int>(std::floor(local.x()));
    const int j = static_cast<int>(std::floor(local.y()));
    const int k = static_cast<int>(std::floor(local.z()));
    if (i < 0 || j < 0 || k < 0 || i >= dims.x() || j >= dims.y() || k >= dims.z()) {
        return false;
    }
    return occupied[index(i, j, k)] != 0;
}

std::vector<Eigen::Vector3d> OccupancyGrid::occupied_centers() const {
    std::vector<Eigen::Vector3d> centers;
    for (int k = 0; k < dims.z(); ++k) {
        for (int j = 0; j < dims.y(); ++j) {
            for (int i = 0; i < dims.x(); ++i) {
                if (occupied[index(i, j, k)]) {
                    centers.push_back(voxel_center(i, j, k));
                }
            }
        }
    }
    return centers;
}

void integrate_frame(TsdfVolume& volume, const DepthFrame& frame) {
    frame.validate();
    if (volume.voxel_size <= 0.0 || volume.dims.minCoeff() <= 0) {
        throw GridMismatch("volume is not initialized");
    }

    const Eigen::Matrix3d cam_from_world = frame.pose.rotation.transpose();
    const Eigen::Vector3d cam_pos = frame.pose.position;
    const double fx = frame.pose.intrinsics.fx;
    const double fy = frame.pose.intrinsics.fy;
    const double cx = frame.pose.intrinsics.cx;
    const double cy = frame.pose.intrinsics.cy;

    // Voxels are touched by exactly one worker, so the result is identical
    // for any thread count.
    parallel_for(static_cast<std::size_t>(volume.dims.z()), [&](std::size_t kb, std::size_t ke) {
        for (int k = static_cast<int>(kb); k < static_cast<int>(ke); ++k) {
            for (int j = 0; j < volume.dims.y(); ++j) {
                for (int i = 0; i < volume.dims.x(); ++i) {
                    const Eigen::Vector3d pc =
                        cam_from_world * (volume.voxel_center(i, j, k) - cam_pos);
                    if (pc.z() <= 0.0) {
                        continue;
                    }
                    const double u = fx * pc.x() / pc.z() + cx;
                    const double v = fy * pc.y() / pc.z() + cy;
                    const int col = static_cast<int>(std::floor(u));
                    const int row = static_cast<int>(std::floor(v));
                    if (col < 0 || row < 0 || col >= frame.width || row >= frame.height) {
                        continue;
                    }
                    const double d = frame.depth_at(row, col);
                    if (d <= 0.0) {
                        continue;
                    }
                    const double sdf = d - pc.z();
                    if (sdf <= -volume.truncation) {
                        continue;
                    }
                    const double sample = std::clamp(sdf / volume.truncation, -1.0, 1.0);
                    const std::size_t idx = volume.index(i, j, k);
                    const double w = volume.weight[idx];
                    volume.tsdf[idx] =
                        static_cast<float>((w * volume.tsdf[idx] + sample) / (w + 1.0));
                    volume.weight[idx] = static_cast<float>(std::min(w + 1.0, volume.max_weight));
                }
            }
        }
    });
}

namespace {

// Canonical key for a lattice edge: anchor voxel plus axis (0=x, 1=y, 2=z).
// Unique for grids up to 2^20 voxels per side.
std::uint64_t edge_key(int i, int j, int k, int axis) {
    return (static_cast<std::uint64_t>(i & 0xFFFFF) << 44) |
           (static_cast<std::uint64_t>(j & 0xFFFFF) << 24) |
           (static_cast<std::uint64_t>(k & 0xFFFFF) << 4) |
           static_cast<std::uint64_t>(axis);
}

struct CornerOffset {
    int di, dj, dk;
};

// Matches the bit order of the triangle table.
constexpr CornerOffset kCorners[8] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};

// Edge -> (anchor corner, axis) in canonical lattice coordinates.
struct EdgeInfo {
    int corner;
    int axis;
};

constexpr EdgeInfo kEdgeInfo[12] = {
    {0, 0}, {1, 1}, {3, 0}, {0, 1},
    {4, 0}, {5, 1}, {7, 0}, {4, 1},
    {0, 2}, {1, 2}, {2, 2}, {3, 2},
};

} // namespace

TriangleMesh extract_mesh(const TsdfVolume& volume) {
    TriangleMesh mesh;
    std::unordered_map<std::uint64_t, int> edge_vertices;

    const auto value = [&](int i, int j, int k) {
        return static_cast<double>(volume.tsdf[volume.index(i, j, k)]);
    };
    const auto observed = [&](int i, int j, int k) {
        return volume.weight[volume.index(i, j, k)] > 0.0f;
    };

    bool any_crossing = false;
    for (int k = 0; k + 1 < volume.dims.z(); ++k) {
        for (int j = 0; j + 1 < volume.dims.y(); ++j) {
            for (int i = 0; i + 1 < volume.dims.x(); ++i) {
                double corner_val[8];
                bool all_observed = true;
                int cube_index = 0;
                for (int c = 0; c < 8; ++c) {
                    const int ci = i + kCorners[c].di;
                    const int cj = j + kCorners[c].dj;
                    const int ck = k + kCorners[c].dk;
                    if (!observed(ci, cj, ck)) {
                        all_observed = false;
                        break;
                    }
                    corner_val[c] = value(ci, cj, ck);
                    if (corner_val[c] < 0.0) {
                        cube_index |= 1 << c;
                    }
                }
                if (!all_observed || cube_index == 0 || cube_index == 255) {
                    continue;
                }
                any_crossing = true;

                const signed char* tris = mc::kTriTable[cube_index];
                for (int t = 0; tris[t] != -1; t += 3) {
                    int tri[3];
                    for (int e = 0; e < 3; ++e) {
                        const int edge = tris[t + e];
                        const EdgeInfo info = kEdgeInfo[edge];
                        const CornerOffset anchor = kCorners[info.corner];
                        const std::uint64_t key =
                            edge_key(i + anchor.di, j + anchor.dj, k + anchor.dk, info.axis);
                        auto found = edge_vertices.find(key);
                        if (found != edge_vertices.end()) {
                            tri[e] = found->second;
                            continue;
                        }
                        const int c0 = mc::kEdgeCorners[edge][0];
                        const int c1 = mc::kEdgeCorners[edge][1];
                        const double v0 = corner_val[c0];
                        const double v1 = corner_val[c1];
                        double frac = 0.5;
                        if (std::abs(v1 - v0) > 1e-30) {
                            frac = std::clamp((0.0 - v0) / (v1 - v0), 0.0, 1.0);
                        }
                        const Eigen::Vector3d p0 =
                            volume.voxel_center(i + kCorners[c0].di, j + kCorners[c0].dj, k + kCorners[c0].dk);
                        const Eigen::Vector3d p1 =
                            volume.voxel_center(i + kCorners[c1].di, j + kCorners[c1].dj, k + kCorners[c1].dk);
                        const int vid = static_cast<int>(mesh.vertices.size());
                        mesh.vertices.push_back(p0 + frac * (p1 - p0));
                        edge_vertices.emplace(key, vid);
                        tri[e] = vid;
                    }
                    if (tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2]) {
                        mesh.triangles.push_back({tri[0], tri[1], tri[2]});
                    }
                }
            }
        }
    }

    if (!any_crossing) {
        throw EmptyVolume("no observed sign change in the volume");
    }
    return mesh;
}

OccupancyGrid to_occupancy(const TsdfVolume& volume, double band) {
    if (band < 0.0) {
        throw InvalidRange("occupancy band must be nonnegative");
    }
    OccupancyGrid grid;
    grid.origin = volume.origin;
    grid.voxel_size = volume.voxel_size;
    grid.dims = volume.dims;
    grid.occupied.assign(volume.voxel_count(), 0);
    for (std::size_t idx = 0; idx < volume.tsdf.size(); ++idx) {
        if (volume.weight[idx] > 0.0f &&
            static_cast<double>(volume.tsdf[idx]) * volume.truncation <= band) {
            grid.occupied[idx] = 1;
        }
    }
    return grid;
}

} // namespace dforge
