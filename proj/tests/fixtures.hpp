#pragma once

// Synthetic scene and image builders shared by the unit and acceptance
// suites.

#include "dforge/camera.hpp"
#include "dforge/fusion.hpp"
#include "dforge/geometry.hpp"
#include "dforge/loss.hpp"
#include "dforge/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace fixtures {

inline dforge::CameraPose pose_at(const Eigen::Vector3d& position) {
    dforge::CameraPose pose;
    pose.position = position;
    return pose;
}

inline dforge::SceneBundle bundle_of(std::string id, const std::vector<Eigen::Vector3d>& positions) {
    dforge::SceneBundle bundle;
    bundle.scene_id = std::move(id);
    for (const auto& p : positions) {
        bundle.poses.push_back(pose_at(p));
    }
    return bundle;
}

// n cameras evenly spaced on a horizontal circle, looking at the center.
inline dforge::SceneBundle ring_bundle(std::string id, int n, double radius,
                                       const Eigen::Vector3d& center, double arc = 2.0 * M_PI) {
    dforge::SceneBundle bundle;
    bundle.scene_id = std::move(id);
    for (int i = 0; i < n; ++i) {
        const double az = arc * i / n;
        const Eigen::Vector3d p =
            center + radius * Eigen::Vector3d(std::cos(az), std::sin(az), 0.0);
        bundle.poses.push_back(dforge::look_at_pose(p, center));
    }
    return bundle;
}

inline dforge::SceneBundle random_bundle(std::string id, int n, dforge::CounterRng& rng,
                                         double scale = 1.0) {
    dforge::SceneBundle bundle;
    bundle.scene_id = std::move(id);
    for (int i = 0; i < n; ++i) {
        bundle.poses.push_back(pose_at(Eigen::Vector3d(rng.uniform(0.0, scale),
                                                       rng.uniform(0.0, scale),
                                                       rng.uniform(0.0, scale))));
    }
    return bundle;
}

inline dforge::ImageBuffer random_image(int h, int w, dforge::CounterRng& rng) {
    dforge::ImageBuffer img(h, w);
    for (double& v : img.pixels) {
        v = rng.uniform();
    }
    return img;
}

inline dforge::ConfidenceMap random_confidence(int h, int w, dforge::CounterRng& rng) {
    dforge::ConfidenceMap conf;
    conf.height = h;
    conf.width = w;
    conf.conf.resize(static_cast<std::size_t>(h) * static_cast<std::size_t>(w));
    for (double& v : conf.conf) {
        v = rng.uniform();
    }
    return conf;
}

inline dforge::ConfidenceMap constant_confidence(int h, int w, double value) {
    dforge::ConfidenceMap conf;
    conf.height = h;
    conf.width = w;
    conf.conf.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), value);
    return conf;
}

// Analytic z-depth render of a sphere. Pixel (row, col) casts the ray
// through (col + 0.5, row + 0.5); misses stay 0 (invalid).
inline dforge::DepthFrame render_sphere_depth(const dforge::CameraPose& pose,
                                              const Eigen::Vector3d& center, double radius,
                                              int frame_id) {
    dforge::DepthFrame frame;
    frame.pose = pose;
    frame.frame_id = frame_id;
    frame.width = pose.image_size.width;
    frame.height = pose.image_size.height;
    frame.depth.assign(static_cast<std::size_t>(frame.width) * frame.height, 0.0f);

    for (int row = 0; row < frame.height; ++row) {
        for (int col = 0; col < frame.width; ++col) {
            const double x = (col + 0.5 - pose.intrinsics.cx) / pose.intrinsics.fx;
            const double y = (row + 0.5 - pose.intrinsics.cy) / pose.intrinsics.fy;
            // Direction scaled so the ray parameter equals z-depth.
            const Eigen::Vector3d dir = pose.rotation * Eigen::Vector3d(x, y, 1.0);
            const Eigen::Vector3d oc = pose.position - center;
            const double a = dir.squaredNorm();
            const double b = 2.0 * oc.dot(dir);
            const double c = oc.squaredNorm() - radius * radius;
            const double disc = b * b - 4 * a * c;
            if (disc < 0.0) {
                continue;
            }
            const double t = (-b - std::sqrt(disc)) / (2 * a);
            if (t > 0.0) {
                frame.depth[static_cast<std::size_t>(row) * frame.width + col] =
                    static_cast<float>(t);
            }
        }
    }
    return frame;
}

// 24 inward-looking cameras on three elevation rings around the sphere.
inline std::vector<dforge::DepthFrame> sphere_views(const Eigen::Vector3d& center, double radius,
                                                    double camera_distance) {
    std::vector<dforge::DepthFrame> frames;
    const double elevations[3] = {-0.7, 0.0, 0.7};
    int id = 0;
    for (double elev : elevations) {
        for (int k = 0; k < 8; ++k) {
            const double az = 2.0 * M_PI * k / 8;
            const Eigen::Vector3d offset(std::cos(elev) * std::cos(az),
                                         std::cos(elev) * std::sin(az), std::sin(elev));
            dforge::CameraPose pose = dforge::look_at_pose(center + camera_distance * offset, center);
            pose.intrinsics = {120.0, 120.0, 80.0, 60.0};
            pose.image_size = {160, 120};
            frames.push_back(render_sphere_depth(pose, center, radius, id++));
        }
    }
    return frames;
}

// Fronto-parallel plane at z = plane_z seen from a camera at the origin
// looking along +z.
inline dforge::DepthFrame plane_depth_frame(double plane_z) {
    dforge::CameraPose pose;
    pose.intrinsics = {100.0, 100.0, 80.0, 60.0};
    pose.image_size = {160, 120};
    dforge::DepthFrame frame;
    frame.pose = pose;
    frame.width = 160;
    frame.height = 120;
    frame.depth.assign(160 * 120, static_cast<float>(plane_z));
    return frame;
}

} // namespace fixtures
