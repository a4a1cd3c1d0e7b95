#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace dforge {

struct Intrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
};

struct ImageSize {
    int width = 0;
    int height = 0;
};

// Rigid camera extrinsics plus pinhole intrinsics. `rotation` is
// world-from-camera; columns are the camera's x (right), y (down) and
// z (optical axis) directions expressed in world coordinates.
struct CameraPose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Intrinsics intrinsics{500.0, 500.0, 320.0, 240.0};
    ImageSize image_size{640, 480};

    Eigen::Vector3d right() const { return rotation.col(0); }
    Eigen::Vector3d down() const { return rotation.col(1); }
    Eigen::Vector3d optical_axis() const { return rotation.col(2); }

    // Enforces: orthonormal det(+1) rotation to 1e-9, positive focal
    // lengths, principal point inside the image. Throws InvalidSpec.
    void validate() const;
};

struct SceneBundle {
    std::string scene_id;
    std::vector<CameraPose> poses;
    std::string source;
};

// Look-at pose: optical axis through `target`, camera x horizontal w.r.t.
// `up`. Falls back to +y as up when the view direction is parallel to `up`.
CameraPose look_at_pose(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& up = Eigen::Vector3d(0, 0, 1));

} // namespace dforge
