#pragma once

#include "dforge/camera.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace dforge {

// Scene center, orthonormal principal axes and per-axis extents of a camera
// set. Rows of `axes` are the principal directions ordered by descending
// singular value; each row is flipped so its largest-magnitude component is
// positive, which makes repeated runs bit-identical.
struct PrincipalFrame {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();
    Eigen::Vector3d extents = Eigen::Vector3d::Zero();
};

enum class DistributionClass {
    kSurround360,
    kArc,
    kLinear,
};

const char* to_string(DistributionClass c);
DistributionClass distribution_class_from_string(const std::string& s);

struct FilterPolicy {
    double max_xy_aspect_ratio = 2.0;
    double min_angular_span_deg = 300.0;
    double distance_weight = 1.0;
    // Scenes are accepted only when their distribution class matches the
    // class the director family being curated for expects.
    DistributionClass target_class = DistributionClass::kSurround360;
};

struct FilterReport {
    std::string scene_id;
    DistributionClass distribution_class = DistributionClass::kLinear;
    bool aspect_ok = false;
    double distance_score = 0.0;
    bool accepted = false;
    // Per-scene failure note; batch filtering never aborts on one bad scene.
    std::string error;
};

// Arithmetic mean of camera positions. Throws EmptyScene.
Eigen::Vector3d compute_center(const std::vector<CameraPose>& poses);

// PCA frame of the camera positions: axes from the SVD of the centered
// position matrix, extents as max-min of the projections onto each axis.
// Degenerate directions (zero singular value) are completed to a
// right-handed orthonormal basis before sign normalization.
PrincipalFrame compute_principal_frame(const std::vector<CameraPose>& poses);

// Least-squares convergence point of the cameras' optical axes; the PCA
// center when the axes are (anti)parallel.
Eigen::Vector3d scene_gaze_center(const SceneBundle& bundle, const PrincipalFrame& frame);

// Azimuthal span of the cameras about the gaze center, measured in the
// plane of the two dominant axes: 360 degrees minus the largest circular
// gap. Near-collinear sets are LINEAR outright. Throws DegenerateFrame
// when both dominant extents are zero.
DistributionClass classify_distribution(const SceneBundle& bundle, const PrincipalFrame& frame,
                                        const FilterPolicy& policy);

// True iff the dominant-extent ratio max(Lx/Ly, Ly/Lx) is at most the
// policy threshold. A zero denominator fails the check.
bool aspect_ratio_check(const PrincipalFrame& frame, const FilterPolicy& policy);

// Sum over cameras of the distance to the nearest face plane of the
// bounding box of the camera positions, taken in the principal frame.
// Cameras inside the box use the distance to the nearest face.
double distance_score(const SceneBundle& bundle, const PrincipalFrame& frame);

// Per-scene reports; accepted ones first, then rejected, each group
// ascending by (distance_score, scene_id). A pure function of
// (bundles, policy): input order never matters.
std::vector<FilterReport> filter_scenes(const std::vector<SceneBundle>& bundles,
                                        const FilterPolicy& policy);

} // namespace dforge
