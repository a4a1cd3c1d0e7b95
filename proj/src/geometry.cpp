#include "dforge/geometry.hpp"

#include "dforge/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dforge {

namespace {

constexpr double kOrthoTol = 1e-9;

// Flip each row so its largest-magnitude component is positive. Index order
// breaks magnitude ties, so the result is unique.
void normalize_axis_signs(Eigen::Matrix3d& axes) {
    for (int r = 0; r < 3; ++r) {
        int best = 0;
        for (int c = 1; c < 3; ++c) {
            if (std::abs(axes(r, c)) > std::abs(axes(r, best))) {
                best = c;
            }
        }
        if (axes(r, best) < 0.0) {
            axes.row(r) = -axes.row(r);
        }
    }
}

} // namespace

void CameraPose::validate() const {
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > kOrthoTol) {
        throw InvalidSpec("camera rotation is not orthonormal");
    }
    if (std::abs(rotation.determinant() - 1.0) > kOrthoTol) {
        throw InvalidSpec("camera rotation determinant is not +1");
    }
    if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) {
        throw InvalidSpec("focal lengths must be positive");
    }
    if (image_size.width <= 0 || image_size.height <= 0) {
        throw InvalidSpec("image size must be positive");
    }
    if (intrinsics.cx < 0.0 || intrinsics.cx >= image_size.width ||
        intrinsics.cy < 0.0 || intrinsics.cy >= image_size.height) {
        throw InvalidSpec("principal point outside the image");
    }
}

CameraPose look_at_pose(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& up) {
    const Eigen::Vector3d offset = target - position;
    const double dist = offset.norm();
    if (dist < 1e-12) {
        throw DegenerateOrbit("look-at target coincides with camera position");
    }
    const Eigen::Vector3d forward = offset / dist;

    Eigen::Vector3d up_dir = up.normalized();
    if (std::abs(forward.dot(up_dir)) > 1.0 - 1e-9) {
        up_dir = Eigen::Vector3d(0, 1, 0);
    }
    const Eigen::Vector3d right = forward.cross(up_dir).normalized();
    const Eigen::Vector3d down = forward.cross(right);

    CameraPose pose;
    pose.position = position;
    pose.rotation.col(0) = right;
    pose.rotation.col(1) = down;
    pose.rotation.col(2) = forward;
    return pose;
}

const char* to_string(DistributionClass c) {
    switch (c) {
    case DistributionClass::kSurround360: return "SURROUND_360";
    case DistributionClass::kArc: return "ARC";
    case DistributionClass::kLinear: return "LINEAR";
    }
    return "LINEAR";
}

DistributionClass distribution_class_from_string(const std::string& s) {
    if (s == "SURROUND_360") return DistributionClass::kSurround360;
    if (s == "ARC") return DistributionClass::kArc;
    if (s == "LINEAR") return DistributionClass::kLinear;
    throw ParseError("unknown distribution class: " + s);
}

Eigen::Vector3d compute_center(const std::vector<CameraPose>& poses) {
    if (poses.empty()) {
        throw EmptyScene("cannot compute center of an empty camera set");
    }
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const CameraPose& pose : poses) {
        sum += pose.position;
    }
    return sum / static_cast<double>(poses.size());
}

PrincipalFrame compute_principal_frame(const std::vector<CameraPose>& poses) {
    if (poses.empty()) {
        throw EmptyScene("cannot compute principal frame of an empty camera set");
    }

    PrincipalFrame frame;
    frame.center = compute_center(poses);

    const auto n = static_cast<Eigen::Index>(poses.size());
    Eigen::MatrixXd centered(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        centered.row(i) = (poses[static_cast<std::size_t>(i)].position - frame.center).transpose();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::Vector3d singular = svd.singularValues();
    const double sig_tol = std::max(1e-12, 1e-12 * singular(0));

    // Data-supported axes first, then deterministic completion: project the
    // canonical basis vectors against the kept axes and keep the first with
    // a usable residual; the final axis is a cross product, so a completed
    // basis is right-handed.
    Eigen::Matrix3d axes = Eigen::Matrix3d::Zero();
    int rank = 0;
    for (int i = 0; i < 3; ++i) {
        if (singular(i) > sig_tol) {
            axes.row(rank++) = svd.matrixV().col(i).transpose();
        }
    }
    if (rank < 3) {
        for (int canon = 0; canon < 3 && rank < 2; ++canon) {
            Eigen::Vector3d candidate = Eigen::Vector3d::Unit(canon);
            for (int k = 0; k < rank; ++k) {
                candidate -= candidate.dot(axes.row(k)) * axes.row(k).transpose();
            }
            if (candidate.norm() > 0.5) {
                axes.row(rank++) = candidate.normalized().transpose();
            }
        }
        if (rank == 2) {
            axes.row(2) = axes.row(0).cross(axes.row(1));
            rank = 3;
        }
    }
    normalize_axis_signs(axes);
    frame.axes = axes;

    for (int a = 0; a < 3; ++a) {
        double lo = centered.row(0).dot(axes.row(a));
        double hi = lo;
        for (Eigen::Index i = 1; i < n; ++i) {
            const double d = centered.row(i).dot(axes.row(a));
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        frame.extents(a) = hi - lo;
    }
    return frame;
}

Eigen::Vector3d scene_gaze_center(const SceneBundle& bundle, const PrincipalFrame& frame) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (const CameraPose& pose : bundle.poses) {
        const Eigen::Vector3d d = pose.optical_axis();
        const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - d * d.transpose();
        m += proj;
        rhs += proj * pose.position;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    if (es.eigenvalues()(0) < 1e-6 * std::max(1.0, es.eigenvalues()(2))) {
        return frame.center; // axes (anti)parallel, no convergence point
    }
    return m.ldlt().solve(rhs);
}

DistributionClass classify_distribution(const SceneBundle& bundle, const PrincipalFrame& frame,
                                        const FilterPolicy& policy) {
    if (frame.extents(0) <= 0.0 && frame.extents(1) <= 0.0) {
        throw DegenerateFrame("both dominant extents are zero in scene " + bundle.scene_id);
    }
    // Near-collinear camera sets are linear paths no matter where they
    // look; azimuth spans about any interior point would be meaningless.
    if (frame.extents(1) < 0.02 * frame.extents(0)) {
        return DistributionClass::kLinear;
    }

    // Azimuths are measured about the point the cameras converge on, so a
    // shallow arc spans its true sector instead of wrapping around its own
    // centroid.
    const Eigen::Vector3d origin = scene_gaze_center(bundle, frame);

    std::vector<double> azimuths;
    azimuths.reserve(bundle.poses.size());
    for (const CameraPose& pose : bundle.poses) {
        const Eigen::Vector3d d = pose.position - origin;
        const double x = d.dot(frame.axes.row(0));
        const double y = d.dot(frame.axes.row(1));
        if (std::hypot(x, y) < 1e-12) {
            continue; // on the axis through the origin; azimuth undefined
        }
        azimuths.push_back(std::atan2(y, x));
    }

    double span_deg = 0.0;
    if (azimuths.size() >= 2) {
        std::sort(azimuths.begin(), azimuths.end());
        double max_gap = 2.0 * M_PI - (azimuths.back() - azimuths.front());
        for (std::size_t i = 1; i < azimuths.size(); ++i) {
            max_gap = std::max(max_gap, azimuths[i] - azimuths[i - 1]);
        }
        span_deg = (2.0 * M_PI - max_gap) * 180.0 / M_PI;
    }

    if (span_deg >= policy.min_angular_span_deg) {
        return DistributionClass::kSurround360;
    }
    if (span_deg >= 90.0) {
        return DistributionClass::kArc;
    }
    return DistributionClass::kLinear;
}

bool aspect_ratio_check(const PrincipalFrame& frame, const FilterPolicy& policy) {
    const double lx = frame.extents(0);
    const double ly = frame.extents(1);
    if (lx <= 0.0 || ly <= 0.0) {
        return false;
    }
    const double ratio = std::max(lx / ly, ly / lx);
    return ratio <= policy.max_xy_aspect_ratio;
}

double distance_score(const SceneBundle& bundle, const PrincipalFrame& frame) {
    if (bundle.poses.empty()) {
        throw EmptyScene("distance score of an empty scene");
    }
    if (frame.extents.maxCoeff() <= 0.0) {
        throw DegenerateFrame("degenerate bounding box in scene " + bundle.scene_id);
    }

    // Bounding box of the camera positions in the principal frame.
    Eigen::Vector3d lo, hi;
    bool first = true;
    for (const CameraPose& pose : bundle.poses) {
        const Eigen::Vector3d local = frame.axes * (pose.position - frame.center);
        if (first) {
            lo = local;
            hi = local;
            first = false;
        } else {
            lo = lo.cwiseMin(local);
            hi = hi.cwiseMax(local);
        }
    }

    double total = 0.0;
    for (const CameraPose& pose : bundle.poses) {
        const Eigen::Vector3d local = frame.axes * (pose.position - frame.center);
        double nearest = std::numeric_limits<double>::max();
        for (int a = 0; a < 3; ++a) {
            nearest = std::min(nearest, std::abs(local(a) - lo(a)));
            nearest = std::min(nearest, std::abs(hi(a) - local(a)));
        }
        total += nearest;
    }
    return total;
}

std::vector<FilterReport> filter_scenes(const std::vector<SceneBundle>& bundles,
                                        const FilterPolicy& policy) {
    std::vector<FilterReport> reports;
    reports.reserve(bundles.size());

    for (const SceneBundle& bundle : bundles) {
        FilterReport report;
        report.scene_id = bundle.scene_id;
        try {
            const PrincipalFrame frame = compute_principal_frame(bundle.poses);
            report.aspect_ok = aspect_ratio_check(frame, policy);
            report.distribution_class = classify_distribution(bundle, frame, policy);
            report.distance_score = distance_score(bundle, frame);
            report.accepted = report.aspect_ok && report.distribution_class == policy.target_class;
        } catch (const Error& e) {
            report.aspect_ok = false;
            report.accepted = false;
            report.error = e.what();
        }
        reports.push_back(std::move(report));
    }

    std::sort(reports.begin(), reports.end(), [](const FilterReport& a, const FilterReport& b) {
        if (a.accepted != b.accepted) {
            return a.accepted;
        }
        if (a.distance_score != b.distance_score) {
            return a.distance_score < b.distance_score;
        }
        return a.scene_id < b.scene_id;
    });
    return reports;
}

} // namespace dforge
