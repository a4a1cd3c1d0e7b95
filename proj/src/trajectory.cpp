#include "dforge/trajectory.hpp"

#include "dforge/errors.hpp"
#include "dforge/hash.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dforge {

namespace {

constexpr double kMotionEps = 1e-9;

struct PrimitiveName {
    PrimitiveKind kind;
    const char* name;
};

constexpr PrimitiveName kPrimitiveNames[kPrimitiveKindCount] = {
    {PrimitiveKind::kTransXPos, "trans_x_pos"},
    {PrimitiveKind::kTransXNeg, "trans_x_neg"},
    {PrimitiveKind::kTransYPos, "trans_y_pos"},
    {PrimitiveKind::kTransYNeg, "trans_y_neg"},
    {PrimitiveKind::kTransZPos, "trans_z_pos"},
    {PrimitiveKind::kTransZNeg, "trans_z_neg"},
    {PrimitiveKind::kRotYawPos, "rot_yaw_pos"},
    {PrimitiveKind::kRotYawNeg, "rot_yaw_neg"},
    {PrimitiveKind::kRotPitchPos, "rot_pitch_pos"},
    {PrimitiveKind::kRotPitchNeg, "rot_pitch_neg"},
    {PrimitiveKind::kRotRollPos, "rot_roll_pos"},
    {PrimitiveKind::kRotRollNeg, "rot_roll_neg"},
    {PrimitiveKind::kOrbit, "orbit"},
};

bool is_translation(PrimitiveKind kind) {
    return static_cast<int>(kind) <= static_cast<int>(PrimitiveKind::kTransZNeg);
}

// Local axis index and sign of a non-orbit primitive. Rotations: yaw about
// the camera y axis, pitch about x, roll about z.
void primitive_axis(PrimitiveKind kind, int& axis, double& sign) {
    switch (kind) {
    case PrimitiveKind::kTransXPos: axis = 0; sign = 1; return;
    case PrimitiveKind::kTransXNeg: axis = 0; sign = -1; return;
    case PrimitiveKind::kTransYPos: axis = 1; sign = 1; return;
    case PrimitiveKind::kTransYNeg: axis = 1; sign = -1; return;
    case PrimitiveKind::kTransZPos: axis = 2; sign = 1; return;
    case PrimitiveKind::kTransZNeg: axis = 2; sign = -1; return;
    case PrimitiveKind::kRotYawPos: axis = 1; sign = 1; return;
    case PrimitiveKind::kRotYawNeg: axis = 1; sign = -1; return;
    case PrimitiveKind::kRotPitchPos: axis = 0; sign = 1; return;
    case PrimitiveKind::kRotPitchNeg: axis = 0; sign = -1; return;
    case PrimitiveKind::kRotRollPos: axis = 2; sign = 1; return;
    case PrimitiveKind::kRotRollNeg: axis = 2; sign = -1; return;
    case PrimitiveKind::kOrbit: break;
    }
    throw InvalidSpec("orbit primitive has no single axis");
}

Eigen::Matrix3d reorthonormalize(const Eigen::Matrix3d& m) {
    return Eigen::Quaterniond(m).normalized().toRotationMatrix();
}

} // namespace

const char* to_string(PrimitiveKind kind) {
    return kPrimitiveNames[static_cast<int>(kind)].name;
}

PrimitiveKind primitive_kind_from_string(const std::string& token) {
    for (const auto& entry : kPrimitiveNames) {
        if (token == entry.name) {
            return entry.kind;
        }
    }
    throw ParseError("unknown motion primitive: " + token);
}

DirectorDescriptor make_director_descriptor(PrimitiveKind kind, bool early_stopping) {
    DirectorDescriptor d;
    d.kind = kind;
    d.early_stopping = early_stopping;
    return d;
}

void TrajectorySpec::validate() const {
    if (n_frames < 2) {
        throw InvalidSpec("a trajectory needs at least 2 frames");
    }
    if (primitives.empty()) {
        throw InvalidSpec("a trajectory needs at least one primitive");
    }
    bool has_orbit = false;
    for (const MotionPrimitive& p : primitives) {
        if (!(p.magnitude > 0.0)) {
            throw InvalidSpec("primitive magnitudes must be positive");
        }
        has_orbit = has_orbit || p.kind == PrimitiveKind::kOrbit;
    }
    if (has_orbit != (orbit_center.has_value() && orbit_radius.has_value())) {
        throw InvalidSpec("orbit center/radius must be present iff an orbit primitive is used");
    }
    if (has_orbit && !(*orbit_radius > 0.0)) {
        throw InvalidSpec("orbit radius must be positive");
    }
    if (static_cast<std::size_t>(n_frames - 1) < primitives.size()) {
        throw InvalidSpec("not enough frames to give every primitive a step");
    }
    start.validate();
}

std::string trajectory_spec_hash(const TrajectorySpec& spec) {
    Fnv1a64 h;
    h.update("traj/v1");
    h.update_pod(spec.n_frames);
    for (const MotionPrimitive& p : spec.primitives) {
        h.update_pod(static_cast<int>(p.kind));
        h.update_pod(p.magnitude);
    }
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            h.update_pod(spec.start.rotation(r, c));
        }
    }
    for (int i = 0; i < 3; ++i) {
        h.update_pod(spec.start.position(i));
    }
    h.update_pod(spec.start.intrinsics.fx);
    h.update_pod(spec.start.intrinsics.fy);
    h.update_pod(spec.start.intrinsics.cx);
    h.update_pod(spec.start.intrinsics.cy);
    h.update_pod(spec.start.image_size.width);
    h.update_pod(spec.start.image_size.height);
    h.update_pod(spec.orbit_center.has_value());
    if (spec.orbit_center) {
        for (int i = 0; i < 3; ++i) {
            h.update_pod((*spec.orbit_center)(i));
        }
    }
    h.update_pod(spec.orbit_radius.has_value());
    if (spec.orbit_radius) {
        h.update_pod(*spec.orbit_radius);
    }
    return h.hex();
}

Trajectory synthesize_trajectory(const TrajectorySpec& spec) {
    spec.validate();

    const int total_steps = spec.n_frames - 1;
    const int n_prims = static_cast<int>(spec.primitives.size());
    const int base = total_steps / n_prims;
    const int extra = total_steps % n_prims;

    Trajectory traj;
    traj.poses.reserve(static_cast<std::size_t>(spec.n_frames));
    traj.poses.push_back(spec.start);

    CameraPose current = spec.start;
    for (int p = 0; p < n_prims; ++p) {
        const MotionPrimitive& prim = spec.primitives[static_cast<std::size_t>(p)];
        const int steps = base + (p < extra ? 1 : 0);
        const CameraPose seg_start = current;

        if (prim.kind == PrimitiveKind::kOrbit) {
            const Eigen::Vector3d center = *spec.orbit_center;
            const double radius = *spec.orbit_radius;
            const Eigen::Vector3d v = seg_start.position - center;
            const double planar = std::hypot(v.x(), v.y());
            const double tol = 1e-6 * std::max(1.0, radius);
            if (std::abs(planar - radius) > tol || std::abs(v.z()) > tol) {
                throw InvalidSpec("orbit segment must start on the orbit circle");
            }
            const double az0 = std::atan2(v.y(), v.x());
            for (int s = 1; s <= steps; ++s) {
                const double az = az0 + prim.magnitude * static_cast<double>(s) / steps;
                const Eigen::Vector3d pos =
                    center + radius * Eigen::Vector3d(std::cos(az), std::sin(az), 0.0);
                CameraPose pose = look_at_pose(pos, center);
                pose.intrinsics = spec.start.intrinsics;
                pose.image_size = spec.start.image_size;
                traj.poses.push_back(pose);
                current = pose;
            }
        } else if (is_translation(prim.kind)) {
            int axis;
            double sign;
            primitive_axis(prim.kind, axis, sign);
            const Eigen::Vector3d dir = sign * seg_start.rotation.col(axis);
            for (int s = 1; s <= steps; ++s) {
                CameraPose pose = seg_start;
                pose.position =
                    seg_start.position + dir * (prim.magnitude * static_cast<double>(s) / steps);
                traj.poses.push_back(pose);
                current = pose;
            }
        } else {
            int axis;
            double sign;
            primitive_axis(prim.kind, axis, sign);
            for (int s = 1; s <= steps; ++s) {
                const double angle = sign * prim.magnitude * static_cast<double>(s) / steps;
                CameraPose pose = seg_start;
                pose.rotation = reorthonormalize(
                    seg_start.rotation *
                    Eigen::AngleAxisd(angle, Eigen::Vector3d::Unit(axis)).toRotationMatrix());
                traj.poses.push_back(pose);
                current = pose;
            }
        }
    }

    traj.spec_hash = trajectory_spec_hash(spec);
    std::ostringstream text;
    for (std::size_t i = 0; i < spec.primitives.size(); ++i) {
        if (i) {
            text << ",";
        }
        text << to_string(spec.primitives[i].kind) << ":" << spec.primitives[i].magnitude;
    }
    traj.spec_text = text.str();
    return traj;
}

Trajectory synthesize_orbit(const Eigen::Vector3d& center, double radius, double sweep,
                            double start_azimuth, int n_frames) {
    if (!(radius > 0.0)) {
        throw DegenerateOrbit("orbit radius must be positive");
    }
    if (n_frames < 2) {
        throw InvalidSpec("an orbit needs at least 2 frames");
    }

    Trajectory traj;
    traj.poses.reserve(static_cast<std::size_t>(n_frames));
    for (int k = 0; k < n_frames; ++k) {
        const double az = start_azimuth + sweep * static_cast<double>(k) / (n_frames - 1);
        const Eigen::Vector3d pos =
            center + radius * Eigen::Vector3d(std::cos(az), std::sin(az), 0.0);
        traj.poses.push_back(look_at_pose(pos, center));
    }

    Fnv1a64 h;
    h.update("orbit/v1");
    for (int i = 0; i < 3; ++i) {
        h.update_pod(center(i));
    }
    h.update_pod(radius);
    h.update_pod(sweep);
    h.update_pod(start_azimuth);
    h.update_pod(n_frames);
    traj.spec_hash = h.hex();

    std::ostringstream text;
    text << "orbit:" << sweep << ",frames=" << n_frames;
    traj.spec_text = text.str();
    return traj;
}

std::array<double, kPrimitiveKindCount> director_scores(const CameraPose& a, const CameraPose& b) {
    std::array<double, kPrimitiveKindCount> scores{};

    const Eigen::Vector3d dp_world = b.position - a.position;
    const Eigen::Vector3d dp_local = a.rotation.transpose() * dp_world;
    const double dist = dp_world.norm();

    const Eigen::Matrix3d rel = a.rotation.transpose() * b.rotation;
    const Eigen::AngleAxisd aa(rel);
    const Eigen::Vector3d rotvec = aa.angle() * aa.axis();

    if (dist > kMotionEps) {
        for (int axis = 0; axis < 3; ++axis) {
            const double c = dp_local(axis) / dist;
            scores[static_cast<std::size_t>(2 * axis)] = std::max(c, 0.0);
            scores[static_cast<std::size_t>(2 * axis + 1)] = std::max(-c, 0.0);
        }
    }

    // Rotation slots come in (yaw, pitch, roll) = local (y, x, z) order.
    const double yaw = rotvec.y();
    const double pitch = rotvec.x();
    const double roll = rotvec.z();
    scores[6] = std::max(yaw, 0.0) / M_PI;
    scores[7] = std::max(-yaw, 0.0) / M_PI;
    scores[8] = std::max(pitch, 0.0) / M_PI;
    scores[9] = std::max(-pitch, 0.0) / M_PI;
    scores[10] = std::max(roll, 0.0) / M_PI;
    scores[11] = std::max(-roll, 0.0) / M_PI;

    // Orbit evidence: both optical axes converging on a common point in
    // front of the cameras, roughly equidistant from it.
    double orbit = 0.0;
    if (dist > kMotionEps) {
        const Eigen::Vector3d da = a.optical_axis();
        const Eigen::Vector3d db = b.optical_axis();
        const double dot = da.dot(db);
        const double denom = 1.0 - dot * dot;
        if (denom > 1e-12) {
            const Eigen::Vector3d w = b.position - a.position;
            const double ta = (w.dot(da) - w.dot(db) * dot) / denom;
            const double tb = (w.dot(da) * dot - w.dot(db)) / denom;
            if (ta > kMotionEps && tb > kMotionEps) {
                const Eigen::Vector3d pa = a.position + ta * da;
                const Eigen::Vector3d pb = b.position + tb * db;
                const Eigen::Vector3d x = 0.5 * (pa + pb);
                const double ra = (x - a.position).norm();
                const double rb = (x - b.position).norm();
                const double mean_r = 0.5 * (ra + rb);
                if (mean_r > kMotionEps) {
                    const double residual =
                        (pa - pb).norm() / mean_r + std::abs(ra - rb) / std::max(ra, rb);
                    orbit = std::max(0.0, 1.0 - residual);
                }
            }
        }
    }
    scores[12] = orbit;
    return scores;
}

MotionPrimitive select_director(const CameraPose& a, const CameraPose& b) {
    const Eigen::Vector3d dp_world = b.position - a.position;
    const Eigen::Vector3d dp_local = a.rotation.transpose() * dp_world;
    const Eigen::Matrix3d rel = a.rotation.transpose() * b.rotation;
    const Eigen::AngleAxisd aa(rel);
    if (dp_world.norm() < kMotionEps && std::abs(aa.angle()) < kMotionEps) {
        throw IdenticalPoses("poses are identical to within 1e-9");
    }

    const auto scores = director_scores(a, b);
    int best = 0;
    for (int i = 1; i < kPrimitiveKindCount; ++i) {
        if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }

    MotionPrimitive result;
    result.kind = static_cast<PrimitiveKind>(best);
    const Eigen::Vector3d rotvec = aa.angle() * aa.axis();
    switch (result.kind) {
    case PrimitiveKind::kTransXPos:
    case PrimitiveKind::kTransXNeg:
        result.magnitude = std::abs(dp_local.x());
        break;
    case PrimitiveKind::kTransYPos:
    case PrimitiveKind::kTransYNeg:
        result.magnitude = std::abs(dp_local.y());
        break;
    case PrimitiveKind::kTransZPos:
    case PrimitiveKind::kTransZNeg:
        result.magnitude = std::abs(dp_local.z());
        break;
    case PrimitiveKind::kRotYawPos:
    case PrimitiveKind::kRotYawNeg:
        result.magnitude = std::abs(rotvec.y());
        break;
    case PrimitiveKind::kRotPitchPos:
    case PrimitiveKind::kRotPitchNeg:
        result.magnitude = std::abs(rotvec.x());
        break;
    case PrimitiveKind::kRotRollPos:
    case PrimitiveKind::kRotRollNeg:
        result.magnitude = std::abs(rotvec.z());
        break;
    case PrimitiveKind::kOrbit: {
        // Sweep angle about the converged look-at point.
        const Eigen::Vector3d da = a.optical_axis();
        const Eigen::Vector3d db = b.optical_axis();
        const double dot = da.dot(db);
        const double denom = 1.0 - dot * dot;
        const Eigen::Vector3d w = b.position - a.position;
        const double ta = (w.dot(da) - w.dot(db) * dot) / denom;
        const double tb = (w.dot(da) * dot - w.dot(db)) / denom;
        const Eigen::Vector3d x = 0.5 * (a.position + ta * da + b.position + tb * db);
        const Eigen::Vector3d va = (a.position - x).normalized();
        const Eigen::Vector3d vb = (b.position - x).normalized();
        result.magnitude = std::acos(std::clamp(va.dot(vb), -1.0, 1.0));
        break;
    }
    }
    if (result.magnitude < kMotionEps) {
        result.magnitude = kMotionEps;
    }
    return result;
}

FeasibilityReport check_feasible(const Trajectory& traj, const OccupancyGrid& occupancy,
                                 double margin) {
    FeasibilityReport report;
    report.min_clearance = kInfiniteClearance;

    const std::vector<Eigen::Vector3d> centers = occupancy.occupied_centers();

    const auto clearance_at = [&](const Eigen::Vector3d& p) {
        double best_sq = std::numeric_limits<double>::max();
        for (const Eigen::Vector3d& c : centers) {
            best_sq = std::min(best_sq, (p - c).squaredNorm());
        }
        return centers.empty() ? kInfiniteClearance : std::sqrt(best_sq);
    };

    const auto visit = [&](const Eigen::Vector3d& p, int frame) {
        const double clearance = clearance_at(p);
        report.min_clearance = std::min(report.min_clearance, clearance);
        const bool blocked = occupancy.is_occupied_at(p) || clearance < margin;
        if (blocked && !report.first_violation_frame) {
            report.first_violation_frame = frame;
            report.feasible = false;
        }
    };

    const double step = occupancy.voxel_size > 0.0 ? occupancy.voxel_size : 1.0;
    for (std::size_t k = 0; k < traj.poses.size(); ++k) {
        visit(traj.poses[k].position, static_cast<int>(k));
        if (k + 1 < traj.poses.size()) {
            const Eigen::Vector3d a = traj.poses[k].position;
            const Eigen::Vector3d b = traj.poses[k + 1].position;
            const double len = (b - a).norm();
            const int n_sub = std::max(1, static_cast<int>(std::ceil(len / step)));
            for (int s = 1; s < n_sub; ++s) {
                visit(a + (b - a) * (static_cast<double>(s) / n_sub), static_cast<int>(k));
            }
        }
    }
    return report;
}

Trajectory resample_trajectory(const Trajectory& traj, int n) {
    if (n < 2 || traj.poses.size() < 2) {
        throw InvalidSpec("resampling needs at least 2 input and output poses");
    }

    const std::size_t m = traj.poses.size();
    std::vector<double> cumulative(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
        cumulative[i] = cumulative[i - 1] + (traj.poses[i].position - traj.poses[i - 1].position).norm();
    }
    const double total = cumulative.back();

    const auto interpolate = [&](std::size_t k, double t) {
        const CameraPose& p0 = traj.poses[k];
        const CameraPose& p1 = traj.poses[k + 1];
        CameraPose out = p0;
        out.position = p0.position + t * (p1.position - p0.position);
        Eigen::Quaterniond q0(p0.rotation);
        Eigen::Quaterniond q1(p1.rotation);
        out.rotation = q0.slerp(t, q1).normalized().toRotationMatrix();
        return out;
    };

    Trajectory result;
    result.poses.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        if (j == 0) {
            result.poses.push_back(traj.poses.front());
            continue;
        }
        if (j == n - 1) {
            result.poses.push_back(traj.poses.back());
            continue;
        }

        if (total < 1e-15) {
            const double x = static_cast<double>(j) * static_cast<double>(m - 1) / (n - 1);
            const auto k = std::min(static_cast<std::size_t>(x), m - 2);
            result.poses.push_back(interpolate(k, x - static_cast<double>(k)));
            continue;
        }

        const double target = total * static_cast<double>(j) / (n - 1);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        std::size_t k = it == cumulative.begin()
                            ? 0
                            : static_cast<std::size_t>(it - cumulative.begin()) - 1;
        k = std::min(k, m - 2);
        // Skip zero-length segments so the interpolation fraction is defined.
        while (k + 2 < m && cumulative[k + 1] - cumulative[k] < 1e-30) {
            ++k;
        }
        const double seg = cumulative[k + 1] - cumulative[k];
        const double t = seg > 1e-30 ? (target - cumulative[k]) / seg : 0.0;
        result.poses.push_back(interpolate(k, std::clamp(t, 0.0, 1.0)));
    }

    Fnv1a64 h;
    h.update("resample/v1");
    h.update(traj.spec_hash);
    h.update_pod(n);
    result.spec_hash = h.hex();
    result.spec_text = traj.spec_text + ",resampled=" + std::to_string(n);
    return result;
}

std::vector<MotionPrimitive> parse_primitive_list(const std::string& text, int* n_frames_out) {
    std::vector<MotionPrimitive> primitives;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (token.empty()) {
            continue;
        }
        const auto eq = token.find('=');
        if (eq != std::string::npos && token.substr(0, eq) == "frames") {
            if (n_frames_out) {
                try {
                    *n_frames_out = std::stoi(token.substr(eq + 1));
                } catch (const std::exception&) {
                    throw ParseError("bad frame count in primitive list: " + token);
                }
            }
            continue;
        }
        const auto colon = token.find(':');
        if (colon == std::string::npos) {
            throw ParseError("primitive token needs kind:magnitude, got: " + token);
        }
        MotionPrimitive prim;
        prim.kind = primitive_kind_from_string(token.substr(0, colon));
        try {
            prim.magnitude = std::stod(token.substr(colon + 1));
        } catch (const std::exception&) {
            throw ParseError("bad magnitude in primitive token: " + token);
        }
        primitives.push_back(prim);
    }
    return primitives;
}

} // namespace dforge
