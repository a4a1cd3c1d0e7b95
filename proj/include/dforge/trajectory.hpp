#pragma once

#include "dforge/camera.hpp"
#include "dforge/fusion.hpp"

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace dforge {

// Order is the tie-break order for director selection.
enum class PrimitiveKind : int {
    kTransXPos = 0,
    kTransXNeg,
    kTransYPos,
    kTransYNeg,
    kTransZPos,
    kTransZNeg,
    kRotYawPos,
    kRotYawNeg,
    kRotPitchPos,
    kRotPitchNeg,
    kRotRollPos,
    kRotRollNeg,
    kOrbit,
};

constexpr int kPrimitiveKindCount = 13;

const char* to_string(PrimitiveKind kind);
PrimitiveKind primitive_kind_from_string(const std::string& token);

// One signed DoF camera move, or an orbital sweep. Magnitude is meters for
// translations and radians for rotations and orbit sweeps.
struct MotionPrimitive {
    PrimitiveKind kind = PrimitiveKind::kTransXPos;
    double magnitude = 0.0;
};

// Training-time metadata describing the adapter attached to a primitive.
// Nothing here is executed; it travels with plans for bookkeeping.
struct DirectorDescriptor {
    PrimitiveKind kind = PrimitiveKind::kTransXPos;
    int lora_rank = 256;
    int training_steps = 3000;
    int early_stop_steps = 1000;
    bool early_stopping = false;
};

DirectorDescriptor make_director_descriptor(PrimitiveKind kind, bool early_stopping = false);

struct TrajectorySpec {
    std::vector<MotionPrimitive> primitives;
    int n_frames = 0;
    CameraPose start;
    std::optional<Eigen::Vector3d> orbit_center;
    std::optional<double> orbit_radius;

    // Throws InvalidSpec: n_frames >= 2, at least one primitive, positive
    // magnitudes, orbit fields present iff an orbit primitive is present,
    // and enough frames to give every primitive at least one step.
    void validate() const;
};

struct Trajectory {
    std::vector<CameraPose> poses;
    std::string spec_hash;
    std::string spec_text; // human-readable provenance, stored in the file header
};

struct FeasibilityReport {
    bool feasible = true;
    std::optional<int> first_violation_frame;
    double min_clearance = 0.0;
};

// Clearance reported when the grid holds no occupied voxel at all.
constexpr double kInfiniteClearance = std::numeric_limits<double>::max();

// Deterministic hash of a trajectory spec; bit-identical specs map to the
// same hash on every platform.
std::string trajectory_spec_hash(const TrajectorySpec& spec);

// Apply the primitives sequentially. Steps (n_frames - 1 of them) are split
// evenly across primitives, earliest primitives taking the remainder; within
// a primitive translation is linear and rotation has constant angular
// velocity. Orbit segments require the incoming position to lie on the
// specified circle (horizontal, through the orbit center).
Trajectory synthesize_trajectory(const TrajectorySpec& spec);

// Circular look-at path about `center` in the horizontal plane through it.
// Azimuths step uniformly from start_azimuth across `sweep`; every pose's
// optical axis passes through the center.
Trajectory synthesize_orbit(const Eigen::Vector3d& center, double radius, double sweep,
                            double start_azimuth, int n_frames);

// Normalized evidence for each primitive given a pose pair: translation
// components of (b - a) in a's frame divided by |b - a|, rotation components
// of the relative rotation divided by pi, and an orbit score of
// 1 - (ray miss + equidistance residual) when both optical axes converge in
// front of the cameras.
std::array<double, kPrimitiveKindCount> director_scores(const CameraPose& a, const CameraPose& b);

// Largest-score primitive for the pair, ties broken by enum order; the
// returned magnitude is the detected component (meters, radians, or orbit
// sweep). Throws IdenticalPoses when the relative motion is below 1e-9.
MotionPrimitive select_director(const CameraPose& a, const CameraPose& b);

// Every pose position plus samples at voxel-size intervals along each
// segment must be in free space with clearance >= margin. Clearance is the
// distance to the nearest occupied voxel center; positions outside the grid
// are free.
FeasibilityReport check_feasible(const Trajectory& traj, const OccupancyGrid& occupancy,
                                 double margin);

// Arc-length-uniform resampling of positions with spherical interpolation
// of rotations; endpoints are preserved exactly. Falls back to index-space
// interpolation when the path has zero length.
Trajectory resample_trajectory(const Trajectory& traj, int n);

// Comma-separated primitive tokens, e.g. "trans_x_pos:1.0,orbit:3.14".
// A "frames=N" token sets the frame count.
std::vector<MotionPrimitive> parse_primitive_list(const std::string& text, int* n_frames_out);

} // namespace dforge
