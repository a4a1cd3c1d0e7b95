#pragma once

#include "dforge/camera.hpp"
#include "dforge/geometry.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace dforge {

// Pose JSON layout: rotation as 9 row-major floats, position 3 floats,
// intrinsics [fx, fy, cx, cy], image_size [width, height].
nlohmann::ordered_json pose_to_json(const CameraPose& pose);
CameraPose pose_from_json(const nlohmann::json& j);

nlohmann::ordered_json bundle_to_json(const SceneBundle& bundle);
SceneBundle bundle_from_json(const nlohmann::json& j);

struct ManifestReadResult {
    std::vector<SceneBundle> bundles;
    std::vector<std::string> errors; // one entry per skipped line
};

// Line-delimited JSON manifest, one SceneBundle per line. Bad lines are
// recorded, never fatal.
ManifestReadResult read_pose_manifest(const std::string& path);
void write_pose_manifest(const std::string& path, const std::vector<SceneBundle>& bundles);

// COLMAP text layout: cameras.txt (SIMPLE_PINHOLE / PINHOLE /
// SIMPLE_RADIAL, distortion ignored) and images.txt (WXYZ quaternion +
// translation, world-to-camera), converted to world-from-camera poses and
// ordered by image id.
SceneBundle read_colmap_scene(const std::string& dir, const std::string& scene_id);

nlohmann::ordered_json report_to_json(const FilterReport& report);
void write_filter_reports(const std::string& path, const std::vector<FilterReport>& reports);

} // namespace dforge
