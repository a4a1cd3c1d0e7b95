#include "dforge/manifest_io.hpp"

#include "dforge/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace dforge {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json pose_to_json(const CameraPose& pose) {
    ordered_json j;
    std::vector<double> rotation(9);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            rotation[static_cast<std::size_t>(3 * r + c)] = pose.rotation(r, c);
        }
    }
    j["rotation"] = rotation;
    j["position"] = {pose.position.x(), pose.position.y(), pose.position.z()};
    j["intrinsics"] = {pose.intrinsics.fx, pose.intrinsics.fy, pose.intrinsics.cx,
                       pose.intrinsics.cy};
    j["image_size"] = {pose.image_size.width, pose.image_size.height};
    return j;
}

CameraPose pose_from_json(const json& j) {
    CameraPose pose;
    const auto rotation = j.at("rotation").get<std::vector<double>>();
    const auto position = j.at("position").get<std::vector<double>>();
    const auto intrinsics = j.at("intrinsics").get<std::vector<double>>();
    const auto image_size = j.at("image_size").get<std::vector<int>>();
    if (rotation.size() != 9 || position.size() != 3 || intrinsics.size() != 4 ||
        image_size.size() != 2) {
        throw ParseError("pose record has wrong field arity");
    }
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            pose.rotation(r, c) = rotation[static_cast<std::size_t>(3 * r + c)];
        }
    }
    pose.position = Eigen::Vector3d(position[0], position[1], position[2]);
    pose.intrinsics = {intrinsics[0], intrinsics[1], intrinsics[2], intrinsics[3]};
    pose.image_size = {image_size[0], image_size[1]};
    pose.validate();
    return pose;
}

ordered_json bundle_to_json(const SceneBundle& bundle) {
    ordered_json j;
    j["scene_id"] = bundle.scene_id;
    j["source"] = bundle.source;
    ordered_json poses = ordered_json::array();
    for (const CameraPose& pose : bundle.poses) {
        poses.push_back(pose_to_json(pose));
    }
    j["poses"] = poses;
    return j;
}

SceneBundle bundle_from_json(const json& j) {
    SceneBundle bundle;
    bundle.scene_id = j.at("scene_id").get<std::string>();
    bundle.source = j.value("source", "");
    for (const json& p : j.at("poses")) {
        bundle.poses.push_back(pose_from_json(p));
    }
    if (bundle.poses.empty()) {
        throw ParseError("scene " + bundle.scene_id + " has no poses");
    }
    return bundle;
}

ManifestReadResult read_pose_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest: " + path);
    }
    ManifestReadResult result;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            result.bundles.push_back(bundle_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": " << e.what();
            result.errors.push_back(msg.str());
        }
    }
    return result;
}

void write_pose_manifest(const std::string& path, const std::vector<SceneBundle>& bundles) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    for (const SceneBundle& bundle : bundles) {
        out << bundle_to_json(bundle).dump() << "\n";
    }
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string token;
    while (in >> token) {
        tokens.push_back(token);
    }
    return tokens;
}

struct ColmapCamera {
    Intrinsics intrinsics;
    ImageSize size;
};

std::map<int, ColmapCamera> read_colmap_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::map<int, ColmapCamera> cameras;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto tokens = split_ws(line);
        if (tokens.size() < 7) {
            throw ParseError("short camera line in " + path);
        }
        const int camera_id = std::stoi(tokens[0]);
        const std::string& model = tokens[1];
        ColmapCamera cam;
        cam.size.width = std::stoi(tokens[2]);
        cam.size.height = std::stoi(tokens[3]);
        if (model == "SIMPLE_PINHOLE" || model == "SIMPLE_RADIAL") {
            cam.intrinsics.fx = std::stod(tokens[4]);
            cam.intrinsics.fy = cam.intrinsics.fx;
            cam.intrinsics.cx = std::stod(tokens[5]);
            cam.intrinsics.cy = std::stod(tokens[6]);
        } else if (model == "PINHOLE") {
            if (tokens.size() < 8) {
                throw ParseError("short PINHOLE line in " + path);
            }
            cam.intrinsics.fx = std::stod(tokens[4]);
            cam.intrinsics.fy = std::stod(tokens[5]);
            cam.intrinsics.cx = std::stod(tokens[6]);
            cam.intrinsics.cy = std::stod(tokens[7]);
        } else {
            throw ParseError("unsupported camera model " + model + " in " + path);
        }
        cameras[camera_id] = cam;
    }
    return cameras;
}

} // namespace

SceneBundle read_colmap_scene(const std::string& dir, const std::string& scene_id) {
    namespace fs = std::filesystem;
    const auto cameras = read_colmap_cameras((fs::path(dir) / "cameras.txt").string());

    const std::string images_path = (fs::path(dir) / "images.txt").string();
    std::ifstream in(images_path);
    if (!in) {
        throw IoError("cannot open " + images_path);
    }

    std::map<int, CameraPose> poses_by_id;
    std::string line;
    bool expect_points_line = false;
    while (std::getline(in, line)) {
        // The 2D point list follows every image line and may be empty.
        if (expect_points_line) {
            expect_points_line = false;
            continue;
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto tokens = split_ws(line);
        if (tokens.size() < 9) {
            throw ParseError("short image line in " + images_path);
        }
        const int image_id = std::stoi(tokens[0]);
        const Eigen::Quaterniond q(std::stod(tokens[1]), std::stod(tokens[2]),
                                   std::stod(tokens[3]), std::stod(tokens[4]));
        const Eigen::Vector3d t(std::stod(tokens[5]), std::stod(tokens[6]), std::stod(tokens[7]));
        const int camera_id = std::stoi(tokens[8]);

        const auto cam = cameras.find(camera_id);
        if (cam == cameras.end()) {
            throw ParseError("image references unknown camera " + tokens[8]);
        }

        // COLMAP stores world-to-camera.
        const Eigen::Matrix3d cam_from_world = q.normalized().toRotationMatrix();
        CameraPose pose;
        pose.rotation = cam_from_world.transpose();
        pose.position = -(cam_from_world.transpose() * t);
        pose.intrinsics = cam->second.intrinsics;
        pose.image_size = cam->second.size;
        pose.validate();
        poses_by_id[image_id] = pose;
        expect_points_line = true;
    }

    SceneBundle bundle;
    bundle.scene_id = scene_id;
    bundle.source = "colmap:" + dir;
    for (const auto& [id, pose] : poses_by_id) {
        bundle.poses.push_back(pose);
    }
    if (bundle.poses.empty()) {
        throw ParseError("no images in " + images_path);
    }
    return bundle;
}

ordered_json report_to_json(const FilterReport& report) {
    ordered_json j;
    j["scene_id"] = report.scene_id;
    j["distribution_class"] = to_string(report.distribution_class);
    j["aspect_ok"] = report.aspect_ok;
    j["distance_score"] = report.distance_score;
    j["accepted"] = report.accepted;
    if (!report.error.empty()) {
        j["error"] = report.error;
    }
    return j;
}

void write_filter_reports(const std::string& path, const std::vector<FilterReport>& reports) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    for (const FilterReport& report : reports) {
        out << report_to_json(report).dump() << "\n";
    }
}

} // namespace dforge
