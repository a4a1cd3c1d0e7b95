#include "dforge/config.hpp"
#include "dforge/constants.hpp"
#include "dforge/errors.hpp"
#include "dforge/formats.hpp"
#include "dforge/geometry.hpp"
#include "dforge/hash.hpp"
#include "dforge/image_io.hpp"
#include "dforge/manifest_io.hpp"
#include "dforge/mock_denoisers.hpp"
#include "dforge/sampler.hpp"
#include "dforge/trajectory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitInfeasible = 3;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string format = "json";
};

dforge::PipelineConfig load_config(const GlobalOptions& opts) {
    dforge::PipelineConfig config;
    if (!opts.config_path.empty()) {
        config = dforge::PipelineConfig::from_file(opts.config_path);
    }
    if (opts.seed) {
        config.rng_seed = *opts.seed;
    }
    return config;
}

std::string out_path(const GlobalOptions& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    return (fs::path(opts.out_dir) / name).string();
}

// Sorted regular files under dir with one of the given extensions.
std::vector<std::string> list_files(const std::string& dir,
                                    std::initializer_list<const char*> exts) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) {
        throw dforge::IoError("not a directory: " + dir);
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const std::string ext = entry.path().extension().string();
        for (const char* want : exts) {
            if (ext == want) {
                files.push_back(entry.path().string());
                break;
            }
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

class ManifestRecorder {
public:
    ManifestRecorder(std::string command, std::vector<std::string> argv,
                     const dforge::PipelineConfig& config, const GlobalOptions& opts)
        : opts_(opts), start_(std::chrono::steady_clock::now()) {
        manifest_.command = std::move(command);
        manifest_.argv = std::move(argv);
        manifest_.config_hash = config.config_hash();
    }

    void input(const std::string& path) {
        if (fs::is_regular_file(path)) {
            manifest_.input_digests[path] = dforge::file_digest_hex(path);
        }
    }
    void output(const std::string& path) { outputs_.push_back(path); }

    void finalize() {
        for (const std::string& path : outputs_) {
            manifest_.output_digests[path] = dforge::file_digest_hex(path);
        }
        manifest_.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
                .count();
        manifest_.save(out_path(opts_, "run_manifest.json"));
    }

private:
    dforge::RunManifest manifest_;
    std::vector<std::string> outputs_;
    const GlobalOptions& opts_;
    std::chrono::steady_clock::time_point start_;
};

ordered_json frame_to_json(const dforge::PrincipalFrame& frame) {
    ordered_json j;
    j["center"] = {frame.center.x(), frame.center.y(), frame.center.z()};
    std::vector<double> axes(9);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            axes[static_cast<std::size_t>(3 * r + c)] = frame.axes(r, c);
        }
    }
    j["axes"] = axes;
    j["extents"] = {frame.extents.x(), frame.extents.y(), frame.extents.z()};
    return j;
}

std::vector<dforge::SceneBundle> load_scenes(const std::string& input, bool colmap,
                                             const std::string& scene_id,
                                             std::vector<std::string>& errors) {
    if (colmap) {
        return {dforge::read_colmap_scene(
            input, scene_id.empty() ? fs::path(input).filename().string() : scene_id)};
    }
    dforge::ManifestReadResult result = dforge::read_pose_manifest(input);
    errors = std::move(result.errors);
    return std::move(result.bundles);
}

int cmd_analyze(const GlobalOptions& opts, const std::vector<std::string>& argv,
                const std::string& input, bool colmap, const std::string& scene_id) {
    const dforge::PipelineConfig config = load_config(opts);
    ManifestRecorder recorder("analyze", argv, config, opts);
    if (!colmap) {
        recorder.input(input);
    }

    std::vector<std::string> errors;
    const auto bundles = load_scenes(input, colmap, scene_id, errors);

    const std::string report_path = out_path(opts, "analyze_report.jsonl");
    std::ofstream out(report_path);
    if (!out) {
        throw dforge::IoError("cannot open " + report_path);
    }

    int scene_failures = 0;
    for (const dforge::SceneBundle& bundle : bundles) {
        try {
            const dforge::PrincipalFrame frame = dforge::compute_principal_frame(bundle.poses);
            ordered_json j;
            j["scene_id"] = bundle.scene_id;
            j["n_cameras"] = bundle.poses.size();
            j["frame"] = frame_to_json(frame);
            try {
                j["distribution_class"] =
                    dforge::to_string(dforge::classify_distribution(bundle, frame, config.filter));
            } catch (const dforge::Error& e) {
                j["distribution_class"] = nullptr;
                j["error"] = e.what();
                ++scene_failures;
            }
            out << j.dump() << "\n";
        } catch (const dforge::Error& e) {
            ordered_json j;
            j["scene_id"] = bundle.scene_id;
            j["error"] = e.what();
            out << j.dump() << "\n";
            ++scene_failures;
        }
    }
    out.close();

    recorder.output(report_path);
    recorder.finalize();

    for (const std::string& err : errors) {
        std::cerr << "skipped: " << err << "\n";
    }
    if (opts.format == "text") {
        std::cout << bundles.size() << " scenes analyzed, " << errors.size() << " lines skipped, "
                  << scene_failures << " scene failures\n";
    }
    return errors.empty() && scene_failures == 0 ? kExitOk : kExitPartial;
}

int cmd_filter(const GlobalOptions& opts, const std::vector<std::string>& argv,
               const std::string& input, bool colmap, const std::string& scene_id) {
    const dforge::PipelineConfig config = load_config(opts);
    ManifestRecorder recorder("filter", argv, config, opts);
    if (!colmap) {
        recorder.input(input);
    }

    std::vector<std::string> errors;
    const auto bundles = load_scenes(input, colmap, scene_id, errors);
    const auto reports = dforge::filter_scenes(bundles, config.filter);

    const std::string report_path = out_path(opts, "filter_report.jsonl");
    dforge::write_filter_reports(report_path, reports);
    recorder.output(report_path);
    recorder.finalize();

    for (const std::string& err : errors) {
        std::cerr << "skipped: " << err << "\n";
    }
    if (opts.format == "text") {
        const auto accepted = std::count_if(reports.begin(), reports.end(),
                                            [](const auto& r) { return r.accepted; });
        std::cout << accepted << " of " << reports.size() << " scenes accepted\n";
    }
    return errors.empty() ? kExitOk : kExitPartial;
}

dforge::CameraPose load_pose_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw dforge::IoError("cannot open pose file: " + path);
    }
    json j;
    in >> j;
    return dforge::pose_from_json(j);
}

int cmd_plan(const GlobalOptions& opts, const std::vector<std::string>& argv,
             const std::string& spec_text, const std::string& start_path,
             const std::string& occupancy_path, int frames_flag,
             const std::vector<double>& orbit_center_flag, double orbit_radius_flag,
             const std::string& resample_from, int resample_n) {
    const dforge::PipelineConfig config = load_config(opts);
    ManifestRecorder recorder("plan", argv, config, opts);

    dforge::Trajectory traj;
    if (!resample_from.empty()) {
        recorder.input(resample_from);
        traj = dforge::resample_trajectory(dforge::read_trajectory_file(resample_from), resample_n);
    } else {
        if (spec_text.empty()) {
            throw dforge::InvalidSpec("plan needs a primitive spec or --resample-from");
        }
        dforge::TrajectorySpec spec;
        spec.n_frames = frames_flag;
        spec.primitives = dforge::parse_primitive_list(spec_text, &spec.n_frames);
        spec.start = dforge::CameraPose{};
        if (!start_path.empty()) {
            recorder.input(start_path);
            spec.start = load_pose_file(start_path);
        }

        const bool wants_orbit =
            std::any_of(spec.primitives.begin(), spec.primitives.end(), [](const auto& p) {
                return p.kind == dforge::PrimitiveKind::kOrbit;
            });
        if (wants_orbit) {
            const double radius = orbit_radius_flag > 0 ? orbit_radius_flag : 1.0;
            if (orbit_center_flag.size() == 3) {
                spec.orbit_center = Eigen::Vector3d(orbit_center_flag[0], orbit_center_flag[1],
                                                    orbit_center_flag[2]);
            } else {
                // Default: orbit about the point `radius` ahead of the
                // camera in the horizontal plane.
                Eigen::Vector3d heading = spec.start.optical_axis();
                heading.z() = 0.0;
                if (heading.norm() < 1e-9) {
                    heading = Eigen::Vector3d(1, 0, 0);
                }
                heading.normalize();
                spec.orbit_center = spec.start.position + radius * heading;
            }
            spec.orbit_radius = radius;
        }
        traj = dforge::synthesize_trajectory(spec);
    }

    const std::string traj_path = out_path(opts, "trajectory.jsonl");
    dforge::write_trajectory_file(traj_path, traj);
    recorder.output(traj_path);

    int exit_code = kExitOk;
    if (!occupancy_path.empty()) {
        recorder.input(occupancy_path);
        const dforge::OccupancyGrid grid = dforge::read_occupancy_file(occupancy_path);
        const dforge::FeasibilityReport report =
            dforge::check_feasible(traj, grid, config.plan.margin);

        ordered_json j;
        j["feasible"] = report.feasible;
        if (report.first_violation_frame) {
            j["first_violation_frame"] = *report.first_violation_frame;
        } else {
            j["first_violation_frame"] = nullptr;
        }
        j["min_clearance"] = report.min_clearance;
        const std::string feas_path = out_path(opts, "feasibility.json");
        std::ofstream out(feas_path);
        out << j.dump(2) << "\n";
        out.close();
        recorder.output(feas_path);

        if (!report.feasible) {
            std::cerr << "infeasible at frame " << *report.first_violation_frame << "\n";
            exit_code = kExitInfeasible;
        }
    }

    recorder.finalize();
    if (opts.format == "text") {
        std::cout << traj.poses.size() << " poses, spec_hash " << traj.spec_hash << "\n";
    }
    return exit_code;
}

int cmd_fuse(const GlobalOptions& opts, const std::vector<std::string>& argv,
             const std::string& depth_dir) {
    const dforge::PipelineConfig config = load_config(opts);
    ManifestRecorder recorder("fuse", argv, config, opts);

    const auto data_files = list_files(depth_dir, {".png", ".f32"});
    std::vector<dforge::DepthFrame> frames;
    for (const std::string& path : data_files) {
        const std::string sidecar =
            (fs::path(path).parent_path() / (fs::path(path).stem().string() + ".json")).string();
        if (!fs::is_regular_file(sidecar)) {
            continue;
        }
        recorder.input(path);
        recorder.input(sidecar);
        frames.push_back(dforge::read_depth_frame(path, sidecar));
    }

    bool any_valid = false;
    for (const dforge::DepthFrame& frame : frames) {
        for (float d : frame.depth) {
            if (d > 0) {
                any_valid = true;
                break;
            }
        }
    }
    if (!any_valid) {
        throw dforge::EmptyVolume("no valid depth samples in " + depth_dir);
    }

    dforge::TsdfVolume volume(
        Eigen::Vector3d(config.tsdf.origin_x, config.tsdf.origin_y, config.tsdf.origin_z),
        config.tsdf.voxel_size,
        Eigen::Vector3i(config.tsdf.grid_dim, config.tsdf.grid_dim, config.tsdf.grid_dim),
        config.tsdf.truncation);
    volume.max_weight = config.tsdf.max_weight;
    for (const dforge::DepthFrame& frame : frames) {
        dforge::integrate_frame(volume, frame);
    }

    const std::string volume_path = out_path(opts, "volume.tsdf");
    dforge::write_volume_file(volume_path, volume);
    recorder.output(volume_path);

    const dforge::TriangleMesh mesh = dforge::extract_mesh(volume);
    const std::string mesh_path = out_path(opts, "mesh.ply");
    dforge::write_ply_ascii(mesh_path, mesh);
    recorder.output(mesh_path);

    const dforge::OccupancyGrid occupancy =
        dforge::to_occupancy(volume, config.tsdf.occupancy_band);
    const std::string occ_path = out_path(opts, "occupancy.occ");
    dforge::write_occupancy_file(occ_path, occupancy);
    recorder.output(occ_path);

    recorder.finalize();
    if (opts.format == "text") {
        std::cout << frames.size() << " frames fused, " << mesh.vertices.size() << " vertices\n";
    }
    return kExitOk;
}

std::vector<dforge::FlowField> load_flow_dir(const std::string& dir, ManifestRecorder& recorder) {
    std::vector<dforge::FlowField> flows;
    for (const std::string& path : list_files(dir, {".flo"})) {
        recorder.input(path);
        flows.push_back(dforge::read_flo_file(path));
    }
    for (const std::string& path : list_files(dir, {".f32"})) {
        const std::string sidecar =
            (fs::path(path).parent_path() / (fs::path(path).stem().string() + ".json")).string();
        if (fs::is_regular_file(sidecar)) {
            recorder.input(path);
            recorder.input(sidecar);
            flows.push_back(dforge::read_raw_flow(path, sidecar));
        }
    }
    return flows;
}

std::vector<dforge::MaskFrame> load_mask_dir(const std::string& dir, ManifestRecorder& recorder) {
    std::vector<dforge::MaskFrame> masks;
    for (const std::string& path : list_files(dir, {".png"})) {
        recorder.input(path);
        const dforge::GrayImage8 img = dforge::read_png_gray8(path);
        dforge::MaskFrame mask;
        mask.width = img.width;
        mask.height = img.height;
        mask.frame_index = static_cast<int>(masks.size());
        mask.mask.resize(img.pixels.size());
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            mask.mask[i] = img.pixels[i] > 0 ? 1 : 0;
        }
        masks.push_back(std::move(mask));
    }
    return masks;
}

int cmd_flowstats(const GlobalOptions& opts, const std::vector<std::string>& argv,
                  const std::string& flow_dir, const std::string& mask_dir) {
    const dforge::PipelineConfig config = load_config(opts);
    ManifestRecorder recorder("flowstats", argv, config, opts);

    const auto flows = load_flow_dir(flow_dir, recorder);
    if (flows.empty()) {
        throw dforge::EmptySequence("no flow files in " + flow_dir);
    }

    std::vector<dforge::FlowStats> stats;
    ordered_json frames = ordered_json::array();
    for (const dforge::FlowField& flow : flows) {
        const dforge::FlowStats s =
            dforge::flow_stats(flow, config.flow.eps_static, config.flow.eps_dyn);
        stats.push_back(s);
        ordered_json j;
        j["frame_index"] = flow.frame_index;
        j["mean_magnitude"] = s.mean_magnitude;
        j["static_fraction"] = s.static_fraction;
        j["dynamic_fraction"] = s.dynamic_fraction;
        j["uniformity"] = s.uniformity;
        frames.push_back(j);
    }
    const dforge::TemporalVerdict verdict = dforge::is_temporal_variant(stats, config.flow.policy);

    ordered_json j;
    j["frames"] = frames;
    j["accepted"] = verdict.accepted;
    j["score"] = verdict.score;
    j["median_static"] = verdict.median_static;
    j["median_dynamic"] = verdict.median_dynamic;
    j["median_uniformity"] = verdict.median_uniformity;

    if (!mask_dir.empty()) {
        const auto masks = load_mask_dir(mask_dir, recorder);
        const dforge::ReferenceSelection selection =
            dforge::select_reference_frame(masks, flows, config.flow.ref_weights);
        j["reference_frame"] = selection.index;
        j["reference_all_zero"] = selection.all_zero;
    }

    const std::string path = out_path(opts, "flowstats.json");
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    out.close();
    recorder.output(path);
    recorder.finalize();

    if (opts.format == "text") {
        std::cout << (verdict.accepted ? "accepted" : "rejected") << " score " << verdict.score
                  << "\n";
    }
    return kExitOk;
}

int cmd_pickref(const GlobalOptions& opts, const std::vector<std::string>& argv,
                const std::string& flow_dir, const std::string& mask_dir) {
    const dforge::PipelineConfig config = load_config(opts);
    ManifestRecorder recorder("pickref", argv, config, opts);

    const auto flows = load_flow_dir(flow_dir, recorder);
    const auto masks = load_mask_dir(mask_dir, recorder);

    const dforge::ReferenceSelection selection =
        dforge::select_reference_frame(masks, flows, config.flow.ref_weights);

    ordered_json j;
    j["index"] = selection.index;
    j["all_zero"] = selection.all_zero;
    const std::string path = out_path(opts, "reference.json");
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    out.close();
    recorder.output(path);
    recorder.finalize();

    if (opts.format == "text") {
        std::cout << "reference frame " << selection.index
                  << (selection.all_zero ? " (all scores zero)" : "") << "\n";
    }
    return kExitOk;
}

int cmd_simulate(const GlobalOptions& opts, const std::vector<std::string>& argv) {
    const dforge::PipelineConfig config = load_config(opts);
    ManifestRecorder recorder("simulate", argv, config, opts);
    const dforge::SamplerConfig& sc = config.sampler;

    const dforge::NoiseSchedule schedule =
        dforge::make_schedule(sc.train_timesteps, sc.beta_start, sc.beta_end, sc.spacing);
    const std::vector<int> timesteps = dforge::default_timesteps(sc.train_timesteps, sc.steps);
    const dforge::DirectorSchedule directors =
        dforge::switch_once_schedule(sc.steps, sc.switch_step);

    const dforge::LatentShape shape{sc.frames, sc.channels, sc.height, sc.width};
    dforge::CounterRng rng(config.rng_seed);
    const dforge::LatentVideo z0 = dforge::LatentVideo::seeded_normal(shape, rng);
    const dforge::LatentVideo eps = dforge::LatentVideo::seeded_normal(shape, rng);
    const dforge::LatentVideo init = dforge::q_sample(z0, timesteps.front(), eps, schedule);

    std::unique_ptr<dforge::DenoiserInterface> denoiser;
    if (sc.mock == "oracle") {
        denoiser = std::make_unique<dforge::TargetOracleDenoiser>(z0, schedule);
    } else if (sc.mock == "gaussian") {
        denoiser = std::make_unique<dforge::AnalyticGaussianDenoiser>(1.0, 0.2, schedule);
    } else {
        denoiser = std::make_unique<dforge::DirectorSensitiveDenoiser>();
    }

    dforge::ConditionPack cond;
    cond.guidance_scale = sc.guidance_scale;
    const dforge::LatentVideo sample_out =
        dforge::sample(*denoiser, schedule, directors, cond, init, timesteps);

    const std::string clean_path = out_path(opts, "clean.latv");
    dforge::write_latent_file(clean_path, z0);
    recorder.output(clean_path);
    const std::string init_path = out_path(opts, "init.latv");
    dforge::write_latent_file(init_path, init);
    recorder.output(init_path);
    const std::string sample_path = out_path(opts, "sample.latv");
    dforge::write_latent_file(sample_path, sample_out);
    recorder.output(sample_path);

    if (sc.share_reference) {
        // Reference-latent sharing: denoise once under the spatial
        // director recording every state, then re-run from the shared
        // init with early-step blending against that trajectory.
        const dforge::DirectorSchedule all_s = dforge::switch_once_schedule(sc.steps, sc.steps);
        const std::vector<dforge::LatentVideo> refs =
            dforge::sample_trajectory(*denoiser, schedule, all_s, cond, init, timesteps);
        const dforge::LatentVideo shared = dforge::sample_with_reference(
            *denoiser, schedule, cond, refs, sc.blend_lambda, sc.blend_window, timesteps);
        const std::string shared_path = out_path(opts, "shared.latv");
        dforge::write_latent_file(shared_path, shared);
        recorder.output(shared_path);
    }

    if (sc.refine_t0 > 0) {
        dforge::RefinementConfig refine;
        refine.t0 = sc.refine_t0;
        refine.repeats = sc.refine_repeats;
        refine.mid_timestep = sc.refine_mid;
        const dforge::LatentVideo refined = dforge::refine_appearance(
            sample_out, *denoiser, schedule, refine, config.rng_seed + 1, cond);
        const std::string refined_path = out_path(opts, "refined.latv");
        dforge::write_latent_file(refined_path, refined);
        recorder.output(refined_path);
    }

    // Everything needed to replay the run bitwise.
    ordered_json run;
    run["seed"] = config.rng_seed;
    run["mock"] = sc.mock;
    run["train_timesteps"] = sc.train_timesteps;
    run["beta_start"] = sc.beta_start;
    run["beta_end"] = sc.beta_end;
    run["spacing"] = sc.spacing == dforge::Spacing::kLinear ? "linear" : "scaled_linear";
    run["steps"] = sc.steps;
    run["switch_step"] = sc.switch_step;
    run["guidance_scale"] = sc.guidance_scale;
    run["blend_lambda"] = sc.blend_lambda;
    run["blend_window"] = sc.blend_window;
    run["timesteps"] = timesteps;
    ordered_json director_names = ordered_json::array();
    for (dforge::Director d : directors.assignments) {
        director_names.push_back(dforge::to_string(d));
    }
    run["directors"] = director_names;
    run["shape"] = {shape.frames, shape.channels, shape.height, shape.width};
    const std::string record_path = out_path(opts, "sampler_run.json");
    std::ofstream record(record_path);
    record << run.dump(2) << "\n";
    record.close();
    recorder.output(record_path);

    recorder.finalize();
    if (opts.format == "text") {
        std::cout << "sampled " << shape.frames << "x" << shape.channels << "x" << shape.height
                  << "x" << shape.width << " with mock " << sc.mock << "\n";
    }
    return kExitOk;
}

dforge::ConfidenceMap load_confidence(const std::string& path, int width, int height) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") {
        return dforge::confidence_from_gray8(dforge::read_png_gray8(path));
    }
    return dforge::read_confidence_f32(path, width, height);
}

int cmd_loss(const GlobalOptions& opts, const std::vector<std::string>& argv,
             const std::string& pred_path, const std::string& gt_path,
             const std::string& conf_path, bool dynamic,
             const std::vector<double>& weights_flag) {
    dforge::PipelineConfig config = load_config(opts);
    if (!weights_flag.empty()) {
        if (weights_flag.size() != 4) {
            throw dforge::InvalidRange("--weights needs four values: l1 ssim lpips tv");
        }
        config.loss.weights.l1 = weights_flag[0];
        config.loss.weights.ssim = weights_flag[1];
        config.loss.weights.lpips = weights_flag[2];
        config.loss.weights.tv = weights_flag[3];
    }
    ManifestRecorder recorder("loss", argv, config, opts);
    recorder.input(pred_path);
    recorder.input(gt_path);

    const dforge::ImageBuffer pred = dforge::to_image_buffer(dforge::read_png_rgb8(pred_path));
    const dforge::ImageBuffer gt = dforge::to_image_buffer(dforge::read_png_rgb8(gt_path));

    dforge::LossBreakdown breakdown;
    if (dynamic) {
        breakdown = dforge::dynamic_scene_loss(
            pred, gt, weights_flag.empty() ? dforge::LossWeights::dynamic_defaults()
                                           : config.loss.weights);
    } else {
        dforge::ConfidenceMap conf;
        if (!conf_path.empty()) {
            recorder.input(conf_path);
            conf = load_confidence(conf_path, pred.width, pred.height);
        } else {
            conf.width = pred.width;
            conf.height = pred.height;
            conf.conf.assign(static_cast<std::size_t>(pred.width) * pred.height, 1.0);
        }
        breakdown = dforge::confidence_weighted_loss(pred, gt, conf, config.loss.weights);
    }

    ordered_json j;
    j["total"] = breakdown.total;
    for (const auto& [term, value] : breakdown.per_term) {
        j["terms"][term] = value;
    }
    const std::string path = out_path(opts, "loss.json");
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    out.close();
    recorder.output(path);
    recorder.finalize();

    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int run_command(const std::vector<std::string>& argv);

int cmd_replay(const std::string& manifest_path) {
    const dforge::RunManifest manifest = dforge::RunManifest::load(manifest_path);
    const int code = run_command(manifest.argv);
    if (code != kExitOk && code != kExitPartial && code != kExitInfeasible) {
        std::cerr << "replayed command failed with exit " << code << "\n";
        return code;
    }
    bool all_match = true;
    for (const auto& [path, digest] : manifest.output_digests) {
        const std::string now = dforge::file_digest_hex(path);
        if (now != digest) {
            std::cerr << "digest mismatch for " << path << ": " << now << " != " << digest << "\n";
            all_match = false;
        }
    }
    if (all_match) {
        std::cout << "replay OK: " << manifest.output_digests.size() << " outputs identical\n";
        return kExitOk;
    }
    return kExitPartial;
}

int run_command(const std::vector<std::string>& argv) {
    CLI::App app{"multi-view curation, trajectory planning and diffusion sampler toolkit"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "sectioned key=value config file");
    std::uint64_t seed_flag = 0;
    auto* seed_opt = app.add_option("--seed", seed_flag, "rng seed (overrides config)");
    app.add_option("--out", opts.out_dir, "output directory");
    app.add_option("--format", opts.format, "json or text")->check(CLI::IsMember({"json", "text"}));

    auto* analyze = app.add_subcommand("analyze", "principal frame per scene");
    std::string analyze_input;
    bool analyze_colmap = false;
    std::string analyze_scene_id;
    analyze->add_option("manifest", analyze_input, "pose manifest (JSONL) or COLMAP dir")
        ->required();
    analyze->add_flag("--colmap", analyze_colmap, "input is a COLMAP text model directory");
    analyze->add_option("--scene-id", analyze_scene_id, "scene id for COLMAP input");

    auto* filter = app.add_subcommand("filter", "rank scenes for curation");
    std::string filter_input;
    bool filter_colmap = false;
    std::string filter_scene_id;
    filter->add_option("manifest", filter_input, "pose manifest (JSONL) or COLMAP dir")->required();
    filter->add_flag("--colmap", filter_colmap, "input is a COLMAP text model directory");
    filter->add_option("--scene-id", filter_scene_id, "scene id for COLMAP input");

    auto* plan = app.add_subcommand("plan", "synthesize a camera trajectory");
    std::string plan_spec;
    std::string plan_start;
    std::string plan_occupancy;
    int plan_frames = dforge::kBaseVideoFrames;
    std::vector<double> plan_orbit_center;
    double plan_orbit_radius = 0.0;
    std::string plan_resample_from;
    int plan_resample_n = dforge::kLongVideoFrames;
    plan->add_option("spec", plan_spec,
                     "comma-separated primitives, e.g. trans_x_pos:1.0,orbit:3.14");
    plan->add_option("--start", plan_start, "JSON pose file for the first frame");
    plan->add_option("--frames", plan_frames, "frame count (frames=N in spec wins)");
    plan->add_option("--occupancy", plan_occupancy, "occupancy grid to check feasibility against");
    plan->add_option("--orbit-center", plan_orbit_center, "orbit center x y z")->expected(3);
    plan->add_option("--orbit-radius", plan_orbit_radius, "orbit radius");
    plan->add_option("--resample-from", plan_resample_from, "trajectory file to resample");
    plan->add_option("--resample-frames", plan_resample_n, "output frame count for resampling");

    auto* fuse = app.add_subcommand("fuse", "fuse depth frames into a TSDF volume");
    std::string fuse_dir;
    fuse->add_option("depth_dir", fuse_dir, "directory of depth frames + JSON sidecars")
        ->required();

    auto* flowstats = app.add_subcommand("flowstats", "temporal-variance verdict for a flow dir");
    std::string flow_dir;
    std::string flow_mask_dir;
    flowstats->add_option("flow_dir", flow_dir, "directory of .flo / .f32 flow files")->required();
    flowstats->add_option("--masks", flow_mask_dir,
                          "optional mask PNG directory; adds the reference-frame choice");

    auto* pickref = app.add_subcommand("pickref", "choose the reference frame");
    std::string pick_flow_dir;
    std::string pick_mask_dir;
    pickref->add_option("flow_dir", pick_flow_dir, "directory of flow files")->required();
    pickref->add_option("mask_dir", pick_mask_dir, "directory of mask PNGs")->required();

    app.add_subcommand("simulate", "run the mock-denoiser sampling loop");

    auto* loss = app.add_subcommand("loss", "evaluate reconstruction losses on two images");
    std::string loss_pred, loss_gt, loss_conf;
    bool loss_dynamic = false;
    std::vector<double> loss_weights;
    loss->add_option("pred", loss_pred, "predicted image (PNG)")->required();
    loss->add_option("gt", loss_gt, "ground-truth image (PNG)")->required();
    loss->add_option("--confidence", loss_conf, "confidence map (gray PNG or raw f32)");
    loss->add_flag("--dynamic", loss_dynamic, "use the dynamic-scene objective");
    loss->add_option("--weights", loss_weights, "term weights: l1 ssim lpips tv")->expected(4);

    auto* replay = app.add_subcommand("replay", "re-run a manifest and verify digests");
    std::string replay_manifest;
    replay->add_option("manifest", replay_manifest, "run_manifest.json to replay")->required();

    // Global flags may appear after the subcommand.
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();
    }

    std::vector<std::string> cli_args(argv.rbegin(), argv.rend());
    try {
        app.parse(cli_args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInvalid;
    }
    if (!seed_opt->empty()) {
        opts.seed = seed_flag;
    }

    try {
        if (app.got_subcommand("analyze")) {
            return cmd_analyze(opts, argv, analyze_input, analyze_colmap, analyze_scene_id);
        }
        if (app.got_subcommand("filter")) {
            return cmd_filter(opts, argv, filter_input, filter_colmap, filter_scene_id);
        }
        if (app.got_subcommand("plan")) {
            return cmd_plan(opts, argv, plan_spec, plan_start, plan_occupancy, plan_frames,
                            plan_orbit_center, plan_orbit_radius, plan_resample_from,
                            plan_resample_n);
        }
        if (app.got_subcommand("fuse")) {
            return cmd_fuse(opts, argv, fuse_dir);
        }
        if (app.got_subcommand("flowstats")) {
            return cmd_flowstats(opts, argv, flow_dir, flow_mask_dir);
        }
        if (app.got_subcommand("pickref")) {
            return cmd_pickref(opts, argv, pick_flow_dir, pick_mask_dir);
        }
        if (app.got_subcommand("simulate")) {
            return cmd_simulate(opts, argv);
        }
        if (app.got_subcommand("loss")) {
            return cmd_loss(opts, argv, loss_pred, loss_gt, loss_conf, loss_dynamic, loss_weights);
        }
        if (app.got_subcommand("replay")) {
            return cmd_replay(replay_manifest);
        }
    } catch (const dforge::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run_command(args);
}
