#pragma once

#include "dforge/constants.hpp"
#include "dforge/flow.hpp"
#include "dforge/geometry.hpp"
#include "dforge/loss.hpp"
#include "dforge/schedule.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dforge {

struct TsdfConfig {
    double voxel_size = 0.02;
    int grid_dim = 64;
    double origin_x = 0.0, origin_y = 0.0, origin_z = 0.0;
    double truncation = 0.0; // 0 = 4 voxels
    double max_weight = 64.0;
    double occupancy_band = 0.0;
};

struct FlowConfig {
    double eps_static = 0.5;
    double eps_dyn = 1.0;
    TemporalVariantPolicy policy;
    ReferenceWeights ref_weights;
};

struct SamplerConfig {
    int train_timesteps = kDefaultTrainTimesteps;
    double beta_start = kDefaultBetaStart;
    double beta_end = kDefaultBetaEnd;
    Spacing spacing = Spacing::kLinear;
    int steps = kDefaultInferenceSteps;
    int switch_step = kDefaultSwitchStep;
    double guidance_scale = kDefaultGuidanceScale;
    double blend_lambda = kDefaultBlendLambda;
    int blend_window = kDefaultBlendWindow;
    int frames = 4, channels = 2, height = 4, width = 4;
    std::string mock = "oracle"; // oracle | gaussian | director_sensitive
    bool share_reference = false;
    int refine_t0 = 0;
    int refine_repeats = 1;
    int refine_mid = 0;
};

struct LossConfig {
    LossWeights weights = LossWeights::confidence_defaults();
    int ssim_window = 11;
    double ssim_sigma = 1.5;
};

struct PlanConfig {
    double margin = 0.0;
};

// All module policy knobs, parsed from a sectioned key=value file.
// Parsing is total: an unknown section or key fails with its name.
struct PipelineConfig {
    std::uint64_t rng_seed = 0;
    int threads = 0; // 0 = hardware default
    FilterPolicy filter;
    TsdfConfig tsdf;
    FlowConfig flow;
    SamplerConfig sampler;
    LossConfig loss;
    PlanConfig plan;

    static PipelineConfig from_file(const std::string& path);
    static PipelineConfig from_string(const std::string& text, const std::string& origin = "<config>");

    // Canonical serialization of every knob; hashing it identifies a run's
    // configuration.
    std::string canonical_text() const;
    std::string config_hash() const;
};

// Record of one CLI invocation; replaying the command must reproduce the
// recorded output digests byte for byte.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::string config_hash;
    std::map<std::string, std::string> input_digests;
    std::map<std::string, std::string> output_digests;
    double wall_time_ms = 0.0;

    nlohmann::ordered_json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static RunManifest load(const std::string& path);
};

} // namespace dforge
